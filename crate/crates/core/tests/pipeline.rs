mod common;

use octic_core::basis::{basis_discriminant, initial_basis, known_basis};
use octic_core::index_form::{extract_q_factors_with, multiplier_table, verify_product_identity};
use octic_core::polyring::IntPolynomial;
use octic_core::report::{emit, parse, prove, prove_with, ProofVerdict, ProveConfig};
use octic_core::{CaseTag, Error};

fn quick() -> ProveConfig {
    ProveConfig { enrichment: false, samples: 4, replay_samples: 4, ..ProveConfig::default() }
}

#[test]
fn both_cases_are_proved() {
    for case in CaseTag::all() {
        let report = prove(case);
        assert_eq!(report.verdict, ProofVerdict::Proved, "{}", report.summary());
        let basis = report.basis.as_ref().unwrap();
        assert_eq!(basis.enrichment_matches_closed_form, Some(true));
        assert!(report.replay.as_ref().unwrap().accepted);
        assert_eq!(report.oracle.len(), 2);
        assert!(report.oracle.iter().all(|o| o.checked > 0));
    }
}

#[test]
fn report_round_trips_through_a_file() {
    let report = prove_with(CaseTag::CaseI, &quick());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    emit(&report, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(parse(&text).unwrap(), report);
    assert!(text.contains("\"version\": \"1.0.0\""));
    let bumped = text.replacen("\"version\": \"1.0.0\"", "\"version\": \"one\"", 1);
    assert!(matches!(parse(&bumped), Err(Error::Parse(_))));
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| prove_with(CaseTag::CaseI, &quick())).without_timings()
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn corrupted_multipliers_fail_at_extraction() {
    let mut texts: Vec<String> = multiplier_table(CaseTag::CaseI).iter().map(|d| d.to_string()).collect();
    texts[2] = "4".into();
    let config = ProveConfig { multipliers: Some(texts), ..quick() };
    let report = prove_with(CaseTag::CaseI, &config);
    match &report.verdict {
        ProofVerdict::Failed { stage, error } => {
            assert_eq!(stage, "extract_q_factors");
            assert!(error.contains("not divisible"), "{error}");
        }
        other => panic!("expected failure, got {other}"),
    }
    assert_eq!(report.verdict.exit_code(), 3);
}

#[test]
fn wrong_table_is_caught_even_when_it_divides() {
    // swapping two entries keeps every division exact for Case II's units but breaks the identity
    let s = common::s_factors(CaseTag::CaseII);
    let mut table = multiplier_table(CaseTag::CaseII);
    table[3] = IntPolynomial::one();
    let q = extract_q_factors_with(s, table).unwrap();
    assert!(!verify_product_identity(s, &q).unwrap().passed);
}

#[test]
fn incomplete_stage_lists_are_inconclusive() {
    let mut spec = octic_core::sieve::case1_spec();
    spec.stages.truncate(1);
    spec.max_refinements = 0;
    let config = ProveConfig { cascade: Some(spec), ..quick() };
    let report = prove_with(CaseTag::CaseI, &config);
    assert!(matches!(report.verdict, ProofVerdict::Inconclusive { .. }));
    assert_eq!(report.verdict.exit_code(), 2);
}

#[test]
fn discriminant_chain() {
    for case in CaseTag::all() {
        let initial = basis_discriminant(&initial_basis(case)).unwrap();
        let known = basis_discriminant(&known_basis(case)).unwrap();
        assert_eq!(initial.exact_div(&known).unwrap().as_constant().unwrap(), match case {
            CaseTag::CaseI => 64.into(),
            CaseTag::CaseII => 256.into(),
        });
    }
}
