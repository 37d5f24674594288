//! The end-to-end proof run and its serializable report.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::basis::{
    basis_discriminant, enrich_to_fixed_point, initial_basis, known_basis, same_lattice, subfield_discriminant,
    trace_form_discriminant, two_power_over_m6, EnrichmentConfig, EnrichmentRound,
};
use crate::error::{Error, Result};
use crate::field::CaseTag;
use crate::index_form::{
    build_s_factors, extract_q_factors_with, factor_stats, multiplier_table, verify_product_identity, FactorStats,
    ProductIdentityReport,
};
use crate::oracle::crosscheck;
use crate::polyring::IntPolynomial;
use crate::sieve::{check_certificate, default_spec, run_cascade, CascadeSpec, SieveCertificate};

pub const REPORT_VERSION: &str = "1.0.0";

/// Knobs for [`prove_with`]. Every field has a default that reproduces the
/// published argument.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProveConfig {
    /// Rebuild the integral basis from the power basis before using the
    /// closed form.
    pub enrichment: bool,
    pub enrichment_config: EnrichmentConfig,
    /// Values of `m` for the fixed-`m` comparison; empty means the case default.
    pub crosscheck_m: Vec<i64>,
    pub samples: usize,
    pub bound: i64,
    pub seed: u64,
    /// Random points per leaf when replaying the certificate.
    pub replay_samples: usize,
    /// Replaces the default stage list.
    pub cascade: Option<CascadeSpec>,
    /// Replaces the multiplier table, as polynomial text in `n`.
    pub multipliers: Option<Vec<String>>,
}

impl Default for ProveConfig {
    fn default() -> Self {
        ProveConfig {
            enrichment: true,
            enrichment_config: EnrichmentConfig::default(),
            crosscheck_m: Vec::new(),
            samples: 20,
            bound: 5,
            seed: 1,
            replay_samples: 20,
            cascade: None,
            multipliers: None,
        }
    }
}

impl ProveConfig {
    pub fn crosscheck_values(&self, case: CaseTag) -> Vec<i64> {
        if !self.crosscheck_m.is_empty() {
            return self.crosscheck_m.clone();
        }
        match case {
            CaseTag::CaseI => vec![2, 6],
            CaseTag::CaseII => vec![3, 7],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProofVerdict {
    Proved,
    Inconclusive { reason: String },
    Failed { stage: String, error: String },
}

impl ProofVerdict {
    /// Process exit code: 0 proved, 2 inconclusive, 3 a failed identity.
    pub fn exit_code(&self) -> i32 {
        match self {
            ProofVerdict::Proved => 0,
            ProofVerdict::Inconclusive { .. } => 2,
            ProofVerdict::Failed { .. } => 3,
        }
    }
}

impl fmt::Display for ProofVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProofVerdict::Proved => f.write_str("PROVED"),
            ProofVerdict::Inconclusive { reason } => write!(f, "INCONCLUSIVE ({reason})"),
            ProofVerdict::Failed { stage, error } => write!(f, "FAILED at {stage}: {error}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisSection {
    pub elements: Vec<String>,
    pub discriminant: String,
    pub expected_discriminant: String,
    pub trace_form_agrees: bool,
    pub subfield_discriminant: String,
    /// Rounds of the enrichment run, when it was requested.
    pub enrichment: Option<Vec<EnrichmentRound>>,
    pub enrichment_matches_closed_form: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorSection {
    pub s: Vec<FactorStats>,
    pub q: Vec<FactorStats>,
    pub multipliers: Vec<String>,
    pub product_identity: ProductIdentityReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplaySection {
    pub accepted: bool,
    pub leaves: usize,
    pub evaluations: usize,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleSection {
    pub m: i64,
    pub seed: u64,
    pub checked: usize,
    pub skipped_non_primitive: usize,
    pub factor_checks: usize,
    pub min_index: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub stage: String,
    pub micros: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofReport {
    pub version: String,
    pub case: CaseTag,
    pub verdict: ProofVerdict,
    pub basis: Option<BasisSection>,
    pub factors: Option<FactorSection>,
    pub certificate: Option<SieveCertificate>,
    pub replay: Option<ReplaySection>,
    pub oracle: Vec<OracleSection>,
    pub timings: Vec<Timing>,
}

impl ProofReport {
    fn new(case: CaseTag) -> Self {
        ProofReport {
            version: REPORT_VERSION.to_string(),
            case,
            verdict: ProofVerdict::Proved,
            basis: None,
            factors: None,
            certificate: None,
            replay: None,
            oracle: Vec::new(),
            timings: Vec::new(),
        }
    }

    pub fn is_proved(&self) -> bool {
        self.verdict == ProofVerdict::Proved
    }

    /// The report with timings cleared, for run-to-run comparison.
    pub fn without_timings(&self) -> Self {
        ProofReport { timings: Vec::new(), ..self.clone() }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn summary(&self) -> String {
        let mut out = format!("{}: {}\n", self.case, self.verdict);
        if let Some(b) = &self.basis {
            let shape = b
                .discriminant
                .parse::<IntPolynomial>()
                .ok()
                .and_then(|d| two_power_over_m6(&d, self.case));
            match shape {
                Some(h) => out.push_str(&format!("  D_K = 2^{h}*m^6\n")),
                None => out.push_str(&format!("  D_K = {}\n", b.discriminant)),
            }
        }
        if let Some(f) = &self.factors {
            let terms: Vec<String> = f.q.iter().map(|s| format!("{}:{}", s.name, s.terms)).collect();
            out.push_str(&format!("  factors {} (product identity {})\n", terms.join(" "), f.product_identity.passed));
        }
        if let Some(c) = &self.certificate {
            out.push_str(&format!(
                "  sieve: {} roots, {} leaves, {} killed ({})\n",
                c.summary.root_branches, c.summary.leaves, c.summary.killed, c.summary.verdict
            ));
        }
        if let Some(r) = &self.replay {
            out.push_str(&format!("  replay accepted: {}\n", r.accepted));
        }
        for o in &self.oracle {
            out.push_str(&format!(
                "  m = {}: {} samples agree, min index {}\n",
                o.m,
                o.checked,
                o.min_index.as_deref().unwrap_or("-")
            ));
        }
        out
    }
}

/// Writes the report as JSON.
pub fn emit(report: &ProofReport, path: &Path) -> Result<()> {
    std::fs::write(path, report.to_json()? + "\n")?;
    Ok(())
}

pub fn parse(text: &str) -> Result<ProofReport> {
    let report: ProofReport = serde_json::from_str(text)?;
    let semver = report.version.split('.').count() == 3
        && report.version.split('.').all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_digit()));
    if !semver {
        return Err(Error::Parse(format!("report version {:?} is not semver", report.version)));
    }
    Ok(report)
}

pub fn prove(case: CaseTag) -> ProofReport {
    prove_with(case, &ProveConfig::default())
}

struct Run {
    report: ProofReport,
}

impl Run {
    fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> std::result::Result<T, ()> {
        let start = Instant::now();
        let out = f();
        self.report.timings.push(Timing { stage: name.to_string(), micros: start.elapsed().as_micros() as u64 });
        log::info!("{name}: {:.2?}", start.elapsed());
        out.map_err(|e| {
            self.fail(name, e.to_string());
        })
    }

    fn fail(&mut self, stage: &str, error: String) {
        log::error!("{stage} failed: {error}");
        self.report.verdict = ProofVerdict::Failed { stage: stage.to_string(), error };
    }
}

pub fn prove_with(case: CaseTag, config: &ProveConfig) -> ProofReport {
    let mut run = Run { report: ProofReport::new(case) };
    let _ = prove_stages(case, config, &mut run);
    run.report
}

fn prove_stages(case: CaseTag, config: &ProveConfig, run: &mut Run) -> std::result::Result<(), ()> {
    let basis = run.stage("basis", || {
        let known = known_basis(case);
        let disc = basis_discriminant(&known)?;
        let expected = match case {
            CaseTag::CaseI => IntPolynomial::constant(1 << 18),
            CaseTag::CaseII => IntPolynomial::constant(1 << 16),
        } * case.m_poly().pow(6);
        let trace_form_agrees = trace_form_discriminant(&known)? == disc;
        let (enrichment, matches) = if config.enrichment {
            let trace = enrich_to_fixed_point(initial_basis(case), &config.enrichment_config)?;
            let matches = trace.final_discriminant == disc && same_lattice(&trace.final_basis, &known)?;
            (Some(trace.rounds), Some(matches))
        } else {
            (None, None)
        };
        Ok(BasisSection {
            elements: known.render(),
            discriminant: disc.to_string(),
            expected_discriminant: expected.to_string(),
            trace_form_agrees,
            subfield_discriminant: subfield_discriminant(case)?.to_string(),
            enrichment,
            enrichment_matches_closed_form: matches,
        })
    })?;
    let basis_ok = basis.discriminant == basis.expected_discriminant
        && basis.trace_form_agrees
        && basis.enrichment_matches_closed_form != Some(false);
    run.report.basis = Some(basis);
    if !basis_ok {
        run.fail("basis", "discriminant identities do not hold".into());
        return Err(());
    }

    let s = run.stage("build_s_factors", || build_s_factors(case))?;
    let multipliers = match &config.multipliers {
        None => multiplier_table(case),
        Some(texts) => run.stage("multipliers", || {
            let polys = texts.iter().map(|t| t.parse::<IntPolynomial>()).collect::<Result<Vec<_>>>()?;
            polys.try_into().map_err(|_| Error::Parse("expected six multipliers".into()))
        })?,
    };
    let q = run.stage("extract_q_factors", || extract_q_factors_with(&s, multipliers))?;
    let identity = run.stage("verify_product_identity", || verify_product_identity(&s, &q))?;
    let identity_ok = identity.passed;
    run.report.factors = Some(FactorSection {
        s: factor_stats("S", &s.s),
        q: factor_stats("Q", &q.q),
        multipliers: q.multipliers.iter().map(|d| d.to_string()).collect(),
        product_identity: identity,
    });
    if !identity_ok {
        run.fail("verify_product_identity", "multiplier product is not sqrt(|D_K|)".into());
        return Err(());
    }

    let spec = config.cascade.clone().unwrap_or_else(|| default_spec(case));
    let cert = run.stage("sieve", || run_cascade(&q, &spec))?;
    let complete = cert.is_complete();
    let replay = if complete {
        let outcome = run.stage("replay", || Ok(check_certificate(&cert, &q, config.replay_samples, config.seed)))?;
        match outcome {
            Ok(r) => ReplaySection { accepted: true, leaves: r.leaves, evaluations: r.evaluations, error: None },
            Err(e) => ReplaySection { accepted: false, leaves: 0, evaluations: 0, error: Some(e.to_string()) },
        }
    } else {
        ReplaySection { accepted: false, leaves: 0, evaluations: 0, error: Some("certificate incomplete".into()) }
    };
    let summary = cert.summary.clone();
    run.report.certificate = Some(cert);
    let replay_ok = replay.accepted;
    run.report.replay = Some(replay);

    for m in config.crosscheck_values(case) {
        let r = run.stage(&format!("crosscheck m={m}"), || {
            crosscheck(&q, m, config.samples, config.bound, config.seed)
        })?;
        let min_ok = r.min_index.as_ref().is_none_or(|v| v != "0" && v != "1");
        run.report.oracle.push(OracleSection {
            m,
            seed: r.seed,
            checked: r.checked,
            skipped_non_primitive: r.skipped_non_primitive,
            factor_checks: r.factor_checks,
            min_index: r.min_index,
        });
        if !min_ok {
            run.fail(&format!("crosscheck m={m}"), "sampled element of index 1".into());
            return Err(());
        }
    }

    if !complete {
        run.report.verdict = ProofVerdict::Inconclusive {
            reason: format!("{} leaves alive, {} inconclusive", summary.survivors, summary.inconclusive),
        };
    } else if !replay_ok {
        run.fail("replay", "independent checker rejected the certificate".into());
    }
    Ok(())
}
