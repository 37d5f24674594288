//! `octic`: build bases, expand the index form and run the sieve for
//! `K = Q(i, m^(1/4))`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use octic_core::basis::{basis_discriminant, enrich_to_fixed_point, initial_basis, known_basis, two_power_over_m6};
use octic_core::index_form::{build_s_factors, extract_q_factors, factor_stats, verify_product_identity};
use octic_core::oracle::crosscheck;
use octic_core::report::{emit, prove_with, ProveConfig};
use octic_core::sieve::{check_certificate, default_spec, run_cascade, SieveCertificate};
use octic_core::{CaseTag, Error, Result};

const LOG_ENV: &str = "OCTIC_LOG";

#[derive(Parser)]
#[command(name = "octic", version, about = "Index forms and congruence sieves for Q(i, m^(1/4))")]
struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for sampling; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML file with proof settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CaseArg {
    /// Residue of m modulo 4.
    #[arg(long, value_parser = parse_case)]
    case: CaseTag,
    /// Write JSON output here.
    #[arg(long)]
    emit: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Integral basis and discriminant; `--enrich` rebuilds it from the power basis.
    Basis {
        #[command(flatten)]
        case: CaseArg,
        #[arg(long)]
        enrich: bool,
    },
    /// Term counts and degrees of the conjugate-difference products.
    Sfactors {
        #[command(flatten)]
        case: CaseArg,
    },
    /// The integer cofactors and the product identity.
    Qfactors {
        #[command(flatten)]
        case: CaseArg,
    },
    /// Run the congruence sieve and write its certificate.
    Sieve {
        #[command(flatten)]
        case: CaseArg,
    },
    /// Replay a certificate with the independent checker.
    Check {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Compare direct indices with the factored index form at a fixed m.
    Crosscheck {
        #[arg(long)]
        m: i64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 5)]
        bound: i64,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// The whole pipeline for one case.
    Prove {
        #[command(flatten)]
        case: CaseArg,
    },
}

fn parse_case(s: &str) -> std::result::Result<CaseTag, String> {
    let r: i64 = s.parse().map_err(|_| format!("expected 2 or 3, got {s:?}"))?;
    CaseTag::from_residue(r).ok_or_else(|| format!("expected 2 or 3, got {r}"))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn load_config(cli: &Cli) -> Result<ProveConfig> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        }
        None => ProveConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let config = load_config(cli)?;
    match &cli.command {
        Command::Basis { case, enrich } => {
            let tag = case.case;
            let basis = if *enrich {
                let trace = enrich_to_fixed_point(initial_basis(tag), &config.enrichment_config)?;
                for (r, round) in trace.rounds.iter().enumerate() {
                    match &round.replaced {
                        Some((lambda, l)) => println!("round {}: {lambda} replaces b{l}", r + 1),
                        None => println!("round {}: no candidate improves the basis", r + 1),
                    }
                }
                if let Some(path) = &case.emit {
                    write_json(path, &trace.rounds)?;
                }
                trace.final_basis
            } else {
                known_basis(tag)
            };
            for (l, e) in basis.render().iter().enumerate() {
                println!("b{} = {e}", l + 1);
            }
            let disc = basis_discriminant(&basis)?;
            match two_power_over_m6(&disc, case.case) {
                Some(h) => println!("D = 2^{h}*m^6 = {disc}"),
                None => println!("D = {disc}"),
            }
        }
        Command::Sfactors { case } => {
            let s = build_s_factors(case.case)?;
            let stats = factor_stats("S", &s.s);
            for st in &stats {
                println!("{}: {} terms, degree {}, degree in n {}", st.name, st.terms, st.total_degree, st.degree_in_n);
            }
            if let Some(path) = &case.emit {
                let polys: Vec<String> = s.s.iter().map(|p| p.to_string()).collect();
                write_json(path, &serde_json::json!({ "case": case.case, "stats": stats, "factors": polys }))?;
            }
        }
        Command::Qfactors { case } => {
            let s = build_s_factors(case.case)?;
            let q = extract_q_factors(&s)?;
            let identity = verify_product_identity(&s, &q)?;
            let stats = factor_stats("Q", &q.q);
            for (st, d) in stats.iter().zip(&q.multipliers) {
                println!("{}: {} terms, degree {}, multiplier {d}", st.name, st.terms, st.total_degree);
            }
            println!("product of multipliers = {} ({})", identity.multiplier_product, identity.passed);
            if let Some(path) = &case.emit {
                let polys: Vec<String> = q.q.iter().map(|p| p.to_string()).collect();
                write_json(
                    path,
                    &serde_json::json!({ "case": case.case, "stats": stats, "identity": identity, "factors": polys }),
                )?;
            }
            if !identity.passed {
                return Ok(ExitCode::from(3));
            }
        }
        Command::Sieve { case } => {
            let q = extract_q_factors(&build_s_factors(case.case)?)?;
            let spec = config.cascade.clone().unwrap_or_else(|| default_spec(case.case));
            let cert = run_cascade(&q, &spec)?;
            for st in &cert.stages {
                println!("stage {}: {} classes alive", st.name, st.survivors_after);
                for e in &st.expectations {
                    println!("  [{}] {}: {}", if e.met { "ok" } else { "differs" }, e.description, e.observed);
                }
            }
            let s = &cert.summary;
            println!("{} roots, {} leaves, {} killed: {}", s.root_branches, s.leaves, s.killed, s.verdict);
            if let Some(path) = &case.emit {
                std::fs::write(path, cert.to_json()? + "\n")?;
            }
            if !cert.is_complete() {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Check { cert, samples } => {
            let cert = SieveCertificate::from_json(&std::fs::read_to_string(cert)?)?;
            let case = CaseTag::from_residue(i64::from(cert.case))
                .ok_or_else(|| Error::CertificateRejected(format!("unknown case {}", cert.case)))?;
            let q = extract_q_factors(&build_s_factors(case)?)?;
            match check_certificate(&cert, &q, *samples, config.seed) {
                Ok(r) => println!("accepted: {} leaves, {} steps, {} evaluations", r.leaves, r.steps, r.evaluations),
                Err(e) => {
                    println!("rejected: {e}");
                    return Ok(ExitCode::from(1));
                }
            }
        }
        Command::Crosscheck { m, samples, bound, emit } => {
            let (case, _) = CaseTag::of_m(*m).ok_or(Error::InadmissibleParameter(*m))?;
            let q = extract_q_factors(&build_s_factors(case)?)?;
            let report = crosscheck(&q, *m, *samples, *bound, config.seed)?;
            print!("{}", report.table());
            println!("min index {}", report.min_index.as_deref().unwrap_or("-"));
            if let Some(path) = emit {
                write_json(path, &report)?;
            }
        }
        Command::Prove { case } => {
            let report = prove_with(case.case, &config);
            print!("{}", report.summary());
            if let Some(path) = &case.emit {
                emit(&report, path)?;
            }
            return Ok(ExitCode::from(report.verdict.exit_code() as u8));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot size the thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
