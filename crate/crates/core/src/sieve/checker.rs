//! Certificate replay using nothing but polynomial evaluation.
//!
//! The checker trusts none of the sieve machinery: it recomputes allowed
//! sets by brute force, checks that the leaf classes partition the integer
//! points, and evaluates the original factors at random points of each leaf.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{BranchRecord, BranchStatus, SieveCertificate, StepRecord, Verdict, CERTIFICATE_VERSION};
use crate::error::{Error, Result};
use crate::index_form::QFactorSet;
use crate::polyring::{Var, WrappingPolynomial};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub leaves: usize,
    pub steps: usize,
    pub evaluations: usize,
}

fn reject(msg: String) -> Error {
    Error::CertificateRejected(msg)
}

fn brute_force_allowed(coeffs: &[i64], k: u32) -> BTreeSet<u64> {
    let modulus = 1i128 << k;
    (0..1u32 << coeffs.len())
        .map(|signs| {
            let s: i128 = coeffs
                .iter()
                .enumerate()
                .map(|(l, &c)| if signs >> l & 1 == 1 { -(c as i128) } else { c as i128 })
                .sum();
            s.rem_euclid(modulus) as u64
        })
        .collect()
}

/// Congruence conditions of a leaf: variable -> (modulus, residue).
fn conditions(b: &BranchRecord) -> Result<BTreeMap<String, (i64, i64)>> {
    let mut out = BTreeMap::new();
    for (v, a) in &b.substitutions {
        if a.scale <= 0 || a.scale & (a.scale - 1) != 0 {
            return Err(reject(format!("scale {} of {v} is not a power of two", a.scale)));
        }
        out.insert(v.clone(), (a.scale, a.offset.rem_euclid(a.scale)));
    }
    for (v, &e) in &b.parities {
        match out.get(v) {
            Some(&(_, r)) if r % 2 == e as i64 => {}
            _ => return Err(reject(format!("parity of {v} disagrees with its substitution"))),
        }
    }
    Ok(out)
}

fn disjoint(a: &BTreeMap<String, (i64, i64)>, b: &BTreeMap<String, (i64, i64)>) -> bool {
    a.iter().any(|(v, &(sa, ra))| {
        b.get(v).is_some_and(|&(sb, rb)| {
            let s = sa.min(sb);
            ra.rem_euclid(s) != rb.rem_euclid(s)
        })
    })
}

fn check_partition(cert: &SieveCertificate) -> Result<()> {
    let conds: Vec<_> = cert.branches.iter().map(conditions).collect::<Result<_>>()?;
    let mut density = BigRational::zero();
    for c in &conds {
        let denom: BigInt = c.values().map(|&(s, _)| BigInt::from(s)).product();
        density += BigRational::new(BigInt::one(), denom);
    }
    if !density.is_one() {
        return Err(reject(format!("leaf classes have total density {density}, not 1")));
    }
    for i in 0..conds.len() {
        for j in i + 1..conds.len() {
            if !disjoint(&conds[i], &conds[j]) {
                return Err(reject(format!("leaves {i} and {j} overlap")));
            }
        }
    }
    Ok(())
}

fn check_step_shape(step: &StepRecord) -> Result<()> {
    if step.modulus_exp == 0 || step.modulus_exp > 63 || step.modulus != 1u64 << step.modulus_exp {
        return Err(reject(format!("bad modulus in step {}", step.combo_text)));
    }
    if step.combo.iter().any(|&(i, _)| !(1..=6).contains(&i)) {
        return Err(reject(format!("unknown factor in {}", step.combo_text)));
    }
    let coeffs: Vec<i64> = step.combo.iter().map(|&(_, c)| c).collect();
    let allowed = brute_force_allowed(&coeffs, step.modulus_exp);
    if allowed.iter().copied().collect::<Vec<_>>() != step.allowed {
        return Err(reject(format!("allowed set of {} is wrong", step.combo_text)));
    }
    match (step.verdict, step.residue) {
        (Verdict::Killed, Some(r)) if !allowed.contains(&r) => Ok(()),
        (Verdict::Survives, Some(r)) if allowed.contains(&r) => Ok(()),
        (Verdict::NonConstant, None) => Ok(()),
        _ => Err(reject(format!("verdict {} inconsistent with residue {:?}", step.verdict, step.residue))),
    }
}

fn check_leaf_structure(b: &BranchRecord) -> Result<()> {
    if b.status != BranchStatus::Killed {
        return Err(reject(format!("leaf of root {} is {:?}", b.root, b.status)));
    }
    let Some((last, rest)) = b.steps.split_last() else {
        return Err(reject(format!("leaf of root {} has no steps", b.root)));
    };
    if last.verdict != Verdict::Killed || rest.iter().any(|s| s.verdict == Verdict::Killed) {
        return Err(reject(format!("leaf of root {} is not killed by its last step", b.root)));
    }
    for s in &b.steps {
        check_step_shape(s)?;
    }
    Ok(())
}

fn slot_names() -> Vec<String> {
    (1..=8).map(|i| format!("x{i}")).chain(std::iter::once("n".to_string())).collect()
}

fn compile(q: &QFactorSet) -> Result<Vec<WrappingPolynomial>> {
    let slots: Vec<Var> = slot_names().iter().map(|s| Var::new(s)).collect();
    (1..=6).map(|i| q.get(i).compile_wrapping(&slots)).collect()
}

/// Random points of the leaf's class, evaluated against every constant step.
fn check_samples(q: &[WrappingPolynomial], b: &BranchRecord, samples: usize, seed: u64) -> Result<usize> {
    let conds = conditions(b)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = slot_names();
    let mut evaluations = 0;
    for _ in 0..samples {
        let point: Vec<i64> = names
            .iter()
            .map(|name| {
                let t: i64 = rng.gen_range(-1000..=1000);
                match conds.get(name) {
                    Some(&(s, r)) => s * t + r,
                    None => t,
                }
            })
            .collect();
        let values: Vec<u64> = q.iter().map(|p| p.eval(&point)).collect();
        for step in &b.steps {
            let Some(r) = step.residue else { continue };
            let sum = step
                .combo
                .iter()
                .fold(0u64, |acc, &(i, c)| acc.wrapping_add(values[i - 1].wrapping_mul(c as u64)));
            let got = sum & (step.modulus - 1);
            evaluations += 1;
            if got != r {
                return Err(reject(format!(
                    "{} mod {} is {got} at a point of root {}, certificate says {r}",
                    step.combo_text, step.modulus, b.root
                )));
            }
        }
    }
    Ok(evaluations)
}

/// Replays a single leaf: its structure, its recorded allowed sets and
/// verdicts, and `samples` random points of its class. Returns the number
/// of residue evaluations.
pub fn check_branch(b: &BranchRecord, q: &QFactorSet, samples: usize, seed: u64) -> Result<usize> {
    check_leaf_structure(b)?;
    check_samples(&compile(q)?, b, samples, seed)
}

/// Replays a certificate against the factors it claims to refute.
pub fn check_certificate(cert: &SieveCertificate, q: &QFactorSet, samples: usize, seed: u64) -> Result<CheckReport> {
    if cert.version != CERTIFICATE_VERSION {
        return Err(reject(format!("unsupported version {}", cert.version)));
    }
    if i64::from(cert.case) != q.case.residue() {
        return Err(reject(format!("certificate case {} does not match the factors", cert.case)));
    }
    if cert.branches.is_empty() {
        return Err(reject("no branches".into()));
    }
    for b in &cert.branches {
        check_leaf_structure(b)?;
    }
    check_partition(cert)?;
    let killed = cert.branches.len();
    let s = &cert.summary;
    if s.leaves != killed || s.killed != killed || s.survivors != 0 || s.inconclusive != 0 || s.verdict != "COMPLETE" {
        return Err(reject("summary does not match the branches".into()));
    }
    let compiled = compile(q)?;
    let evaluations: usize = cert
        .branches
        .par_iter()
        .enumerate()
        .map(|(idx, b)| check_samples(&compiled, b, samples, seed.wrapping_add(idx as u64)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    Ok(CheckReport {
        leaves: killed,
        steps: cert.branches.iter().map(|b| b.steps.len()).sum(),
        evaluations,
    })
}
