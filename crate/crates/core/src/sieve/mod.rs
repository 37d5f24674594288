//! Congruence sieve over the index-form factors.
//!
//! Each factor must equal ±1 at a generator of a power integral basis, so
//! any integer combination `sum c_i Q_i` lies in a computable residue set
//! modulo `2^k`. The sieve splits the coordinate space into residue classes
//! (parities first, finer classes on demand) and, class by class, finds a
//! combination whose residue is constant on the class and outside the
//! allowed set.

mod checker;
mod engine;
mod stages;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::polyring::{allowed_residues, constancy_mod, ConstancyResult, IntPolynomial, Var, Witness};

pub use checker::{check_branch, check_certificate, CheckReport};
pub use engine::{case1_contradiction, cascade_case2, run_cascade};
pub use stages::{case1_spec, case2_spec, default_spec, CascadeSpec, Expectation, StageSpec};

pub const CERTIFICATE_VERSION: &str = "1.0.0";

/// A linear combination `sum c_i Q_i` with an exponent `k` for the modulus `2^k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    /// `(i, c_i)` with 1-based factor index `i`.
    pub combo: Vec<(usize, i64)>,
    pub k: u32,
}

impl ConstraintSpec {
    pub fn new(combo: &[(usize, i64)], k: u32) -> Self {
        ConstraintSpec { combo: combo.to_vec(), k }
    }

    pub fn single(i: usize, k: u32) -> Self {
        Self::new(&[(i, 1)], k)
    }

    pub fn coefficients(&self) -> Vec<i64> {
        self.combo.iter().map(|&(_, c)| c).collect()
    }

    pub fn allowed(&self) -> BTreeSet<u64> {
        allowed_residues(&self.coefficients(), self.k)
    }

    pub fn label(&self) -> String {
        combo_label(&self.combo)
    }

    /// The combination evaluated on (already substituted) factors.
    pub fn combine(&self, factors: &dyn Fn(usize) -> IntPolynomial) -> IntPolynomial {
        let mut acc = IntPolynomial::zero();
        for &(i, c) in &self.combo {
            acc = acc + factors(i).scale(&c.into());
        }
        acc.reduce_mod_pow2(self.k)
    }
}

pub fn combo_label(combo: &[(usize, i64)]) -> String {
    let mut out = String::new();
    for (idx, &(i, c)) in combo.iter().enumerate() {
        let mag = c.unsigned_abs();
        match (idx, c < 0) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        if mag != 1 {
            out.push_str(&format!("{mag}*"));
        }
        out.push_str(&format!("Q{i}"));
    }
    out
}

/// A constraint together with the set of residues it tolerates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub spec: ConstraintSpec,
    pub allowed: BTreeSet<u64>,
}

impl From<ConstraintSpec> for Constraint {
    fn from(spec: ConstraintSpec) -> Self {
        let allowed = spec.allowed();
        Constraint { spec, allowed }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Killed,
    Survives,
    NonConstant,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Killed => "KILLED",
            Verdict::Survives => "SURVIVES",
            Verdict::NonConstant => "NONCONSTANT",
        })
    }
}

/// Evaluates a constraint on factors already specialized to a branch.
pub fn apply_constraint(
    factors: &dyn Fn(usize) -> IntPolynomial,
    constraint: &Constraint,
) -> (Verdict, ConstancyResult, IntPolynomial) {
    let combined = constraint.spec.combine(factors);
    let result = constancy_mod(&combined, constraint.spec.k);
    let verdict = match &result {
        ConstancyResult::Constant(r) if constraint.allowed.contains(r) => Verdict::Survives,
        ConstancyResult::Constant(_) => Verdict::Killed,
        ConstancyResult::NonConstant(_) => Verdict::NonConstant,
    };
    (verdict, result, combined)
}

/// The variables split by parity at the root of the case `m = 4n+3` sieve.
pub fn parity_variables() -> Vec<Var> {
    (2..=8).map(Var::x).chain(std::iter::once(Var::n())).collect()
}

/// `x = 2 t + ε` parameter attached to an original variable: `t_i` for
/// `x_i`, `t9` for `n`, and a primed name for anything else.
pub fn parity_parameter(v: Var) -> Var {
    let name = v.name();
    if name == "n" {
        return Var::t(9);
    }
    if let Some(idx) = name.strip_prefix('x').and_then(|s| s.parse::<usize>().ok()) {
        if (2..=8).contains(&idx) {
            return Var::t(idx);
        }
    }
    Var::new(&format!("{name}p"))
}

/// A parity pattern over some variables, `bits` bit `l` for `vars[l]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityAssignment {
    pub parities: BTreeMap<String, u8>,
}

impl ParityAssignment {
    pub fn from_bits(vars: &[Var], bits: u32) -> Self {
        let parities = vars
            .iter()
            .enumerate()
            .map(|(l, v)| (v.name(), (bits >> l & 1) as u8))
            .collect();
        ParityAssignment { parities }
    }

    pub fn parity_of(&self, name: &str) -> Option<u8> {
        self.parities.get(name).copied()
    }

    /// Whether an integer point lies in this class.
    pub fn matches(&self, point: &BTreeMap<String, i64>) -> bool {
        self.parities
            .iter()
            .all(|(v, &e)| point.get(v).is_some_and(|x| x.rem_euclid(2) as u8 == e))
    }
}

/// All `2^8` parity patterns over `x2..x8, n`, the all-even one first.
pub fn enumerate_parities() -> Vec<ParityAssignment> {
    enumerate_parities_over(&parity_variables())
}

pub fn enumerate_parities_over(vars: &[Var]) -> Vec<ParityAssignment> {
    (0..1u32 << vars.len()).map(|bits| ParityAssignment::from_bits(vars, bits)).collect()
}

/// Variables whose parity agrees across all given assignments.
pub fn deduced_parities<'a, I>(survivors: I) -> BTreeMap<String, u8>
where
    I: IntoIterator<Item = &'a BTreeMap<String, u8>>,
{
    let mut it = survivors.into_iter();
    let Some(first) = it.next() else {
        return BTreeMap::new();
    };
    let mut common = first.clone();
    for p in it {
        common.retain(|v, e| p.get(v) == Some(e));
    }
    common
}

/// One evaluated constraint inside a branch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub stage: String,
    pub combo: Vec<(usize, i64)>,
    pub combo_text: String,
    pub modulus_exp: u32,
    pub modulus: u64,
    pub residue: Option<u64>,
    pub allowed: Vec<u64>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
    /// Coefficient-reduced combination, kept for non-constant steps.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub shape: Option<String>,
}

/// `var = 2 * new_var + residue`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefinementRecord {
    pub var: String,
    pub new_var: String,
    pub residue: u8,
    /// Stage and constraint that forced the split.
    pub stage: String,
    pub constraint: String,
}

/// `var = scale * param + offset`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineSubstitution {
    pub param: String,
    pub scale: i64,
    pub offset: i64,
}

impl AffineSubstitution {
    pub fn text(&self) -> String {
        format!("{}*{} + {}", self.scale, self.param, self.offset)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BranchStatus {
    Killed,
    Alive,
    /// Still non-constant after the refinement budget ran out.
    Inconclusive,
}

/// A leaf of the case split.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchRecord {
    /// Index of the root parity class this leaf refines.
    pub root: usize,
    pub parities: BTreeMap<String, u8>,
    pub refinements: Vec<RefinementRecord>,
    /// Each split original variable as an affine function of its parameter.
    pub substitutions: BTreeMap<String, AffineSubstitution>,
    pub steps: Vec<StepRecord>,
    pub status: BranchStatus,
    /// Stage that killed the branch.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub killed_in: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectationOutcome {
    pub description: String,
    pub met: bool,
    pub observed: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub survivors_after: usize,
    pub deduced_parities: BTreeMap<String, u8>,
    /// Constant residues seen per constraint of the stage, killing ones included.
    pub observed_residues: Vec<(String, Vec<u64>)>,
    pub expectations: Vec<ExpectationOutcome>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub root_branches: usize,
    pub leaves: usize,
    pub killed: usize,
    pub survivors: usize,
    pub inconclusive: usize,
    pub expectations_met: bool,
    pub verdict: String,
}

/// Branch-by-branch record of a sieve run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveCertificate {
    pub version: String,
    /// `m mod 4`.
    pub case: u8,
    pub split_variables: Vec<String>,
    pub stages: Vec<StageRecord>,
    pub branches: Vec<BranchRecord>,
    pub summary: CertificateSummary,
}

impl SieveCertificate {
    pub fn is_complete(&self) -> bool {
        self.summary.verdict == "COMPLETE"
    }

    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.name == name)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}
