use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;

use super::stages::{CascadeSpec, Expectation};
use super::{
    apply_constraint, enumerate_parities_over, parity_parameter, AffineSubstitution, BranchRecord, BranchStatus,
    CertificateSummary, Constraint, ExpectationOutcome, ParityAssignment, RefinementRecord, SieveCertificate,
    StageRecord, StepRecord, Verdict, CERTIFICATE_VERSION,
};
use crate::error::{Error, Result};
use crate::field::CaseTag;
use crate::index_form::QFactorSet;
use crate::polyring::{constancy_mod, ConstancyResult, IntPolynomial, Var};

/// A residue class of the coordinate space together with the factors
/// specialized to it.
#[derive(Clone)]
struct Node {
    root: usize,
    parities: BTreeMap<String, u8>,
    refinements: Vec<RefinementRecord>,
    substitutions: BTreeMap<String, AffineSubstitution>,
    origin_of: HashMap<Var, Var>,
    refine_count: HashMap<Var, u32>,
    bindings: HashMap<Var, IntPolynomial>,
    cache: [Option<IntPolynomial>; 6],
    steps: Vec<StepRecord>,
}

impl Node {
    fn root(index: usize, assignment: &ParityAssignment) -> Self {
        let mut node = Node {
            root: index,
            parities: BTreeMap::new(),
            refinements: Vec::new(),
            substitutions: BTreeMap::new(),
            origin_of: HashMap::new(),
            refine_count: HashMap::new(),
            bindings: HashMap::new(),
            cache: Default::default(),
            steps: Vec::new(),
        };
        for (name, &e) in &assignment.parities {
            node.split_original(Var::new(name), e);
        }
        node
    }

    /// `v = 2 t_v + e` for a variable not yet split.
    fn split_original(&mut self, v: Var, e: u8) {
        let param = parity_parameter(v);
        self.parities.insert(v.name(), e);
        self.bindings
            .insert(v, IntPolynomial::var(param).scale(&2.into()) + IntPolynomial::constant(e));
        self.substitutions
            .insert(v.name(), AffineSubstitution { param: param.name(), scale: 2, offset: e as i64 });
        self.origin_of.insert(param, v);
    }

    fn factor(&mut self, q: &QFactorSet, i: usize, k: u32) -> &IntPolynomial {
        if self.cache[i - 1].is_none() {
            self.cache[i - 1] = Some(q.get(i).substitute_mod_pow2(&self.bindings, k));
        }
        self.cache[i - 1].as_ref().unwrap()
    }

    /// Splits `v` by parity, returning the origin of `v` so the caller can
    /// charge the refinement budget.
    fn refine(&mut self, v: Var, e: u8, k: u32, stage: &str, constraint: &str) -> Var {
        let param = parity_parameter(v);
        let sub = HashMap::from([(v, IntPolynomial::var(param).scale(&2.into()) + IntPolynomial::constant(e))]);
        for c in self.cache.iter_mut().flatten() {
            *c = c.substitute_mod_pow2(&sub, k);
        }
        let origin = match self.origin_of.get(&v) {
            Some(&o) => {
                for b in self.bindings.values_mut() {
                    *b = b.substitute(&sub);
                }
                let old = &self.substitutions[&o.name()];
                let updated = AffineSubstitution {
                    param: param.name(),
                    scale: old.scale * 2,
                    offset: old.offset + old.scale * e as i64,
                };
                self.substitutions.insert(o.name(), updated);
                self.origin_of.insert(param, o);
                o
            }
            None => {
                self.split_original(v, e);
                v
            }
        };
        *self.refine_count.entry(origin).or_default() += 1;
        self.refinements.push(RefinementRecord {
            var: v.name(),
            new_var: param.name(),
            residue: e,
            stage: stage.to_string(),
            constraint: constraint.to_string(),
        });
        origin
    }

    fn into_record(self, status: BranchStatus, killed_in: Option<String>) -> BranchRecord {
        BranchRecord {
            root: self.root,
            parities: self.parities,
            refinements: self.refinements,
            substitutions: self.substitutions,
            steps: self.steps,
            status,
            killed_in,
        }
    }
}

#[derive(Default)]
struct StageObservations {
    entering: Vec<BTreeMap<String, u8>>,
    alive: Vec<(BTreeMap<String, u8>, BTreeMap<String, AffineSubstitution>)>,
    residues: Vec<BTreeSet<u64>>,
    shape_ok: Vec<Vec<bool>>,
}

impl StageObservations {
    fn merge(&mut self, other: StageObservations) {
        self.entering.extend(other.entering);
        self.alive.extend(other.alive);
        for (a, b) in self.residues.iter_mut().zip(other.residues) {
            a.extend(b);
        }
        for (a, b) in self.shape_ok.iter_mut().zip(other.shape_ok) {
            a.extend(b);
        }
    }
}

struct Context<'a> {
    q: &'a QFactorSet,
    spec: &'a CascadeSpec,
    constraints: Vec<Vec<Constraint>>,
    shapes: Vec<Vec<Option<IntPolynomial>>>,
    k: u32,
}

struct RootOutput {
    leaves: Vec<BranchRecord>,
    stages: Vec<StageObservations>,
}

impl<'a> Context<'a> {
    fn new(q: &'a QFactorSet, spec: &'a CascadeSpec) -> Result<Self> {
        let constraints = spec
            .stages
            .iter()
            .map(|s| s.constraints.iter().cloned().map(Constraint::from).collect())
            .collect();
        let mut shapes = Vec::new();
        for stage in &spec.stages {
            let mut row = vec![None; stage.constraints.len()];
            for e in &stage.expectations {
                if let Expectation::ResidueShape { constraint, shape } = e {
                    let slot = row
                        .get_mut(*constraint)
                        .ok_or_else(|| Error::Parse(format!("stage {} has no constraint {constraint}", stage.name)))?;
                    *slot = Some(shape.parse::<IntPolynomial>()?);
                }
            }
            shapes.push(row);
        }
        Ok(Context { q, spec, constraints, shapes, k: spec.max_exponent() })
    }

    fn empty_observations(&self) -> Vec<StageObservations> {
        self.constraints
            .iter()
            .map(|cs| StageObservations {
                residues: vec![BTreeSet::new(); cs.len()],
                shape_ok: vec![Vec::new(); cs.len()],
                ..Default::default()
            })
            .collect()
    }

    fn run_root(&self, index: usize, assignment: &ParityAssignment) -> RootOutput {
        let mut out = RootOutput { leaves: Vec::new(), stages: self.empty_observations() };
        self.run_node(Node::root(index, assignment), 0, 0, false, &mut out);
        out
    }

    fn run_node(&self, mut node: Node, stage0: usize, constraint0: usize, mut retry: bool, out: &mut RootOutput) {
        for s in stage0..self.constraints.len() {
            let stage = &self.spec.stages[s];
            let first = if s == stage0 { constraint0 } else { 0 };
            if first == 0 && !retry {
                out.stages[s].entering.push(node.parities.clone());
            }
            for c in first..self.constraints[s].len() {
                let constraint = &self.constraints[s][c];
                for &(i, _) in &constraint.spec.combo {
                    node.factor(self.q, i, self.k);
                }
                let cache = &node.cache;
                let lookup = |i: usize| cache[i - 1].clone().expect("factor cached");
                let (verdict, result, combined) = apply_constraint(&lookup, constraint);
                if !retry {
                    if let Some(shape) = &self.shapes[s][c] {
                        let diff = &combined - shape;
                        let ok = constancy_mod(&diff, constraint.spec.k) == ConstancyResult::Constant(0);
                        out.stages[s].shape_ok[c].push(ok);
                    }
                }
                retry = false;
                let label = constraint.spec.label();
                let mut step = StepRecord {
                    stage: stage.name.clone(),
                    combo: constraint.spec.combo.clone(),
                    combo_text: label.clone(),
                    modulus_exp: constraint.spec.k,
                    modulus: 1u64 << constraint.spec.k,
                    residue: result.residue(),
                    allowed: constraint.allowed.iter().copied().collect(),
                    verdict,
                    witness: None,
                    shape: None,
                };
                match (verdict, result) {
                    (Verdict::Killed, _) => {
                        out.stages[s].residues[c].extend(step.residue);
                        node.steps.push(step);
                        out.leaves.push(node.into_record(BranchStatus::Killed, Some(stage.name.clone())));
                        return;
                    }
                    (Verdict::Survives, ConstancyResult::Constant(r)) => {
                        out.stages[s].residues[c].insert(r);
                        node.steps.push(step);
                    }
                    (_, ConstancyResult::NonConstant(w)) => {
                        let var = w
                            .second
                            .iter()
                            .find(|&(name, &x)| x != w.first[name])
                            .and_then(|(name, _)| Var::lookup(name))
                            .expect("witness differs in some variable");
                        step.shape = Some(combined.to_string());
                        step.witness = Some(w);
                        node.steps.push(step);
                        let origin = node.origin_of.get(&var).copied().unwrap_or(var);
                        let used = node.refine_count.get(&origin).copied().unwrap_or(0);
                        if used >= self.spec.max_refinements {
                            log::debug!("branch {} out of refinements on {}", node.root, origin.name());
                            out.leaves.push(node.into_record(BranchStatus::Inconclusive, None));
                            return;
                        }
                        for e in 0..2u8 {
                            let mut child = node.clone();
                            child.refine(var, e, self.k, &stage.name, &label);
                            self.run_node(child, s, c, true, out);
                        }
                        return;
                    }
                    (Verdict::NonConstant, ConstancyResult::Constant(_)) => unreachable!(),
                }
            }
            out.stages[s].alive.push((node.parities.clone(), node.substitutions.clone()));
        }
        out.leaves.push(node.into_record(BranchStatus::Alive, None));
    }
}

fn evaluate(expectation: &Expectation, obs: &StageObservations) -> ExpectationOutcome {
    let alive_parities = || super::deduced_parities(obs.alive.iter().map(|(p, _)| p));
    let subset = |want: &BTreeMap<String, u8>, got: &BTreeMap<String, u8>| {
        want.iter().all(|(v, e)| got.get(v) == Some(e))
    };
    let (met, observed) = match expectation {
        Expectation::SurvivorCount { count } => (obs.alive.len() == *count, obs.alive.len().to_string()),
        Expectation::DeducedParities { parities } => {
            let got = alive_parities();
            (!obs.alive.is_empty() && subset(parities, &got), format!("{got:?}"))
        }
        Expectation::EntryParities { parities } => {
            let got = super::deduced_parities(obs.entering.iter());
            (!obs.entering.is_empty() && subset(parities, &got), format!("{got:?}"))
        }
        Expectation::ObservedResidues { constraint, residues } => {
            let got: Vec<u64> = obs.residues.get(*constraint).map(|s| s.iter().copied().collect()).unwrap_or_default();
            (&got == residues, format!("{got:?}"))
        }
        Expectation::ResidueShape { constraint, .. } => {
            let checks = obs.shape_ok.get(*constraint).cloned().unwrap_or_default();
            let agree = checks.iter().filter(|&&b| b).count();
            (!checks.is_empty() && agree == checks.len(), format!("{agree} of {} classes agree", checks.len()))
        }
        Expectation::Substitution { var, scale, offset } => {
            let ok = !obs.alive.is_empty()
                && obs.alive.iter().all(|(_, subs)| {
                    subs.get(var)
                        .is_some_and(|a| a.scale % scale == 0 && a.offset.rem_euclid(*scale) == *offset)
                });
            let seen: BTreeSet<String> =
                obs.alive.iter().filter_map(|(_, subs)| subs.get(var).map(|a| a.text())).collect();
            (ok, format!("{seen:?}"))
        }
        Expectation::NoSurvivors => (obs.alive.is_empty(), obs.alive.len().to_string()),
    };
    ExpectationOutcome { description: expectation.describe(), met, observed }
}

/// Runs a cascade over every root parity class and assembles the certificate.
pub fn run_cascade(q: &QFactorSet, spec: &CascadeSpec) -> Result<SieveCertificate> {
    if q.case != spec.case {
        return Err(Error::CaseMismatch);
    }
    let ctx = Context::new(q, spec)?;
    let split: Vec<Var> = spec.split_variables.iter().map(|v| Var::new(v)).collect();
    let roots = enumerate_parities_over(&split);
    let outputs: Vec<RootOutput> =
        roots.par_iter().enumerate().map(|(idx, a)| ctx.run_root(idx, a)).collect();

    let mut observations = ctx.empty_observations();
    let mut branches = Vec::new();
    for out in outputs {
        branches.extend(out.leaves);
        for (acc, o) in observations.iter_mut().zip(out.stages) {
            acc.merge(o);
        }
    }

    let stages: Vec<StageRecord> = spec
        .stages
        .iter()
        .zip(&observations)
        .map(|(stage, obs)| StageRecord {
            name: stage.name.clone(),
            survivors_after: obs.alive.len(),
            deduced_parities: super::deduced_parities(obs.alive.iter().map(|(p, _)| p)),
            observed_residues: stage
                .constraints
                .iter()
                .zip(&obs.residues)
                .map(|(c, r)| (c.label(), r.iter().copied().collect()))
                .collect(),
            expectations: stage.expectations.iter().map(|e| evaluate(e, obs)).collect(),
        })
        .collect();

    let count = |s: BranchStatus| branches.iter().filter(|b| b.status == s).count();
    let (killed, survivors, inconclusive) =
        (count(BranchStatus::Killed), count(BranchStatus::Alive), count(BranchStatus::Inconclusive));
    let summary = CertificateSummary {
        root_branches: roots.len(),
        leaves: branches.len(),
        killed,
        survivors,
        inconclusive,
        expectations_met: stages.iter().all(|s| s.expectations.iter().all(|e| e.met)),
        verdict: if killed == branches.len() { "COMPLETE" } else { "INCONCLUSIVE" }.to_string(),
    };
    log::info!(
        "sieve {}: {} roots, {} leaves, {} killed, {} alive, {} inconclusive",
        spec.case,
        summary.root_branches,
        summary.leaves,
        killed,
        survivors,
        inconclusive
    );
    Ok(SieveCertificate {
        version: CERTIFICATE_VERSION.to_string(),
        case: spec.case.residue() as u8,
        split_variables: spec.split_variables.clone(),
        stages,
        branches,
        summary,
    })
}

fn require_complete(cert: SieveCertificate) -> Result<SieveCertificate> {
    if cert.is_complete() {
        return Ok(cert);
    }
    let open: Vec<String> = cert
        .branches
        .iter()
        .filter(|b| b.status != BranchStatus::Killed)
        .map(|b| format!("root {} {:?} {:?}", b.root, b.parities, b.status))
        .collect();
    Err(Error::Inconclusive(open.join("; ")))
}

/// Case `m = 4n+2` with the default stages.
pub fn case1_contradiction(q: &QFactorSet) -> Result<SieveCertificate> {
    if q.case != CaseTag::CaseI {
        return Err(Error::CaseMismatch);
    }
    require_complete(run_cascade(q, &super::case1_spec())?)
}

/// Case `m = 4n+3` with the default stages.
pub fn cascade_case2(q: &QFactorSet) -> Result<SieveCertificate> {
    if q.case != CaseTag::CaseII {
        return Err(Error::CaseMismatch);
    }
    require_complete(run_cascade(q, &super::case2_spec())?)
}
