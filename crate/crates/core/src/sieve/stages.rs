//! Declarative stage lists. The engine runs whatever list it is given; the
//! defaults below follow the published argument.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ConstraintSpec;
use crate::field::CaseTag;

/// A recorded claim about a stage, checked after the run. A failed
/// expectation is reported but never changes a branch verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expectation {
    /// Number of classes alive once the stage is done.
    SurvivorCount { count: usize },
    /// Parities shared by every class alive once the stage is done.
    DeducedParities { parities: BTreeMap<String, u8> },
    /// Parities shared by every class entering the stage.
    EntryParities { parities: BTreeMap<String, u8> },
    /// The set of constant residues seen for the given constraint.
    ObservedResidues { constraint: usize, residues: Vec<u64> },
    /// On every class reaching the constraint, the combination agrees with
    /// `shape` as a function modulo `2^k`.
    ResidueShape { constraint: usize, shape: String },
    /// Every class alive after the stage has `var = scale * param + offset`
    /// with the given scale and offset.
    Substitution { var: String, scale: i64, offset: i64 },
    NoSurvivors,
}

impl Expectation {
    pub fn describe(&self) -> String {
        let parities = |p: &BTreeMap<String, u8>| {
            p.iter()
                .map(|(v, e)| format!("{v} {}", if *e == 0 { "even" } else { "odd" }))
                .collect::<Vec<_>>()
                .join(", ")
        };
        match self {
            Expectation::SurvivorCount { count } => format!("{count} classes survive"),
            Expectation::DeducedParities { parities: p } => format!("survivors have {}", parities(p)),
            Expectation::EntryParities { parities: p } => format!("entering classes have {}", parities(p)),
            Expectation::ObservedResidues { constraint, residues } => {
                format!("constraint {constraint} takes residues {residues:?}")
            }
            Expectation::ResidueShape { constraint, shape } => {
                format!("constraint {constraint} has shape {shape}")
            }
            Expectation::Substitution { var, scale, offset } => {
                format!("survivors have {var} = {scale}*t + {offset}")
            }
            Expectation::NoSurvivors => "no class survives".to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSpec {
    pub name: String,
    pub constraints: Vec<ConstraintSpec>,
    #[serde(default)]
    pub expectations: Vec<Expectation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CascadeSpec {
    pub case: CaseTag,
    /// Variables split by parity at the root.
    pub split_variables: Vec<String>,
    /// Extra halvings allowed per variable when a residue is not constant.
    pub max_refinements: u32,
    pub stages: Vec<StageSpec>,
}

impl CascadeSpec {
    /// Largest modulus exponent used by any constraint.
    pub fn max_exponent(&self) -> u32 {
        self.stages
            .iter()
            .flat_map(|s| s.constraints.iter().map(|c| c.k))
            .max()
            .unwrap_or(1)
    }
}

fn parities(pairs: &[(&str, u8)]) -> BTreeMap<String, u8> {
    pairs.iter().map(|&(v, e)| (v.to_string(), e)).collect()
}

/// `m = 4n+2`: the four-term combination modulo 16, then unit residues
/// modulo 4 for whatever the combination leaves open.
pub fn case1_spec() -> CascadeSpec {
    CascadeSpec {
        case: CaseTag::CaseI,
        split_variables: Vec::new(),
        max_refinements: 3,
        stages: vec![
            StageSpec {
                name: "combination".into(),
                constraints: vec![ConstraintSpec::new(&[(4, 1), (6, -1), (3, 1), (5, -1)], 4)],
                expectations: vec![Expectation::ResidueShape {
                    constraint: 0,
                    shape: "8*x6^4".into(),
                }],
            },
            StageSpec {
                name: "units".into(),
                constraints: (1..=6).map(|i| ConstraintSpec::single(i, 2)).collect(),
                expectations: vec![Expectation::NoSurvivors],
            },
        ],
    }
}

/// `m = 4n+3`: the five-stage cascade over all parity classes.
pub fn case2_spec() -> CascadeSpec {
    let singles = |idx: &[usize], k: u32| -> Vec<ConstraintSpec> {
        idx.iter().map(|&i| ConstraintSpec::single(i, k)).collect()
    };
    let mut a = singles(&[1, 2, 3, 4, 5, 6], 2);
    a.extend(singles(&[1, 3, 5], 3));
    a.push(ConstraintSpec::new(&[(6, 1), (4, -1)], 3));

    let mut c = singles(&[2, 4, 6], 2);
    c.extend(singles(&[1, 3, 5], 3));
    c.push(ConstraintSpec::new(&[(6, 1), (4, -1)], 3));
    c.push(ConstraintSpec::new(&[(3, 1), (5, -1)], 4));
    let qdiff = c.len() - 1;

    CascadeSpec {
        case: CaseTag::CaseII,
        split_variables: ["x2", "x3", "x4", "x5", "x6", "x7", "x8", "n"].iter().map(|s| s.to_string()).collect(),
        max_refinements: 3,
        stages: vec![
            StageSpec { name: "a".into(), constraints: a, expectations: Vec::new() },
            StageSpec {
                name: "b".into(),
                constraints: singles(&[1], 4),
                expectations: vec![Expectation::DeducedParities {
                    parities: parities(&[("x5", 0), ("x7", 1)]),
                }],
            },
            StageSpec {
                name: "c".into(),
                constraints: c,
                expectations: vec![
                    Expectation::ObservedResidues { constraint: qdiff, residues: vec![0, 8] },
                    Expectation::SurvivorCount { count: 4 },
                ],
            },
            StageSpec {
                name: "d".into(),
                constraints: singles(&[5], 4),
                expectations: vec![
                    Expectation::ResidueShape {
                        constraint: 0,
                        shape: "8*t5^2 + 8*t7^2 + 8*t7 + 9".into(),
                    },
                    Expectation::Substitution { var: "x5".into(), scale: 4, offset: 2 },
                ],
            },
            StageSpec {
                name: "e".into(),
                constraints: vec![
                    ConstraintSpec::new(&[(5, 1), (3, -1)], 5),
                    ConstraintSpec::new(&[(4, 1), (6, -1)], 4),
                ],
                expectations: vec![
                    Expectation::EntryParities { parities: parities(&[("x6", 0), ("x8", 0)]) },
                    Expectation::NoSurvivors,
                ],
            },
        ],
    }
}

pub fn default_spec(case: CaseTag) -> CascadeSpec {
    match case {
        CaseTag::CaseI => case1_spec(),
        CaseTag::CaseII => case2_spec(),
    }
}
