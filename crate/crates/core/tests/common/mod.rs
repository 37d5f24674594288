#![allow(dead_code)]

use std::sync::OnceLock;

use octic_core::index_form::{build_s_factors, extract_q_factors, QFactorSet, SFactorSet};
use octic_core::sieve::{case1_contradiction, cascade_case2, SieveCertificate};
use octic_core::CaseTag;

struct Built {
    s: SFactorSet,
    q: QFactorSet,
}

fn built(case: CaseTag) -> &'static Built {
    static CASE_I: OnceLock<Built> = OnceLock::new();
    static CASE_II: OnceLock<Built> = OnceLock::new();
    let cell = match case {
        CaseTag::CaseI => &CASE_I,
        CaseTag::CaseII => &CASE_II,
    };
    cell.get_or_init(|| {
        let s = build_s_factors(case).unwrap();
        let q = extract_q_factors(&s).unwrap();
        Built { s, q }
    })
}

pub fn s_factors(case: CaseTag) -> &'static SFactorSet {
    &built(case).s
}

pub fn q_factors(case: CaseTag) -> &'static QFactorSet {
    &built(case).q
}

pub fn certificate(case: CaseTag) -> &'static SieveCertificate {
    static CASE_I: OnceLock<SieveCertificate> = OnceLock::new();
    static CASE_II: OnceLock<SieveCertificate> = OnceLock::new();
    match case {
        CaseTag::CaseI => CASE_I.get_or_init(|| case1_contradiction(q_factors(case)).unwrap()),
        CaseTag::CaseII => CASE_II.get_or_init(|| cascade_case2(q_factors(case)).unwrap()),
    }
}
