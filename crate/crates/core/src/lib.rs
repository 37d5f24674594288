//! Exact machinery for index forms of the octic fields `K = Q(i, m^(1/4))`
//! with `m = 2, 3 (mod 4)`.
//!
//! The pipeline builds the integral bases of `K` with `m` as a polynomial in
//! a parameter `n`, expands the index of a generic integral element into six
//! integer polynomial factors, and runs congruence sieves over those factors
//! that certify the equation `index = 1` has no solution.

pub mod basis;
pub mod error;
pub mod field;
pub mod index_form;
pub mod oracle;
pub mod polyring;
pub mod report;
pub mod sieve;

pub use error::{Error, Result};
pub use field::{CaseTag, ConjugationIndex, FieldElement};
pub use polyring::{DyadicPolynomial, IntPolynomial, Monomial, Var};
pub use index_form::{QFactorSet, SFactorSet};
pub use report::{prove, prove_with, ProofReport, ProofVerdict, ProveConfig};
pub use sieve::SieveCertificate;
