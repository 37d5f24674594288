//! Exact sparse multivariate polynomials over the integers.

mod dyadic;
mod modular;
mod monomial;
mod parse;
mod poly;
mod var;

pub use dyadic::{dyadic_sum, DyadicPolynomial};
pub use modular::{allowed_residues, binomial_coefficients, constancy_mod, ConstancyResult, Witness};
pub use monomial::Monomial;
pub use poly::{product_tree, IntPolynomial, PolyAccumulator, WrappingPolynomial};
pub use var::Var;
