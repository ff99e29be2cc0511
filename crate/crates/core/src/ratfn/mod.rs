//! Exact rational scalars, univariate polynomials and piecewise polynomials.

mod piecewise;
mod poly;
mod rational;

pub use piecewise::{simpson_f64, PiecewisePolynomial};
pub use poly::{interpolate, linear_root, Polynomial};
pub use rational::{
    format_rational, int, min_rational, parse_rational, rat, rational_sqrt, to_decimal, to_f64,
    Rational,
};

/// Default degree bound for reconstructing chamber polynomials from samples.
pub const DEFAULT_DEGREE_BOUND: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RatFnError {
    #[error("not a rational literal: {0:?}")]
    Parse(String),
    #[error("{at} lies outside [{lo}, {hi}]")]
    OutOfDomain { at: String, lo: String, hi: String },
    #[error("interpolant disagrees at {at}: sample {expected}, polynomial {got}")]
    VerificationFailed { at: String, expected: String, got: String },
    #[error("need {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("repeated abscissa {0}")]
    DuplicateAbscissa(String),
    #[error("degree {0} polynomial has no single linear root")]
    DegreeTooHigh(usize),
    #[error("polynomial is identically zero")]
    IdenticallyZero,
    #[error("malformed piecewise polynomial: {0}")]
    Malformed(String),
}

/// Exact `∫_a^b f`.
pub fn integrate(f: &PiecewisePolynomial, a: &Rational, b: &Rational) -> Result<Rational, RatFnError> {
    f.integrate(a, b)
}
