//! Exact exponent calculus for the regularity criteria.
//!
//! Everything here is rational arithmetic; no floating point value enters an
//! identity check. The central object is [`ExponentSolution`], one admissible
//! point `(θ, q)` on the mixed pressure-velocity line together with every
//! auxiliary exponent used by the estimate chain (`β`, `r₁`, `r₂`, `δ₁`, `δ₂`).

mod lines;
mod rational;
mod split;

pub use lines::{classify, mu_gamma, q_constraint_check, solve_p, Classification, CriterionKind, CriterionLine};
pub use rational::{ExtendedRational, Rational};
pub use split::{beta_of_theta, closing_identity, conjugate_split, mixed_pv_q_floor, ExponentSolution, Leg};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExponentError {
    #[error("division by zero in exact arithmetic")]
    DivisionByZero,
    #[error("theta = {0} outside the admissible range {1}")]
    ThetaOutOfRange(Rational, &'static str),
    #[error("q = {0} is not admissible: {1}")]
    QOutOfRange(ExtendedRational, String),
    #[error("gamma = {} outside ({}, {})", .0[0], .0[1], .0[2])]
    GammaOutOfRange(Box<[Rational; 3]>),
    #[error("criterion line degenerates (right-hand side is zero)")]
    DegenerateLine,
    #[error("dimension n = {0} must be at least 3")]
    DimensionOutOfRange(u32),
    #[error("exponent {0} must be positive")]
    NonPositiveExponent(String),
    #[error("exponent relation violated: {0}")]
    RelationViolated(String),
    #[error("cannot parse exponent {0:?}")]
    Parse(String),
}
