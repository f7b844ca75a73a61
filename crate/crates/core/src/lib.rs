//! Positive semigroups on finite-dimensional unital Banach lattice algebras.
//!
//! The algebra is `R^n` with the componentwise order, pointwise product and
//! sup norm ([`lattice`]). Positive semigroups are `exp(tQ)` for Metzler
//! generators `Q` ([`semigroup`]); normalized ones have zero row sums. On top
//! of that the crate checks numerically:
//!
//! * the Jessen-type inequality `phi(Z(t)f) <= Z(t)(phi f)` for convex
//!   operators `phi` and its adjoint form ([`jessen`]),
//! * exponential convexity of the Jessen gap in the family exponent through
//!   order-PSD Gram matrices ([`expconv`]),
//! * the two counterexamples where normalization fails ([`scenes`]).

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod expconv;
pub mod functions;
pub mod jessen;
pub mod lattice;
pub mod report;
pub mod sample;
pub mod scenes;
pub mod semigroup;

pub use error::{Error, Result};
pub use expconv::{
    build_gram, check_order_psd, exp_convexity_probe, lambda_residual, midpoint_equivalence_check, ExponentSet,
    LambdaGram, ParamInterval, ProbeMode, PsdReport, TimeCoupling,
};
pub use functions::{CustomMap, FamilyKind, LogSeriesConfig, OperatorFamily};
pub use jessen::{verify_adjoint_pairing, verify_jessen, DualVector, JessenOptions, JessenReport};
pub use lattice::{LatticeAlgebra, LatticeElement, OrderTolerance, OrderVerdict};
pub use report::{Check, Report};
pub use semigroup::{evolve, validate_generator, Generator, GeneratorSpec, SemigroupOperator};
