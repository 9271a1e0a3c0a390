//! Exact computation for multiple Walsh series on the dyadic group.
//!
//! The crate works entirely in exact arithmetic: every scalar is a dyadic
//! rational, points of the group carry explicit truncation depths, and all
//! identities are checked as equalities, never to a floating tolerance.
//!
//! Layers, bottom up:
//!
//! * [`rational`], [`group`] — dyadic rationals, group points, dyadic cubes.
//! * [`walsh`], [`dirichlet`] — Walsh functions in Paley numbering, sign
//!   matrices, Dirichlet kernels with their digit-split evaluation.
//! * [`quasimeasure`] — finitely additive set functions on cubes, their
//!   Fourier-Walsh coefficients and partial sums.
//! * [`mset`] — the staged tiling construction of thin closed sets realized
//!   by null series, with closed-form coefficients.
//! * [`convergence`] — partial-sum evaluation in rectangular, cubic,
//!   ratio-bounded and iterated modes, plus the factorized block evaluator.
//! * [`uset`] — the symmetric single-function variant whose integrals
//!   refuse to decay, and kernel-difference identities.
//! * [`verify`] — named check suites behind the command-line `verify` mode.

pub mod convergence;
pub mod dirichlet;
pub mod error;
pub mod group;
pub mod mset;
pub mod quasimeasure;
pub mod rational;
pub mod uset;
pub mod verify;
pub mod walsh;

pub use error::{Error, Result};
pub use group::{CubeRelation, DyadicCube, DyadicPoint};
pub use quasimeasure::Quasimeasure;
pub use rational::DyadicRational;
pub use walsh::WalshIndex;
