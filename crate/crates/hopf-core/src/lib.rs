//! Conservative–dissipative decomposition toolkit for nonsingular actions of
//! locally compact second countable groups.
//!
//! The crate models a small catalog of lcsc groups with their Haar measures
//! (`group`), nonsingular G-spaces with Radon–Nikodym cocycles (`space`),
//! divergence/saturation estimators for the Hopf transform and for return-set
//! volumes (`engine`), an exact rational engine for countable truncated
//! systems (`discrete`), and measures on homogeneous spaces with Weil-formula
//! verification (`homogeneous`).
//!
//! Everything is deterministic: quadrature nodes are fixed by the scheme, and
//! all Monte Carlo paths take explicit seeds.

pub mod discrete;
pub mod engine;
pub mod error;
pub mod group;
pub mod homogeneous;
pub mod quad;
pub mod rng;
pub mod space;

pub use error::CoreError;
