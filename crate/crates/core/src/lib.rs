//! Numerical testbed for two-weight bump conditions and sparse operators
//! attached to iterated commutators of fractional integrals.
//!
//! The crate discretizes a box `[-L, L]^n` (n = 1 or 2) into a uniform grid,
//! builds dyadic lattices and sparse families on it, evaluates Orlicz
//! (Luxemburg) norms on cubes, and measures the weight-class and bump
//! functionals that govern `L^p(nu) -> L^q(mu)` boundedness of the
//! fractional integral `I_alpha`, its iterated commutators `I_alpha^{b,m}`,
//! and the associated sparse operators `T` and `T*`.
//!
//! Modules:
//! - [`grid`]: uniform grids, grid functions, cube regions, Lp / weak-Lq norms.
//! - [`orlicz`]: Young functions, complementary functions, Luxemburg norms,
//!   `B_p` / `B_{p,q}` membership.
//! - [`dyadic`]: dyadic lattices, stopping-time sparse families, sparsity
//!   certificates.
//! - [`weights`]: weight constructors and class diagnostics (`A_{p,q}`,
//!   two-weight `A_p`, doubling, `BMO`, weighted `BMO`, `Osc(Phi)`).
//! - [`operators`]: the discretized operators and kernel diagnostics.
//! - [`bump`]: the bump functionals (two-sided four-function conditions,
//!   oscillation-reduced conditions, log-bump specializations, necessity
//!   quantities).
//! - [`testbed`]: config-driven experiment runner and CLI backend.

pub mod bump;
pub mod dyadic;
pub mod error;
pub mod grid;
pub mod operators;
pub mod orlicz;
pub mod pins;
pub mod testbed;
pub mod weights;

pub use error::{Error, Result};
