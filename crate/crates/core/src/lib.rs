//! Solver and verifier for the reduced radial variational problem of the
//! dark monopole model.
//!
//! The unknowns are a profile pair (u, f) on a truncated radial domain,
//! minimizing
//!
//! ```text
//! I(u,f) = ∫ { 2(u')² + (1-u²)²/r² + α[r²(f')² + β f²u²]
//!              + (αγ/2) r²(f²-1)² } dr
//! ```
//!
//! subject to u(r_min) = 1, f(r_min) = 0, u(r_max) = 0, f(r_max) = 1.
//! The physical energy is (4πv/e)·I; only the dimensionless I is computed.
//!
//! Module map:
//! - [`grid`]: graded meshes, quadrature, difference stencils
//! - [`energy`]: the discrete functional, its gradient and EL residuals
//! - [`bps`]: the closed-form solution at β = 2, γ = 0 and exact constants
//! - [`solver`]: continuation + descent + Newton minimizer for finite γ
//! - [`gamma_inf`]: the single-field γ = ∞ problem and the C(ε) map
//! - [`diagnostics`]: certification of profiles against provable facts

pub mod bps;
pub mod diagnostics;
pub mod energy;
pub mod gamma_inf;
pub mod grid;
pub mod solver;
mod tridiag;

pub use energy::{EnergyBreakdown, Parameters, Profile};
pub use grid::{build_grid, RadialGrid};
pub use solver::{solve, InitKind, SolveConfig, SolvedProfile};
