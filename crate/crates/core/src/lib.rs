//! Pseudo-spectral simulation and semi-analytic verification of the
//! two-dimensional inviscid, non-diffusive Oldroyd-B system
//!
//! ```text
//! ∂ₜu + (u·∇)u + ∇p = K div τ,      div u = 0,
//! ∂ₜτ + (u·∇)τ − μΔτ + βτ = α𝔻(u),
//! ```
//!
//! with `μ ≥ 0` kept as a regularization parameter.
//!
//! - [`spectral`]: grids, transforms, Leray projection, `σ = Λ⁻¹ℙdiv τ`, cutoffs, norms.
//! - [`propagator`]: closed-form per-mode evolution of the linear `(u, σ)` system.
//! - [`decay`]: whole-plane decay exponents of the linear flow via radial quadrature.
//! - [`solver`]: integrating-factor Runge–Kutta evolution of the full system on a torus.
//! - [`init`]: initial-data families; [`checkpoint`]: binary state snapshots.
//! - [`monitors`]: energy functionals, cross terms and balance residuals.
//! - [`experiments`]: configuration, persistence and the `oblab` subcommands.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Solver errors carry the last good state back to the caller.
#![allow(clippy::result_large_err)]

pub mod checkpoint;
pub mod decay;
pub mod error;
pub mod experiments;
pub mod init;
pub mod monitors;
pub mod propagator;
pub mod quadrature;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
