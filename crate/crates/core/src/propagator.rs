//! Exact evolution of a single Fourier mode of the linearized `(u, σ)` system
//!
//! ```text
//! ∂ₜû − K|ξ|σ̂ = 0
//! ∂ₜσ̂ + (β + μ|ξ|²)σ̂ + (α/2)|ξ|û = 0
//! ```
//!
//! The solution is written with three scalar kernels `G1, G2, G3` built from
//! the eigenvalues `λ± = (−b ± √(b² − 2αK|ξ|²))/2`, `b = β + μ|ξ|²`. Each
//! kernel is evaluated in a form that stays real and free of cancellation on
//! its branch (overdamped, critically damped, oscillatory).

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::PhysParams;

/// Relative gap `|λ₊ − λ₋| / β` below which the double-root limit is used.
pub const DOUBLE_ROOT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeState {
    pub u: [C64; 2],
    pub sigma: [C64; 2],
    pub xi: f64,
}

impl ModeState {
    pub fn new(u: [C64; 2], sigma: [C64; 2], xi: f64) -> Result<Self> {
        if !(xi.is_finite() && xi >= 0.0) {
            return Err(Error::Precondition(format!("|xi| must be finite and >= 0, got {xi}")));
        }
        let s = Self { u, sigma, xi };
        if !s.is_finite() {
            return Err(Error::Precondition("non-finite mode state".into()));
        }
        Ok(s)
    }

    /// Scalar mode: `û = (u, 0)`, `σ̂ = (sigma, 0)`.
    pub fn scalar(u: f64, sigma: f64, xi: f64) -> Result<Self> {
        Self::new(
            [C64::new(u, 0.0), C64::default()],
            [C64::new(sigma, 0.0), C64::default()],
            xi,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.sigma).all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Euclidean norm of the stacked `(û, σ̂)` vector.
    pub fn norm(&self) -> f64 {
        self.u
            .iter()
            .chain(&self.sigma)
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.u
            .iter()
            .zip(&other.u)
            .chain(self.sigma.iter().zip(&other.sigma))
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralConstants {
    /// Low-frequency radius `R = β/(2√(αK))`.
    pub radius: f64,
    /// Gaussian rate in the upper bounds, fixed at `αK/(2β)`.
    pub theta: f64,
    /// Gaussian rate in the lower bounds, `αK/β`.
    pub eta: f64,
    /// Onset time of the lower bounds, `√2·ln2/β`.
    pub t1: f64,
    pub xi_c: f64,
}

pub fn constants(p: &PhysParams) -> SpectralConstants {
    let ak = p.alpha * p.kappa;
    SpectralConstants {
        radius: p.beta / (2.0 * ak.sqrt()),
        theta: ak / (2.0 * p.beta),
        eta: ak / p.beta,
        t1: std::f64::consts::SQRT_2 * std::f64::consts::LN_2 / p.beta,
        xi_c: p.critical_wavenumber(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenEval {
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    pub lambda_plus: C64,
    pub lambda_minus: C64,
}

/// `λ±` at `|ξ|`. On the overdamped branch `λ₊` uses the cancellation-free
/// form `−αK|ξ|²/(b + √D)`.
pub fn eigenvalues(p: &PhysParams, xi: f64) -> (C64, C64) {
    let b = p.damping(xi);
    let disc = b * b - 2.0 * p.alpha * p.kappa * xi * xi;
    if disc >= 0.0 {
        let root = disc.sqrt();
        let plus = -p.alpha * p.kappa * xi * xi / (b + root);
        let minus = -0.5 * (b + root);
        (C64::new(plus, 0.0), C64::new(minus, 0.0))
    } else {
        let omega = 0.5 * (-disc).sqrt();
        (C64::new(-0.5 * b, omega), C64::new(-0.5 * b, -omega))
    }
}

pub fn green_eval(p: &PhysParams, xi: f64, t: f64) -> Result<GreenEval> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let (lambda_plus, lambda_minus) = eigenvalues(p, xi);
    let b = p.damping(xi);
    let disc = b * b - 2.0 * p.alpha * p.kappa * xi * xi;
    let gap = disc.abs().sqrt();
    let m = -0.5 * b;

    let (g1, g2, g3) = if gap < DOUBLE_ROOT_TOL * p.beta {
        let e = (m * t).exp();
        (t * e, (1.0 + m * t) * e, (1.0 - m * t) * e)
    } else if disc < 0.0 {
        let omega = 0.5 * gap;
        let e = (m * t).exp();
        let (s, c) = (omega * t).sin_cos();
        let sinc = s / omega;
        (e * sinc, e * (c + m * sinc), e * (c - m * sinc))
    } else {
        let h = 0.5 * gap;
        let (lp, lm) = (lambda_plus.re, lambda_minus.re);
        if h * t <= 20.0 && h < 0.05 * b {
            // Near the double root: hyperbolic form around the mean rate.
            let e = (m * t).exp();
            let sinhc = (h * t).sinh() / h;
            let c = (h * t).cosh();
            (e * sinhc, e * (c + m * sinhc), e * (c - m * sinhc))
        } else {
            let ep = (lp * t).exp();
            let em = (lm * t).exp();
            let g1 = ep * -(-2.0 * h * t).exp_m1() / (2.0 * h);
            let g2 = (lp * ep - lm * em) / (2.0 * h);
            let g3 = (lp * em - lm * ep) / (2.0 * h);
            (g1, g2, g3)
        }
    };
    Ok(GreenEval {
        g1,
        g2,
        g3,
        lambda_plus,
        lambda_minus,
    })
}

/// `û(t) = G3·û₀ + K|ξ|G1·σ̂₀`, `σ̂(t) = −(α/2)|ξ|G1·û₀ + G2·σ̂₀`.
pub fn propagate_mode(p: &PhysParams, m: &ModeState, t: f64) -> Result<ModeState> {
    let g = green_eval(p, m.xi, t)?;
    Ok(apply_green(p, &g, m))
}

pub fn apply_green(p: &PhysParams, g: &GreenEval, m: &ModeState) -> ModeState {
    let xi = m.xi;
    let mut out = *m;
    for j in 0..2 {
        out.u[j] = m.u[j] * g.g3 + m.sigma[j] * (p.kappa * xi * g.g1);
        out.sigma[j] = m.u[j] * (-0.5 * p.alpha * xi * g.g1) + m.sigma[j] * g.g2;
    }
    out
}

/// Largest step accepted by [`mode_ode_oracle`] at `|ξ|`.
pub fn max_oracle_step(p: &PhysParams, xi: f64) -> f64 {
    let rate = p
        .beta
        .max((p.alpha * p.kappa).sqrt() * xi)
        .max(p.mu * xi * xi);
    0.01 / rate
}

/// Brute-force reference: classical RK4 on the 2×2 mode system with uniform
/// steps no larger than `dt`.
pub fn mode_ode_oracle(p: &PhysParams, m: &ModeState, t: f64, dt: f64) -> Result<ModeState> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let max = max_oracle_step(p, m.xi);
    if !(dt > 0.0 && dt <= max) {
        return Err(Error::StepTooLarge { dt, max });
    }
    let steps = (t / dt).ceil() as usize;
    if steps == 0 {
        return Ok(*m);
    }
    let h = t / steps as f64;
    let xi = m.xi;
    let b = p.damping(xi);
    let cu = p.kappa * xi;
    let cs = 0.5 * p.alpha * xi;
    let rhs = |u: C64, s: C64| (s * cu, -s * b - u * cs);

    let mut out = *m;
    for j in 0..2 {
        let (mut u, mut s) = (m.u[j], m.sigma[j]);
        for _ in 0..steps {
            let (k1u, k1s) = rhs(u, s);
            let (k2u, k2s) = rhs(u + k1u * (0.5 * h), s + k1s * (0.5 * h));
            let (k3u, k3s) = rhs(u + k2u * (0.5 * h), s + k2s * (0.5 * h));
            let (k4u, k4s) = rhs(u + k3u * h, s + k3s * h);
            u += (k1u + k2u * 2.0 + k3u * 2.0 + k4u) * (h / 6.0);
            s += (k1s + k2s * 2.0 + k3s * 2.0 + k4s) * (h / 6.0);
        }
        out.u[j] = u;
        out.sigma[j] = s;
    }
    Ok(out)
}
