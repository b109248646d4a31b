//! Whole-plane decay of the linear propagator for radial initial data.
//!
//! For radial profiles `û₀(|ξ|)`, `σ̂₀(|ξ|)` the weighted norms
//! `‖∇ᵏu(t)‖²` and `‖∇ᵏσ(t)‖²` reduce to one-dimensional integrals
//! `2π∫₀^∞ r^{2k+1}|ŵ(r,t)|² dr`, which are evaluated by adaptive quadrature.
//! Log–log fits of the resulting series expose the `(1+t)^{-1/2-k/2}` (velocity)
//! and `(1+t)^{-1-k/2}` (stress) exponents.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::propagator::{constants, eigenvalues, green_eval, ModeState};
use crate::quadrature::{integrate, QuadOptions};
use crate::spectral::PhysParams;

pub type RadialProfile = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    #[serde(rename = "u")]
    Velocity,
    #[serde(rename = "sigma")]
    Stress,
}

impl Branch {
    pub fn name(&self) -> &'static str {
        match self {
            Branch::Velocity => "u",
            Branch::Stress => "sigma",
        }
    }

    /// Predicted decay exponent of `‖∇ᵏ·‖` on this branch.
    pub fn predicted_exponent(&self, k: u32) -> f64 {
        let base = match self {
            Branch::Velocity => -0.5,
            Branch::Stress => -1.0,
        };
        base - 0.5 * k as f64
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone)]
pub struct InitialProfile {
    u_hat0: RadialProfile,
    sigma_hat0: RadialProfile,
    c2: f64,
    r_prime: f64,
}

impl fmt::Debug for InitialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialProfile")
            .field("c2", &self.c2)
            .field("r_prime", &self.r_prime)
            .finish_non_exhaustive()
    }
}

impl InitialProfile {
    /// Builds a profile; `c2 = |û₀(0)|` and `R′` (the radius up to which
    /// `|û₀| ≥ c2/2`, capped at `radius`) are derived by scanning.
    pub fn new(u_hat0: RadialProfile, sigma_hat0: RadialProfile, radius: f64) -> Result<Self> {
        let c2 = u_hat0(0.0).norm();
        if !c2.is_finite() || !sigma_hat0(0.0).norm().is_finite() {
            return Err(Error::Precondition("initial profile is not finite at 0".into()));
        }
        let mut r_prime = 0.0;
        if c2 > 0.0 {
            const SCAN: usize = 4096;
            for j in 1..=SCAN {
                let r = radius * j as f64 / SCAN as f64;
                if u_hat0(r).norm() < 0.5 * c2 {
                    break;
                }
                r_prime = r;
            }
        }
        Ok(Self {
            u_hat0,
            sigma_hat0,
            c2,
            r_prime,
        })
    }

    /// `û₀ = a·e^{−(r/w)²}`, `σ̂₀ = b·e^{−(r/v)²}`.
    pub fn gaussian(u_amp: f64, u_width: f64, s_amp: f64, s_width: f64, radius: f64) -> Result<Self> {
        if !(u_width > 0.0 && s_width > 0.0) {
            return Err(Error::Precondition("Gaussian widths must be positive".into()));
        }
        Self::new(
            Arc::new(move |r: f64| C64::new(u_amp * (-(r / u_width).powi(2)).exp(), 0.0)),
            Arc::new(move |r: f64| C64::new(s_amp * (-(r / s_width).powi(2)).exp(), 0.0)),
            radius,
        )
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn r_prime(&self) -> f64 {
        self.r_prime
    }

    pub fn u_hat0(&self, r: f64) -> C64 {
        (self.u_hat0)(r)
    }

    pub fn sigma_hat0(&self, r: f64) -> C64 {
        (self.sigma_hat0)(r)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    /// Each base interval is split into this many equal panels before
    /// adaptive refinement starts.
    pub subdivisions: usize,
    /// Vertical truncation as a multiple of the critical wavenumber.
    pub xi_max_factor: f64,
    /// Integrand envelope level (relative to its peak) treated as zero.
    pub envelope_floor: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            subdivisions: 1,
            xi_max_factor: 8.0,
            envelope_floor: 1e-30,
        }
    }
}

fn branch_value(p: &PhysParams, ic: &InitialProfile, branch: Branch, r: f64, t: f64) -> Result<C64> {
    let m = ModeState {
        u: [ic.u_hat0(r), C64::default()],
        sigma: [ic.sigma_hat0(r), C64::default()],
        xi: r,
    };
    let g = green_eval(p, r, t)?;
    let out = crate::propagator::apply_green(p, &g, &m);
    Ok(match branch {
        Branch::Velocity => out.u[0],
        Branch::Stress => out.sigma[0],
    })
}

fn upper_limit(p: &PhysParams, ic: &InitialProfile, k: u32, t: f64, cfg: &QuadratureConfig) -> f64 {
    const SCAN: usize = 4096;
    let top = cfg.xi_max_factor * p.critical_wavenumber();
    let coupling = p.kappa.max(0.5 * p.alpha);
    let envelope = |r: f64| {
        let amp = (ic.u_hat0(r).norm() + ic.sigma_hat0(r).norm()) * (1.0 + coupling * r);
        let decay = (eigenvalues(p, r).0.re * t).exp();
        r.powi(2 * k as i32 + 1) * (amp * decay).powi(2)
    };
    let values: Vec<f64> = (0..=SCAN).map(|j| envelope(top * j as f64 / SCAN as f64)).collect();
    let peak = values.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return top;
    }
    match values.iter().rposition(|&v| v >= cfg.envelope_floor * peak) {
        Some(j) if j < SCAN => top * (j + 1) as f64 / SCAN as f64,
        _ => top,
    }
}

/// `(2π∫₀^∞ r^{2k+1}|ŵ(r,t)|² dr)^{1/2}` where `ŵ` is the chosen branch of the
/// linearly propagated profile.
pub fn linear_norm_quadrature(
    p: &PhysParams,
    ic: &InitialProfile,
    k: u32,
    branch: Branch,
    t: f64,
) -> Result<f64> {
    linear_norm_quadrature_with(p, ic, k, branch, t, &QuadratureConfig::default())
}

pub fn linear_norm_quadrature_with(
    p: &PhysParams,
    ic: &InitialProfile,
    k: u32,
    branch: Branch,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let upper = upper_limit(p, ic, k, t, cfg);
    let sc = constants(p);
    let mut marks = vec![0.0, upper, sc.radius, sc.xi_c];
    if t > 0.0 {
        let scale = 1.0 / (sc.theta * t).sqrt();
        marks.extend([0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0].iter().map(|c| c * scale));
    }
    marks.retain(|&x| x >= 0.0 && x <= upper);
    marks.sort_by(f64::total_cmp);
    marks.dedup();
    let subdivisions = cfg.subdivisions.max(1);
    let mut breakpoints = Vec::with_capacity(marks.len() * subdivisions);
    for w in marks.windows(2) {
        for j in 0..subdivisions {
            breakpoints.push(w[0] + (w[1] - w[0]) * j as f64 / subdivisions as f64);
        }
    }
    breakpoints.push(upper);

    let weight = 2 * k as i32 + 1;
    let integrand = |r: f64| {
        branch_value(p, ic, branch, r, t)
            .map(|w| r.powi(weight) * w.norm_sqr())
            .unwrap_or(f64::NAN)
    };
    let res = integrate(
        integrand,
        &breakpoints,
        QuadOptions {
            rel_tol: cfg.rel_tol,
            ..QuadOptions::default()
        },
    )?;
    Ok((2.0 * std::f64::consts::PI * res.value).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub k: u32,
    pub branch: Branch,
}

impl DecaySeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>, k: u32, branch: Branch) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                got: values.len(),
            });
        }
        let increasing = times.windows(2).all(|w| w[1] > w[0]);
        let positive = values.iter().all(|v| *v > 0.0 && v.is_finite())
            && times.iter().all(|t| *t >= 0.0 && t.is_finite());
        if !increasing || !positive {
            return Err(Error::InvalidSeries);
        }
        Ok(Self {
            times,
            values,
            k,
            branch,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn window(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times
            .iter()
            .zip(&self.values)
            .filter(move |(t, _)| **t >= lo && **t <= hi)
            .map(|(t, v)| (*t, *v))
    }
}

/// `count` log-spaced times on `[lo, hi]`.
pub fn log_times(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|j| {
            if j + 1 == count {
                hi
            } else {
                (a + (b - a) * j as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

/// Evaluates the quadrature norm at each time (in parallel) and packs the series.
pub fn decay_series(
    p: &PhysParams,
    ic: &InitialProfile,
    k: u32,
    branch: Branch,
    times: &[f64],
    cfg: &QuadratureConfig,
) -> Result<DecaySeries> {
    let values = times
        .par_iter()
        .map(|&t| linear_norm_quadrature_with(p, ic, k, branch, t, cfg))
        .collect::<Result<Vec<f64>>>()?;
    DecaySeries::new(times.to_vec(), values, k, branch)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub k: u32,
    pub branch: Branch,
    pub slope: f64,
    pub stderr: f64,
    pub window: [f64; 2],
}

pub const MIN_FIT_SAMPLES: usize = 10;

/// Least-squares slope of `ln v` against `ln(1+t)` on `[t_lo, t_hi]`.
pub fn fit_decay_exponent(s: &DecaySeries, window: [f64; 2]) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = s
        .window(window[0], window[1])
        .map(|(t, v)| ((1.0 + t).ln(), v.ln()))
        .collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(Error::TooFewSamples {
            got: pts.len(),
            need: MIN_FIT_SAMPLES,
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let stderr = (rss / (n - 2.0) / sxx).sqrt();
    Ok(DecayFit {
        k: s.k,
        branch: s.branch,
        slope,
        stderr,
        window,
    })
}

/// Extremes of `v(t)·(1+t)^{−exponent}` over samples with `t ≥ t1`.
pub fn lower_bound_ratio(s: &DecaySeries, exponent: f64, t1: f64) -> Result<(f64, f64)> {
    let ratios: Vec<f64> = s
        .window(t1, f64::INFINITY)
        .map(|(t, v)| v * (1.0 + t).powf(-exponent))
        .collect();
    if ratios.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((min, max))
}

pub const SERIES_CSV_HEADER: &str = "t,value,k,branch";

pub fn write_series_csv<W: Write>(mut out: W, series: &[DecaySeries]) -> Result<()> {
    writeln!(out, "{SERIES_CSV_HEADER}")?;
    for s in series {
        for (t, v) in s.times.iter().zip(&s.values) {
            writeln!(out, "{},{},{},{}", fmt_f64(*t), fmt_f64(*v), s.k, s.branch)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn power_series(times: &[f64], f: impl Fn(f64) -> f64) -> DecaySeries {
        DecaySeries::new(times.to_vec(), times.iter().map(|&t| f(t)).collect(), 0, Branch::Velocity)
            .unwrap()
    }

    #[test]
    fn fit_exact_power_laws() {
        let times = log_times(1.0, 1e4, 30);
        let s = power_series(&times, |t| (1.0 + t).powf(-0.5));
        let fit = fit_decay_exponent(&s, [1.0, 1e4]).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        let s = power_series(&times, |t| (1.0 + t).powi(-2));
        let fit = fit_decay_exponent(&s, [1.0, 1e4]).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-12);
    }

    #[test]
    fn fit_needs_ten_samples() {
        let times = log_times(1.0, 10.0, 9);
        let s = power_series(&times, |t| 1.0 / (1.0 + t));
        assert!(matches!(
            fit_decay_exponent(&s, [0.0, 100.0]),
            Err(Error::TooFewSamples { got: 9, need: 10 })
        ));
    }

    #[test]
    fn series_validation() {
        assert!(DecaySeries::new(vec![1.0, 0.5], vec![1.0, 1.0], 0, Branch::Velocity).is_err());
        assert!(DecaySeries::new(vec![1.0, 2.0], vec![1.0, 0.0], 0, Branch::Velocity).is_err());
    }

    #[test]
    fn ratio_examples() {
        let times = log_times(1.0, 1e3, 20);
        let s = power_series(&times, |t| (1.0 + t).powf(-0.5));
        let (lo, hi) = lower_bound_ratio(&s, -0.5, 0.0).unwrap();
        assert_relative_eq!(lo, 1.0, max_relative = 1e-14);
        assert_relative_eq!(hi, 1.0, max_relative = 1e-14);

        let s = power_series(&times, |t| 2.0 * (1.0 + t).powf(-0.5) + (1.0 + t).powf(-1.5));
        let (lo, hi) = lower_bound_ratio(&s, -0.5, 1.0).unwrap();
        assert!(lo >= 2.0 && hi <= 3.0);
        assert!(matches!(lower_bound_ratio(&s, -0.5, 1e6), Err(Error::EmptyWindow)));
    }

    #[test]
    fn stress_gaussian_at_zero_time() {
        // ∫ |e^{-r²}|² d²ξ = 2π·∫ r e^{-2r²} dr = π/2
        let p = PhysParams::default();
        let ic = InitialProfile::gaussian(0.0, 1.0, 1.0, 1.0, 0.5).unwrap();
        let v = linear_norm_quadrature(&p, &ic, 0, Branch::Stress, 0.0).unwrap();
        assert_relative_eq!(v, (std::f64::consts::PI / 2.0).sqrt(), max_relative = 1e-10);
        assert_eq!(ic.c2(), 0.0);
    }

    #[test]
    fn decoupled_velocity_is_frozen() {
        let p = PhysParams::new(1e-12, 1.0, 1e-12, 0.0).unwrap();
        let ic = InitialProfile::gaussian(1.0, 1.0, 0.0, 1.0, 0.5).unwrap();
        let cfg = QuadratureConfig {
            // ξ_c is huge here; cap the range where the Gaussian is negligible.
            xi_max_factor: 8.0 / p.critical_wavenumber(),
            ..QuadratureConfig::default()
        };
        let v0 = linear_norm_quadrature_with(&p, &ic, 0, Branch::Velocity, 0.0, &cfg).unwrap();
        let v1 = linear_norm_quadrature_with(&p, &ic, 0, Branch::Velocity, 1e3, &cfg).unwrap();
        assert_relative_eq!(v0, v1, max_relative = 1e-9);
    }

    #[test]
    fn velocity_ratio_between_decades() {
        let p = PhysParams::default();
        let ic = InitialProfile::gaussian(1.0, 1.0, 0.0, 1.0, 0.5).unwrap();
        let a = linear_norm_quadrature(&p, &ic, 0, Branch::Velocity, 1e3).unwrap();
        let b = linear_norm_quadrature(&p, &ic, 0, Branch::Velocity, 1e4).unwrap();
        let ratio = b / a;
        let predicted = 10f64.powf(-0.5);
        assert!((ratio / predicted - 1.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn r_prime_for_gaussian() {
        let ic = InitialProfile::gaussian(2.0, 0.2, 0.0, 1.0, 0.5).unwrap();
        assert_eq!(ic.c2(), 2.0);
        assert!((ic.r_prime() - 0.2 * 2f64.ln().sqrt()).abs() < 0.5 / 4096.0 + 1e-12);
        let wide = InitialProfile::gaussian(1.0, 10.0, 0.0, 1.0, 0.5).unwrap();
        assert_eq!(wide.r_prime(), 0.5);
    }

    #[test]
    fn csv_layout() {
        let s = DecaySeries::new(vec![1.0, 2.0], vec![0.5, 0.25], 2, Branch::Stress).unwrap();
        let mut buf = Vec::new();
        write_series_csv(&mut buf, &[s]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,value,k,branch");
        assert_eq!(lines[1], "1.0000000000000000e0,5.0000000000000000e-1,2,sigma");
    }
}
