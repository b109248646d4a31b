//! Periodic grids, Fourier multipliers and Sobolev norms.
//!
//! Every spectral array is a row-major `n × n` block of complex Fourier-series
//! coefficients. Row index is the `y` frequency, column index the `x`
//! frequency, both in FFT order. Norms are per unit area, so Parseval reads
//! `mean(|f|²) = Σ|f̂|²`.

mod fft;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use fft::Fft2;

use crate::error::{Error, Result};

/// Physical constants of the Oldroyd-B system.
///
/// `alpha` weights the stress source `α𝔻(u)`, `beta` is the relaxation rate,
/// `kappa` is the stress coupling `K` in the momentum equation and `mu` the
/// stress diffusivity (zero for the non-diffusive system).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysParams {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub mu: f64,
}

impl Default for PhysParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            kappa: 1.0,
            mu: 0.0,
        }
    }
}

impl PhysParams {
    pub fn new(alpha: f64, beta: f64, kappa: f64, mu: f64) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            kappa,
            mu,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("alpha", self.alpha)?;
        positive("beta", self.beta)?;
        positive("kappa", self.kappa)?;
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "mu must be nonnegative and finite, got {}",
                self.mu
            )));
        }
        let xi_c = self.critical_wavenumber();
        if !(xi_c.is_finite() && xi_c > 0.0) {
            return Err(Error::InvalidParams(format!(
                "critical wavenumber is degenerate ({xi_c})"
            )));
        }
        Ok(())
    }

    pub fn with_mu(self, mu: f64) -> Self {
        Self { mu, ..self }
    }

    /// `ξ_c = β/√(2αK)`: the eigenvalues of the mode system turn complex above it
    /// (for `μ = 0`).
    pub fn critical_wavenumber(&self) -> f64 {
        self.beta / (2.0 * self.alpha * self.kappa).sqrt()
    }

    /// Effective damping of the stress mode at `|ξ|`: `β + μ|ξ|²`.
    pub fn damping(&self, xi: f64) -> f64 {
        self.beta + self.mu * xi * xi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    length: f64,
}

impl Grid {
    /// Default period `2π·64`, giving a wavenumber spacing of `1/64`.
    pub const DEFAULT_LENGTH: f64 = 2.0 * std::f64::consts::PI * 64.0;

    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("n must be even and >= 8, got {n}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("period must be positive, got {length}")));
        }
        Ok(Self { n, length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of modes (equal to the number of physical points).
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dk(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.length
    }

    /// Signed integer frequency of FFT slot `j`, in `(−n/2, n/2]`.
    pub fn freq(&self, j: usize) -> i64 {
        if j <= self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Integer frequencies `(kx, ky)` of mode `idx`.
    pub fn freqs(&self, idx: usize) -> (i64, i64) {
        (self.freq(idx % self.n), self.freq(idx / self.n))
    }

    pub fn mode_index(&self, kx: i64, ky: i64) -> usize {
        let n = self.n as i64;
        let col = kx.rem_euclid(n) as usize;
        let row = ky.rem_euclid(n) as usize;
        row * self.n + col
    }

    pub fn wavevector(&self, idx: usize) -> [f64; 2] {
        let (kx, ky) = self.freqs(idx);
        let dk = self.dk();
        [dk * kx as f64, dk * ky as f64]
    }

    pub fn wavenumber(&self, idx: usize) -> f64 {
        let [a, b] = self.wavevector(idx);
        a.hypot(b)
    }

    /// Index of the mode at `−ξ`.
    pub fn mirror(&self, idx: usize) -> usize {
        let n = self.n;
        let (row, col) = (idx / n, idx % n);
        ((n - row) % n) * n + (n - col) % n
    }

    pub fn is_nyquist(&self, idx: usize) -> bool {
        let h = self.n / 2;
        idx / self.n == h || idx % self.n == h
    }

    /// Largest per-axis wavenumber `(n/2)·2π/L`.
    pub fn max_wavenumber(&self) -> f64 {
        (self.n / 2) as f64 * self.dk()
    }

    pub fn physical_point(&self, idx: usize) -> [f64; 2] {
        let h = self.length / self.n as f64;
        [h * (idx % self.n) as f64, h * (idx / self.n) as f64]
    }

    pub fn zeros(&self) -> Vec<C64> {
        vec![C64::default(); self.len()]
    }

    pub fn check(&self, data: &[C64]) -> Result<()> {
        if data.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: data.len(),
            });
        }
        Ok(())
    }
}

/// Pairwise (tree) summation with a fixed split order, so the result does not
/// depend on how the terms were produced.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        v.iter().sum()
    } else {
        let mid = v.len() / 2;
        pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
    }
}

/// Largest `|f(ξ) − conj f(−ξ)|`.
pub fn hermitian_defect(grid: &Grid, f: &[C64]) -> f64 {
    (0..grid.len())
        .map(|i| (f[i] - f[grid.mirror(i)].conj()).norm())
        .fold(0.0, f64::max)
}

/// Replaces `f` by its Hermitian part `(f(ξ) + conj f(−ξ))/2`.
pub fn symmetrize_hermitian(grid: &Grid, f: &mut [C64]) {
    for i in 0..grid.len() {
        let m = grid.mirror(i);
        if m < i {
            continue;
        }
        let avg = (f[i] + f[m].conj()) * 0.5;
        f[i] = avg;
        f[m] = avg.conj();
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVectorField {
    pub grid: Grid,
    pub comps: [Vec<C64>; 2],
}

impl SpectralVectorField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            comps: [grid.zeros(), grid.zeros()],
        }
    }

    pub fn new(grid: Grid, u1: Vec<C64>, u2: Vec<C64>) -> Result<Self> {
        grid.check(&u1)?;
        grid.check(&u2)?;
        Ok(Self {
            grid,
            comps: [u1, u2],
        })
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.comps
            .iter()
            .map(|c| hermitian_defect(&self.grid, c))
            .fold(0.0, f64::max)
    }

    pub fn symmetrize(&mut self) {
        let grid = self.grid;
        self.comps.iter_mut().for_each(|c| symmetrize_hermitian(&grid, c));
    }

    /// Largest `|ξ·û(ξ)| / |ξ||û(ξ)|` over nonzero modes.
    pub fn divergence_ratio(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.grid.len() {
            let [a, b] = self.grid.wavevector(i);
            let k = a.hypot(b);
            let mag = (self.comps[0][i].norm_sqr() + self.comps[1][i].norm_sqr()).sqrt();
            if k == 0.0 || mag == 0.0 {
                continue;
            }
            let div = (self.comps[0][i] * a + self.comps[1][i] * b).norm();
            worst = worst.max(div / (k * mag));
        }
        worst
    }

    pub fn is_divergence_free(&self, tol: f64) -> bool {
        self.divergence_ratio() <= tol
    }

    /// `‖∇ᵏf‖`.
    pub fn seminorm(&self, k: u32) -> Result<f64> {
        weighted_norm(&self.grid, &[(&self.comps[0], 1.0), (&self.comps[1], 1.0)], k, k)
    }

    /// Inhomogeneous `Hᵏ` norm.
    pub fn hk_norm(&self, k: u32) -> Result<f64> {
        weighted_norm(&self.grid, &[(&self.comps[0], 1.0), (&self.comps[1], 1.0)], 0, k)
    }

    pub fn map_modes(&self, mut f: impl FnMut(usize, C64, C64) -> (C64, C64)) -> Self {
        let mut out = Self::zeros(self.grid);
        for i in 0..self.grid.len() {
            let (a, b) = f(i, self.comps[0][i], self.comps[1][i]);
            out.comps[0][i] = a;
            out.comps[1][i] = b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.map_modes(|i, a, b| (a - other.comps[0][i], b - other.comps[1][i]))
    }
}

/// Symmetric tensor stored as `(τ¹¹, τ¹², τ²²)`; `τ²¹ = τ¹²` is implied.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricTensorField {
    pub grid: Grid,
    pub comps: [Vec<C64>; 3],
}

impl SymmetricTensorField {
    /// Frobenius weights of the stored components.
    pub const WEIGHTS: [f64; 3] = [1.0, 2.0, 1.0];

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            comps: [grid.zeros(), grid.zeros(), grid.zeros()],
        }
    }

    pub fn new(grid: Grid, t11: Vec<C64>, t12: Vec<C64>, t22: Vec<C64>) -> Result<Self> {
        grid.check(&t11)?;
        grid.check(&t12)?;
        grid.check(&t22)?;
        Ok(Self {
            grid,
            comps: [t11, t12, t22],
        })
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.comps
            .iter()
            .map(|c| hermitian_defect(&self.grid, c))
            .fold(0.0, f64::max)
    }

    pub fn symmetrize(&mut self) {
        let grid = self.grid;
        self.comps.iter_mut().for_each(|c| symmetrize_hermitian(&grid, c));
    }

    fn weighted(&self) -> [(&[C64], f64); 3] {
        [
            (&self.comps[0], Self::WEIGHTS[0]),
            (&self.comps[1], Self::WEIGHTS[1]),
            (&self.comps[2], Self::WEIGHTS[2]),
        ]
    }

    /// `‖∇ᵏτ‖` with the Frobenius norm on the matrix.
    pub fn seminorm(&self, k: u32) -> Result<f64> {
        weighted_norm(&self.grid, &self.weighted(), k, k)
    }

    pub fn hk_norm(&self, k: u32) -> Result<f64> {
        weighted_norm(&self.grid, &self.weighted(), 0, k)
    }

    /// Frobenius magnitude of the coefficient matrix at mode `i`.
    pub fn mode_norm(&self, i: usize) -> f64 {
        (self.comps[0][i].norm_sqr() + 2.0 * self.comps[1][i].norm_sqr() + self.comps[2][i].norm_sqr())
            .sqrt()
    }
}

pub const MAX_SOBOLEV_ORDER: u32 = 4;

fn check_order(k: u32) -> Result<()> {
    if k > MAX_SOBOLEV_ORDER {
        return Err(Error::Precondition(format!(
            "Sobolev order {k} exceeds {MAX_SOBOLEV_ORDER}"
        )));
    }
    Ok(())
}

/// `(Σ_ξ Σ_{j=lo..=hi} |ξ|^{2j} Σ_c w_c |f_c(ξ)|²)^{1/2}`.
fn weighted_norm(grid: &Grid, comps: &[(&[C64], f64)], lo: u32, hi: u32) -> Result<f64> {
    check_order(hi)?;
    for (c, _) in comps {
        grid.check(c)?;
    }
    let terms: Vec<f64> = (0..grid.len())
        .map(|i| {
            let k2 = grid.wavenumber(i).powi(2);
            let amp: f64 = comps.iter().map(|(c, w)| w * c[i].norm_sqr()).sum();
            let weight: f64 = (lo..=hi).map(|j| k2.powi(j as i32)).sum();
            weight * amp
        })
        .collect();
    Ok(pairwise_sum(&terms).sqrt())
}

/// Homogeneous norm `‖∇ᵏf‖ = (Σ|ξ|^{2k}|f̂|²)^{1/2}` of a scalar spectrum.
pub fn sobolev_norm(grid: &Grid, f: &[C64], k: u32) -> Result<f64> {
    weighted_norm(grid, &[(f, 1.0)], k, k)
}

/// Full `Hᵏ` norm, the root of the sum of the homogeneous pieces `0..=k`.
pub fn sobolev_full_norm(grid: &Grid, f: &[C64], k: u32) -> Result<f64> {
    weighted_norm(grid, &[(f, 1.0)], 0, k)
}

/// `⟨Λᵃf, Λᵇg⟩ = Σ_ξ |ξ|^{a+b} Re(f̂·conj ĝ)` for vector fields.
pub fn cross_term(f: &SpectralVectorField, g: &SpectralVectorField, a: u32, b: u32) -> f64 {
    let grid = f.grid;
    let terms: Vec<f64> = (0..grid.len())
        .map(|i| {
            let w = grid.wavenumber(i).powi((a + b) as i32);
            let dot = f.comps[0][i] * g.comps[0][i].conj() + f.comps[1][i] * g.comps[1][i].conj();
            w * dot.re
        })
        .collect();
    pairwise_sum(&terms)
}

/// Leray projection `I − ξξᵀ/|ξ|²`; the zero mode passes through.
pub fn leray_project(v: &SpectralVectorField) -> SpectralVectorField {
    let grid = v.grid;
    v.map_modes(|i, a, b| {
        let [k1, k2] = grid.wavevector(i);
        let kk = k1 * k1 + k2 * k2;
        if kk == 0.0 {
            return (a, b);
        }
        let dot = (a * k1 + b * k2) / kk;
        (a - dot * k1, b - dot * k2)
    })
}

/// Multiplies each coefficient by `|ξ|^s` (the symbol of `Λˢ`).
pub fn lambda_power(grid: &Grid, f: &[C64], s: f64) -> Result<Vec<C64>> {
    grid.check(f)?;
    if s == 0.0 {
        return Ok(f.to_vec());
    }
    if s < 0.0 && f[0].norm() > 1e-12 {
        return Err(Error::ZeroModeSingularity { mean: f[0].norm() });
    }
    Ok((0..grid.len())
        .map(|i| {
            if i == 0 {
                C64::default()
            } else {
                f[i] * grid.wavenumber(i).powf(s)
            }
        })
        .collect())
}

/// `σ = Λ⁻¹ℙdiv τ`, i.e. `σ̂ʲ = i(δⱼₖ − ξⱼξₖ/|ξ|²)(ξₗ/|ξ|)τ̂ˡᵏ`.
///
/// The zero mode and Nyquist modes map to zero.
pub fn sigma_from_tau(tau: &SymmetricTensorField) -> SpectralVectorField {
    let grid = tau.grid;
    let mut out = SpectralVectorField::zeros(grid);
    let i_unit = C64::i();
    for i in 1..grid.len() {
        if grid.is_nyquist(i) {
            continue;
        }
        let [k1, k2] = grid.wavevector(i);
        let k = k1.hypot(k2);
        let (n1, n2) = (k1 / k, k2 / k);
        let (t11, t12, t22) = (tau.comps[0][i], tau.comps[1][i], tau.comps[2][i]);
        let w1 = t11 * n1 + t12 * n2;
        let w2 = t12 * n1 + t22 * n2;
        let along = w1 * n1 + w2 * n2;
        out.comps[0][i] = i_unit * (w1 - along * n1);
        out.comps[1][i] = i_unit * (w2 - along * n2);
    }
    out
}

/// `(div τ)ᵢ = ∂ⱼτᵢⱼ`.
pub fn tensor_divergence(tau: &SymmetricTensorField) -> SpectralVectorField {
    let grid = tau.grid;
    let mut out = SpectralVectorField::zeros(grid);
    for i in 0..grid.len() {
        if grid.is_nyquist(i) {
            continue;
        }
        let [k1, k2] = grid.wavevector(i);
        let (t11, t12, t22) = (tau.comps[0][i], tau.comps[1][i], tau.comps[2][i]);
        out.comps[0][i] = C64::i() * (t11 * k1 + t12 * k2);
        out.comps[1][i] = C64::i() * (t12 * k1 + t22 * k2);
    }
    out
}

/// Symmetric part of the velocity gradient, `𝔻(u) = ½(∇u + ∇uᵀ)`.
pub fn deformation(u: &SpectralVectorField) -> SymmetricTensorField {
    let grid = u.grid;
    let mut out = SymmetricTensorField::zeros(grid);
    for i in 0..grid.len() {
        if grid.is_nyquist(i) {
            continue;
        }
        let [k1, k2] = grid.wavevector(i);
        let (u1, u2) = (u.comps[0][i], u.comps[1][i]);
        out.comps[0][i] = C64::i() * u1 * k1;
        out.comps[1][i] = C64::i() * (u2 * k1 + u1 * k2) * 0.5;
        out.comps[2][i] = C64::i() * u2 * k2;
    }
    out
}

/// Smooth low-pass cutoff `φ₀`: one on `|ξ| ≤ R/2`, zero on `|ξ| ≥ R`, joined by
/// the exponential bump bridge `ψ(R−r)/(ψ(R−r) + ψ(r−R/2))`, `ψ(s) = e^{−1/s}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyCutoff {
    radius: f64,
}

fn bump(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

impl FrequencyCutoff {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Precondition(format!("cutoff radius must be positive, got {radius}")));
        }
        Ok(Self { radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn weight(&self, r: f64) -> f64 {
        let r_outer = self.radius;
        let r_inner = 0.5 * self.radius;
        if r <= r_inner {
            1.0
        } else if r >= r_outer {
            0.0
        } else {
            let a = bump(r_outer - r);
            let b = bump(r - r_inner);
            a / (a + b)
        }
    }

    /// `(fˡ, fʰ)` with `fˡ = φ₀f̂` and `fʰ = f̂ − fˡ`.
    pub fn split(&self, grid: &Grid, f: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let low: Vec<C64> = (0..grid.len())
            .map(|i| f[i] * self.weight(grid.wavenumber(i)))
            .collect();
        let high = f.iter().zip(&low).map(|(a, b)| a - b).collect();
        (low, high)
    }

    /// `(ũˡ, ũʰ)` with `ũʰ = (1 − φ₀)²û` and `ũˡ = û − ũʰ`.
    pub fn split_squared(&self, grid: &Grid, f: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let high: Vec<C64> = (0..grid.len())
            .map(|i| f[i] * (1.0 - self.weight(grid.wavenumber(i))).powi(2))
            .collect();
        let low = f.iter().zip(&high).map(|(a, b)| a - b).collect();
        (low, high)
    }

    pub fn high_vector(&self, v: &SpectralVectorField) -> SpectralVectorField {
        let grid = v.grid;
        v.map_modes(|i, a, b| {
            let w = 1.0 - self.weight(grid.wavenumber(i));
            (a * w, b * w)
        })
    }
}
