//! Integrating-factor Runge–Kutta evolution of `(u, τ)` on the periodic grid.
//!
//! The stress relaxation and diffusion `−(β + μ|ξ|²)τ̂` are integrated exactly
//! through the factor `e^{−(β+μ|ξ|²)h}`; the coupling terms `K div τ`,
//! `α𝔻(u)` and both transports are advanced explicitly. Quadratic products
//! are formed in physical space from 2/3-truncated spectra, written in
//! divergence form `div(u⊗u)`, `div(u⊗τ)`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monitors::{EnergyReport, EtaCoefficients, Monitor};
use crate::spectral::{
    pairwise_sum, symmetrize_hermitian, Fft2, Grid, PhysParams, SpectralVectorField,
    SymmetricTensorField,
};

/// Number of stored field components: `u¹, u², τ¹¹, τ¹², τ²²`.
pub const COMPONENTS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub u: SpectralVectorField,
    pub tau: SymmetricTensorField,
    pub t: f64,
    pub params: PhysParams,
}

impl SimState {
    pub fn zeros(grid: Grid, params: PhysParams) -> Self {
        Self {
            u: SpectralVectorField::zeros(grid),
            tau: SymmetricTensorField::zeros(grid),
            t: 0.0,
            params,
        }
    }

    /// Builds an initial state: `u` is Leray-projected and every component is
    /// made Hermitian.
    pub fn from_fields(u: SpectralVectorField, tau: SymmetricTensorField, params: PhysParams) -> Result<Self> {
        params.validate()?;
        if u.grid != tau.grid {
            return Err(Error::Precondition("u and tau live on different grids".into()));
        }
        let mut u = crate::spectral::leray_project(&u);
        u.symmetrize();
        let mut tau = tau;
        tau.symmetrize();
        Ok(Self {
            u,
            tau,
            t: 0.0,
            params,
        })
    }

    pub fn grid(&self) -> Grid {
        self.u.grid
    }

    pub fn components(&self) -> [&Vec<C64>; COMPONENTS] {
        [
            &self.u.comps[0],
            &self.u.comps[1],
            &self.tau.comps[0],
            &self.tau.comps[1],
            &self.tau.comps[2],
        ]
    }

    /// `(‖u‖²_{H³} + ‖τ‖²_{H³})^{1/2}`.
    pub fn h3_norm(&self) -> f64 {
        let u = self.u.hk_norm(3).unwrap_or(f64::NAN);
        let tau = self.tau.hk_norm(3).unwrap_or(f64::NAN);
        u.hypot(tau)
    }

    /// Checks solenoidality, Hermitian symmetry and finiteness.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        if !self.h3_norm().is_finite() {
            return Err(Error::BlowUp { t: self.t });
        }
        let div = self.u.divergence_ratio();
        if div > tol {
            return Err(Error::Precondition(format!("velocity divergence ratio {div:e}")));
        }
        let herm = self.u.hermitian_defect().max(self.tau.hermitian_defect());
        if herm > tol {
            return Err(Error::Precondition(format!("Hermitian defect {herm:e}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepConfig {
    pub dt: f64,
    pub dealias_fraction: f64,
    /// Order of the integrating-factor Runge–Kutta scheme (2 or 4).
    pub order: u32,
    /// `false` drops both transport terms, leaving the linear coupled system.
    pub nonlinear: bool,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            dt: 1e-2,
            dealias_fraction: 2.0 / 3.0,
            order: 4,
            nonlinear: true,
        }
    }
}

impl StepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.dealias_fraction > 0.0 && self.dealias_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "dealias_fraction must lie in (0, 1], got {}",
                self.dealias_fraction
            )));
        }
        if self.order != 2 && self.order != 4 {
            return Err(Error::Config(format!("scheme order must be 2 or 4, got {}", self.order)));
        }
        Ok(())
    }
}

/// Five spectral components stacked for Runge–Kutta arithmetic.
#[derive(Clone)]
struct Stack([Vec<C64>; COMPONENTS]);

impl Stack {
    fn from_state(s: &SimState) -> Self {
        let [a, b, c, d, e] = s.components();
        Stack([a.clone(), b.clone(), c.clone(), d.clone(), e.clone()])
    }

    fn into_state(self, template: &SimState, t: f64) -> SimState {
        let grid = template.grid();
        let [a, b, c, d, e] = self.0;
        SimState {
            u: SpectralVectorField { grid, comps: [a, b] },
            tau: SymmetricTensorField {
                grid,
                comps: [c, d, e],
            },
            t,
            params: template.params,
        }
    }

    /// `self + h·k`, with the stress components multiplied by `factor` afterwards.
    fn combine(&self, k: &Stack, h: f64, factor: Option<&[f64]>) -> Stack {
        let mut out = self.clone();
        for (c, (dst, src)) in out.0.iter_mut().zip(&k.0).enumerate() {
            for (i, (x, y)) in dst.iter_mut().zip(src).enumerate() {
                *x += y * h;
                if let (Some(f), true) = (factor, c >= 2) {
                    *x *= f[i];
                }
            }
        }
        out
    }

    fn scale_stress(&mut self, factor: &[f64]) {
        for comp in &mut self.0[2..] {
            comp.iter_mut().zip(factor).for_each(|(x, f)| *x *= f);
        }
    }
}

struct Wave {
    k1: Vec<f64>,
    k2: Vec<f64>,
    kk: Vec<f64>,
    keep: Vec<bool>,
}

pub struct Solver {
    grid: Grid,
    fft: Fft2,
    config: StepConfig,
    wave: Wave,
}

impl std::fmt::Debug for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Solver")
            .field("grid", &self.grid)
            .field("config", &self.config)
            .finish()
    }
}

/// Outcome of a driver run; `error` is set when the run stopped early.
#[derive(Debug)]
pub struct RunOutcome {
    pub samples: Vec<(f64, EnergyReport)>,
    pub last_state: SimState,
    pub error: Option<Error>,
}

impl Solver {
    pub fn new(grid: Grid, config: StepConfig) -> Result<Self> {
        config.validate()?;
        // Largest retained per-axis index strictly below fraction·n/2.
        let limit = config.dealias_fraction * grid.n() as f64 / 2.0;
        let kmax = (limit.ceil() as i64 - 1).max(0);
        let len = grid.len();
        let mut wave = Wave {
            k1: Vec::with_capacity(len),
            k2: Vec::with_capacity(len),
            kk: Vec::with_capacity(len),
            keep: Vec::with_capacity(len),
        };
        for i in 0..len {
            let [a, b] = grid.wavevector(i);
            let (fx, fy) = grid.freqs(i);
            let nyq = grid.is_nyquist(i);
            wave.k1.push(if nyq { 0.0 } else { a });
            wave.k2.push(if nyq { 0.0 } else { b });
            wave.kk.push(a * a + b * b);
            wave.keep.push(fx.abs() <= kmax && fy.abs() <= kmax);
        }
        Ok(Self {
            grid,
            fft: Fft2::new(&grid),
            config,
            wave,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn config(&self) -> &StepConfig {
        &self.config
    }

    pub fn is_retained(&self, idx: usize) -> bool {
        self.wave.keep[idx]
    }

    /// Zeroes modes outside the retained band.
    pub fn dealias(&self, f: &mut [C64]) {
        for (x, keep) in f.iter_mut().zip(&self.wave.keep) {
            if !keep {
                *x = C64::default();
            }
        }
    }

    /// Projects, symmetrizes and truncates an initial state to the retained band.
    pub fn prepare(&self, mut s: SimState) -> Result<SimState> {
        if s.grid() != self.grid {
            return Err(Error::Precondition("state grid does not match solver grid".into()));
        }
        if self.config.nonlinear {
            for c in s.u.comps.iter_mut().chain(s.tau.comps.iter_mut()) {
                self.dealias(c);
            }
        }
        let params = s.params;
        let t = s.t;
        let mut out = SimState::from_fields(s.u, s.tau, params)?;
        out.t = t;
        Ok(out)
    }

    fn check_state(&self, s: &SimState) -> Result<()> {
        if s.grid() != self.grid {
            return Err(Error::Precondition("state grid does not match solver grid".into()));
        }
        Ok(())
    }

    /// Physical velocity components and the largest speed.
    fn velocity(&self, u1: &[C64], u2: &[C64]) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let (a, b) = self.fft.inverse_pair(u1, u2)?;
        let vmax = a.iter().zip(&b).map(|(x, y)| x * x + y * y).fold(0.0, f64::max).sqrt();
        Ok((a, b, vmax))
    }

    /// Transport terms `(−ℙ(u·∇u), −u·∇τ)` in spectral form, and the largest
    /// physical speed.
    fn transport(&self, st: &Stack, t: f64) -> Result<(Stack, f64)> {
        let [u1h, u2h, t11h, t12h, t22h] = &st.0;
        let (u1, u2, vmax) = self.velocity(u1h, u2h)?;
        let (t11, t12) = self.fft.inverse_pair(t11h, t12h)?;
        let t22 = self.fft.inverse_real(t22h)?;

        let prod = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x * y).collect() };
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !(finite(&u1) && finite(&u2) && finite(&t11) && finite(&t12) && finite(&t22)) {
            return Err(Error::BlowUp { t });
        }

        let (a11, a12) = self.fft.forward_pair(&prod(&u1, &u1), &prod(&u1, &u2))?;
        let (a22, b111) = self.fft.forward_pair(&prod(&u2, &u2), &prod(&u1, &t11))?;
        let (b112, b122) = self.fft.forward_pair(&prod(&u1, &t12), &prod(&u1, &t22))?;
        let (b211, b212) = self.fft.forward_pair(&prod(&u2, &t11), &prod(&u2, &t12))?;
        let b222 = self.fft.forward_real(&prod(&u2, &t22))?;

        let len = self.grid.len();
        let mut out = Stack(std::array::from_fn(|_| vec![C64::default(); len]));
        let w = &self.wave;
        let mi = C64::new(0.0, -1.0);
        for i in 0..len {
            if !w.keep[i] {
                continue;
            }
            let (k1, k2) = (w.k1[i], w.k2[i]);
            let n1 = mi * (a11[i] * k1 + a12[i] * k2);
            let n2 = mi * (a12[i] * k1 + a22[i] * k2);
            let (p1, p2) = project(n1, n2, k1, k2, w.kk[i]);
            out.0[0][i] = p1;
            out.0[1][i] = p2;
            out.0[2][i] = mi * (b111[i] * k1 + b211[i] * k2);
            out.0[3][i] = mi * (b112[i] * k1 + b212[i] * k2);
            out.0[4][i] = mi * (b122[i] * k1 + b222[i] * k2);
        }
        if out.0.iter().flatten().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::BlowUp { t });
        }
        Ok((out, vmax))
    }

    /// Explicit right-hand side: coupling `(Kℙdiv τ, α𝔻(u))` plus transport
    /// when enabled. The stress damping is excluded.
    fn explicit_rhs(&self, p: &PhysParams, st: &Stack, t: f64) -> Result<(Stack, f64)> {
        let (mut out, vmax) = if self.config.nonlinear {
            self.transport(st, t)?
        } else {
            let (_, _, vmax) = self.velocity(&st.0[0], &st.0[1])?;
            (
                Stack(std::array::from_fn(|_| vec![C64::default(); self.grid.len()])),
                vmax,
            )
        };
        let w = &self.wave;
        let iu = C64::i();
        let [u1, u2, t11, t12, t22] = &st.0;
        for i in 0..self.grid.len() {
            let (k1, k2) = (w.k1[i], w.k2[i]);
            let d1 = iu * (t11[i] * k1 + t12[i] * k2) * p.kappa;
            let d2 = iu * (t12[i] * k1 + t22[i] * k2) * p.kappa;
            let (d1, d2) = project(d1, d2, k1, k2, w.kk[i]);
            out.0[0][i] += d1;
            out.0[1][i] += d2;
            out.0[2][i] += iu * u1[i] * (k1 * p.alpha);
            out.0[3][i] += iu * (u2[i] * k1 + u1[i] * k2) * (0.5 * p.alpha);
            out.0[4][i] += iu * u2[i] * (k2 * p.alpha);
        }
        Ok((out, vmax))
    }

    fn damping_factors(&self, p: &PhysParams, h: f64) -> Vec<f64> {
        self.wave
            .kk
            .iter()
            .map(|kk| (-(p.beta + p.mu * kk) * h).exp())
            .collect()
    }

    /// `(−ℙ(u·∇u), −u·∇τ)` for the state, both in dealiased spectral form.
    pub fn nonlinear_terms(&self, s: &SimState) -> Result<(SpectralVectorField, SymmetricTensorField)> {
        self.check_state(s)?;
        let (out, _) = self.transport(&Stack::from_state(s), s.t)?;
        let st = out.into_state(s, s.t);
        Ok((st.u, st.tau))
    }

    /// `dE/dt` of `E = ½(α‖u‖² + K‖τ‖²)` from the semi-discrete right-hand side,
    /// along with the dissipation `βK‖τ‖² + μK‖∇τ‖²`.
    pub fn energy_rate(&self, s: &SimState) -> Result<(f64, f64)> {
        self.check_state(s)?;
        let p = s.params;
        let st = Stack::from_state(s);
        let (rhs, _) = self.explicit_rhs(&p, &st, s.t)?;
        let weights = [p.alpha, p.alpha, p.kappa, 2.0 * p.kappa, p.kappa];
        let mut terms = Vec::with_capacity(self.grid.len());
        let mut diss = Vec::with_capacity(self.grid.len());
        for i in 0..self.grid.len() {
            let damp = p.beta + p.mu * self.wave.kk[i];
            let mut rate = 0.0;
            let mut loss = 0.0;
            #[allow(clippy::needless_range_loop)]
            for c in 0..COMPONENTS {
                let x = st.0[c][i];
                let mut dx = rhs.0[c][i];
                if c >= 2 {
                    dx -= x * damp;
                    loss += weights[c] * damp * x.norm_sqr();
                }
                rate += weights[c] * (x.conj() * dx).re;
            }
            terms.push(rate);
            diss.push(loss);
        }
        Ok((pairwise_sum(&terms), pairwise_sum(&diss)))
    }

    /// Diagnostic pressure from `−Δp = div(u·∇u) − K div div τ` (zero mean).
    pub fn pressure(&self, s: &SimState) -> Result<Vec<C64>> {
        self.check_state(s)?;
        let (u1, u2, _) = self.velocity(&s.u.comps[0], &s.u.comps[1])?;
        let prod = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x * y).collect() };
        let (a11, a12) = self.fft.forward_pair(&prod(&u1, &u1), &prod(&u1, &u2))?;
        let a22 = self.fft.forward_real(&prod(&u2, &u2))?;
        let w = &self.wave;
        let p = s.params;
        let mut out = self.grid.zeros();
        for (i, x) in out.iter_mut().enumerate().skip(1) {
            let (k1, k2, kk) = (w.k1[i], w.k2[i], w.kk[i]);
            // div(u·∇u) = ∂ᵢ∂ⱼ(uᵢuⱼ) → −ξᵢξⱼ(uᵢuⱼ)^
            let ddu = -(a11[i] * (k1 * k1) + a12[i] * (2.0 * k1 * k2) + a22[i] * (k2 * k2));
            let ddt = -(s.tau.comps[0][i] * (k1 * k1)
                + s.tau.comps[1][i] * (2.0 * k1 * k2)
                + s.tau.comps[2][i] * (k2 * k2));
            if kk > 0.0 {
                *x = (ddu - ddt * p.kappa) / kk;
            }
        }
        Ok(out)
    }

    /// One integrating-factor Runge–Kutta step of size `config.dt`.
    pub fn step(&self, s: &SimState) -> Result<SimState> {
        self.check_state(s)?;
        let p = s.params;
        let h = self.config.dt;
        let v0 = Stack::from_state(s);
        let (k1, vmax) = self.explicit_rhs(&p, &v0, s.t)?;
        let kmax = self.grid.max_wavenumber();
        if h * vmax * kmax > 0.5 {
            return Err(Error::Cfl {
                dt: h,
                suggested: 0.5 / (vmax * kmax),
            });
        }
        let full = self.damping_factors(&p, h);

        let next = match self.config.order {
            2 => {
                let k2 = self.explicit_rhs(&p, &v0.combine(&k1, h, Some(&full)), s.t + h)?.0;
                let mut base = v0.combine(&k1, 0.5 * h, Some(&full));
                for c in 0..COMPONENTS {
                    for (x, y) in base.0[c].iter_mut().zip(&k2.0[c]) {
                        *x += y * (0.5 * h);
                    }
                }
                base
            }
            _ => {
                let half = self.damping_factors(&p, 0.5 * h);
                let k2 = self
                    .explicit_rhs(&p, &v0.combine(&k1, 0.5 * h, Some(&half)), s.t + 0.5 * h)?
                    .0;
                let mut v2 = v0.clone();
                v2.scale_stress(&half);
                let k3 = self.explicit_rhs(&p, &v2.combine(&k2, 0.5 * h, None), s.t + 0.5 * h)?.0;
                let mut k3h = k3.clone();
                k3h.scale_stress(&half);
                let mut v3 = v0.clone();
                v3.scale_stress(&full);
                let k4 = self.explicit_rhs(&p, &v3.combine(&k3h, h, None), s.t + h)?.0;

                // E(h)v₀ + h/6·(E(h)k₁ + 2E(h/2)(k₂ + k₃) + k₄)
                let mut out = v0.clone();
                for c in 0..COMPONENTS {
                    let stress = c >= 2;
                    for i in 0..self.grid.len() {
                        let (ef, eh) = if stress { (full[i], half[i]) } else { (1.0, 1.0) };
                        out.0[c][i] = v0.0[c][i] * ef
                            + (k1.0[c][i] * ef + (k2.0[c][i] + k3.0[c][i]) * (2.0 * eh) + k4.0[c][i])
                                * (h / 6.0);
                    }
                }
                out
            }
        };

        let mut out = next.into_state(s, s.t + h);
        out.u = crate::spectral::leray_project(&out.u);
        for c in out.u.comps.iter_mut().chain(out.tau.comps.iter_mut()) {
            symmetrize_hermitian(&self.grid, c);
        }
        if !out.h3_norm().is_finite() {
            return Err(Error::BlowUp { t: out.t });
        }
        Ok(out)
    }

    /// Advances to `horizon`, calling `observer` at `t = 0` and every
    /// `sample_every`. Returns the final state or the first error together with
    /// the last good state.
    pub fn advance_with(
        &self,
        s0: &SimState,
        horizon: f64,
        sample_every: f64,
        mut observer: impl FnMut(&SimState) -> Result<()>,
    ) -> std::result::Result<SimState, (Error, SimState)> {
        let dt = self.config.dt;
        let steps = match steps_for(horizon, dt).and_then(|n| {
            let every = if horizon == 0.0 { 1 } else { steps_for(sample_every, dt)? };
            if every == 0 {
                return Err(Error::Config("sample interval must be positive".into()));
            }
            Ok((n, every))
        }) {
            Ok(v) => v,
            Err(e) => return Err((e, s0.clone())),
        };
        let (total, every) = steps;
        let mut state = s0.clone();
        if let Err(e) = observer(&state) {
            return Err((e, state));
        }
        for j in 1..=total {
            match self.step(&state) {
                Ok(mut next) => {
                    // Time stamps are integer multiples of dt.
                    next.t = s0.t + j as f64 * dt;
                    state = next;
                }
                Err(e) => return Err((e, state)),
            }
            if j % every == 0 {
                if let Err(e) = observer(&state) {
                    return Err((e, state));
                }
            }
        }
        Ok(state)
    }

    /// Driver loop emitting an [`EnergyReport`] at every sample.
    pub fn run(&self, s0: &SimState, horizon: f64, sample_every: f64, etas: EtaCoefficients) -> RunOutcome {
        let mut samples = Vec::new();
        let monitor = match Monitor::new(self.grid, self.config, etas) {
            Ok(m) => m,
            Err(e) => {
                return RunOutcome {
                    samples,
                    last_state: s0.clone(),
                    error: Some(e),
                }
            }
        };
        let result = self.advance_with(s0, horizon, sample_every, |s| {
            let report = monitor.evaluate(s)?;
            samples.push((s.t, report));
            Ok(())
        });
        match result {
            Ok(last_state) => RunOutcome {
                samples,
                last_state,
                error: None,
            },
            Err((e, last_state)) => RunOutcome {
                samples,
                last_state,
                error: Some(e),
            },
        }
    }
}

fn project(a: C64, b: C64, k1: f64, k2: f64, kk: f64) -> (C64, C64) {
    if kk == 0.0 {
        return (a, b);
    }
    let dot = (a * k1 + b * k2) / kk;
    (a - dot * k1, b - dot * k2)
}

/// Number of `dt` steps in `span`, which must be a (near-)integer multiple.
pub fn steps_for(span: f64, dt: f64) -> Result<usize> {
    if !(span >= 0.0 && span.is_finite()) {
        return Err(Error::Config(format!("time span must be nonnegative, got {span}")));
    }
    let n = (span / dt).round();
    if (n * dt - span).abs() > 1e-9 * span.max(dt) {
        return Err(Error::Config(format!("{span} is not a multiple of dt = {dt}")));
    }
    Ok(n as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::init::{random_state, RandomSpec};
    use crate::spectral::cross_term;

    fn grid(n: usize) -> Grid {
        Grid::new(n, Grid::DEFAULT_LENGTH).unwrap()
    }

    fn small_state(n: usize, seed: u64) -> SimState {
        random_state(
            grid(n),
            PhysParams::default(),
            &RandomSpec {
                h3_norm: 1e-2,
                seed,
                ..RandomSpec::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn zero_velocity_has_no_transport() {
        let g = grid(16);
        let solver = Solver::new(g, StepConfig::default()).unwrap();
        let mut s = SimState::zeros(g, PhysParams::default());
        s.tau.comps[0][g.mode_index(1, 2)] = C64::new(0.1, 0.0);
        s.tau.symmetrize();
        let (fu, ft) = solver.nonlinear_terms(&s).unwrap();
        assert!(fu.comps.iter().chain(ft.comps.iter()).flatten().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn shear_flow_does_not_self_advect() {
        let g = grid(16);
        let solver = Solver::new(g, StepConfig::default()).unwrap();
        let mut s = SimState::zeros(g, PhysParams::default());
        // u = (sin(2πy/L), 0)
        s.u.comps[0][g.mode_index(0, 1)] = C64::new(0.0, -0.5);
        s.u.comps[0][g.mode_index(0, -1)] = C64::new(0.0, 0.5);
        let (fu, _) = solver.nonlinear_terms(&s).unwrap();
        assert!(fu.comps.iter().flatten().all(|c| c.norm() < 1e-16));
    }

    #[test]
    fn transport_is_skew() {
        let s = small_state(32, 7);
        let solver = Solver::new(s.grid(), StepConfig::default()).unwrap();
        let s = solver.prepare(s).unwrap();
        let (fu, ft) = solver.nonlinear_terms(&s).unwrap();
        let scale = s.u.seminorm(1).unwrap() * s.u.seminorm(0).unwrap().powi(2);
        assert!(cross_term(&fu, &s.u, 0, 0).abs() <= 1e-12 * scale);
        let tt: f64 = (0..s.grid().len())
            .map(|i| {
                (0..3)
                    .map(|c| SymmetricTensorField::WEIGHTS[c] * (ft.comps[c][i] * s.tau.comps[c][i].conj()).re)
                    .sum::<f64>()
            })
            .sum();
        assert!(tt.abs() <= 1e-12 * scale);
        assert!(fu.hermitian_defect() < 1e-18 && ft.hermitian_defect() < 1e-18);
    }

    #[test]
    fn step_preserves_structure_and_mean() {
        let mut s = small_state(32, 3);
        s.u.comps[0][0] = C64::new(1e-3, 0.0);
        let solver = Solver::new(s.grid(), StepConfig::default()).unwrap();
        let mut cur = s.clone();
        for _ in 0..20 {
            cur = solver.step(&cur).unwrap();
            cur.check_invariants(1e-12).unwrap();
        }
        assert!((cur.u.comps[0][0] - s.u.comps[0][0]).norm() < 1e-12 * 1e-3);
    }

    #[test]
    fn cfl_violation_is_refused() {
        let g = grid(16);
        let mut s = SimState::zeros(g, PhysParams::default());
        s.u.comps[0][g.mode_index(0, 1)] = C64::new(50.0, 0.0);
        s.u.comps[0][g.mode_index(0, -1)] = C64::new(50.0, 0.0);
        let solver = Solver::new(g, StepConfig { dt: 1.0, ..StepConfig::default() }).unwrap();
        match solver.step(&s) {
            Err(Error::Cfl { suggested, .. }) => assert!(suggested < 1.0),
            other => panic!("expected CFL error, got {other:?}"),
        }
    }

    #[test]
    fn bad_config_is_rejected() {
        let g = grid(16);
        assert!(Solver::new(g, StepConfig { dt: 0.0, ..StepConfig::default() }).is_err());
        assert!(Solver::new(g, StepConfig { order: 3, ..StepConfig::default() }).is_err());
        assert!(Solver::new(g, StepConfig { dealias_fraction: 1.5, ..StepConfig::default() }).is_err());
    }

    #[test]
    fn retained_band_is_alias_free() {
        for n in [16usize, 64, 96, 128] {
            let solver = Solver::new(grid(n), StepConfig::default()).unwrap();
            let kmax = (0..grid(n).len())
                .filter(|&i| solver.is_retained(i))
                .map(|i| grid(n).freqs(i).0.abs())
                .max()
                .unwrap();
            assert!(3 * kmax < n as i64, "n = {n}, kmax = {kmax}");
        }
    }

    #[test]
    fn run_with_zero_horizon_samples_once() {
        let s = small_state(16, 1);
        let solver = Solver::new(s.grid(), StepConfig::default()).unwrap();
        let out = solver.run(&s, 0.0, 0.1, EtaCoefficients::default());
        assert!(out.error.is_none());
        assert_eq!(out.samples.len(), 1);
        assert_eq!(out.samples[0].0, 0.0);
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = grid(16);
        let s = SimState::zeros(g, PhysParams::default());
        let solver = Solver::new(g, StepConfig { dt: 0.1, ..StepConfig::default() }).unwrap();
        let out = solver.run(&s, 1.0, 0.2, EtaCoefficients::default());
        assert!(out.error.is_none());
        assert_eq!(out.samples.len(), 6);
        for (_, r) in &out.samples {
            assert!(r.u_norms.iter().chain(&r.tau_norms).chain(&r.h).all(|x| *x == 0.0));
        }
    }

    #[test]
    fn pressure_of_zero_is_zero() {
        let g = grid(16);
        let s = SimState::zeros(g, PhysParams::default());
        let solver = Solver::new(g, StepConfig::default()).unwrap();
        assert!(solver.pressure(&s).unwrap().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn pressure_balances_stress_divergence() {
        // u = 0, τ = ∇∇φ-type field: K div τ is a pure gradient, so p = K·(ξξ:τ̂)/|ξ|²·(−1)... and
        // ∇p must cancel it exactly.
        let g = grid(16);
        let mut s = SimState::zeros(g, PhysParams::default());
        let i = g.mode_index(2, 1);
        let [k1, k2] = g.wavevector(i);
        s.tau.comps[0][i] = C64::new(k1 * k1, 0.0);
        s.tau.comps[1][i] = C64::new(k1 * k2, 0.0);
        s.tau.comps[2][i] = C64::new(k2 * k2, 0.0);
        s.tau.symmetrize();
        let solver = Solver::new(g, StepConfig::default()).unwrap();
        let p = solver.pressure(&s).unwrap();
        let div = crate::spectral::tensor_divergence(&s.tau);
        for (c, k) in [k1, k2].iter().enumerate() {
            let grad_p = C64::i() * p[i] * *k;
            assert!((grad_p - div.comps[c][i]).norm() < 1e-15);
        }
    }

    fn distance(a: &SimState, b: &SimState) -> f64 {
        a.components()
            .iter()
            .zip(b.components())
            .flat_map(|(x, y)| x.iter().zip(y.iter()).map(|(p, q)| (p - q).norm_sqr()))
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn fourth_order_self_convergence() {
        let g = grid(32);
        let s0 = random_state(
            g,
            PhysParams::new(1.0, 1.0, 1.0, 0.05).unwrap(),
            &RandomSpec {
                h3_norm: 2.0,
                band: 0.15,
                width: 0.1,
                ..RandomSpec::default()
            },
        )
        .unwrap();
        let finish = |dt: f64| {
            let solver = Solver::new(g, StepConfig { dt, ..StepConfig::default() }).unwrap();
            let s = solver.prepare(s0.clone()).unwrap();
            solver.advance_with(&s, 2.0, 2.0, |_| Ok(())).unwrap()
        };
        let (a, b, c) = (finish(0.2), finish(0.1), finish(0.05));
        let ratio = distance(&a, &b) / distance(&b, &c);
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn steps_for_multiples() {
        assert_eq!(steps_for(1.0, 0.1).unwrap(), 10);
        assert_eq!(steps_for(0.0, 0.1).unwrap(), 0);
        assert!(steps_for(1.05, 0.1).is_err());
    }
}
