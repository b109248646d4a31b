//! Lyapunov functionals `H1..H5`, cross terms, splitting radii and the
//! discrete L² energy balance, evaluated on solver snapshots.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagator::constants;
use crate::solver::{SimState, Solver, StepConfig};
use crate::spectral::{
    cross_term, pairwise_sum, sigma_from_tau, FrequencyCutoff, Grid, PhysParams, SpectralVectorField,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaCoefficients {
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
    pub eta4: f64,
}

impl EtaCoefficients {
    /// `η₂ = η₁/4`, `η₃ = η₂/4`, `η₄ = η₃`.
    pub fn from_eta1(eta1: f64) -> Self {
        let eta2 = eta1 / 4.0;
        let eta3 = eta2 / 4.0;
        Self {
            eta1,
            eta2,
            eta3,
            eta4: eta3,
        }
    }

    pub fn validate(&self, p: &PhysParams) -> Result<()> {
        let pos = |x: f64| x.is_finite() && x > 0.0;
        let ratio = |a: f64, b: f64| (a - b / 4.0).abs() <= 1e-12 * b;
        if !(pos(self.eta1) && pos(self.eta2) && pos(self.eta3) && pos(self.eta4)) {
            return Err(Error::EtaConstraint(format!("all η must be positive: {self:?}")));
        }
        if self.eta1 > 4.0 * p.beta {
            return Err(Error::EtaConstraint(format!(
                "η1 = {} exceeds 4β = {}",
                self.eta1,
                4.0 * p.beta
            )));
        }
        if !ratio(self.eta2, self.eta1) || !ratio(self.eta3, self.eta2) {
            return Err(Error::EtaConstraint(format!(
                "need η2 = η1/4 and η3 = η2/4, got {self:?}"
            )));
        }
        Ok(())
    }
}

impl Default for EtaCoefficients {
    fn default() -> Self {
        Self::from_eta1(0.01)
    }
}

/// Header of the per-sample monitor CSV.
pub const REPORT_CSV_HEADER: &str = "t,u0,u1,u2,u3,tau0,tau1,tau2,tau3,H1,H2,H3,H4,H5,\
cross1,cross2,cross3,cross3_high,balance_residual,g1,g2,lowfreq_mass";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub t: f64,
    /// `‖∇ᵏu‖` for `k = 0..3`.
    pub u_norms: [f64; 4],
    /// `‖∇ᵏτ‖` for `k = 0..3` (Frobenius).
    pub tau_norms: [f64; 4],
    /// `H1..H5`.
    pub h: [f64; 5],
    /// `⟨Λᵏu, Λᵏ⁻¹σ⟩` for `k = 1..3`, then `⟨Λ³u, Λ²σʰ⟩`.
    pub cross: [f64; 4],
    /// Instantaneous `(dE/dt + βK‖τ‖² + μK‖∇τ‖²)/E`, `E = ½(α‖u‖² + K‖τ‖²)`.
    pub balance_residual: f64,
    pub g1: f64,
    pub g2: f64,
    pub lowfreq_mass: f64,
    /// `‖∇ᵏσ‖` for `k = 0..2`.
    pub sigma_norms: [f64; 3],
    /// `α‖u‖²_{H³} + K‖τ‖²_{H³}`.
    pub h3_energy: f64,
    /// `h3_energy + Σᵢ ηᵢ⟨Λⁱu, Λⁱ⁻¹σ⟩`.
    pub h3_functional: f64,
    /// `α‖∇³uʰ‖² + K‖∇³τ‖²`.
    pub high_energy: f64,
}

impl EnergyReport {
    pub fn csv_row(&self) -> String {
        let mut fields = vec![self.t];
        fields.extend(self.u_norms);
        fields.extend(self.tau_norms);
        fields.extend(self.h);
        fields.extend(self.cross);
        fields.extend([self.balance_residual, self.g1, self.g2, self.lowfreq_mass]);
        fields.iter().map(|x| crate::fmt_f64(*x)).collect::<Vec<_>>().join(",")
    }

    /// `½E ≤ E + Σηᵢ⟨·,·⟩ ≤ 2E` for the H³ functional.
    pub fn sandwich_holds(&self) -> bool {
        let e = self.h3_energy;
        0.5 * e <= self.h3_functional && self.h3_functional <= 2.0 * e
    }

    /// `½E_h ≤ H5 ≤ 2E_h` with `E_h = α‖∇³uʰ‖² + K‖∇³τ‖²`.
    pub fn high_sandwich_holds(&self) -> bool {
        let e = self.high_energy;
        0.5 * e <= self.h[4] && self.h[4] <= 2.0 * e
    }

    /// `|⟨Λᵏu, Λᵏ⁻¹σ⟩| ≤ ‖∇ᵏu‖‖∇ᵏ⁻¹σ‖ ≤ ‖∇ᵏu‖‖∇ᵏ⁻¹τ‖` for `k = 1..3`.
    pub fn cross_bounds_hold(&self, rel_tol: f64) -> bool {
        (0..3).all(|j| {
            let a = self.u_norms[j + 1] * self.sigma_norms[j];
            let b = self.u_norms[j + 1] * self.tau_norms[j];
            self.cross[j].abs() <= a * (1.0 + rel_tol) && a <= b * (1.0 + rel_tol)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplittingDiagnostics {
    pub g1: f64,
    pub g2: f64,
    pub lowfreq_mass: f64,
    /// `t ≥ 24/η₁ − 1`, i.e. `g1² ≤ 1`.
    pub past_g1_onset: bool,
    /// `t ≥ 160/η₂ − 1`, i.e. `g2² ≤ 1`.
    pub past_g2_onset: bool,
}

pub fn splitting_diagnostics(s: &SimState, etas: &EtaCoefficients) -> SplittingDiagnostics {
    let g1sq = 24.0 / etas.eta1 / (1.0 + s.t);
    let g2sq = 160.0 / etas.eta2 / (1.0 + s.t);
    let g1 = g1sq.sqrt();
    let grid = s.grid();
    let terms: Vec<f64> = (0..grid.len())
        .filter(|&i| grid.wavenumber(i) <= g1)
        .map(|i| s.u.comps[0][i].norm_sqr() + s.u.comps[1][i].norm_sqr())
        .collect();
    let onset = |g: f64| g <= 1.0 + 1e-12;
    SplittingDiagnostics {
        g1,
        g2: g2sq.sqrt(),
        lowfreq_mass: pairwise_sum(&terms),
        past_g1_onset: onset(g1sq),
        past_g2_onset: onset(g2sq),
    }
}

/// Evaluates [`EnergyReport`]s. Holds a solver on the same grid so that the
/// energy rate uses exactly the discrete right-hand side.
#[derive(Debug)]
pub struct Monitor {
    solver: Solver,
    etas: EtaCoefficients,
}

impl Monitor {
    pub fn new(grid: Grid, config: StepConfig, etas: EtaCoefficients) -> Result<Self> {
        Ok(Self {
            solver: Solver::new(grid, config)?,
            etas,
        })
    }

    pub fn etas(&self) -> &EtaCoefficients {
        &self.etas
    }

    pub fn evaluate(&self, s: &SimState) -> Result<EnergyReport> {
        let p = s.params;
        self.etas.validate(&p)?;
        let grid = s.grid();
        if grid != self.solver.grid() {
            return Err(Error::Precondition("snapshot grid does not match monitor grid".into()));
        }
        let e = &self.etas;
        let mut u_norms = [0.0; 4];
        let mut tau_norms = [0.0; 4];
        for k in 0..4 {
            u_norms[k] = s.u.seminorm(k as u32)?;
            tau_norms[k] = s.tau.seminorm(k as u32)?;
        }
        let sigma = sigma_from_tau(&s.tau);
        let mut sigma_norms = [0.0; 3];
        for (k, x) in sigma_norms.iter_mut().enumerate() {
            *x = sigma.seminorm(k as u32)?;
        }

        let cutoff = FrequencyCutoff::new(constants(&p).radius)?;
        let sigma_h = cutoff.high_vector(&sigma);
        let u_h: SpectralVectorField = cutoff.high_vector(&s.u);
        let cross = [
            cross_term(&s.u, &sigma, 1, 0),
            cross_term(&s.u, &sigma, 2, 1),
            cross_term(&s.u, &sigma, 3, 2),
            cross_term(&s.u, &sigma_h, 3, 2),
        ];
        let cross_hh = cross_term(&u_h, &sigma_h, 3, 2);

        let a2: Vec<f64> = u_norms.iter().map(|x| x * x).collect();
        let b2: Vec<f64> = tau_norms.iter().map(|x| x * x).collect();
        let pair = |k: usize| p.alpha * (a2[k] + a2[k + 1]) + p.kappa * (b2[k] + b2[k + 1]);
        let uh3 = u_h.seminorm(3)?;
        let high_energy = p.alpha * uh3 * uh3 + p.kappa * b2[3];
        let h = [
            pair(0) + e.eta1 * cross[0],
            pair(1) + e.eta2 * cross[1],
            pair(2) + e.eta3 * cross[2],
            p.alpha * a2[3] + p.kappa * b2[3] + e.eta4 * cross[3],
            high_energy + e.eta3 * cross_hh,
        ];
        let h3_energy = p.alpha * a2.iter().sum::<f64>() + p.kappa * b2.iter().sum::<f64>();
        let h3_functional = h3_energy + e.eta1 * cross[0] + e.eta2 * cross[1] + e.eta3 * cross[2];

        let energy = 0.5 * (p.alpha * a2[0] + p.kappa * b2[0]);
        let (rate, loss) = self.solver.energy_rate(s)?;
        let balance_residual = if energy > 0.0 { (rate + loss) / energy } else { rate + loss };

        let split = splitting_diagnostics(s, e);
        Ok(EnergyReport {
            t: s.t,
            u_norms,
            tau_norms,
            h,
            cross,
            balance_residual,
            g1: split.g1,
            g2: split.g2,
            lowfreq_mass: split.lowfreq_mass,
            sigma_norms,
            h3_energy,
            h3_functional,
            high_energy,
        })
    }
}

/// One sample of the quantities entering the L² balance law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceSample {
    pub t: f64,
    /// `α‖u‖²`
    pub alpha_u2: f64,
    /// `K‖τ‖²`
    pub k_tau2: f64,
    /// `βK‖τ‖²`
    pub beta_k_tau2: f64,
    /// `μK‖∇τ‖²`
    pub mu_k_grad_tau2: f64,
}

impl BalanceSample {
    pub fn from_state(s: &SimState) -> Result<Self> {
        let p = s.params;
        let u0 = s.u.seminorm(0)?;
        let t0 = s.tau.seminorm(0)?;
        let t1 = s.tau.seminorm(1)?;
        Ok(Self {
            t: s.t,
            alpha_u2: p.alpha * u0 * u0,
            k_tau2: p.kappa * t0 * t0,
            beta_k_tau2: p.beta * p.kappa * t0 * t0,
            mu_k_grad_tau2: p.mu * p.kappa * t1 * t1,
        })
    }

    pub fn energy(&self) -> f64 {
        0.5 * (self.alpha_u2 + self.k_tau2)
    }
}

/// Max over interior samples of `|(E_{i+1} − E_{i−1})/(2Δ) + βK‖τ‖² + μK‖∇τ‖²|`,
/// divided by the initial energy (when positive).
pub fn balance_residual(samples: &[BalanceSample]) -> Result<f64> {
    if samples.len() < 3 {
        return Err(Error::TooFewSamples {
            got: samples.len(),
            need: 3,
        });
    }
    let dt = samples[1].t - samples[0].t;
    if !(dt > 0.0) {
        return Err(Error::NonUniformSampling);
    }
    for w in samples.windows(2) {
        if ((w[1].t - w[0].t) - dt).abs() > 1e-9 * dt.max(w[1].t.abs() * 1e-6) {
            return Err(Error::NonUniformSampling);
        }
    }
    let e0 = samples[0].energy();
    let worst = samples
        .windows(3)
        .map(|w| {
            let de = (w[2].energy() - w[0].energy()) / (2.0 * dt);
            (de + w[1].beta_k_tau2 + w[1].mu_k_grad_tau2).abs()
        })
        .fold(0.0, f64::max);
    Ok(if e0 > 0.0 { worst / e0 } else { worst })
}
