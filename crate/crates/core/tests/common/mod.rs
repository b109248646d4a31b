#![allow(dead_code)]

use oldroyd_core::init::{random_state, RandomSpec, StressMode};
use oldroyd_core::monitors::{EtaCoefficients, Monitor};
use oldroyd_core::solver::{SimState, StepConfig};
use oldroyd_core::spectral::{
    leray_project, sigma_from_tau, Fft2, FrequencyCutoff, Grid, PhysParams, SpectralVectorField,
};
use proptest::prelude::*;

/// A random Hermitian state on a random grid with random parameters.
#[derive(Debug, Clone)]
pub struct Case {
    pub n: usize,
    pub boxes: f64,
    pub params: PhysParams,
    pub seed: u64,
    pub width: f64,
    pub amplitude: f64,
}

impl Case {
    pub fn grid(&self) -> Grid {
        Grid::new(self.n, 2.0 * std::f64::consts::PI * self.boxes).unwrap()
    }

    pub fn state(&self) -> SimState {
        let spec = RandomSpec {
            h3_norm: self.amplitude,
            seed: self.seed,
            band: f64::INFINITY,
            width: self.width,
            velocity_share: 0.5,
            stress: StressMode::Independent,
        };
        random_state(self.grid(), self.params, &spec).unwrap()
    }

    /// A non-projected velocity with the same seed.
    pub fn raw_vector(&self) -> SpectralVectorField {
        let g = self.grid();
        let s = self.state();
        // Mix the stress components in to leave the divergence-free subspace.
        SpectralVectorField {
            grid: g,
            comps: [
                s.tau.comps[0].iter().zip(&s.u.comps[0]).map(|(a, b)| a + b).collect(),
                s.tau.comps[2].iter().zip(&s.u.comps[1]).map(|(a, b)| a - b).collect(),
            ],
        }
    }
}

pub fn case_strategy() -> impl Strategy<Value = Case> {
    (
        prop::sample::select(vec![8usize, 16, 32]),
        1.0f64..64.0,
        (0.5f64..2.0, 0.5f64..2.0, 0.5f64..2.0, 0.0f64..0.1),
        any::<u64>(),
        0.05f64..3.0,
        1e-4f64..1.0,
    )
        .prop_map(|(n, boxes, (alpha, beta, kappa, mu), seed, width, amplitude)| Case {
            n,
            boxes,
            params: PhysParams::new(alpha, beta, kappa, mu).unwrap(),
            seed,
            width,
            amplitude,
        })
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// `mean |f|² = Σ|f̂|²` for every component.
pub fn check_parseval(c: &Case) -> Result<(), String> {
    let s = c.state();
    let g = c.grid();
    let fft = Fft2::new(&g);
    for comp in s.u.comps.iter().chain(s.tau.comps.iter()) {
        let phys = fft.inverse_real(comp).map_err(|e| e.to_string())?;
        let mean = phys.iter().map(|x| x * x).sum::<f64>() / g.len() as f64;
        let spec: f64 = comp.iter().map(|z| z.norm_sqr()).sum();
        if !rel_close(mean, spec, 1e-11) {
            return Err(format!("Parseval: {mean:e} vs {spec:e}"));
        }
        let back = fft.forward_real(&phys).map_err(|e| e.to_string())?;
        let err = back.iter().zip(comp).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let scale = comp.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if err > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(format!("round trip error {err:e}"));
        }
    }
    Ok(())
}

/// `ℙℙv = ℙv` and `ℙv` is solenoidal.
pub fn check_leray(c: &Case) -> Result<(), String> {
    let v = c.raw_vector();
    let p1 = leray_project(&v);
    let p2 = leray_project(&p1);
    let scale = p1.seminorm(0).unwrap().max(f64::MIN_POSITIVE);
    let diff = p2.sub(&p1).seminorm(0).unwrap();
    if diff > 1e-14 * scale {
        return Err(format!("idempotence defect {diff:e}"));
    }
    if !p1.is_divergence_free(1e-12) {
        return Err(format!("divergence ratio {:e}", p1.divergence_ratio()));
    }
    Ok(())
}

/// `|σ̂(ξ)| ≤ |τ̂(ξ)|` mode by mode.
pub fn check_sigma_bound(c: &Case) -> Result<(), String> {
    let s = c.state();
    let sigma = sigma_from_tau(&s.tau);
    for i in 0..c.grid().len() {
        let sn = (sigma.comps[0][i].norm_sqr() + sigma.comps[1][i].norm_sqr()).sqrt();
        let tn = s.tau.mode_norm(i);
        if sn > tn * (1.0 + 1e-12) + 1e-300 {
            return Err(format!("mode {i}: |σ| = {sn:e} > |τ| = {tn:e}"));
        }
    }
    Ok(())
}

/// `fˡ + fʰ = f`, `0 ≤ φ₀ ≤ 1`, `φ₀ = 1` on `|ξ| ≤ R/2` and `φ₀ = 0` on `|ξ| ≥ R`.
pub fn check_cutoff(c: &Case) -> Result<(), String> {
    let s = c.state();
    let g = c.grid();
    let r = oldroyd_core::propagator::constants(&c.params).radius;
    let cut = FrequencyCutoff::new(r).unwrap();
    for comp in s.u.comps.iter().chain(s.tau.comps.iter()) {
        let (lo, hi) = cut.split(&g, comp);
        for i in 0..g.len() {
            let xi = g.wavenumber(i);
            let w = cut.weight(xi);
            if !(0.0..=1.0).contains(&w) {
                return Err(format!("weight {w} at {xi}"));
            }
            if (lo[i] + hi[i] - comp[i]).norm() > 1e-15 * comp[i].norm() {
                return Err(format!("partition defect at mode {i}"));
            }
            if xi <= 0.5 * r && hi[i].norm() != 0.0 {
                return Err(format!("high part present at {xi} <= R/2"));
            }
            if xi >= r && lo[i].norm() != 0.0 {
                return Err(format!("low part present at {xi} >= R"));
            }
        }
    }
    Ok(())
}

/// Both equivalence sandwiches and the cross-term bounds.
pub fn check_sandwich(c: &Case) -> Result<(), String> {
    let s = c.state();
    let m = Monitor::new(c.grid(), StepConfig::default(), EtaCoefficients::default()).unwrap();
    let r = m.evaluate(&s).map_err(|e| e.to_string())?;
    if !r.sandwich_holds() {
        return Err(format!("H3 sandwich: E = {:e}, F = {:e}", r.h3_energy, r.h3_functional));
    }
    if !r.high_sandwich_holds() {
        return Err(format!("H5 sandwich: E = {:e}, H5 = {:e}", r.high_energy, r.h[4]));
    }
    if !r.cross_bounds_hold(1e-12) {
        return Err("cross-term bound".into());
    }
    Ok(())
}

pub fn check_all(c: &Case) -> Result<(), String> {
    check_parseval(c)?;
    check_leray(c)?;
    check_sigma_bound(c)?;
    check_cutoff(c)?;
    check_sandwich(c)
}
