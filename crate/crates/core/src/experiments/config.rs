//! TOML run configuration. Every section is optional and filled with defaults;
//! unknown sections or keys are errors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::init::{RandomSpec, TaylorGreenSpec};
use crate::monitors::EtaCoefficients;
use crate::solver::StepConfig;
use crate::spectral::{Grid, PhysParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n: usize,
    pub length: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n: 64,
            length: Grid::DEFAULT_LENGTH,
        }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.n, self.length).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GreenConfig {
    /// Evenly spaced wavenumbers on `[0, 2R]`.
    pub xi_points: usize,
    /// Extra wavenumbers checked in addition to the sweep.
    pub extra_xi: Vec<f64>,
    /// Adds the critical wavenumber to the sweep.
    pub include_critical: bool,
    pub times: Vec<f64>,
    pub tolerance: f64,
    /// Oracle step as a fraction of its stability limit.
    pub oracle_step_fraction: f64,
}

impl Default for GreenConfig {
    fn default() -> Self {
        Self {
            xi_points: 65,
            extra_xi: Vec::new(),
            include_critical: true,
            times: vec![0.1, 1.0, 5.0, 10.0, 50.0],
            tolerance: 1e-8,
            oracle_step_fraction: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayConfig {
    /// Gaussian profiles `amp·e^{−r²/width²}` for `û₀` and `σ̂₀`.
    pub u_amp: f64,
    pub u_width: f64,
    pub sigma_amp: f64,
    pub sigma_width: f64,
    pub orders: Vec<u32>,
    /// Fit window `[t_lo, t_hi]`.
    pub window: [f64; 2],
    pub samples: usize,
    pub slope_tolerance: f64,
    /// Check the two-sided bound on the velocity branch.
    pub lower_bound: bool,
    /// Largest admissible max/min of `(1+t)^{1/2+k/2}‖∇ᵏu‖`.
    pub ratio_limit: f64,
    pub rel_tol: f64,
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self {
            u_amp: 1.0,
            u_width: 1.0,
            sigma_amp: 1.0,
            sigma_width: 1.0,
            orders: vec![0, 1, 2, 3],
            window: [1e2, 1e4],
            samples: 25,
            slope_tolerance: 0.05,
            lower_bound: true,
            ratio_limit: 10.0,
            rel_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Zero,
    Random,
    TaylorGreen,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitConfig {
    pub family: Family,
    pub random: RandomSpec,
    pub taylor_green: TaylorGreenSpec,
    /// Checkpoint path for the `file` family.
    pub path: String,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self {
            family: Family::Random,
            random: RandomSpec {
                stress: crate::init::StressMode::Relaxed,
                ..RandomSpec::default()
            },
            taylor_green: TaylorGreenSpec::default(),
            path: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub step: StepConfig,
    pub horizon: f64,
    pub sample_every: f64,
    /// Checkpoint interval; zero keeps only the final checkpoint.
    pub checkpoint_every: f64,
    /// Absolute slack for the monotonicity verdicts on H1..H3.
    pub monotone_tolerance: f64,
    /// Largest admissible instantaneous balance residual.
    pub balance_tolerance: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            step: StepConfig::default(),
            horizon: 10.0,
            sample_every: 0.1,
            checkpoint_every: 0.0,
            monotone_tolerance: 1e-10,
            balance_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub mus: Vec<f64>,
    /// Allowed relative spread of the per-μ supremum of the H³ norm.
    pub spread_limit: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            mus: vec![1e-1, 1e-2, 1e-3, 1e-4, 0.0],
            spread_limit: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub params: PhysParams,
    pub grid: GridConfig,
    pub eta: Option<EtaCoefficients>,
    pub green: GreenConfig,
    pub decay: DecayConfig,
    pub init: InitConfig,
    pub run: RunConfig,
    pub sweep: SweepConfig,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.params.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn etas(&self) -> EtaCoefficients {
        self.eta.unwrap_or_default()
    }

    /// Canonical text of the fully resolved configuration.
    pub fn echo(&self) -> Result<String> {
        let mut resolved = self.clone();
        resolved.eta = Some(self.etas());
        toml::to_string(&resolved).map_err(|e| Error::Config(e.to_string()))
    }

    /// First 16 hex digits of SHA-256 over the command name and the echo.
    pub fn run_id(&self, command: &str) -> Result<String> {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update(b"\n");
        h.update(self.echo()?.as_bytes());
        Ok(hex::encode(h.finalize())[..16].to_string())
    }
}
