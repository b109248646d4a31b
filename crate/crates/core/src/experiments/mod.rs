//! Experiment drivers behind the `oblab` subcommands, with on-disk run records
//! under `<root>/<run_id>/`.

pub mod config;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checkpoint;
use crate::decay::{
    decay_series, fit_decay_exponent, log_times, lower_bound_ratio, write_series_csv, Branch, DecayFit,
    InitialProfile, QuadratureConfig,
};
use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::init::{random_state, taylor_green_state};
use crate::monitors::{balance_residual, BalanceSample, EnergyReport, Monitor, REPORT_CSV_HEADER};
use crate::propagator::{constants, green_eval, max_oracle_step, mode_ode_oracle, propagate_mode, ModeState};
use crate::solver::{SimState, Solver};
use crate::spectral::PhysParams;

pub use config::Config;

/// Environment variable naming the default output root.
pub const RUNS_DIR_ENV: &str = "OBLAB_RUNS_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExitCode {
    Success = 0,
    ConfigError = 1,
    AssertionFailed = 2,
    BlowUp = 3,
}

impl ExitCode {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn from_error(e: &Error) -> Self {
        match e {
            Error::BlowUp { .. } => ExitCode::BlowUp,
            _ => ExitCode::ConfigError,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RunStatus {
    Completed,
    Aborted(String),
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunStatus::Completed => write!(f, "completed"),
            RunStatus::Aborted(why) => write!(f, "aborted: {why}"),
        }
    }
}

/// A persisted run: `config.echo`, `series.csv`, `fits.json`, `checkpoints/`
/// and `status` inside `dir`.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub run_id: String,
    pub dir: PathBuf,
    pub config_echo: String,
    pub status: RunStatus,
    pub exit: ExitCode,
}

impl RunRecord {
    fn open(root: &Path, command: &str, cfg: &Config) -> Result<Self> {
        let run_id = cfg.run_id(command)?;
        let dir = root.join(&run_id);
        fs::create_dir_all(dir.join("checkpoints"))?;
        let config_echo = cfg.echo()?;
        fs::write(dir.join("config.echo"), &config_echo)?;
        Ok(Self {
            run_id,
            dir,
            config_echo,
            status: RunStatus::Aborted("incomplete".into()),
            exit: ExitCode::ConfigError,
        })
    }

    fn series_writer(&self) -> Result<BufWriter<fs::File>> {
        Ok(BufWriter::new(fs::File::create(self.dir.join("series.csv"))?))
    }

    fn finish(mut self, fits: &impl Serialize, status: RunStatus, exit: ExitCode) -> Result<Self> {
        fs::write(self.dir.join("fits.json"), serde_json::to_string_pretty(fits)?)?;
        fs::write(self.dir.join("status"), format!("{status}\n"))?;
        self.status = status;
        self.exit = exit;
        Ok(self)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }
}

fn verdict(passed: bool) -> ExitCode {
    if passed {
        ExitCode::Success
    } else {
        ExitCode::AssertionFailed
    }
}

// ---------------------------------------------------------------- validate-green

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreenPoint {
    pub xi: f64,
    pub t: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreenReport {
    pub params: PhysParams,
    pub max_gap: f64,
    pub worst_xi: f64,
    pub worst_t: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub points: Vec<GreenPoint>,
}

/// Wavenumbers of the sweep: evenly spaced on `[0, 2R]`, plus extras.
pub fn green_wavenumbers(p: &PhysParams, g: &config::GreenConfig) -> Vec<f64> {
    let top = 2.0 * constants(p).radius;
    let count = g.xi_points.max(2);
    let mut xs: Vec<f64> = (0..count).map(|j| top * j as f64 / (count - 1) as f64).collect();
    if g.include_critical {
        xs.push(p.critical_wavenumber());
    }
    xs.extend(&g.extra_xi);
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Relative gap between `propagate` and the RK4 oracle, maximized over the
/// sweep and over a pure-velocity and a pure-stress initial state.
pub fn green_gap_with<F>(p: &PhysParams, g: &config::GreenConfig, propagate: F) -> Result<GreenReport>
where
    F: Fn(&PhysParams, &ModeState, f64) -> Result<ModeState> + Sync,
{
    p.validate()?;
    if !(g.oracle_step_fraction > 0.0 && g.oracle_step_fraction <= 1.0) {
        return Err(Error::Config("oracle_step_fraction must lie in (0, 1]".into()));
    }
    let xs = green_wavenumbers(p, g);
    let jobs: Vec<(f64, f64)> = xs
        .iter()
        .flat_map(|&xi| g.times.iter().map(move |&t| (xi, t)))
        .collect();
    let points = jobs
        .par_iter()
        .map(|&(xi, t)| {
            let dt = g.oracle_step_fraction * max_oracle_step(p, xi);
            let mut gap: f64 = 0.0;
            for m in [ModeState::scalar(1.0, 0.0, xi)?, ModeState::scalar(0.0, 1.0, xi)?] {
                let closed = propagate(p, &m, t)?;
                let oracle = mode_ode_oracle(p, &m, t, dt)?;
                let scale = oracle.norm().max(f64::MIN_POSITIVE);
                gap = gap.max(closed.distance(&oracle) / scale);
            }
            Ok(GreenPoint { xi, t, gap })
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = points
        .iter()
        .max_by(|a, b| a.gap.total_cmp(&b.gap))
        .cloned()
        .ok_or_else(|| Error::Config("empty wavenumber/time sweep".into()))?;
    Ok(GreenReport {
        params: *p,
        max_gap: worst.gap,
        worst_xi: worst.xi,
        worst_t: worst.t,
        tolerance: g.tolerance,
        passed: worst.gap.is_finite() && worst.gap < g.tolerance,
        points,
    })
}

pub fn cmd_validate_green(cfg: &Config, root: &Path) -> Result<RunRecord> {
    cmd_validate_green_with(cfg, root, propagate_mode)
}

/// `validate-green` with a replaceable propagator (used to exercise the
/// failure path).
pub fn cmd_validate_green_with<F>(cfg: &Config, root: &Path, propagate: F) -> Result<RunRecord>
where
    F: Fn(&PhysParams, &ModeState, f64) -> Result<ModeState> + Sync,
{
    let record = RunRecord::open(root, "validate-green", cfg)?;
    let report = green_gap_with(&cfg.params, &cfg.green, propagate)?;
    let mut w = record.series_writer()?;
    writeln!(w, "xi,t,G1,G2,G3,lambda_plus_re,lambda_plus_im,lambda_minus_re,lambda_minus_im,gap")?;
    for pt in &report.points {
        let g = green_eval(&cfg.params, pt.xi, pt.t)?;
        let cols = [
            pt.xi,
            pt.t,
            g.g1,
            g.g2,
            g.g3,
            g.lambda_plus.re,
            g.lambda_plus.im,
            g.lambda_minus.re,
            g.lambda_minus.im,
            pt.gap,
        ];
        writeln!(w, "{}", cols.map(fmt_f64).join(","))?;
    }
    w.flush()?;
    let exit = verdict(report.passed);
    record.finish(&report, RunStatus::Completed, exit)
}

// ---------------------------------------------------------------- linear-decay

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlopeCheck {
    pub fit: DecayFit,
    pub predicted: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioCheck {
    pub k: u32,
    pub branch: Branch,
    pub min: f64,
    pub max: f64,
    pub ratio: f64,
    pub from: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayReport {
    pub window: [f64; 2],
    /// `false` when the window starts before `t = 100`, where the power laws
    /// are not yet asymptotic.
    pub asymptotic_window: bool,
    pub c2: f64,
    pub slopes: Vec<SlopeCheck>,
    pub ratios: Vec<RatioCheck>,
    pub passed: bool,
}

pub fn decay_profile(cfg: &Config) -> Result<InitialProfile> {
    let d = &cfg.decay;
    InitialProfile::gaussian(
        d.u_amp,
        d.u_width,
        d.sigma_amp,
        d.sigma_width,
        constants(&cfg.params).radius,
    )
}

/// Fits every requested order on both branches and, if asked, checks the
/// two-sided bounds. Returns the report and the series it was computed from.
pub fn linear_decay(cfg: &Config, profile: &InitialProfile) -> Result<(DecayReport, Vec<crate::decay::DecaySeries>)> {
    let d = &cfg.decay;
    let p = &cfg.params;
    let [lo, hi] = d.window;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Config(format!("invalid decay window {:?}", d.window)));
    }
    if d.lower_bound && profile.c2() <= 0.0 {
        return Err(Error::Precondition(
            "lower-bound check needs a profile with nonzero velocity at the origin".into(),
        ));
    }
    let times = log_times(lo, hi, d.samples);
    let qc = QuadratureConfig {
        rel_tol: d.rel_tol,
        ..QuadratureConfig::default()
    };
    let t1 = constants(p).t1;
    let mut series = Vec::new();
    let mut slopes = Vec::new();
    let mut ratios = Vec::new();
    for branch in [Branch::Velocity, Branch::Stress] {
        for &k in &d.orders {
            let s = decay_series(p, profile, k, branch, &times, &qc)?;
            let fit = fit_decay_exponent(&s, d.window)?;
            let predicted = branch.predicted_exponent(k);
            slopes.push(SlopeCheck {
                passed: (fit.slope - predicted).abs() <= d.slope_tolerance,
                fit,
                predicted,
            });
            if d.lower_bound {
                let from = t1.max(lo);
                let (min, max) = lower_bound_ratio(&s, predicted, from)?;
                let ratio = max / min;
                ratios.push(RatioCheck {
                    k,
                    branch,
                    min,
                    max,
                    ratio,
                    from,
                    passed: ratio <= d.ratio_limit,
                });
            }
            series.push(s);
        }
    }
    let passed = slopes.iter().all(|s| s.passed) && ratios.iter().all(|r| r.passed);
    Ok((
        DecayReport {
            window: d.window,
            asymptotic_window: lo >= 1e2,
            c2: profile.c2(),
            slopes,
            ratios,
            passed,
        },
        series,
    ))
}

pub fn cmd_linear_decay(cfg: &Config, root: &Path) -> Result<RunRecord> {
    let profile = decay_profile(cfg)?;
    let record = RunRecord::open(root, "linear-decay", cfg)?;
    match linear_decay(cfg, &profile) {
        Ok((report, series)) => {
            let mut w = record.series_writer()?;
            write_series_csv(&mut w, &series)?;
            w.flush()?;
            let exit = verdict(report.passed);
            record.finish(&report, RunStatus::Completed, exit)
        }
        Err(e @ Error::Quadrature { .. }) => {
            let msg = e.to_string();
            record.finish(&serde_json::json!({ "error": msg }), RunStatus::Aborted(msg.clone()), ExitCode::AssertionFailed)
        }
        Err(e) => Err(e),
    }
}

// ---------------------------------------------------------------- simulate

pub fn initial_state(cfg: &Config) -> Result<SimState> {
    let grid = cfg.grid.build()?;
    let p = cfg.params;
    let s = match cfg.init.family {
        config::Family::Zero => SimState::zeros(grid, p),
        config::Family::Random => random_state(grid, p, &cfg.init.random)?,
        config::Family::TaylorGreen => taylor_green_state(grid, p, &cfg.init.taylor_green)?,
        config::Family::File => {
            let (s, _) = checkpoint::read(Path::new(&cfg.init.path))?;
            if s.grid() != grid {
                return Err(Error::Config("checkpoint grid differs from [grid]".into()));
            }
            let mut s = SimState::from_fields(s.u, s.tau, p)?;
            s.t = 0.0;
            s
        }
    };
    Ok(s)
}

/// Monitor series of one run plus the state it ended in.
#[derive(Debug)]
pub struct Trajectory {
    pub reports: Vec<EnergyReport>,
    pub balance: Vec<BalanceSample>,
    /// `∫(‖∇u‖²_{H²} + ‖τ‖²_{H³} + μ‖∇τ‖²_{H³}) dt` and its `μ` part, by the
    /// trapezoid rule over samples.
    pub dissipation: f64,
    pub mu_dissipation: f64,
    pub last_state: SimState,
    pub error: Option<Error>,
}

/// Runs the solver from `s0`, sampling monitors and writing checkpoints into
/// `ckpt_dir` (when given).
pub fn trajectory(cfg: &Config, s0: &SimState, ckpt_dir: Option<(&Path, &str)>) -> Result<Trajectory> {
    let rc = &cfg.run;
    let etas = cfg.etas();
    etas.validate(&s0.params)?;
    let solver = Solver::new(s0.grid(), rc.step)?;
    let monitor = Monitor::new(s0.grid(), rc.step, etas)?;
    let s0 = solver.prepare(s0.clone())?;
    let mut reports = Vec::new();
    let mut balance = Vec::new();
    let mut dens = Vec::new();
    let ck_every = if rc.checkpoint_every > 0.0 {
        Some(crate::solver::steps_for(rc.checkpoint_every, rc.step.dt)?)
    } else {
        None
    };
    let mu = s0.params.mu;
    let result = solver.advance_with(&s0, rc.horizon, rc.sample_every, |s| {
        reports.push(monitor.evaluate(s)?);
        balance.push(BalanceSample::from_state(s)?);
        let sq = |k: u32, f: &dyn Fn(u32) -> Result<f64>| f(k).map(|x| x * x);
        let du: f64 = (1..=3).map(|k| sq(k, &|k| s.u.seminorm(k))).sum::<Result<f64>>()?;
        let tt: f64 = (0..=3).map(|k| sq(k, &|k| s.tau.seminorm(k))).sum::<Result<f64>>()?;
        let gt: f64 = (1..=4).map(|k| sq(k, &|k| s.tau.seminorm(k))).sum::<Result<f64>>()?;
        dens.push((du + tt, mu * gt));
        if let (Some(every), Some((dir, hash))) = (ck_every, ckpt_dir) {
            let j = (s.t / rc.step.dt).round() as usize;
            if j > 0 && j.is_multiple_of(every) {
                checkpoint::write(&dir.join(format!("t{j:08}.bin")), s, hash)?;
            }
        }
        Ok(())
    });
    let (last_state, error) = match result {
        Ok(s) => (s, None),
        Err((e, s)) => (s, Some(e)),
    };
    if let Some((dir, hash)) = ckpt_dir {
        checkpoint::write(&dir.join("final.bin"), &last_state, hash)?;
    }
    let trap = |f: &dyn Fn(&(f64, f64)) -> f64| {
        dens.windows(2)
            .zip(reports.windows(2))
            .map(|(d, r)| 0.5 * (f(&d[0]) + f(&d[1])) * (r[1].t - r[0].t))
            .sum::<f64>()
    };
    let dissipation = trap(&|d| d.0 + d.1);
    let mu_dissipation = trap(&|d| d.1);
    Ok(Trajectory {
        reports,
        balance,
        dissipation,
        mu_dissipation,
        last_state,
        error,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub samples: usize,
    pub final_time: f64,
    pub initial_h3: f64,
    pub sup_h3: f64,
    pub bounded: bool,
    /// Largest increase between consecutive samples of H1, H2, H3.
    pub max_increments: [f64; 3],
    pub monotone: [bool; 3],
    /// Largest increase of `‖τ‖/‖u‖` between samples with `t ≥ 5`.
    pub max_ratio_increment: Option<f64>,
    pub ratio_nonincreasing: bool,
    pub max_instantaneous_residual: f64,
    /// Centered-difference residual on the sampled series, when it has ≥3 samples.
    pub sampled_residual: Option<f64>,
    pub sandwiches_hold: bool,
    pub passed: bool,
    pub error: Option<String>,
}

/// `(Σₖ ‖∇ᵏu‖² + ‖∇ᵏτ‖²)^{1/2}` for `k ≤ 3` from a report.
pub fn report_h3(r: &EnergyReport) -> f64 {
    r.u_norms.iter().chain(&r.tau_norms).map(|x| x * x).sum::<f64>().sqrt()
}

pub fn summarize(cfg: &Config, traj: &Trajectory) -> SimulationSummary {
    let r = &traj.reports;
    let tol = cfg.run.monotone_tolerance;
    let initial_h3 = r.first().map(report_h3).unwrap_or(0.0);
    let sup_h3 = r.iter().map(report_h3).fold(0.0, f64::max);
    let mut max_increments = [f64::NEG_INFINITY; 3];
    let mut ratio_inc: Option<f64> = None;
    for w in r.windows(2) {
        for (k, m) in max_increments.iter_mut().enumerate() {
            *m = m.max(w[1].h[k] - w[0].h[k]);
        }
        let (a, b) = (&w[0], &w[1]);
        if a.t >= 5.0 && a.u_norms[0] > 0.0 && b.u_norms[0] > 0.0 {
            let d = b.tau_norms[0] / b.u_norms[0] - a.tau_norms[0] / a.u_norms[0];
            ratio_inc = Some(ratio_inc.map_or(d, |x: f64| x.max(d)));
        }
    }
    if r.len() < 2 {
        max_increments = [0.0; 3];
    }
    let monotone = max_increments.map(|m| m <= tol);
    let max_instantaneous_residual = r.iter().map(|x| x.balance_residual.abs()).fold(0.0, f64::max);
    let sampled_residual = balance_residual(&traj.balance).ok();
    let sandwiches_hold = r
        .iter()
        .all(|x| (x.sandwich_holds() && x.high_sandwich_holds()) || x.h3_energy == 0.0);
    let bounded = sup_h3 <= 2.0 * initial_h3;
    let passed = traj.error.is_none()
        && bounded
        && monotone.iter().all(|m| *m)
        && max_instantaneous_residual < cfg.run.balance_tolerance
        && sandwiches_hold;
    SimulationSummary {
        samples: r.len(),
        final_time: traj.last_state.t,
        initial_h3,
        sup_h3,
        bounded,
        max_increments,
        monotone,
        max_ratio_increment: ratio_inc,
        ratio_nonincreasing: ratio_inc.is_none_or(|d| d <= 0.0),
        max_instantaneous_residual,
        sampled_residual,
        sandwiches_hold,
        passed,
        error: traj.error.as_ref().map(|e| e.to_string()),
    }
}

fn write_reports(w: &mut impl Write, reports: &[EnergyReport]) -> Result<()> {
    writeln!(w, "{REPORT_CSV_HEADER}")?;
    for r in reports {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

pub fn cmd_simulate(cfg: &Config, root: &Path) -> Result<RunRecord> {
    let s0 = initial_state(cfg)?;
    cfg.etas().validate(&cfg.params)?;
    let record = RunRecord::open(root, "simulate", cfg)?;
    let traj = trajectory(cfg, &s0, Some((&record.path("checkpoints"), &record.run_id)))?;
    let mut w = record.series_writer()?;
    write_reports(&mut w, &traj.reports)?;
    w.flush()?;
    let summary = summarize(cfg, &traj);
    let (status, exit) = match &traj.error {
        None => (RunStatus::Completed, verdict(summary.passed)),
        Some(e) => (
            RunStatus::Aborted(format!("{e}; last good t = {}", traj.last_state.t)),
            ExitCode::from_error(e),
        ),
    };
    record.finish(&summary, status, exit)
}

// ---------------------------------------------------------------- sweep-mu

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MuSweepResult {
    pub mus: Vec<f64>,
    pub sup_h3: Vec<f64>,
    pub dissipation_integrals: Vec<f64>,
    /// `μ∫‖∇τ‖²_{H³}` per member.
    pub mu_dissipation: Vec<f64>,
    /// `‖u^{μᵢ} − u^{μᵢ₊₁}‖` at the horizon.
    pub pairwise_gaps: Vec<f64>,
    /// `(max − min)/min` of `sup_h3`.
    pub spread: f64,
    pub gaps_decreasing: bool,
    pub passed: bool,
    pub aborted: Option<String>,
}

pub fn check_mu_list(mus: &[f64]) -> Result<()> {
    if mus.is_empty() {
        return Err(Error::Config("empty mu list".into()));
    }
    if mus.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
        return Err(Error::Config("mu values must be finite and nonnegative".into()));
    }
    if mus.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("mu list must be strictly decreasing".into()));
    }
    Ok(())
}

/// Runs every member of the sweep from the same initial data.
pub fn sweep_mu(cfg: &Config, s0: &SimState) -> Result<(MuSweepResult, Vec<Trajectory>)> {
    check_mu_list(&cfg.sweep.mus)?;
    let trajs: Vec<Trajectory> = cfg
        .sweep
        .mus
        .par_iter()
        .map(|&mu| {
            let mut c = cfg.clone();
            c.params = cfg.params.with_mu(mu);
            let mut s = s0.clone();
            s.params = c.params;
            trajectory(&c, &s, None)
        })
        .collect::<Result<Vec<_>>>()?;
    let done: Vec<&Trajectory> = trajs.iter().take_while(|t| t.error.is_none()).collect();
    let aborted = trajs
        .iter()
        .zip(&cfg.sweep.mus)
        .find_map(|(t, mu)| t.error.as_ref().map(|e| format!("mu = {mu}: {e}")));
    let sup_h3: Vec<f64> = done
        .iter()
        .map(|t| t.reports.iter().map(report_h3).fold(0.0, f64::max))
        .collect();
    let mut pairwise_gaps = Vec::new();
    for w in done.windows(2) {
        pairwise_gaps.push(w[0].last_state.u.sub(&w[1].last_state.u).seminorm(0)?);
    }
    let lo = sup_h3.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = sup_h3.iter().cloned().fold(0.0, f64::max);
    let spread = if lo > 0.0 && lo.is_finite() { (hi - lo) / lo } else { 0.0 };
    let gaps_decreasing = pairwise_gaps.windows(2).all(|w| w[1] < w[0]);
    let passed = aborted.is_none() && spread <= cfg.sweep.spread_limit && gaps_decreasing;
    Ok((
        MuSweepResult {
            mus: cfg.sweep.mus[..done.len()].to_vec(),
            sup_h3,
            dissipation_integrals: done.iter().map(|t| t.dissipation).collect(),
            mu_dissipation: done.iter().map(|t| t.mu_dissipation).collect(),
            pairwise_gaps,
            spread,
            gaps_decreasing,
            passed,
            aborted,
        },
        trajs,
    ))
}

pub fn cmd_sweep_mu(cfg: &Config, root: &Path) -> Result<RunRecord> {
    check_mu_list(&cfg.sweep.mus)?;
    let s0 = initial_state(cfg)?;
    cfg.etas().validate(&cfg.params)?;
    let record = RunRecord::open(root, "sweep-mu", cfg)?;
    let (res, trajs) = sweep_mu(cfg, &s0)?;
    let mut w = record.series_writer()?;
    writeln!(w, "mu,sup_h3,dissipation,mu_dissipation,gap_to_next")?;
    for (i, mu) in res.mus.iter().enumerate() {
        let gap = res.pairwise_gaps.get(i).map_or(String::new(), |g| fmt_f64(*g));
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_f64(*mu),
            fmt_f64(res.sup_h3[i]),
            fmt_f64(res.dissipation_integrals[i]),
            fmt_f64(res.mu_dissipation[i]),
            gap
        )?;
    }
    w.flush()?;
    let members = record.path("members");
    fs::create_dir_all(&members)?;
    for (i, t) in trajs.iter().enumerate() {
        let mut mw = BufWriter::new(fs::File::create(members.join(format!("{i:02}.csv")))?);
        write_reports(&mut mw, &t.reports)?;
        mw.flush()?;
        checkpoint::write(&record.path("checkpoints").join(format!("member{i:02}.bin")), &t.last_state, &record.run_id)?;
    }
    let (status, exit) = match &res.aborted {
        None => (RunStatus::Completed, verdict(res.passed)),
        Some(msg) => (RunStatus::Aborted(msg.clone()), ExitCode::BlowUp),
    };
    record.finish(&res, status, exit)
}

/// Dispatches a subcommand by name.
pub fn run_command(command: &str, cfg: &Config, root: &Path) -> Result<RunRecord> {
    match command {
        "validate-green" => cmd_validate_green(cfg, root),
        "linear-decay" => cmd_linear_decay(cfg, root),
        "simulate" => cmd_simulate(cfg, root),
        "sweep-mu" => cmd_sweep_mu(cfg, root),
        other => Err(Error::Config(format!("unknown command {other}"))),
    }
}
