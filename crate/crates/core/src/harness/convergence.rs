use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ScenarioConfig, WaveKind};
use super::scenario::{run_scenario, ScenarioResult};
use crate::error::{Result, SimError};
use crate::integrator::BottomMode;
use crate::soliton::{solve_profile, speed_for_amplitude};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Space,
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvergenceMode {
    /// Against the translated solitary wave; flat bottom only.
    Exact,
    /// Against a finer run of the same scenario.
    Relative,
}

/// A refinement ladder along one axis. The other step size is taken from
/// the base config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub axis: Axis,
    pub mode: ConvergenceMode,
    /// Step sizes from coarsest to finest.
    pub steps: Vec<f64>,
    /// Step size of the reference run in relative mode.
    pub reference: Option<f64>,
}

impl Ladder {
    /// `coarsest * 2^-k` for `k = 0..levels`.
    pub fn halving(axis: Axis, mode: ConvergenceMode, coarsest: f64, levels: usize) -> Self {
        Ladder {
            axis,
            mode,
            steps: (0..levels).map(|k| coarsest / 2f64.powi(k as i32)).collect(),
            reference: None,
        }
    }

    pub fn with_reference(mut self, h: f64) -> Self {
        self.reference = Some(h);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelError {
    pub step: f64,
    pub l2: f64,
    pub linf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub axis: Axis,
    pub mode: ConvergenceMode,
    pub reference: Option<f64>,
    pub levels: Vec<LevelError>,
    pub slope_l2: f64,
    pub slope_linf: f64,
    /// Both error norms strictly decrease along the ladder.
    pub monotone: bool,
}

impl ConvergenceReport {
    /// A study whose errors do not decrease is not fit for a slope.
    pub fn valid(&self) -> bool {
        self.monotone && self.slope_l2.is_finite() && self.slope_linf.is_finite()
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn level_config(base: &ScenarioConfig, axis: Axis, h: f64) -> ScenarioConfig {
    let mut cfg = base.clone();
    match axis {
        Axis::Space => cfg.dx = h,
        Axis::Time => cfg.dt = h,
    }
    cfg.snapshot_stride = 0;
    cfg.energy_stride = 0;
    cfg
}

fn completed(run: ScenarioResult, h: f64) -> Result<ScenarioResult> {
    match &run.diagnostics.halt_reason {
        None => Ok(run),
        Some(why) => Err(SimError::InvalidStudy(format!("run at step size {h} halted: {why}"))),
    }
}

fn norms(err: impl Iterator<Item = f64>, dx: f64) -> (f64, f64) {
    let (sq, max) = err.fold((0.0, 0.0f64), |(s, m), e| (s + e * e, m.max(e.abs())));
    ((sq * dx).sqrt(), max)
}

/// Runs the ladder and fits convergence orders to the final surfaces.
pub fn convergence_study(base: &ScenarioConfig, ladder: &Ladder) -> Result<ConvergenceReport> {
    if ladder.steps.len() < 2 {
        return Err(SimError::InvalidStudy("a ladder needs at least two levels".into()));
    }
    if ladder.steps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(SimError::InvalidStudy("ladder step sizes must decrease".into()));
    }
    if ladder.mode == ConvergenceMode::Exact && (base.bottom_mode != BottomMode::Flat || base.wave != WaveKind::Single)
    {
        return Err(SimError::InvalidStudy(
            "exact comparison needs a single wave over a flat bottom".into(),
        ));
    }
    let (dx_levels, dt_levels): (Vec<f64>, Vec<f64>) = match ladder.axis {
        Axis::Space => (ladder.steps.clone(), vec![base.dt]),
        Axis::Time => (vec![base.dx], ladder.steps.clone()),
    };
    if dx_levels.len() > 1 && dt_levels.len() > 1 {
        return Err(SimError::InvalidStudy("refine one axis at a time".into()));
    }
    let finest = *ladder.steps.last().unwrap();
    // every level starts from the same tabulated profile
    let mut base = base.clone();
    base.profile_mesh.get_or_insert(dx_levels.last().unwrap() / 10.0);
    let base = &base;
    let runs: Vec<ScenarioResult> = ladder
        .steps
        .par_iter()
        .map(|&h| run_scenario(&level_config(base, ladder.axis, h)).and_then(|r| completed(r, h)))
        .collect::<Result<_>>()?;
    // every level must end at the same instant
    let t_final = runs[0].final_snapshot().time;
    if runs.iter().any(|r| (r.final_snapshot().time - t_final).abs() > 1e-9) {
        return Err(SimError::InvalidStudy(
            "t_end is not a whole number of steps on every level".into(),
        ));
    }

    let levels: Vec<LevelError> = match ladder.mode {
        ConvergenceMode::Exact => {
            let d = base.derive()?;
            let mesh = base.profile_mesh.unwrap();
            let speed = speed_for_amplitude(1.0, d.mu, d.eps, mesh)?;
            let profile = solve_profile(speed, d.mu, d.eps, mesh, base.tail_tol)?;
            let mut levels = Vec::with_capacity(runs.len());
            for (run, &h) in runs.iter().zip(&ladder.steps) {
                let crest = run.crests[0] + speed * t_final;
                let snap = run.final_snapshot();
                let dx = run.node_coords[1] - run.node_coords[0];
                let err = run
                    .node_coords
                    .iter()
                    .zip(&snap.zeta)
                    .map(|(&x, &z)| z - profile.zeta_at(x - crest));
                let (l2, linf) = norms(err, dx);
                levels.push(LevelError { step: h, l2, linf });
            }
            levels
        }
        ConvergenceMode::Relative => {
            let href = ladder.reference.unwrap_or(finest / 4.0);
            if !(href < finest) {
                return Err(SimError::InvalidStudy(
                    "the reference must be finer than the ladder".into(),
                ));
            }
            let reference = completed(run_scenario(&level_config(base, ladder.axis, href))?, href)?;
            let rz = &reference.final_snapshot().zeta;
            let mut levels = Vec::with_capacity(runs.len());
            for (run, &h) in runs.iter().zip(&ladder.steps) {
                let snap = run.final_snapshot();
                let dx = run.node_coords[1] - run.node_coords[0];
                let err: Vec<f64> = match ladder.axis {
                    Axis::Time => snap.zeta.iter().zip(rz).map(|(a, b)| a - b).collect(),
                    Axis::Space => {
                        let ratio = h / href;
                        let stride = ratio.round() as usize;
                        if (ratio - stride as f64).abs() > 1e-9 {
                            return Err(SimError::InvalidStudy(format!(
                                "reference spacing {href} does not nest in {h}"
                            )));
                        }
                        snap.zeta.iter().enumerate().map(|(i, z)| z - rz[i * stride]).collect()
                    }
                };
                let (l2, linf) = norms(err.into_iter(), dx);
                levels.push(LevelError { step: h, l2, linf });
            }
            levels
        }
    };

    let hs: Vec<f64> = levels.iter().map(|l| l.step).collect();
    let l2: Vec<f64> = levels.iter().map(|l| l.l2).collect();
    let linf: Vec<f64> = levels.iter().map(|l| l.linf).collect();
    let decreasing = |e: &[f64]| e.windows(2).all(|w| w[1] < w[0]);
    Ok(ConvergenceReport {
        axis: ladder.axis,
        mode: ladder.mode,
        reference: match ladder.mode {
            ConvergenceMode::Exact => None,
            ConvergenceMode::Relative => Some(ladder.reference.unwrap_or(finest / 4.0)),
        },
        monotone: decreasing(&l2) && decreasing(&linf),
        slope_l2: loglog_slope(&hs, &l2),
        slope_linf: loglog_slope(&hs, &linf),
        levels,
    })
}
