use rayon::prelude::*;
use serde::Serialize;

use super::config::{ScenarioConfig, WaveKind};
use super::scenario::{run_scenario, BreakingEvent, ScenarioResult};
use crate::error::{Result, SimError};
use crate::grid::support_half_width;
use crate::integrator::BottomMode;
use crate::soliton::{solve_profile, speed_for_amplitude};

/// Clearance kept between a wave tail and a wall, in wavelengths.
const WALL_MARGIN: f64 = 1.0;

/// Fraction of the ablation-time velocity below which the solid counts as stopped.
const REST_FRACTION: f64 = 1e-4;

/// Speed and tail half-width of the configured wave, in solver units.
fn wave_extent(cfg: &ScenarioConfig) -> Result<(f64, f64)> {
    let d = cfg.derive()?;
    let mesh = cfg.profile_mesh.unwrap_or(cfg.dx / 10.0);
    let speed = speed_for_amplitude(1.0, d.mu, d.eps, mesh)?;
    let profile = solve_profile(speed, d.mu, d.eps, mesh, cfg.tail_tol)?;
    Ok((speed, profile.half_width))
}

/// Resizes the tank so that every wave tail clears the upstream wall at the
/// start and the leading tail clears the downstream wall at `t_end`.
pub fn fit_tank(cfg: &ScenarioConfig) -> Result<ScenarioConfig> {
    let d = cfg.derive()?;
    let solid = support_half_width(d.beta, d.shape_length, cfg.truncation_tol) + WALL_MARGIN;
    let (left, right) = match cfg.wave {
        WaveKind::Rest => (solid, solid),
        WaveKind::Single | WaveKind::Train { .. } => {
            let (speed, half) = wave_extent(cfg)?;
            let count = match cfg.wave {
                WaveKind::Train { count } => count.max(1),
                _ => 1,
            };
            let spacing = match (cfg.wave, cfg.train_spacing) {
                (WaveKind::Train { .. }, None) => default_spacing(cfg)?,
                (_, Some(s)) => s,
                _ => 0.0,
            };
            let tail = cfg.wave_offset + (count - 1) as f64 * spacing + half + WALL_MARGIN;
            let front = speed * cfg.t_end - cfg.wave_offset + half + WALL_MARGIN;
            (tail.max(solid), front.max(solid))
        }
    };
    Ok(cfg.clone().with_tank(left, right))
}

/// Crest spacing used by a train when none is configured.
pub fn default_spacing(cfg: &ScenarioConfig) -> Result<f64> {
    let d = cfg.derive()?;
    let mesh = cfg.profile_mesh.unwrap_or(cfg.dx / 10.0);
    let speed = speed_for_amplitude(1.0, d.mu, d.eps, mesh)?;
    Ok(2.0 * solve_profile(speed, d.mu, d.eps, mesh, cfg.tail_tol)?.reach(1e-10))
}

/// How the bottom is treated in one case of a study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "bottom", rename_all = "lowercase")]
pub enum Bottom {
    Flat,
    Fixed,
    Moving { c_fric: f64 },
}

impl Bottom {
    pub fn apply(self, cfg: &mut ScenarioConfig) {
        match self {
            Bottom::Flat => cfg.bottom_mode = BottomMode::Flat,
            Bottom::Fixed => cfg.bottom_mode = BottomMode::Fixed,
            Bottom::Moving { c_fric } => {
                cfg.bottom_mode = BottomMode::Moving;
                cfg.c_fric = c_fric;
            }
        }
    }

    pub fn label(self) -> String {
        match self {
            Bottom::Flat => "flat".into(),
            Bottom::Fixed => "fixed".into(),
            Bottom::Moving { c_fric } => format!("c_fric={c_fric}"),
        }
    }
}

fn run_all(cases: &[ScenarioConfig]) -> Result<Vec<ScenarioResult>> {
    cases.par_iter().map(run_scenario).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplitudeRow {
    /// Incoming amplitude in meters.
    pub a_surf: f64,
    pub eps: f64,
    #[serde(flatten)]
    pub bottom: Bottom,
    pub amplitude_in: f64,
    pub amplitude_out: Option<f64>,
    pub ratio: Option<f64>,
    pub breaking: Option<BreakingEvent>,
    pub halt_reason: Option<String>,
    pub max_abs_x: f64,
}

/// Amplitude after the obstacle for every incoming amplitude, over a flat
/// bottom, a fixed solid and a sliding solid per friction coefficient.
pub fn amplitude_study(base: &ScenarioConfig, amplitudes: &[f64], frictions: &[f64]) -> Result<Vec<AmplitudeRow>> {
    let bottoms: Vec<Bottom> = [Bottom::Flat, Bottom::Fixed]
        .into_iter()
        .chain(frictions.iter().map(|&c_fric| Bottom::Moving { c_fric }))
        .collect();
    let mut cases = Vec::new();
    let mut keys = Vec::new();
    for &a in amplitudes {
        for &b in &bottoms {
            let mut cfg = base.clone();
            cfg.a_surf = a;
            cfg.breaking_armed = true;
            cfg.stop_when_measured = true;
            b.apply(&mut cfg);
            // long enough for the crest to reach the station past the solid
            let d = cfg.derive()?;
            let (speed, half) = wave_extent(&cfg)?;
            let solid = support_half_width(d.beta, d.shape_length, cfg.truncation_tol);
            cfg.t_end = (cfg.wave_offset + solid + cfg.amplitude_station + half.min(2.0)) / speed + 1.0;
            cfg.t_end = (cfg.t_end / cfg.dt).ceil() * cfg.dt;
            cases.push(fit_tank(&cfg)?);
            keys.push((a, d.eps, b));
        }
    }
    let runs = run_all(&cases)?;
    Ok(keys
        .into_iter()
        .zip(runs)
        .map(|((a_surf, eps, bottom), r)| {
            let d = r.diagnostics;
            AmplitudeRow {
                a_surf,
                eps,
                bottom,
                amplitude_in: d.amplitude_in,
                amplitude_out: d.amplitude_out,
                ratio: d.amplitude_ratio,
                breaking: d.breaking,
                halt_reason: d.halt_reason,
                max_abs_x: d.max_abs_x,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakingRow {
    pub a_surf: f64,
    pub eps: f64,
    #[serde(flatten)]
    pub bottom: Bottom,
    pub breaking: Option<BreakingEvent>,
    /// Crest position relative to the solid center, in wavelengths.
    pub crest_from_solid: Option<f64>,
}

/// Where and when the breaking detector fires over a fixed solid and over
/// sliding solids.
pub fn breaking_study(base: &ScenarioConfig, amplitudes: &[f64], frictions: &[f64]) -> Result<Vec<BreakingRow>> {
    let bottoms: Vec<Bottom> = std::iter::once(Bottom::Fixed)
        .chain(frictions.iter().map(|&c_fric| Bottom::Moving { c_fric }))
        .collect();
    let mut cases = Vec::new();
    let mut keys = Vec::new();
    for &a in amplitudes {
        for &b in &bottoms {
            let mut cfg = base.clone();
            cfg.a_surf = a;
            cfg.breaking_armed = true;
            b.apply(&mut cfg);
            let eps = cfg.derive()?.eps;
            cases.push(fit_tank(&cfg)?);
            keys.push((a, eps, b));
        }
    }
    let runs = run_all(&cases)?;
    Ok(keys
        .into_iter()
        .zip(runs)
        .map(|((a_surf, eps, bottom), r)| BreakingRow {
            a_surf,
            eps,
            bottom,
            breaking: r.diagnostics.breaking,
            crest_from_solid: r.diagnostics.breaking.map(|b| b.crest - r.derived.solid_center),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub c_fric: f64,
    pub max_abs_x: f64,
    pub final_x: f64,
    pub halt_reason: Option<String>,
}

/// Solid displacement under one passing wave for several friction values.
pub fn friction_sweep(base: &ScenarioConfig, frictions: &[f64]) -> Result<(Vec<SweepRow>, Vec<ScenarioResult>)> {
    let cases: Vec<ScenarioConfig> = frictions
        .iter()
        .map(|&c_fric| {
            let mut cfg = base.clone();
            Bottom::Moving { c_fric }.apply(&mut cfg);
            fit_tank(&cfg)
        })
        .collect::<Result<_>>()?;
    let runs = run_all(&cases)?;
    let rows = frictions
        .iter()
        .zip(&runs)
        .map(|(&c_fric, r)| SweepRow {
            c_fric,
            max_abs_x: r.diagnostics.max_abs_x,
            final_x: r.diagnostics.final_x,
            halt_reason: r.diagnostics.halt_reason.clone(),
        })
        .collect();
    Ok((rows, runs))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    pub spacing: f64,
    pub speed: f64,
    /// Solid displacement halfway between consecutive crest passages.
    pub post_wave_x: Vec<f64>,
    /// Number of leading entries of `post_wave_x` that strictly increase.
    pub increasing_run: usize,
    pub halt_reason: Option<String>,
}

/// Runs a wave train over the solid and samples the displacement after each
/// passing wave. `passes` sets how many crests must cross the solid before
/// the run ends; `t_end` and the tank are chosen to fit.
pub fn wave_train(base: &ScenarioConfig, count: usize, passes: usize) -> Result<(TrainReport, ScenarioResult)> {
    if passes == 0 || passes > count {
        return Err(SimError::InvalidInput(format!(
            "cannot watch {passes} passages of a {count}-wave train"
        )));
    }
    let mut cfg = base.clone();
    cfg.wave = WaveKind::Train { count };
    let spacing = match cfg.train_spacing {
        Some(s) => s,
        None => default_spacing(&cfg)?,
    };
    cfg.train_spacing = Some(spacing);
    let (speed, _) = wave_extent(&cfg)?;
    let arrival = |k: usize| (cfg.wave_offset + k as f64 * spacing) / speed;
    cfg.t_end = ((arrival(passes - 1) + 0.5 * spacing / speed + 1.0) / cfg.dt).ceil() * cfg.dt;
    let cfg = fit_tank(&cfg)?;
    let run = run_scenario(&cfg)?;
    let post_wave_x: Vec<f64> = (0..passes)
        .map(|k| 0.5 * (arrival(k) + arrival(k + 1)))
        .map(|t| (t / cfg.dt).round() as usize)
        .take_while(|&step| step < run.trajectory.len())
        .map(|step| run.trajectory[step].x)
        .collect();
    let increasing_run = 1 + post_wave_x.windows(2).take_while(|w| w[1] > w[0]).count();
    Ok((
        TrainReport {
            spacing,
            speed,
            increasing_run: increasing_run.min(post_wave_x.len()),
            post_wave_x,
            halt_reason: run.diagnostics.halt_reason.clone(),
        },
        run,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationReport {
    pub ablated_at: Option<f64>,
    /// Time at which the ablated solid comes to rest.
    pub stopped_at: Option<f64>,
    /// Largest deviation of the ablated velocity from its straight-line fit
    /// between ablation and rest, relative to the velocity at ablation.
    pub linear_misfit: Option<f64>,
    pub full_min_xdot: f64,
    pub full_reverses: bool,
    pub full_final_x: f64,
    pub ablated_final_x: f64,
}

/// Compares the full model with a run where the fluid stops acting on the
/// solid once its velocity peaks; friction alone then brings it to rest.
pub fn ablation_study(base: &ScenarioConfig) -> Result<(AblationReport, [ScenarioResult; 2])> {
    let mut full = base.clone();
    full.bottom_mode = BottomMode::Moving;
    full.ablate_after_peak = false;
    let full = fit_tank(&full)?;
    let mut ablated = full.clone();
    ablated.ablate_after_peak = true;
    let mut runs = run_all(&[full, ablated])?;
    let ablated = runs.pop().unwrap();
    let full = runs.pop().unwrap();

    let from = ablated.diagnostics.ablated_at;
    let (stopped_at, linear_misfit) = match from {
        None => (None, None),
        Some(t0) => {
            let tail: Vec<_> = ablated.trajectory.iter().filter(|s| s.time >= t0).collect();
            // the regularized law leaves a creep far below the sliding speed
            let v0 = tail.first().map_or(0.0, |s| s.xdot.abs());
            let stop = tail.iter().position(|s| s.xdot.abs() <= REST_FRACTION * v0);
            match stop {
                Some(k) if k >= 3 => {
                    let seg = &tail[..k];
                    let t: Vec<f64> = seg.iter().map(|s| s.time).collect();
                    let v: Vec<f64> = seg.iter().map(|s| s.xdot).collect();
                    let (a, b) = line_fit(&t, &v);
                    let misfit = t
                        .iter()
                        .zip(&v)
                        .map(|(t, v)| (v - (a + b * t)).abs())
                        .fold(0.0, f64::max);
                    (Some(tail[k].time), Some(misfit / v[0].abs()))
                }
                _ => (None, None),
            }
        }
    };
    let full_min_xdot = full.trajectory.iter().map(|s| s.xdot).fold(f64::INFINITY, f64::min);
    Ok((
        AblationReport {
            ablated_at: from,
            stopped_at,
            linear_misfit,
            full_min_xdot,
            full_reverses: full_min_xdot < 0.0,
            full_final_x: full.diagnostics.final_x,
            ablated_final_x: ablated.diagnostics.final_x,
        },
        [full, ablated],
    ))
}

/// Least-squares line `a + b t`.
fn line_fit(t: &[f64], v: &[f64]) -> (f64, f64) {
    let n = t.len() as f64;
    let mt = t.iter().sum::<f64>() / n;
    let mv = v.iter().sum::<f64>() / n;
    let stt: f64 = t.iter().map(|x| (x - mt).powi(2)).sum();
    let stv: f64 = t.iter().zip(v).map(|(x, y)| (x - mt) * (y - mv)).sum();
    let b = stv / stt;
    (mv - b * mt, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn line_fit_recovers_line() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let v: Vec<f64> = t.iter().map(|x| 2.0 - 0.5 * x).collect();
        let (a, b) = line_fit(&t, &v);
        assert_relative_eq!(a, 2.0, epsilon = 1e-12);
        assert_relative_eq!(b, -0.5, epsilon = 1e-12);
    }

    #[test]
    fn fitted_tank_holds_the_wave() {
        let mut cfg = ScenarioConfig::default().with_mu(0.2).with_eps(0.2).with_beta(0.4);
        cfg.t_end = 3.0;
        let fitted = fit_tank(&cfg).unwrap();
        let d = fitted.derive().unwrap();
        let (speed, half) = wave_extent(&fitted).unwrap();
        assert!(d.solid_center - cfg.wave_offset - half > 0.0);
        assert!(d.solid_center - cfg.wave_offset + speed * 3.0 + half < d.tank);
    }

    #[test]
    fn train_rejects_impossible_passes() {
        let cfg = ScenarioConfig::default();
        assert!(wave_train(&cfg, 3, 4).is_err());
        assert!(wave_train(&cfg, 3, 0).is_err());
    }
}
