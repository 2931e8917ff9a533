use serde::Serialize;

use super::config::{Derived, ScenarioConfig, WaveKind};
use crate::error::{Result, SimError};
use crate::grid::{build_grid, gaussian_bottom, Bathymetry, StaggeredGrid};
use crate::integrator::{Simulation, SolverOptions, CFL_LIMIT};
use crate::physics::{FluidState, PhysicalParams};
use crate::solid::compute_c_solid;
use crate::soliton::{place_train, solve_profile, speed_for_amplitude, SolitonProfile};

/// Relative level used to space the members of a wave train.
const TRAIN_OVERLAP: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub zeta: Vec<f64>,
    pub vbar: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolidSample {
    pub step: usize,
    pub time: f64,
    pub x: f64,
    pub xdot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergySample {
    pub step: usize,
    pub time: f64,
    pub energy: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BreakingEvent {
    pub time: f64,
    /// Where the slope criterion fired.
    pub position: f64,
    pub slope: f64,
    /// Position of the highest crest at that moment.
    pub crest: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub steps: usize,
    pub completed: bool,
    pub halt_reason: Option<String>,
    pub halt_time: Option<f64>,
    pub breaking: Option<BreakingEvent>,
    pub speed: Option<f64>,
    pub c_solid: f64,
    pub amplitude_in: f64,
    pub amplitude_out: Option<f64>,
    pub amplitude_ratio: Option<f64>,
    pub max_abs_x: f64,
    pub final_x: f64,
    pub ablated_at: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub config: ScenarioConfig,
    pub derived: Derived,
    pub node_coords: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub trajectory: Vec<SolidSample>,
    pub energy: Vec<EnergySample>,
    pub diagnostics: Diagnostics,
    /// Initial crest positions of the launched waves.
    pub crests: Vec<f64>,
}

impl ScenarioResult {
    pub fn final_snapshot(&self) -> &Snapshot {
        self.snapshots.last().expect("the initial state is always recorded")
    }
}

/// A ready-to-run simulation together with what was used to build it.
pub struct Prepared {
    pub sim: Simulation,
    pub derived: Derived,
    pub bathy: Bathymetry,
    pub profile: Option<SolitonProfile>,
    pub crests: Vec<f64>,
    pub c_solid: f64,
}

/// Builds the grid, solid, initial wave and solver from a config.
pub fn prepare(cfg: &ScenarioConfig) -> Result<Prepared> {
    let derived = cfg.derive()?;
    if derived.cfl_ratio > CFL_LIMIT && !cfg.override_cfl {
        return Err(SimError::CflViolation {
            ratio: derived.cfl_ratio,
        });
    }
    let grid: StaggeredGrid = build_grid(derived.tank, cfg.dx)?;
    let bathy = gaussian_bottom(
        derived.beta,
        derived.shape_length,
        derived.solid_center,
        cfg.truncation_tol,
    )?;
    let c_solid = compute_c_solid(&bathy, cfg.m_tilde, cfg.h0, &grid)?;
    let params = PhysicalParams {
        mu: derived.mu,
        eps: derived.eps,
        beta: derived.beta,
        c_fric: cfg.c_fric,
        m_tilde: cfg.m_tilde,
        delta: cfg.delta,
        h0_dim: cfg.h0,
        g_dim: cfg.g,
        c_solid,
    };
    let (state, profile, crests) = match cfg.wave {
        WaveKind::Rest => (FluidState::rest(&grid), None, Vec::new()),
        WaveKind::Single | WaveKind::Train { .. } => {
            let count = match cfg.wave {
                WaveKind::Train { count } if count >= 1 => count,
                WaveKind::Train { .. } => {
                    return Err(SimError::InvalidInput("a wave train needs at least one wave".into()))
                }
                _ => 1,
            };
            let mesh = cfg.profile_mesh.unwrap_or(cfg.dx / 10.0);
            let speed = speed_for_amplitude(1.0, derived.mu, derived.eps, mesh)?;
            let profile = solve_profile(speed, derived.mu, derived.eps, mesh, cfg.tail_tol)?;
            let spacing = cfg.train_spacing.unwrap_or_else(|| 2.0 * profile.reach(TRAIN_OVERLAP));
            let lead = derived.solid_center - cfg.wave_offset;
            let crests: Vec<f64> = (0..count).map(|k| lead - k as f64 * spacing).collect();
            let state = place_train(&profile, &crests, &grid)?;
            (state, Some(profile), crests)
        }
    };
    let opts = SolverOptions {
        corrector_iterations: cfg.corrector_iterations,
        h_min: cfg.h_min,
        breaking_armed: cfg.breaking_armed,
        ablate_after_peak: cfg.ablate_after_peak,
        ..SolverOptions::new(cfg.dt)
    };
    let sim = Simulation::new(grid, params, Some(bathy), cfg.bottom_mode, opts, state, 0.0)?;
    Ok(Prepared {
        sim,
        derived,
        bathy,
        profile,
        crests,
        c_solid,
    })
}

fn argmax_from(zeta: &[f64], start: usize) -> Option<(usize, f64)> {
    zeta.iter()
        .enumerate()
        .skip(start)
        .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((i, v)),
        })
}

/// Position and height of the highest crest at or beyond node `start`,
/// refined by the parabola through the three nodes around the maximum.
pub fn crest(zeta: &[f64], dx: f64, start: usize) -> Option<(f64, f64)> {
    let (i, peak) = argmax_from(zeta, start)?;
    if i == 0 || i + 1 >= zeta.len() {
        return Some((i as f64 * dx, peak));
    }
    let (l, r) = (zeta[i - 1], zeta[i + 1]);
    let curv = l - 2.0 * peak + r;
    if !(curv < 0.0) {
        return Some((i as f64 * dx, peak));
    }
    let offset = 0.5 * (l - r) / curv;
    Some(((i as f64 + offset) * dx, peak - 0.125 * (r - l) * (r - l) / curv))
}

fn record_snapshot(sim: &Simulation, out: &mut Vec<Snapshot>) {
    if out.last().map(|s| s.step) == Some(sim.step_index) {
        return;
    }
    out.push(Snapshot {
        step: sim.step_index,
        time: sim.time(),
        zeta: sim.state.zeta.clone(),
        vbar: sim.state.vbar.clone(),
    });
}

fn record_energy(sim: &Simulation, out: &mut Vec<EnergySample>) {
    if out.last().map(|s| s.step) == Some(sim.step_index) {
        return;
    }
    out.push(EnergySample {
        step: sim.step_index,
        time: sim.time(),
        energy: sim.energy(),
        mass: sim.mass(),
    });
}

/// Runs a scenario to `t_end` or until the solver halts. Solver halts are
/// reported in the diagnostics; configuration problems are errors.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    let Prepared {
        mut sim,
        derived,
        bathy,
        profile,
        crests,
        c_solid,
    } = prepare(cfg)?;
    let n_steps = (cfg.t_end / cfg.dt).round() as usize;
    let dx = sim.grid.dx;

    let mut snapshots = Vec::new();
    let mut trajectory = Vec::with_capacity(n_steps + 1);
    let mut energy = Vec::new();
    let sample = |sim: &Simulation| SolidSample {
        step: sim.step_index,
        time: sim.time(),
        x: sim.displacement(),
        xdot: sim.xdot,
    };
    record_snapshot(&sim, &mut snapshots);
    record_energy(&sim, &mut energy);
    trajectory.push(sample(&sim));

    let amplitude_in = crest(&sim.state.zeta, dx, 0).map_or(0.0, |c| c.1);
    let mut amplitude_out = None;
    let mut halt: Option<SimError> = None;
    let mut breaking = None;
    let mut max_abs_x: f64 = 0.0;

    while sim.step_index < n_steps {
        if let Err(e) = sim.step() {
            if let SimError::Breaking { position, slope } = e {
                breaking = Some(BreakingEvent {
                    time: sim.time(),
                    position,
                    slope,
                    crest: crest(&sim.state.zeta, dx, 0).map_or(f64::NAN, |c| c.0),
                });
            }
            halt = Some(e);
            break;
        }
        trajectory.push(sample(&sim));
        max_abs_x = max_abs_x.max(sim.displacement().abs());
        if cfg.snapshot_stride > 0 && sim.step_index % cfg.snapshot_stride == 0 {
            record_snapshot(&sim, &mut snapshots);
        }
        if cfg.energy_stride > 0 && sim.step_index % cfg.energy_stride == 0 {
            record_energy(&sim, &mut energy);
        }
        if amplitude_out.is_none() && profile.is_some() {
            let far_edge = bathy.support.1 + sim.displacement();
            let start = ((far_edge / dx).ceil().max(0.0) as usize).min(sim.grid.n_nodes - 1);
            if let Some((at, peak)) = crest(&sim.state.zeta, dx, start) {
                if at >= far_edge + cfg.amplitude_station && at < sim.grid.domain_length - dx {
                    amplitude_out = Some(peak);
                    if cfg.stop_when_measured {
                        break;
                    }
                }
            }
        }
    }
    // a breaking halt leaves the surface at the step where the detector fired
    record_snapshot(&sim, &mut snapshots);
    record_energy(&sim, &mut energy);

    let diagnostics = Diagnostics {
        steps: sim.step_index,
        completed: halt.is_none() && sim.step_index >= n_steps,
        halt_reason: halt.as_ref().map(|e| e.to_string()),
        halt_time: halt.as_ref().map(|_| sim.time()),
        breaking,
        speed: profile.as_ref().map(|p| p.speed),
        c_solid,
        amplitude_in,
        amplitude_out: if breaking.is_none() { amplitude_out } else { None },
        amplitude_ratio: match (breaking, amplitude_out) {
            (None, Some(a)) => Some(a / amplitude_in),
            _ => None,
        },
        max_abs_x,
        final_x: sim.displacement(),
        ablated_at: sim.ablated_since().map(|s| s as f64 * cfg.dt),
    };
    Ok(ScenarioResult {
        config: cfg.clone(),
        derived,
        node_coords: sim.grid.node_coords.clone(),
        snapshots,
        trajectory,
        energy,
        diagnostics,
        crests,
    })
}
