//! Time stepping for the coupled fluid and solid system.
//!
//! The first two steps are taken with classical RK4 on `(zeta, U, X, Xdot)`
//! using the continuous friction law, or its stick/slip limit while the solid
//! is at rest. From then on each step is an
//! Adams-Bashforth predictor followed by an Adams-Moulton corrector for the
//! fluid, with the solid advanced once per step by the explicit three-level
//! update before the fluid predictor.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::grid::{resample_bottom, sample_bottom, Bathymetry, BottomFields, StaggeredGrid};
use crate::harness::detect_breaking;
use crate::physics::{self, FluidState, Helmholtz, PhysicalParams};
use crate::solid::{self, SolidState};
use crate::stencils::{self, Family, Parity};

pub const AB3: [f64; 3] = [23.0 / 12.0, -16.0 / 12.0, 5.0 / 12.0];
pub const AM4: [f64; 4] = [9.0 / 24.0, 19.0 / 24.0, -5.0 / 24.0, 1.0 / 24.0];

/// Upper bound on `sqrt(g H0) dt / dx`.
pub const CFL_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CflReport {
    pub ratio: f64,
    pub pass: bool,
}

/// Checks `sqrt(g H0) dt / dx <= 0.5` for dimensional step sizes.
pub fn cfl_check(dt: f64, dx: f64, g_dim: f64, h0_dim: f64) -> CflReport {
    let ratio = (g_dim * h0_dim).sqrt() * dt / dx;
    CflReport {
        ratio,
        pass: ratio <= CFL_LIMIT,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BottomMode {
    /// No solid at all.
    Flat,
    /// The solid is present but held in place.
    Fixed,
    /// The solid slides under friction and wave pressure.
    Moving,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub dt: f64,
    pub corrector_iterations: usize,
    pub h_min: f64,
    pub breaking_armed: bool,
    /// Drops the pressure force on the solid from the first local maximum
    /// of its speed onwards.
    pub ablate_after_peak: bool,
    /// Speeds below this never count as a maximum for the ablation trigger.
    pub ablation_threshold: f64,
}

impl SolverOptions {
    pub fn new(dt: f64) -> Self {
        SolverOptions {
            dt,
            corrector_iterations: 1,
            h_min: physics::DEFAULT_H_MIN,
            breaking_armed: false,
            ablate_after_peak: false,
            ablation_threshold: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Ablation {
    active: bool,
    prev_speed: f64,
    since: Option<usize>,
}

/// Right-hand side evaluations kept for the multistep formulas.
#[derive(Debug, Clone)]
pub struct StepHistory {
    /// `(E, F)` at levels n-1 and n-2, newest first.
    pub rhs: VecDeque<(Vec<f64>, Vec<f64>)>,
}

struct Derivative {
    e: Vec<f64>,
    f: Vec<f64>,
    xdot: f64,
    xddot: f64,
}

/// A single running simulation; owns all of its state.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub grid: StaggeredGrid,
    pub params: PhysicalParams,
    pub bathy: Option<Bathymetry>,
    pub mode: BottomMode,
    pub opts: SolverOptions,
    helm: Helmholtz,
    pub state: FluidState,
    pub bottom: BottomFields,
    scratch_bottom: BottomFields,
    pub solid: SolidState,
    /// Best available solid velocity at the current level.
    pub xdot: f64,
    pub history: StepHistory,
    pub step_index: usize,
    ablation: Ablation,
}

impl Simulation {
    pub fn new(
        grid: StaggeredGrid,
        params: PhysicalParams,
        bathy: Option<Bathymetry>,
        mode: BottomMode,
        opts: SolverOptions,
        initial: FluidState,
        xdot0: f64,
    ) -> Result<Self> {
        params.validate()?;
        if !(opts.dt > 0.0 && opts.dt.is_finite()) {
            return Err(SimError::InvalidInput(format!("dt must be positive, got {}", opts.dt)));
        }
        if opts.corrector_iterations == 0 {
            return Err(SimError::InvalidInput("at least one corrector pass is required".into()));
        }
        if initial.zeta.len() != grid.n_nodes
            || initial.vbar.len() != grid.n_mids()
            || initial.ubar.len() != grid.n_mids()
        {
            return Err(SimError::InvalidInput("initial state does not match the grid".into()));
        }
        let bottom = match (mode, &bathy) {
            (BottomMode::Flat, _) => BottomFields::flat(&grid),
            (_, Some(b)) => sample_bottom(b, 0.0, &grid)?,
            (_, None) => {
                return Err(SimError::InvalidInput(
                    "a solid profile is required unless the bottom is flat".into(),
                ))
            }
        };
        let xdot = if mode == BottomMode::Moving { xdot0 } else { 0.0 };
        let helm = Helmholtz::new(grid.n_mids(), params.mu, grid.dx)?;
        physics::fluid_height(&initial.zeta, &bottom.b_nodes, &params, opts.h_min, grid.dx)?;
        Ok(Simulation {
            scratch_bottom: bottom.clone(),
            grid,
            params,
            bathy,
            mode,
            opts,
            helm,
            state: initial,
            bottom,
            solid: SolidState::at_rest(0.0),
            xdot,
            history: StepHistory {
                rhs: VecDeque::with_capacity(3),
            },
            step_index: 0,
            ablation: Ablation::default(),
        })
    }

    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.opts.dt
    }

    pub fn displacement(&self) -> f64 {
        self.solid.x_curr
    }

    pub fn energy(&self) -> f64 {
        physics::energy(&self.state, &self.bottom.b_nodes, self.xdot, &self.params, self.grid.dx)
    }

    pub fn mass(&self) -> f64 {
        physics::mass(&self.state.zeta, &self.grid)
    }

    /// Step index from which the pressure force was dropped, if it was.
    pub fn ablated_since(&self) -> Option<usize> {
        self.ablation.since
    }

    /// Advances one time step. On error the simulation is left at the last
    /// completed step.
    pub fn step(&mut self) -> Result<()> {
        if self.step_index < 2 {
            self.rk4_step()?;
        } else {
            self.pc_step()?;
        }
        if self.opts.breaking_armed {
            if let Some((position, slope)) = detect_breaking(&self.state.zeta, self.grid.dx) {
                return Err(SimError::Breaking { position, slope });
            }
        }
        Ok(())
    }

    fn pressure_forces(&self, zeta: &[f64], x: f64, bottom: &BottomFields) -> Result<(f64, f64)> {
        let bathy = self.bathy.as_ref().expect("moving mode carries a solid");
        let zm = stencils::interp(zeta, Family::Node, Parity::Even);
        let c = solid::coeff_c(zeta, &zm, x, bathy, &self.params, &self.grid)?;
        let cbar = if self.ablation.active {
            0.0
        } else {
            solid::coeff_cbar(zeta, &zm, bottom, bathy, &self.params, &self.grid)
        };
        Ok((c, cbar))
    }

    fn fluid_rhs(
        &self,
        zeta: &[f64],
        vbar: &[f64],
        bottom: &BottomFields,
        xdot: f64,
        xddot: f64,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let e = physics::rhs_zeta(zeta, vbar, bottom, xdot, &self.params, self.opts.h_min, self.grid.dx)?;
        let f = physics::rhs_momentum(zeta, vbar, bottom, xdot, xddot, &self.params, self.grid.dx);
        Ok((e, f))
    }

    fn derivative(&mut self, zeta: &[f64], ubar: &[f64], x: f64, xdot: f64) -> Result<Derivative> {
        let vbar = self.helm.solve(ubar);
        let (xdot, xddot) = if self.mode == BottomMode::Moving {
            let bathy = self.bathy.expect("moving mode carries a solid");
            let mut buf = std::mem::replace(&mut self.scratch_bottom, BottomFields::flat(&self.grid));
            let res =
                resample_bottom(&bathy, x, &self.grid, &mut buf).and_then(|_| self.pressure_forces(zeta, x, &buf));
            let (c, cbar) = match res {
                Ok(v) => v,
                Err(e) => {
                    self.scratch_bottom = buf;
                    return Err(e);
                }
            };
            // at rest the regularized law is stiff; explicit stages use the
            // stick or slip limit instead
            let g = if xdot.abs() <= self.params.delta {
                if cbar.abs() <= c {
                    0.0
                } else {
                    cbar - c * cbar.signum()
                }
            } else {
                solid::solid_acceleration(c, cbar, xdot, self.params.delta)
            };
            let out = self.fluid_rhs(zeta, &vbar, &buf, xdot, g);
            self.scratch_bottom = buf;
            let (e, f) = out?;
            return Ok(Derivative { e, f, xdot, xddot: g });
        } else {
            (0.0, 0.0)
        };
        let (e, f) = self.fluid_rhs(zeta, &vbar, &self.bottom, xdot, xddot)?;
        Ok(Derivative { e, f, xdot, xddot })
    }

    fn rk4_step(&mut self) -> Result<()> {
        let dt = self.opts.dt;
        let z0 = self.state.zeta.clone();
        let u0 = self.state.ubar.clone();
        let x0 = self.solid.x_curr;
        let v0 = self.xdot;
        let axpy =
            |base: &[f64], k: &[f64], a: f64| -> Vec<f64> { base.iter().zip(k).map(|(b, k)| b + a * k).collect() };

        let k1 = self.derivative(&z0, &u0, x0, v0)?;
        let k2 = self.derivative(
            &axpy(&z0, &k1.e, 0.5 * dt),
            &axpy(&u0, &k1.f, 0.5 * dt),
            x0 + 0.5 * dt * k1.xdot,
            v0 + 0.5 * dt * k1.xddot,
        )?;
        let k3 = self.derivative(
            &axpy(&z0, &k2.e, 0.5 * dt),
            &axpy(&u0, &k2.f, 0.5 * dt),
            x0 + 0.5 * dt * k2.xdot,
            v0 + 0.5 * dt * k2.xddot,
        )?;
        let k4 = self.derivative(
            &axpy(&z0, &k3.e, dt),
            &axpy(&u0, &k3.f, dt),
            x0 + dt * k3.xdot,
            v0 + dt * k3.xddot,
        )?;
        let combine = |base: &[f64], a: &[f64], b: &[f64], c: &[f64], d: &[f64]| -> Vec<f64> {
            (0..base.len())
                .map(|i| base[i] + dt / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]))
                .collect()
        };
        let zeta = combine(&z0, &k1.e, &k2.e, &k3.e, &k4.e);
        let ubar = combine(&u0, &k1.f, &k2.f, &k3.f, &k4.f);
        let x1 = x0 + dt / 6.0 * (k1.xdot + 2.0 * k2.xdot + 2.0 * k3.xdot + k4.xdot);
        let v1 = v0 + dt / 6.0 * (k1.xddot + 2.0 * k2.xddot + 2.0 * k3.xddot + k4.xddot);
        let vbar = self.helm.solve(&ubar);

        let mut bottom = self.bottom.clone();
        if self.mode == BottomMode::Moving {
            resample_bottom(self.bathy.as_ref().unwrap(), x1, &self.grid, &mut bottom)?;
        }
        physics::fluid_height(&zeta, &bottom.b_nodes, &self.params, self.opts.h_min, self.grid.dx)?;

        self.history.rhs.push_front((k1.e, k1.f));
        self.history.rhs.truncate(2);
        self.state = FluidState { zeta, vbar, ubar };
        self.bottom = bottom;
        self.solid.v_central = v0;
        self.solid.a_central = k1.xddot;
        self.solid.x_prev2 = self.solid.x_prev;
        self.solid.x_prev = x0;
        self.solid.x_curr = x1;
        self.xdot = v1;
        self.track_ablation(v1.abs());
        self.step_index += 1;
        Ok(())
    }

    fn pc_step(&mut self) -> Result<()> {
        let dt = self.opts.dt;
        let moving = self.mode == BottomMode::Moving;

        let (x_next, v_n, a_n) = if moving {
            let (c, cbar) = self.pressure_forces(&self.state.zeta, self.solid.x_curr, &self.bottom)?;
            let x_next = solid::solid_step(&self.solid, c, cbar, dt, self.params.delta);
            let (v, a, _) = solid::solid_kinematics(&self.solid, x_next, dt);
            (x_next, v, a)
        } else {
            (self.solid.x_curr, 0.0, 0.0)
        };

        let (e_n, f_n) = self.fluid_rhs(&self.state.zeta, &self.state.vbar, &self.bottom, v_n, a_n)?;
        let (e1, f1) = &self.history.rhs[0];
        let (e2, f2) = &self.history.rhs[1];

        let n = self.grid.n_nodes;
        let m = self.grid.n_mids();
        let mut zeta: Vec<f64> = (0..n)
            .map(|i| self.state.zeta[i] + dt * (AB3[0] * e_n[i] + AB3[1] * e1[i] + AB3[2] * e2[i]))
            .collect();
        let mut ubar: Vec<f64> = (0..m)
            .map(|j| self.state.ubar[j] + dt * (AB3[0] * f_n[j] + AB3[1] * f1[j] + AB3[2] * f2[j]))
            .collect();
        let mut vbar = self.helm.solve(&ubar);

        let mut bottom = std::mem::replace(&mut self.scratch_bottom, BottomFields::flat(&self.grid));
        let (v_b, a_b) = if moving {
            if let Err(e) = resample_bottom(self.bathy.as_ref().unwrap(), x_next, &self.grid, &mut bottom) {
                self.scratch_bottom = bottom;
                return Err(e);
            }
            let s = &self.solid;
            (
                (3.0 * x_next - 4.0 * s.x_curr + s.x_prev) / (2.0 * dt),
                (2.0 * x_next - 5.0 * s.x_curr + 4.0 * s.x_prev - s.x_prev2) / (dt * dt),
            )
        } else {
            bottom.clone_from(&self.bottom);
            (0.0, 0.0)
        };

        for _ in 0..self.opts.corrector_iterations {
            let (e_p, f_p) = match self.fluid_rhs(&zeta, &vbar, &bottom, v_b, a_b) {
                Ok(v) => v,
                Err(e) => {
                    self.scratch_bottom = bottom;
                    return Err(e);
                }
            };
            for i in 0..n {
                zeta[i] =
                    self.state.zeta[i] + dt * (AM4[0] * e_p[i] + AM4[1] * e_n[i] + AM4[2] * e1[i] + AM4[3] * e2[i]);
            }
            for j in 0..m {
                ubar[j] =
                    self.state.ubar[j] + dt * (AM4[0] * f_p[j] + AM4[1] * f_n[j] + AM4[2] * f1[j] + AM4[3] * f2[j]);
            }
            self.helm.solve_into(&ubar, &mut vbar);
        }
        if let Err(e) = physics::fluid_height(&zeta, &bottom.b_nodes, &self.params, self.opts.h_min, self.grid.dx) {
            self.scratch_bottom = bottom;
            return Err(e);
        }

        self.history.rhs.push_front((e_n, f_n));
        self.history.rhs.truncate(2);
        self.state = FluidState { zeta, vbar, ubar };
        std::mem::swap(&mut self.bottom, &mut bottom);
        self.scratch_bottom = bottom;
        if moving {
            self.solid.advance(x_next, dt);
            self.xdot = v_b;
            self.track_ablation(v_n.abs());
        }
        self.step_index += 1;
        Ok(())
    }

    fn track_ablation(&mut self, speed: f64) {
        if !self.opts.ablate_after_peak || self.ablation.active {
            return;
        }
        if speed < self.ablation.prev_speed && self.ablation.prev_speed > self.opts.ablation_threshold {
            self.ablation.active = true;
            self.ablation.since = Some(self.step_index);
        }
        self.ablation.prev_speed = speed;
    }
}
