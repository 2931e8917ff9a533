//! Discretized solid motion: friction and pressure coefficients, the
//! explicit three-level displacement update and derived kinematics.

use crate::error::{Result, SimError};
use crate::grid::{check_inside, Bathymetry, BottomFields, StaggeredGrid};
use crate::physics::PhysicalParams;
use crate::stencils;

/// Default friction regularization.
pub const DEFAULT_DELTA: f64 = 1e-10;

/// Default nondimensional solid mass.
pub const DEFAULT_M_TILDE: f64 = 2.0 / 3.0;

/// Displacement history and the central kinematics of the middle level.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolidState {
    pub x_curr: f64,
    pub x_prev: f64,
    pub x_prev2: f64,
    pub v_central: f64,
    pub a_central: f64,
}

impl SolidState {
    pub fn at_rest(x: f64) -> Self {
        SolidState {
            x_curr: x,
            x_prev: x,
            x_prev2: x,
            v_central: 0.0,
            a_central: 0.0,
        }
    }

    /// Shifts the history by one level once `x_next` is known.
    pub fn advance(&mut self, x_next: f64, dt: f64) {
        let (v, a, _) = solid_kinematics(self, x_next, dt);
        self.v_central = v;
        self.a_central = a;
        self.x_prev2 = self.x_prev;
        self.x_prev = self.x_curr;
        self.x_curr = x_next;
    }
}

/// `c_solid = (|supp|/M)(10/H0 + 1) - (beta/M) int b`, where the
/// atmospheric factor uses a 10 m water column for the surface pressure.
pub fn compute_c_solid(bathy: &Bathymetry, m_tilde: f64, h0_dim: f64, grid: &StaggeredGrid) -> Result<f64> {
    check_inside(bathy, 0.0, grid)?;
    let factor = 10.0 / h0_dim + 1.0;
    let integral = bottom_integral(bathy, grid);
    Ok(bathy.support_width() / m_tilde * factor - bathy.beta / m_tilde * integral)
}

/// Integral of the unit-peak profile over its support, from grid samples.
pub fn bottom_integral(bathy: &Bathymetry, grid: &StaggeredGrid) -> f64 {
    let shape = |x: f64| bathy.smooth_derivatives(x, 0.0)[0];
    let nodes: Vec<f64> = grid.node_coords.iter().map(|&x| shape(x)).collect();
    let mids: Vec<f64> = grid.mid_coords.iter().map(|&x| shape(x)).collect();
    let (a, b) = bathy.support;
    stencils::integrate_interval(&nodes, &mids, a, b, grid.dx)
}

/// Bracket of the normal force, `1 + c_solid/beta + eps/(M beta) int zeta`
/// over the translated support.
pub fn normal_bracket(
    zeta: &[f64],
    zeta_mids: &[f64],
    x: f64,
    bathy: &Bathymetry,
    params: &PhysicalParams,
    grid: &StaggeredGrid,
) -> Result<f64> {
    check_inside(bathy, x, grid)?;
    let (a, b) = bathy.translated_support(x);
    let load = stencils::integrate_interval(zeta, zeta_mids, a, b, grid.dx);
    Ok(1.0 + params.c_solid / params.beta + params.eps / (params.m_tilde * params.beta) * load)
}

/// Friction coefficient `C = (c_fric / sqrt(mu)) * bracket`.
pub fn coeff_c(
    zeta: &[f64],
    zeta_mids: &[f64],
    x: f64,
    bathy: &Bathymetry,
    params: &PhysicalParams,
    grid: &StaggeredGrid,
) -> Result<f64> {
    let bracket = normal_bracket(zeta, zeta_mids, x, bathy, params, grid)?;
    if !(bracket > 0.0) {
        return Err(SimError::LiftOff { bracket });
    }
    Ok(params.c_fric / params.mu.sqrt() * bracket)
}

/// Horizontal pressure force `Cbar = (eps/M) int zeta b'(x - X)`, using the
/// analytic slope already sampled in `bottom`.
pub fn coeff_cbar(
    zeta: &[f64],
    zeta_mids: &[f64],
    bottom: &BottomFields,
    bathy: &Bathymetry,
    params: &PhysicalParams,
    grid: &StaggeredGrid,
) -> f64 {
    let (lo, hi) = bathy.negligible_window(bottom.shift);
    let last = grid.n_nodes - 1;
    let j = ((lo / grid.dx).floor().max(0.0) as usize).min(last - 1);
    let k = ((hi / grid.dx).ceil() as usize).clamp(j + 1, last);
    let mut acc_nodes = 0.0;
    let mut acc_mids = 0.0;
    for i in j + 1..k {
        acc_nodes += zeta[i] * bottom.db_nodes[i];
    }
    for i in j..k {
        acc_mids += zeta_mids[i] * bottom.db_mids[i];
    }
    let ends = zeta[j] * bottom.db_nodes[j] + zeta[k] * bottom.db_nodes[k];
    let integral = grid.dx / 6.0 * (ends + 2.0 * acc_nodes + 4.0 * acc_mids);
    params.eps / params.m_tilde * integral
}

/// Continuous solid acceleration `G = -C Xdot / (|Xdot| + delta) + Cbar`.
pub fn solid_acceleration(c: f64, cbar: f64, xdot: f64, delta: f64) -> f64 {
    -c * xdot / (xdot.abs() + delta) + cbar
}

/// Explicit displacement update
/// `X^{n+1} = (2X^n - (1-K) X^{n-1} + dt^2 Cbar) / (1 + K)` with
/// `K = dt^2 C / (|3X^n - 4X^{n-1} + X^{n-2}| + 2 dt delta)`.
pub fn solid_step(solid: &SolidState, c: f64, cbar: f64, dt: f64, delta: f64) -> f64 {
    let back = (3.0 * solid.x_curr - 4.0 * solid.x_prev + solid.x_prev2).abs();
    let k = dt * dt * c / (back + 2.0 * dt * delta);
    (2.0 * solid.x_curr - (1.0 - k) * solid.x_prev + dt * dt * cbar) / (1.0 + k)
}

/// Central velocity and acceleration at level n, and the backward velocity
/// of the stored triple.
pub fn solid_kinematics(solid: &SolidState, x_next: f64, dt: f64) -> (f64, f64, f64) {
    let v_central = (x_next - solid.x_prev) / (2.0 * dt);
    let a_central = (x_next - 2.0 * solid.x_curr + solid.x_prev) / (dt * dt);
    let v_backward = (3.0 * solid.x_curr - 4.0 * solid.x_prev + solid.x_prev2) / (2.0 * dt);
    (v_central, a_central, v_backward)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, gaussian_bottom, sample_bottom};
    use approx::assert_relative_eq;

    fn params(c_solid: f64) -> PhysicalParams {
        PhysicalParams {
            mu: 0.1,
            eps: 0.2,
            beta: 0.3,
            c_fric: 0.5,
            m_tilde: DEFAULT_M_TILDE,
            delta: DEFAULT_DELTA,
            h0_dim: 20.0,
            g_dim: 9.81,
            c_solid,
        }
    }

    fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let inner: f64 = (1..n).map(|i| f(a + i as f64 * h)).sum();
        h * (0.5 * f(a) + 0.5 * f(b) + inner)
    }

    #[test]
    fn c_solid_against_quadrature_oracle() {
        let grid = build_grid(10.0, 0.05).unwrap();
        let bathy = gaussian_bottom(0.3, 1.0, 5.0, 1e-4).unwrap();
        let (a, b) = bathy.support;
        let oracle = trapezoid(|x| bathy.shape(x), a, b, 1_000_000);
        let expected = 1.5 * bathy.support_width() / (2.0 / 3.0) - 0.3 / (2.0 / 3.0) * oracle;
        let got = compute_c_solid(&bathy, 2.0 / 3.0, 20.0, &grid).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-7);
        assert_relative_eq!(bathy.support_width(), 1.789, epsilon = 1e-3);
    }

    #[test]
    fn friction_coefficient_examples() {
        let grid = build_grid(10.0, 0.05).unwrap();
        let bathy = gaussian_bottom(0.3, 1.0, 5.0, 1e-4).unwrap();
        let cs = compute_c_solid(&bathy, 2.0 / 3.0, 20.0, &grid).unwrap();
        let mut p = params(cs);
        let zero = vec![0.0; grid.n_nodes];
        let zero_m = vec![0.0; grid.n_mids()];
        let base = p.c_fric / p.mu.sqrt() * (1.0 + cs / p.beta);
        assert_relative_eq!(coeff_c(&zero, &zero_m, 0.0, &bathy, &p, &grid).unwrap(), base);

        let one = vec![1.0; grid.n_nodes];
        let one_m = vec![1.0; grid.n_mids()];
        let extra = p.eps / (p.m_tilde * p.beta) * bathy.support_width();
        let bracket = normal_bracket(&one, &one_m, 0.37, &bathy, &p, &grid).unwrap();
        assert_relative_eq!(bracket, 1.0 + cs / p.beta + extra, max_relative = 1e-12);

        p.c_fric = 0.0;
        assert_eq!(coeff_c(&zero, &zero_m, 0.0, &bathy, &p, &grid).unwrap(), 0.0);

        let sink = vec![-1e4; grid.n_nodes];
        let sink_m = vec![-1e4; grid.n_mids()];
        assert!(matches!(
            coeff_c(&sink, &sink_m, 0.0, &bathy, &p, &grid),
            Err(SimError::LiftOff { .. })
        ));
    }

    #[test]
    fn pressure_coefficient_examples() {
        let grid = build_grid(10.0, 0.05).unwrap();
        let bathy = gaussian_bottom(0.3, 1.0, 5.0, 1e-4).unwrap();
        let p = params(0.0);
        let bottom = sample_bottom(&bathy, 0.21, &grid).unwrap();
        let c = vec![3.0; grid.n_nodes];
        let cm = vec![3.0; grid.n_mids()];
        assert!(coeff_cbar(&c, &cm, &bottom, &bathy, &p, &grid).abs() < 1e-12);

        // integration by parts: int s x b'(x - X) = -s int b
        let s = 0.4;
        let ramp: Vec<f64> = grid.node_coords.iter().map(|x| s * x).collect();
        let ramp_m: Vec<f64> = grid.mid_coords.iter().map(|x| s * x).collect();
        let oracle = trapezoid(|x| (-10.0 * (x - 5.21f64).powi(2)).exp(), 0.0, 10.0, 1_000_000);
        let got = coeff_cbar(&ramp, &ramp_m, &bottom, &bathy, &p, &grid);
        assert_relative_eq!(got, -(p.eps / p.m_tilde) * s * oracle, epsilon = 1e-6);
    }

    #[test]
    fn update_examples() {
        let rest = SolidState::default();
        assert_eq!(solid_step(&rest, 3.0, 0.0, 0.01, 1e-10), 0.0);

        let s = SolidState {
            x_curr: 1.0,
            x_prev: 0.9,
            x_prev2: 0.8,
            ..Default::default()
        };
        let dt = 0.01;
        assert_relative_eq!(
            solid_step(&s, 0.0, 2.0, dt, 1e-10),
            2.0 - 0.9 + dt * dt * 2.0,
            epsilon = 1e-14
        );
        // hand evaluation: K = 1e-3 / (|3 - 3.6 + 0.8| + 2e-12)
        let k = 1e-4 * 10.0 / (0.2 + 2.0 * 0.01 * 1e-10);
        let expected = (2.0 - (1.0 - k) * 0.9) / (1.0 + k);
        assert_relative_eq!(solid_step(&s, 10.0, 0.0, dt, 1e-10), expected, epsilon = 1e-12);
        assert_relative_eq!(expected, 1.104_5 / 1.005, epsilon = 1e-12);
    }

    #[test]
    fn kinematics_examples() {
        let dt = 0.1;
        let c = SolidState::at_rest(2.0);
        assert_eq!(solid_kinematics(&c, 2.0, dt), (0.0, 0.0, 0.0));
        let lin = SolidState {
            x_curr: 0.2,
            x_prev: 0.1,
            x_prev2: 0.0,
            ..Default::default()
        };
        let (v, a, vb) = solid_kinematics(&lin, 0.3, dt);
        assert_relative_eq!(v, 1.0, epsilon = 1e-14);
        assert!(a.abs() < 1e-12);
        assert_relative_eq!(vb, 1.0, epsilon = 1e-14);
        let quad = SolidState {
            x_curr: 0.04,
            x_prev: 0.01,
            x_prev2: 0.0,
            ..Default::default()
        };
        let (_, a, _) = solid_kinematics(&quad, 0.09, dt);
        assert_relative_eq!(a, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn acceleration_law() {
        assert_eq!(solid_acceleration(0.0, 1.5, 3.0, 1e-10), 1.5);
        assert_relative_eq!(solid_acceleration(2.0, 0.0, 1.0, 1e-10), -2.0, epsilon = 1e-9);
        assert_eq!(solid_acceleration(2.0, 0.5, 0.0, 1e-10), 0.5);
    }
}
