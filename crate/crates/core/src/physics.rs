//! Right-hand sides of the coupled Boussinesq system, the Helmholtz map
//! between the averaged velocity and the evolved momentum variable, and the
//! energy and mass diagnostics.

use crate::error::{Result, SimError};
use crate::grid::{BottomFields, StaggeredGrid};
use crate::stencils::{self, Family, Parity};

/// Default positive lower bound for the fluid height.
pub const DEFAULT_H_MIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub mu: f64,
    pub eps: f64,
    pub beta: f64,
    pub c_fric: f64,
    pub m_tilde: f64,
    pub delta: f64,
    pub h0_dim: f64,
    pub g_dim: f64,
    pub c_solid: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(SimError::InvalidInput(format!("{what} out of range: {v}")));
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            return bad("mu", self.mu);
        }
        if !(self.eps > 0.0) {
            return bad("eps", self.eps);
        }
        if !(self.beta > 0.0) {
            return bad("beta", self.beta);
        }
        if !(self.c_fric >= 0.0) {
            return bad("c_fric", self.c_fric);
        }
        if !(self.m_tilde > 0.0) {
            return bad("m_tilde", self.m_tilde);
        }
        if !(self.delta > 0.0) {
            return bad("delta", self.delta);
        }
        Ok(())
    }
}

/// Surface elevation on nodes, averaged velocity and its Helmholtz image on
/// midpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    pub zeta: Vec<f64>,
    pub vbar: Vec<f64>,
    pub ubar: Vec<f64>,
}

impl FluidState {
    pub fn rest(grid: &StaggeredGrid) -> Self {
        FluidState {
            zeta: vec![0.0; grid.n_nodes],
            vbar: vec![0.0; grid.n_mids()],
            ubar: vec![0.0; grid.n_mids()],
        }
    }
}

/// `h = 1 + eps zeta - beta b` on nodes, rejecting states that fall to the
/// lower bound `h_min`.
pub fn fluid_height(zeta: &[f64], b: &[f64], params: &PhysicalParams, h_min: f64, dx: f64) -> Result<Vec<f64>> {
    let h: Vec<f64> = zeta
        .iter()
        .zip(b)
        .map(|(z, b)| 1.0 + params.eps * z - params.beta * b)
        .collect();
    let (imin, hmin) =
        h.iter().enumerate().fold(
            (0, f64::INFINITY),
            |acc, (i, &v)| if v < acc.1 || v.is_nan() { (i, v) } else { acc },
        );
    if !(hmin > h_min) {
        return Err(SimError::NonPhysical {
            min_height: hmin,
            position: imin as f64 * dx,
            h_min,
        });
    }
    Ok(h)
}

/// `u = v - (mu/3) d_xx v` on midpoints, with the odd wall reflection.
pub fn helmholtz_apply(v: &[f64], mu: f64, dx: f64) -> Vec<f64> {
    if mu == 0.0 {
        return v.to_vec();
    }
    let d2 = stencils::d2_same(v, Family::Mid, Parity::Odd, dx);
    v.iter().zip(&d2).map(|(a, b)| a - mu / 3.0 * b).collect()
}

/// Factored pentadiagonal Helmholtz operator. The matrix is assembled from
/// the same stencil and reflection used by [`helmholtz_apply`], factored
/// once without pivoting (it is symmetric positive definite) and reused.
#[derive(Debug, Clone)]
pub struct Helmholtz {
    n: usize,
    // row i holds columns i-2 ..= i+2; after factoring the strictly lower
    // part stores the multipliers of L
    band: Vec<[f64; 5]>,
}

impl Helmholtz {
    pub fn new(n_mids: usize, mu: f64, dx: f64) -> Result<Self> {
        if n_mids < 5 {
            return Err(SimError::InvalidInput(format!(
                "Helmholtz operator needs at least 5 midpoints, got {n_mids}"
            )));
        }
        if !(mu >= 0.0) {
            return Err(SimError::InvalidInput(format!("mu must be non-negative, got {mu}")));
        }
        let n = n_mids;
        let scale = -mu / 3.0 / (dx * dx);
        let mut band = vec![[0.0; 5]; n];
        for (i, row) in band.iter_mut().enumerate() {
            row[2] = 1.0;
            for (off, w) in stencils::d2_weights() {
                let (j, s) = stencils::reflect(i as isize + off, n, Family::Mid, Parity::Odd);
                let col = j as isize - i as isize + 2;
                debug_assert!((0..5).contains(&col));
                row[col as usize] += scale * w * s;
            }
        }
        for k in 0..n {
            let pivot = band[k][2];
            if !(pivot.abs() > 1e-300) {
                return Err(SimError::SingularSystem(k));
            }
            for i in k + 1..(k + 3).min(n) {
                let l = band[i][k + 2 - i] / pivot;
                band[i][k + 2 - i] = l;
                for j in k + 1..(k + 3).min(n) {
                    let upper = band[k][j + 2 - k];
                    band[i][j + 2 - i] -= l * upper;
                }
            }
        }
        Ok(Helmholtz { n, band })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn solve_into(&self, u: &[f64], v: &mut [f64]) {
        assert_eq!(u.len(), self.n);
        assert_eq!(v.len(), self.n);
        let n = self.n;
        for i in 0..n {
            let mut acc = u[i];
            for k in i.saturating_sub(2)..i {
                acc -= self.band[i][k + 2 - i] * v[k];
            }
            v[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = v[i];
            for j in i + 1..(i + 3).min(n) {
                acc -= self.band[i][j + 2 - i] * v[j];
            }
            v[i] = acc / self.band[i][2];
        }
    }

    pub fn solve(&self, u: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.n];
        self.solve_into(u, &mut v);
        v
    }
}

/// Recovers `v` from `u = v - (mu/3) d_xx v`.
pub fn helmholtz_solve(u: &[f64], mu: f64, dx: f64) -> Result<Vec<f64>> {
    if mu == 0.0 {
        return Ok(u.to_vec());
    }
    Ok(Helmholtz::new(u.len(), mu, dx)?.solve(u))
}

/// Mass equation right-hand side on nodes,
/// `E = -d_x(h V) - (beta/eps) b'(x - X) Xdot`.
pub fn rhs_zeta(
    zeta: &[f64],
    vbar: &[f64],
    bottom: &BottomFields,
    xdot: f64,
    params: &PhysicalParams,
    h_min: f64,
    dx: f64,
) -> Result<Vec<f64>> {
    let h = fluid_height(zeta, &bottom.b_nodes, params, h_min, dx)?;
    let h_mid = stencils::interp(&h, Family::Node, Parity::Even);
    let flux: Vec<f64> = h_mid.iter().zip(vbar).map(|(h, v)| h * v).collect();
    let mut e = stencils::d1_cross(&flux, Family::Mid, Parity::Odd, dx);
    let src = params.beta / params.eps * xdot;
    for (e, db) in e.iter_mut().zip(&bottom.db_nodes) {
        *e = -*e - src * db;
    }
    Ok(e)
}

/// Momentum equation right-hand side on midpoints,
/// `F = -d_x zeta - (eps/2) d_x(V^2) - (mu beta / 2 eps) b''' Xdot^2 + (mu beta / 2 eps) b'' Xddot`.
pub fn rhs_momentum(
    zeta: &[f64],
    vbar: &[f64],
    bottom: &BottomFields,
    xdot: f64,
    xddot: f64,
    params: &PhysicalParams,
    dx: f64,
) -> Vec<f64> {
    let dz = stencils::d1_cross(zeta, Family::Node, Parity::Even, dx);
    let v2: Vec<f64> = vbar.iter().map(|v| v * v).collect();
    let dv2 = stencils::d1_same(&v2, Family::Mid, Parity::Even, dx);
    let k = params.mu * params.beta / (2.0 * params.eps);
    let c3 = k * xdot * xdot;
    let c2 = k * xddot;
    let mut f = Vec::with_capacity(dz.len());
    for j in 0..dz.len() {
        f.push(-dz[j] - 0.5 * params.eps * dv2[j] - c3 * bottom.d3b_mids[j] + c2 * bottom.d2b_mids[j]);
    }
    f
}

fn simpson_tank(nodes: &[f64], mids: &[f64], dx: f64) -> f64 {
    stencils::simpson_support(nodes, mids, 0, nodes.len() - 1, dx)
}

/// Wave-structure energy
/// `1/2 int zeta^2 + 1/2 int h V^2 + 1/2 int (mu/3) h (V_x)^2 + Xdot^2 / (2 eps)`.
pub fn energy(state: &FluidState, b: &[f64], xdot: f64, params: &PhysicalParams, dx: f64) -> f64 {
    let h: Vec<f64> = state
        .zeta
        .iter()
        .zip(b)
        .map(|(z, b)| 1.0 + params.eps * z - params.beta * b)
        .collect();
    let h_mid = stencils::interp(&h, Family::Node, Parity::Even);
    let z_mid = stencils::interp(&state.zeta, Family::Node, Parity::Even);
    let v_node = stencils::interp(&state.vbar, Family::Mid, Parity::Odd);
    let vx_mid = stencils::d1_same(&state.vbar, Family::Mid, Parity::Odd, dx);
    let vx_node = stencils::d1_cross(&state.vbar, Family::Mid, Parity::Odd, dx);

    let n = state.zeta.len();
    let m = state.vbar.len();
    let mut nodes = vec![0.0; n];
    let mut mids = vec![0.0; m];
    let w = params.mu / 3.0;
    for i in 0..n {
        let v = v_node[i];
        nodes[i] = state.zeta[i].powi(2) + h[i] * v * v + w * h[i] * vx_node[i].powi(2);
    }
    for j in 0..m {
        let v = state.vbar[j];
        mids[j] = z_mid[j].powi(2) + h_mid[j] * v * v + w * h_mid[j] * vx_mid[j].powi(2);
    }
    0.5 * simpson_tank(&nodes, &mids, dx) + xdot * xdot / (2.0 * params.eps)
}

/// Integral of the surface elevation over the tank.
pub fn mass(zeta: &[f64], grid: &StaggeredGrid) -> f64 {
    let mids = stencils::interp(zeta, Family::Node, Parity::Even);
    simpson_tank(zeta, &mids, grid.dx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, gaussian_bottom, sample_bottom};
    use approx::assert_relative_eq;

    fn params() -> PhysicalParams {
        PhysicalParams {
            mu: 0.1,
            eps: 0.2,
            beta: 0.3,
            c_fric: 0.5,
            m_tilde: 2.0 / 3.0,
            delta: 1e-10,
            h0_dim: 20.0,
            g_dim: 9.81,
            c_solid: 0.0,
        }
    }

    #[test]
    fn height_examples() {
        let mut p = params();
        let h = fluid_height(&[0.0; 4], &[0.0; 4], &p, DEFAULT_H_MIN, 0.1).unwrap();
        assert_eq!(h, vec![1.0; 4]);
        p.eps = 0.1;
        let h = fluid_height(&[1.0; 4], &[0.0; 4], &p, DEFAULT_H_MIN, 0.1).unwrap();
        assert_relative_eq!(h[2], 1.1);
        p.eps = 0.2;
        p.beta = 0.5;
        let h = fluid_height(&[-1.0], &[1.0], &p, DEFAULT_H_MIN, 0.1).unwrap();
        assert_relative_eq!(h[0], 0.3, epsilon = 1e-15);
        p.eps = 1.0;
        let err = fluid_height(&[0.0, -1.0, 0.0], &[0.0; 3], &p, DEFAULT_H_MIN, 0.5).unwrap_err();
        assert!(matches!(err, SimError::NonPhysical { position, .. } if position == 0.5));
    }

    #[test]
    fn helmholtz_eigenfunction() {
        // sin(k x) vanishes at both walls of a tank of length pi
        let k = 3.0;
        for (n, mu) in [(200usize, 0.1), (400, 0.25)] {
            let len = std::f64::consts::PI;
            let dx = len / n as f64;
            let v: Vec<f64> = (0..n).map(|j| (k * (j as f64 + 0.5) * dx).sin()).collect();
            let u = helmholtz_apply(&v, mu, dx);
            let factor = 1.0 + mu * k * k / 3.0;
            for (a, b) in u.iter().zip(&v) {
                assert!((a - factor * b).abs() < 1e-6);
            }
            let back = helmholtz_solve(&u, mu, dx).unwrap();
            for (a, b) in back.iter().zip(&v) {
                assert!((a - b).abs() < 1e-12);
            }
            let scaled: Vec<f64> = v.iter().map(|x| factor * x).collect();
            let approx_v = helmholtz_solve(&scaled, mu, dx).unwrap();
            for (a, b) in approx_v.iter().zip(&v) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn helmholtz_mu_zero_is_identity() {
        let u = vec![1.0, -2.0, 3.0, 0.5, 0.25, 7.0];
        assert_eq!(helmholtz_apply(&u, 0.0, 0.1), u);
        assert_eq!(helmholtz_solve(&u, 0.0, 0.1).unwrap(), u);
        assert_eq!(Helmholtz::new(6, 0.0, 0.1).unwrap().solve(&u), u);
    }

    #[test]
    fn constant_velocity_is_perturbed_only_near_walls() {
        let v = vec![2.0; 40];
        let u = helmholtz_apply(&v, 0.1, 0.1);
        for x in &u[2..38] {
            assert_relative_eq!(*x, 2.0, epsilon = 1e-12);
        }
        assert!(u[0] > 2.0);
    }

    #[test]
    fn rest_state_has_zero_rhs() {
        let grid = build_grid(20.0, 0.1).unwrap();
        let p = params();
        let bathy = gaussian_bottom(0.3, 1.0, 10.0, 1e-4).unwrap();
        let bottom = sample_bottom(&bathy, 0.0, &grid).unwrap();
        let s = FluidState::rest(&grid);
        let e = rhs_zeta(&s.zeta, &s.vbar, &bottom, 0.0, &p, DEFAULT_H_MIN, grid.dx).unwrap();
        let f = rhs_momentum(&s.zeta, &s.vbar, &bottom, 0.0, 0.0, &p, grid.dx);
        assert!(e.iter().chain(&f).all(|v| *v == 0.0));
        assert_eq!(energy(&s, &bottom.b_nodes, 0.0, &p, grid.dx), 0.0);
        assert_eq!(mass(&s.zeta, &grid), 0.0);
    }

    #[test]
    fn bottom_source_terms_match_analytic_derivatives() {
        let grid = build_grid(20.0, 0.05).unwrap();
        let p = params();
        let bathy = gaussian_bottom(0.3, 1.0, 10.0, 1e-4).unwrap();
        let shift = 0.3;
        let bottom = sample_bottom(&bathy, shift, &grid).unwrap();
        let s = FluidState::rest(&grid);
        let e = rhs_zeta(&s.zeta, &s.vbar, &bottom, 1.0, &p, DEFAULT_H_MIN, grid.dx).unwrap();
        let i = 205;
        let x = grid.node_coords[i];
        let sx = x - 10.0 - shift;
        let db = -20.0 * sx * (-10.0 * sx * sx).exp();
        assert_relative_eq!(e[i], -(p.beta / p.eps) * db, epsilon = 1e-12);

        let f = rhs_momentum(&s.zeta, &s.vbar, &bottom, 1.0, 2.0, &p, grid.dx);
        let j = grid.nearest_node(10.0 + shift);
        let xm = grid.mid_coords[j];
        let sm = xm - 10.0 - shift;
        let g = (-10.0 * sm * sm).exp();
        let d2 = (400.0 * sm * sm - 20.0) * g;
        let d3 = (1200.0 * sm - 8000.0 * sm.powi(3)) * g;
        let k = p.mu * p.beta / (2.0 * p.eps);
        assert_relative_eq!(f[j], -k * d3 + 2.0 * k * d2, epsilon = 1e-10);
    }

    #[test]
    fn ramp_surface_drives_uniform_momentum_forcing() {
        let grid = build_grid(10.0, 0.1).unwrap();
        let p = params();
        let bottom = BottomFields::flat(&grid);
        let mut s = FluidState::rest(&grid);
        s.zeta = grid.node_coords.iter().map(|x| 0.3 * x).collect();
        let f = rhs_momentum(&s.zeta, &s.vbar, &bottom, 0.0, 0.0, &p, grid.dx);
        for v in &f[2..f.len() - 2] {
            assert_relative_eq!(*v, -0.3, epsilon = 1e-12);
        }
        s.zeta = vec![0.0; grid.n_nodes];
        s.vbar = vec![1.5; grid.n_mids()];
        let e = rhs_zeta(&s.zeta, &s.vbar, &bottom, 0.0, &p, DEFAULT_H_MIN, grid.dx).unwrap();
        for v in &e[2..e.len() - 2] {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn energy_and_mass_examples() {
        let grid = build_grid(1000.0, 0.5).unwrap();
        let p = params();
        let mut s = FluidState::rest(&grid);
        let b = vec![0.0; grid.n_nodes];
        assert_relative_eq!(energy(&s, &b, 0.7, &p, grid.dx), 0.49 / (2.0 * p.eps));
        s.zeta = vec![1.0; grid.n_nodes];
        assert_relative_eq!(mass(&s.zeta, &grid), 1000.0, epsilon = 1e-9);
    }
}
