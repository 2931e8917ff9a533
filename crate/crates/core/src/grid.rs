//! Staggered wave-tank discretization and the Gaussian solid profile.
//!
//! Scalar quantities (surface elevation, bottom, fluid height) live on the
//! grid nodes `x_i = i dx`; the averaged velocity lives on the midpoints
//! `x_{i+1/2} = x_i + dx/2`. Both tank walls sit on nodes.

use crate::error::{Result, SimError};

/// Minimum node count: the widest stencils need a 4-point neighbourhood on
/// each side of the evaluation point.
pub const MIN_NODES: usize = 8;

/// Default cutoff below which the solid profile is considered absent.
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-4;

/// Gaussian decay rate of the solid profile, `exp(-10 s^2)`.
const GAUSS_RATE: f64 = 10.0;

/// Beyond this scaled distance `exp(-10 s^2) < 1e-30`; samples there are set to zero.
const NEGLIGIBLE_SPAN: f64 = 2.628_260_5;

#[derive(Debug, Clone, PartialEq)]
pub struct StaggeredGrid {
    pub domain_length: f64,
    pub dx: f64,
    pub n_nodes: usize,
    pub node_coords: Vec<f64>,
    pub mid_coords: Vec<f64>,
}

impl StaggeredGrid {
    pub fn n_mids(&self) -> usize {
        self.n_nodes - 1
    }

    /// Index of the node nearest to `x`, clamped to the tank.
    pub fn nearest_node(&self, x: f64) -> usize {
        let i = (x / self.dx).round();
        i.clamp(0.0, (self.n_nodes - 1) as f64) as usize
    }
}

/// Builds a uniform staggered grid over `[0, domain_length]`.
pub fn build_grid(domain_length: f64, dx: f64) -> Result<StaggeredGrid> {
    if !(domain_length > 0.0 && domain_length.is_finite()) {
        return Err(SimError::InvalidInput(format!(
            "domain length must be positive, got {domain_length}"
        )));
    }
    if !(dx > 0.0 && dx.is_finite()) {
        return Err(SimError::InvalidInput(format!("mesh size must be positive, got {dx}")));
    }
    let cells = (domain_length / dx).round();
    let n_nodes = cells as usize + 1;
    if n_nodes < MIN_NODES {
        return Err(SimError::InvalidInput(format!(
            "grid has {n_nodes} nodes, at least {MIN_NODES} are required"
        )));
    }
    if ((cells * dx) - domain_length).abs() > 1e-9 * domain_length {
        return Err(SimError::InvalidInput(format!(
            "domain length {domain_length} is not a multiple of dx = {dx}"
        )));
    }
    let node_coords: Vec<f64> = (0..n_nodes).map(|i| i as f64 * dx).collect();
    let mid_coords: Vec<f64> = node_coords[..n_nodes - 1].iter().map(|x| x + dx / 2.0).collect();
    Ok(StaggeredGrid {
        domain_length,
        dx,
        n_nodes,
        node_coords,
        mid_coords,
    })
}

/// Truncated Gaussian solid, `beta * exp(-10 ((x - center) / shape_length)^2)`
/// wherever that height exceeds `truncation_tol`.
///
/// The solver works with the unit-peak profile (`shape`), the physical
/// height in units of the base depth is `beta * shape`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bathymetry {
    pub beta: f64,
    pub shape_length: f64,
    pub center: f64,
    pub truncation_tol: f64,
    /// Closed support interval at zero displacement.
    pub support: (f64, f64),
}

/// Builds the truncated Gaussian solid profile.
pub fn gaussian_bottom(beta: f64, shape_length: f64, center: f64, truncation_tol: f64) -> Result<Bathymetry> {
    if !(beta > 0.0) {
        return Err(SimError::InvalidInput(format!("beta must be positive, got {beta}")));
    }
    if !(shape_length > 0.0) {
        return Err(SimError::InvalidInput(format!(
            "shape length must be positive, got {shape_length}"
        )));
    }
    if !(truncation_tol > 0.0 && truncation_tol < beta) {
        return Err(SimError::InvalidInput(format!(
            "truncation tolerance must lie in (0, beta), got {truncation_tol}"
        )));
    }
    let half = support_half_width(beta, shape_length, truncation_tol);
    Ok(Bathymetry {
        beta,
        shape_length,
        center,
        truncation_tol,
        support: (center - half, center + half),
    })
}

/// Half-width of the region where `beta * exp(-10 (x/L)^2) >= tol`.
pub fn support_half_width(beta: f64, shape_length: f64, tol: f64) -> f64 {
    shape_length * ((beta / tol).ln() / GAUSS_RATE).sqrt()
}

impl Bathymetry {
    pub fn support_width(&self) -> f64 {
        self.support.1 - self.support.0
    }

    pub fn translated_support(&self, shift: f64) -> (f64, f64) {
        (self.support.0 + shift, self.support.1 + shift)
    }

    /// Truncated unit-peak profile at zero displacement.
    pub fn shape(&self, x: f64) -> f64 {
        if x < self.support.0 || x > self.support.1 {
            return 0.0;
        }
        let s = (x - self.center) / self.shape_length;
        (-GAUSS_RATE * s * s).exp()
    }

    /// Truncated physical height `beta * shape(x)`, in units of the base depth.
    pub fn height(&self, x: f64) -> f64 {
        self.beta * self.shape(x)
    }

    /// Untruncated unit-peak profile and its first three derivatives at `x`
    /// for a solid displaced by `shift`.
    pub fn smooth_derivatives(&self, x: f64, shift: f64) -> [f64; 4] {
        let l = self.shape_length;
        let s = (x - self.center - shift) / l;
        if s.abs() > NEGLIGIBLE_SPAN {
            return [0.0; 4];
        }
        let g = (-GAUSS_RATE * s * s).exp();
        let s2 = s * s;
        [
            g,
            -20.0 * s * g / l,
            (400.0 * s2 - 20.0) * g / (l * l),
            (1200.0 * s - 8000.0 * s2 * s) * g / (l * l * l),
        ]
    }

    /// Interval outside of which the untruncated profile is below 1e-30.
    pub fn negligible_window(&self, shift: f64) -> (f64, f64) {
        let w = NEGLIGIBLE_SPAN * self.shape_length;
        (self.center + shift - w, self.center + shift + w)
    }
}

/// Bottom profile and derivatives sampled on the staggered grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BottomFields {
    pub shift: f64,
    pub b_nodes: Vec<f64>,
    pub b_mids: Vec<f64>,
    pub db_nodes: Vec<f64>,
    pub db_mids: Vec<f64>,
    pub d2b_mids: Vec<f64>,
    pub d3b_mids: Vec<f64>,
}

impl BottomFields {
    pub fn flat(grid: &StaggeredGrid) -> Self {
        let n = grid.n_nodes;
        let m = grid.n_mids();
        BottomFields {
            shift: 0.0,
            b_nodes: vec![0.0; n],
            b_mids: vec![0.0; m],
            db_nodes: vec![0.0; n],
            db_mids: vec![0.0; m],
            d2b_mids: vec![0.0; m],
            d3b_mids: vec![0.0; m],
        }
    }
}

/// Checks that the solid displaced by `shift` lies strictly inside the tank.
pub fn check_inside(bathy: &Bathymetry, shift: f64, grid: &StaggeredGrid) -> Result<()> {
    if !shift.is_finite() {
        return Err(SimError::InvalidInput(format!("displacement is not finite: {shift}")));
    }
    let (left, right) = bathy.translated_support(shift);
    if left <= 0.0 || right >= grid.domain_length {
        return Err(SimError::SolidTouchedBoundary { left, right });
    }
    Ok(())
}

/// Evaluates the solid translated by `shift` on the grid.
///
/// Values are analytic evaluations of the translated profile at each node
/// and midpoint; the discrete bottom is never shifted after sampling.
pub fn sample_bottom(bathy: &Bathymetry, shift: f64, grid: &StaggeredGrid) -> Result<BottomFields> {
    let mut out = BottomFields::flat(grid);
    resample_bottom(bathy, shift, grid, &mut out)?;
    Ok(out)
}

/// In-place variant of [`sample_bottom`] reusing the allocated buffers.
pub fn resample_bottom(bathy: &Bathymetry, shift: f64, grid: &StaggeredGrid, out: &mut BottomFields) -> Result<()> {
    check_inside(bathy, shift, grid)?;
    let (lo, hi) = bathy.negligible_window(shift);
    let dx = grid.dx;
    let clear = |v: &mut Vec<f64>| v.iter_mut().for_each(|e| *e = 0.0);
    clear(&mut out.b_nodes);
    clear(&mut out.db_nodes);
    clear(&mut out.b_mids);
    clear(&mut out.db_mids);
    clear(&mut out.d2b_mids);
    clear(&mut out.d3b_mids);

    let i0 = ((lo / dx).floor().max(0.0)) as usize;
    let i1 = ((hi / dx).ceil() as usize).min(grid.n_nodes - 1);
    for i in i0..=i1 {
        let [b, db, _, _] = bathy.smooth_derivatives(grid.node_coords[i], shift);
        out.b_nodes[i] = b;
        out.db_nodes[i] = db;
    }
    let j1 = i1.min(grid.n_mids() - 1);
    for j in i0..=j1 {
        let [b, db, d2b, d3b] = bathy.smooth_derivatives(grid.mid_coords[j], shift);
        out.b_mids[j] = b;
        out.db_mids[j] = db;
        out.d2b_mids[j] = d2b;
        out.d3b_mids[j] = d3b;
    }
    out.shift = shift;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn small_grid_rejected() {
        assert!(build_grid(1.0, 0.25).is_err());
        let g = build_grid(2.0, 0.25).unwrap();
        assert_eq!(g.n_nodes, 9);
        assert_eq!(g.mid_coords.len(), 8);
        assert_eq!(g.mid_coords[0], 0.125);
        assert_eq!(g.node_coords[8], 2.0);
    }

    #[test]
    fn paper_sized_grids() {
        assert_eq!(build_grid(1000.0, 0.05).unwrap().n_nodes, 20001);
        assert_eq!(build_grid(2000.0, 0.05).unwrap().n_nodes, 40001);
    }

    #[test]
    fn bad_inputs() {
        assert!(build_grid(-1.0, 0.1).is_err());
        assert!(build_grid(1.0, 0.0).is_err());
        assert!(build_grid(1.0, 0.3).is_err());
        assert!(gaussian_bottom(0.0, 1.0, 0.0, 1e-4).is_err());
        assert!(gaussian_bottom(0.3, 1.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn mids_are_offset_by_half_step() {
        let g = build_grid(10.0, 0.1).unwrap();
        for (m, n) in g.mid_coords.iter().zip(&g.node_coords) {
            assert_eq!(*m, n + 0.05);
        }
    }

    #[test]
    fn gaussian_peak_and_support() {
        let b = gaussian_bottom(0.3, 1.0, 0.0, 1e-4).unwrap();
        assert_eq!(b.height(0.0), 0.3);
        let expected = ((0.3f64 / 1e-4).ln() / 10.0).sqrt();
        assert_relative_eq!(b.support.1, expected, epsilon = 1e-14);
        assert_relative_eq!(b.support.1, 0.8947, epsilon = 1e-4);
        // raw discontinuity of size tol at the support edge
        assert_relative_eq!(b.height(b.support.1), 1e-4, epsilon = 1e-12);
        assert_eq!(b.height(b.support.1 + 1e-9), 0.0);
        assert_eq!(b.height(0.4), b.height(-0.4));
    }

    #[test]
    fn translated_sampling_is_analytic() {
        let grid = build_grid(20.0, 0.05).unwrap();
        let bathy = gaussian_bottom(0.3, 1.0, 10.0, 1e-4).unwrap();
        let f0 = sample_bottom(&bathy, 0.0, &grid).unwrap();
        let f = sample_bottom(&bathy, 0.5, &grid).unwrap();
        let i = 211; // x = 10.55
        let x = grid.node_coords[i];
        let s = x - 10.0 - 0.5;
        assert_relative_eq!(f.b_nodes[i], (-10.0 * s * s).exp(), epsilon = 1e-15);
        // shifting by exactly 10 cells reproduces the unshifted samples
        assert_eq!(f.b_nodes.len(), f0.b_nodes.len());
        for k in 100..300 {
            assert_relative_eq!(f.b_nodes[k + 10], f0.b_nodes[k], epsilon = 1e-14);
            assert_relative_eq!(f.d3b_mids[k + 10], f0.d3b_mids[k], epsilon = 1e-10);
        }
        // zero slope at the translated crest
        assert!(f.db_nodes[210].abs() < 1e-12);
    }

    #[test]
    fn touching_wall_is_an_error() {
        let grid = build_grid(10.0, 0.05).unwrap();
        let bathy = gaussian_bottom(0.3, 1.0, 5.0, 1e-4).unwrap();
        assert!(sample_bottom(&bathy, 4.2, &grid).is_err());
        assert!(sample_bottom(&bathy, 4.0, &grid).is_ok());
        assert!(matches!(
            sample_bottom(&bathy, -4.2, &grid),
            Err(SimError::SolidTouchedBoundary { .. })
        ));
    }
}
