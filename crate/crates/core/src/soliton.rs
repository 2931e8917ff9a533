//! Flat-bottom solitary waves.
//!
//! The velocity profile solves `V'' = (3/(mu c)) V (c - 1/(c - eps V) - eps V/2)`,
//! a homoclinic orbit leaving the origin along the unstable direction with
//! rate `sqrt(lambda)`, `lambda = (3/(mu c)) (c - 1/c)`. The surface follows
//! algebraically from `zeta = V / (c - eps V)`.

use std::io::Write;
use std::path::Path;

use crate::error::{Result, SimError};
use crate::grid::StaggeredGrid;
use crate::physics::{helmholtz_apply, FluidState};

/// Relative level at which the profile is considered to have vanished.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Relative amplitude at which the shooting starts.
const LAUNCH_LEVEL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SolitonProfile {
    pub speed: f64,
    pub mu: f64,
    pub eps: f64,
    pub mesh: f64,
    /// Velocity at `xi = k * mesh`, k = 0 at the crest.
    pub v_half: Vec<f64>,
    pub zeta_half: Vec<f64>,
    /// Spatial decay rate of the tails, `sqrt(lambda)`.
    pub decay: f64,
    /// Distance from the crest where the profile falls below `tol * peak`.
    pub half_width: f64,
    pub tol: f64,
}

impl SolitonProfile {
    pub fn peak_zeta(&self) -> f64 {
        self.zeta_half[0]
    }

    pub fn peak_v(&self) -> f64 {
        self.v_half[0]
    }

    /// Distance from the crest where `zeta` decays to `level * peak`.
    pub fn reach(&self, level: f64) -> f64 {
        let target = level * self.peak_zeta();
        let last = self.zeta_half.len() - 1;
        let end = *self.zeta_half.last().unwrap();
        if target < end {
            return last as f64 * self.mesh + (end / target).ln() / self.decay;
        }
        let k = self.zeta_half.iter().position(|&z| z <= target).unwrap_or(last);
        k as f64 * self.mesh
    }

    fn sample(&self, table: &[f64], xi: f64) -> f64 {
        let r = xi.abs() / self.mesh;
        let last = table.len() - 1;
        if r >= last as f64 {
            return table[last] * (-self.decay * (xi.abs() - last as f64 * self.mesh)).exp();
        }
        // cubic Lagrange on the even extension of the half table
        let k = (r.floor() as isize).clamp(0, last as isize - 2);
        let at = |i: isize| table[i.unsigned_abs().min(last)];
        let t = r - k as f64;
        let (p0, p1, p2, p3) = (at(k - 1), at(k), at(k + 1), at(k + 2));
        let w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
        let w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        let w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        let w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
        w0 * p0 + w1 * p1 + w2 * p2 + w3 * p3
    }

    pub fn v_at(&self, xi: f64) -> f64 {
        self.sample(&self.v_half, xi)
    }

    pub fn zeta_at(&self, xi: f64) -> f64 {
        self.sample(&self.zeta_half, xi)
    }

    /// Full symmetric tabulation `(xi, V, zeta)`.
    pub fn table(&self) -> Vec<(f64, f64, f64)> {
        let n = self.v_half.len();
        let mut out = Vec::with_capacity(2 * n - 1);
        for k in (1..n).rev() {
            out.push((-(k as f64) * self.mesh, self.v_half[k], self.zeta_half[k]));
        }
        for k in 0..n {
            out.push((k as f64 * self.mesh, self.v_half[k], self.zeta_half[k]));
        }
        out
    }

    /// Writes `xi value` pairs for the surface profile, one per line.
    pub fn export(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        for (xi, _, z) in self.table() {
            writeln!(w, "{xi:.12e} {z:.16e}")?;
        }
        w.flush()?;
        Ok(())
    }
}

fn rhs(v: f64, dv: f64, c: f64, mu: f64, eps: f64) -> (f64, f64) {
    (dv, 3.0 / (mu * c) * v * (c - 1.0 / (c - eps * v) - 0.5 * eps * v))
}

struct Shot {
    /// Mesh values from the launch point up to and including the first
    /// point past the crest.
    values: Vec<f64>,
    /// Crest position past the second-to-last stored point, in steps.
    overshoot: f64,
}

impl Shot {
    /// Signed distance in steps from the nearest mesh point to the crest,
    /// with the index of that mesh point.
    fn nearest(&self) -> (usize, f64) {
        let before = self.values.len() - 2;
        if self.overshoot <= 0.5 {
            (before, self.overshoot)
        } else {
            (before + 1, self.overshoot - 1.0)
        }
    }
}

fn shoot(c: f64, mu: f64, eps: f64, h: f64, eta: f64, rate: f64, max_steps: usize) -> Result<Shot> {
    let ceiling = c / eps;
    let (mut v, mut dv) = (eta, rate * eta);
    let mut values = vec![v];
    for _ in 0..max_steps {
        let (k1v, k1d) = rhs(v, dv, c, mu, eps);
        let (k2v, k2d) = rhs(v + 0.5 * h * k1v, dv + 0.5 * h * k1d, c, mu, eps);
        let (k3v, k3d) = rhs(v + 0.5 * h * k2v, dv + 0.5 * h * k2d, c, mu, eps);
        let (k4v, k4d) = rhs(v + h * k3v, dv + h * k3d, c, mu, eps);
        let nv = v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        let nd = dv + h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        if !(nv < ceiling) || !nv.is_finite() {
            return Err(SimError::NoSolitaryWave(format!(
                "velocity reached c/eps = {ceiling:.6} before the crest"
            )));
        }
        values.push(nv);
        if nd <= 0.0 {
            // slope changes sign inside the step; locate the zero on the
            // cubic Hermite interpolant of V' (whose derivative is V'')
            let (_, a0) = rhs(v, dv, c, mu, eps);
            let (_, a1) = rhs(nv, nd, c, mu, eps);
            let hermite = |t: f64| {
                let t2 = t * t;
                let t3 = t2 * t;
                (2.0 * t3 - 3.0 * t2 + 1.0) * dv
                    + (t3 - 2.0 * t2 + t) * h * a0
                    + (-2.0 * t3 + 3.0 * t2) * nd
                    + (t3 - t2) * h * a1
            };
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if hermite(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(Shot {
                values,
                overshoot: 0.5 * (lo + hi),
            });
        }
        v = nv;
        dv = nd;
    }
    Err(SimError::NoSolitaryWave(format!("no crest within {max_steps} steps")))
}

/// Integrates the profile ODE from the far field to the crest and mirrors
/// it. The launch amplitude is tuned so that the crest falls exactly on a
/// mesh point.
pub fn solve_profile(c: f64, mu: f64, eps: f64, mesh: f64, tol: f64) -> Result<SolitonProfile> {
    if !(c > 1.0) {
        return Err(SimError::NoSolitaryWave(format!("speed must exceed 1, got {c}")));
    }
    if !(mu > 0.0 && eps > 0.0 && mesh > 0.0) {
        return Err(SimError::InvalidInput(format!(
            "mu, eps and mesh must be positive, got {mu}, {eps}, {mesh}"
        )));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(SimError::InvalidInput(format!(
            "tail tolerance must lie in (0, 1), got {tol}"
        )));
    }
    let lambda = 3.0 / (mu * c) * (c - 1.0 / c);
    let rate = lambda.sqrt();
    // small-amplitude estimate of the peak
    let peak_guess = (2.0 * (c - 1.0) / eps).min(0.5 * c / eps);
    let span = (40.0 + (1.0 / LAUNCH_LEVEL).ln()) / rate;
    let max_steps = (span / mesh).ceil() as usize + 10;

    let mut eta = LAUNCH_LEVEL * peak_guess;
    let mut shot = shoot(c, mu, eps, mesh, eta, rate, max_steps)?;
    for _ in 0..10 {
        let (_, offset) = shot.nearest();
        if offset.abs() < 1e-12 {
            break;
        }
        // moving the launch point along the unstable manifold shifts the
        // whole orbit rigidly
        eta *= (rate * offset * mesh).exp();
        shot = shoot(c, mu, eps, mesh, eta, rate, max_steps)?;
    }
    let (crest, _) = shot.nearest();
    let mut v_half = shot.values;
    v_half.truncate(crest + 1);
    v_half.reverse();
    let zeta_half: Vec<f64> = v_half.iter().map(|v| v / (c - eps * v)).collect();
    let mut profile = SolitonProfile {
        speed: c,
        mu,
        eps,
        mesh,
        v_half,
        zeta_half,
        decay: rate,
        half_width: 0.0,
        tol,
    };
    profile.half_width = profile.reach(tol);
    Ok(profile)
}

/// Finds the speed whose solitary wave has peak elevation `amplitude`, by
/// bisection to `1e-8` on the peak.
pub fn speed_for_amplitude(amplitude: f64, mu: f64, eps: f64, mesh: f64) -> Result<f64> {
    if !(amplitude > 0.0) {
        return Err(SimError::InvalidInput(format!(
            "amplitude must be positive, got {amplitude}"
        )));
    }
    let peak = |c: f64| solve_profile(c, mu, eps, mesh, DEFAULT_TAIL_TOL).map(|p| p.peak_zeta());
    let mut lo = 1.0;
    let mut hi = 1.0 + 0.5 * eps * amplitude;
    let mut grow = 0;
    while peak(hi)? < amplitude {
        lo = hi;
        hi = 1.0 + 2.0 * (hi - 1.0);
        grow += 1;
        if grow > 60 {
            return Err(SimError::NoSolitaryWave(format!("amplitude {amplitude} unreachable")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let p = peak(mid)?;
        if (p - amplitude).abs() <= 1e-8 * amplitude.max(1.0) || hi - lo < 1e-15 {
            return Ok(mid);
        }
        if p < amplitude {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Samples the profile centred at `center` onto the grid and forms the
/// Helmholtz image of the velocity.
pub fn place_soliton(profile: &SolitonProfile, center: f64, grid: &StaggeredGrid) -> Result<FluidState> {
    place_train(profile, &[center], grid)
}

/// Superposes identical profiles centred at `centers`.
pub fn place_train(profile: &SolitonProfile, centers: &[f64], grid: &StaggeredGrid) -> Result<FluidState> {
    for &c in centers {
        if c - profile.half_width <= 0.0 || c + profile.half_width >= grid.domain_length {
            return Err(SimError::InvalidInput(format!(
                "soliton at {c:.4} with half-width {:.4} touches a wall of the tank [0, {:.4}]",
                profile.half_width, grid.domain_length
            )));
        }
    }
    let zeta: Vec<f64> = grid
        .node_coords
        .iter()
        .map(|&x| centers.iter().map(|&c| profile.zeta_at(x - c)).sum())
        .collect();
    let vbar: Vec<f64> = grid
        .mid_coords
        .iter()
        .map(|&x| centers.iter().map(|&c| profile.v_at(x - c)).sum())
        .collect();
    let ubar = helmholtz_apply(&vbar, profile.mu, grid.dx);
    Ok(FluidState { zeta, vbar, ubar })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use approx::assert_relative_eq;

    #[test]
    fn algebraic_relation_holds_at_every_point() {
        let p = solve_profile(1.1, 0.1, 0.1, 0.005, DEFAULT_TAIL_TOL).unwrap();
        for (_, v, z) in p.table() {
            assert!((z - v / (1.1 - 0.1 * v)).abs() <= 1e-12);
            assert!(v < 1.1 / 0.1);
        }
    }

    #[test]
    fn peaks_shrink_as_speed_approaches_one() {
        let peaks: Vec<f64> = [1.1, 1.05, 1.01]
            .iter()
            .map(|&c| solve_profile(c, 0.1, 0.1, 0.005, DEFAULT_TAIL_TOL).unwrap().peak_zeta())
            .collect();
        assert!(peaks[0] > peaks[1] && peaks[1] > peaks[2] && peaks[2] > 0.0);
    }

    #[test]
    fn crest_sits_on_mesh_point_and_profile_decays() {
        let p = solve_profile(1.08, 0.25, 0.2, 0.002, DEFAULT_TAIL_TOL).unwrap();
        assert!(p.v_half.windows(2).all(|w| w[1] < w[0]));
        // symmetric crest: the finite difference slope at xi = 0 vanishes
        let s = (p.v_at(p.mesh * 0.5) - p.v_at(-p.mesh * 0.5)) / p.mesh;
        assert_eq!(s, 0.0);
        let fd = (p.v_half[1] - p.v_half[0]) / p.mesh;
        assert!(fd.abs() < 1e-3 * p.peak_v());
    }

    #[test]
    fn ode_residual_is_small() {
        let (c, mu, eps) = (1.1, 0.1, 0.1);
        let p = solve_profile(c, mu, eps, 0.002, DEFAULT_TAIL_TOL).unwrap();
        let h = p.mesh;
        let v = &p.v_half;
        let mut worst: f64 = 0.0;
        for k in 2..v.len() - 2 {
            let d2 = (-v[k + 2] + 16.0 * v[k + 1] - 30.0 * v[k] + 16.0 * v[k - 1] - v[k - 2]) / (12.0 * h * h);
            let (_, f) = rhs(v[k], 0.0, c, mu, eps);
            worst = worst.max((d2 - f).abs());
        }
        assert!(worst < 1e-6, "residual {worst}");
    }

    #[test]
    fn speed_lookup_hits_target_peak() {
        let c = speed_for_amplitude(1.0, 0.1, 0.2, 0.005).unwrap();
        let p = solve_profile(c, 0.1, 0.2, 0.005, DEFAULT_TAIL_TOL).unwrap();
        assert_relative_eq!(p.peak_zeta(), 1.0, epsilon = 1e-8);
        assert!(c > 1.0 && c < 1.2);
    }

    #[test]
    fn peak_increases_with_speed() {
        let peaks: Vec<f64> = [1.02, 1.1, 1.2, 1.35, 1.5]
            .iter()
            .map(|&c| solve_profile(c, 0.1, 0.1, 0.005, DEFAULT_TAIL_TOL).unwrap().peak_zeta())
            .collect();
        assert!(peaks.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rejects_subcritical_speed() {
        assert!(matches!(
            solve_profile(0.9, 0.1, 0.1, 0.01, DEFAULT_TAIL_TOL),
            Err(SimError::NoSolitaryWave(_))
        ));
    }

    #[test]
    fn placement_is_symmetric_and_translates() {
        let grid = build_grid(60.0, 0.05).unwrap();
        let p = solve_profile(1.1, 0.1, 0.1, 0.005, DEFAULT_TAIL_TOL).unwrap();
        let s = place_soliton(&p, 30.0, &grid).unwrap();
        let n = grid.n_nodes;
        for i in 0..n / 2 {
            assert!((s.zeta[i] - s.zeta[n - 1 - i]).abs() < 1e-13);
        }
        let t = place_soliton(&p, 30.05, &grid).unwrap();
        for i in 1..n {
            assert!((t.zeta[i] - s.zeta[i - 1]).abs() < 1e-10);
        }
        assert!(place_soliton(&p, 2.0, &grid).is_err());
    }
}
