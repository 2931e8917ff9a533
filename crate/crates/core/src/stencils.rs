//! Fourth-order finite-difference stencils, node/midpoint interpolation and
//! Simpson quadrature on staggered data.
//!
//! Near the walls every operator reads ghost values obtained by reflecting
//! the field about the wall: even reflection for fields with a Neumann wall
//! condition (surface elevation, fluid height), odd reflection for fields
//! that vanish at the wall (velocity). Both walls sit on grid nodes, so for
//! node fields the wall node is the mirror point and for midpoint fields the
//! mirror lies half a cell outside the first midpoint.

/// The point family a field is stored on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Node,
    Mid,
}

impl Family {
    pub fn other(self) -> Family {
        match self {
            Family::Node => Family::Mid,
            Family::Mid => Family::Node,
        }
    }
}

/// Symmetry of a field under reflection about the tank walls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

const INTERP_W: [f64; 4] = [-1.0 / 16.0, 9.0 / 16.0, 9.0 / 16.0, -1.0 / 16.0];
const D1_CROSS_W: [f64; 4] = [1.0 / 24.0, -27.0 / 24.0, 27.0 / 24.0, -1.0 / 24.0];
const D1_SAME_W: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
const D2_SAME_W: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
const D3_SAME_W: [f64; 7] = [1.0 / 8.0, -1.0, 13.0 / 8.0, 0.0, -13.0 / 8.0, 1.0, -1.0 / 8.0];

/// Maps a possibly out-of-range index onto the stored field, returning the
/// stored index and the sign picked up by the reflection.
#[inline]
pub fn reflect(idx: isize, len: usize, family: Family, parity: Parity) -> (usize, f64) {
    let last = len as isize - 1;
    let sign = match parity {
        Parity::Even => 1.0,
        Parity::Odd => -1.0,
    };
    if idx >= 0 && idx <= last {
        return (idx as usize, 1.0);
    }
    let mirrored = match family {
        Family::Node => {
            if idx < 0 {
                -idx
            } else {
                2 * last - idx
            }
        }
        Family::Mid => {
            if idx < 0 {
                -1 - idx
            } else {
                2 * last + 1 - idx
            }
        }
    };
    debug_assert!(mirrored >= 0 && mirrored <= last, "stencil wider than field");
    (mirrored as usize, sign)
}

/// Applies a fixed stencil: `out[o] = scale * sum_k w[k] f[o + first + k]`.
fn apply_stencil(
    f: &[f64],
    family: Family,
    parity: Parity,
    first: isize,
    weights: &[f64],
    scale: f64,
    out: &mut [f64],
) {
    let len = f.len() as isize;
    let width = weights.len() as isize;
    // interior range where no reflection is needed
    let lo = (-first).max(0);
    let hi = (len - first - width + 1).min(out.len() as isize);
    for o in 0..out.len() as isize {
        let base = o + first;
        let mut acc = 0.0;
        if o >= lo && o < hi {
            let window = &f[base as usize..(base + width) as usize];
            for (w, v) in weights.iter().zip(window) {
                acc += w * v;
            }
        } else {
            for (k, w) in weights.iter().enumerate() {
                let (i, s) = reflect(base + k as isize, f.len(), family, parity);
                acc += w * s * f[i];
            }
        }
        out[o as usize] = acc * scale;
    }
}

fn cross_len(len: usize, from: Family) -> usize {
    match from {
        Family::Node => len - 1,
        Family::Mid => len + 1,
    }
}

fn cross_first(from: Family) -> isize {
    match from {
        Family::Node => -1,
        Family::Mid => -2,
    }
}

/// Four-point centred interpolation onto the other point family,
/// `(-f_{-3/2} + 9 f_{-1/2} + 9 f_{1/2} - f_{3/2}) / 16`.
pub fn interp(f: &[f64], from: Family, parity: Parity) -> Vec<f64> {
    let mut out = vec![0.0; cross_len(f.len(), from)];
    interp_into(f, from, parity, &mut out);
    out
}

pub fn interp_into(f: &[f64], from: Family, parity: Parity, out: &mut [f64]) {
    assert!(f.len() >= 4, "interpolation needs at least 4 samples");
    apply_stencil(f, from, parity, cross_first(from), &INTERP_W, 1.0, out);
}

/// Node values to midpoints.
pub fn interp_node_to_mid(f: &[f64], parity: Parity) -> Vec<f64> {
    interp(f, Family::Node, parity)
}

/// First derivative on the same point family,
/// `(f_{-2} - 8 f_{-1} + 8 f_1 - f_2) / (12 dx)`.
pub fn d1_same(f: &[f64], family: Family, parity: Parity, dx: f64) -> Vec<f64> {
    let mut out = vec![0.0; f.len()];
    d1_same_into(f, family, parity, dx, &mut out);
    out
}

pub fn d1_same_into(f: &[f64], family: Family, parity: Parity, dx: f64, out: &mut [f64]) {
    assert!(f.len() >= 5, "first derivative needs at least 5 samples");
    apply_stencil(f, family, parity, -2, &D1_SAME_W, 1.0 / dx, out);
}

/// First derivative evaluated on the other point family,
/// `(f_{-3/2} - 27 f_{-1/2} + 27 f_{1/2} - f_{3/2}) / (24 dx)`.
pub fn d1_cross(f: &[f64], from: Family, parity: Parity, dx: f64) -> Vec<f64> {
    let mut out = vec![0.0; cross_len(f.len(), from)];
    d1_cross_into(f, from, parity, dx, &mut out);
    out
}

pub fn d1_cross_into(f: &[f64], from: Family, parity: Parity, dx: f64, out: &mut [f64]) {
    assert!(f.len() >= 4, "staggered derivative needs at least 4 samples");
    apply_stencil(f, from, parity, cross_first(from), &D1_CROSS_W, 1.0 / dx, out);
}

/// Second derivative, `(-f_{-2} + 16 f_{-1} - 30 f_0 + 16 f_1 - f_2) / (12 dx^2)`.
pub fn d2_same(f: &[f64], family: Family, parity: Parity, dx: f64) -> Vec<f64> {
    assert!(f.len() >= 5, "second derivative needs at least 5 samples");
    let mut out = vec![0.0; f.len()];
    apply_stencil(f, family, parity, -2, &D2_SAME_W, 1.0 / (dx * dx), &mut out);
    out
}

/// Third derivative,
/// `(f_{-3} - 8 f_{-2} + 13 f_{-1} - 13 f_1 + 8 f_2 - f_3) / (8 dx^3)`.
pub fn d3_same(f: &[f64], family: Family, parity: Parity, dx: f64) -> Vec<f64> {
    assert!(f.len() >= 6, "third derivative needs at least 6 samples");
    let mut out = vec![0.0; f.len()];
    apply_stencil(f, family, parity, -3, &D3_SAME_W, 1.0 / (dx * dx * dx), &mut out);
    out
}

/// Second-derivative stencil weights as (offset, weight) pairs, for
/// assembling banded operators.
pub fn d2_weights() -> [(isize, f64); 5] {
    [
        (-2, D2_SAME_W[0]),
        (-1, D2_SAME_W[1]),
        (0, D2_SAME_W[2]),
        (1, D2_SAME_W[3]),
        (2, D2_SAME_W[4]),
    ]
}

/// Composite Simpson rule on `[j dx, k dx]` using node and midpoint samples:
/// `dx/6 (f_j + f_k + 2 sum f_l + 4 sum f_{l+1/2})`.
pub fn simpson_support(f_nodes: &[f64], f_mids: &[f64], j: usize, k: usize, dx: f64) -> f64 {
    assert!(j < k && k < f_nodes.len(), "need 0 <= j < k < n_nodes");
    assert!(f_mids.len() + 1 >= f_nodes.len().min(k + 1));
    let inner: f64 = f_nodes[j + 1..k].iter().sum();
    let mids: f64 = f_mids[j..k].iter().sum();
    dx / 6.0 * (f_nodes[j] + f_nodes[k] + 2.0 * inner + 4.0 * mids)
}

/// Value on the half-step lattice `p_s = s dx / 2`: nodes at even `s`,
/// midpoints at odd `s`.
#[inline]
fn half_grid(f_nodes: &[f64], f_mids: &[f64], s: usize) -> f64 {
    if s.is_multiple_of(2) {
        f_nodes[s / 2]
    } else {
        f_mids[s / 2]
    }
}

/// Integral of the local cubic interpolant over `[u, v]`, which must lie
/// inside half-cell `s` of the half-step lattice.
fn partial_cell(f_nodes: &[f64], f_mids: &[f64], s: usize, u: f64, v: f64, dx: f64) -> f64 {
    let h = dx / 2.0;
    let last = 2 * (f_nodes.len() - 1);
    // four lattice points around the half-cell, shifted inward at the walls
    let start = s.saturating_sub(1).min(last - 3);
    let pts: [f64; 4] = std::array::from_fn(|k| (start + k) as f64 * h);
    let vals: [f64; 4] = std::array::from_fn(|k| half_grid(f_nodes, f_mids, start + k));
    let lagrange = |x: f64| -> f64 {
        let mut acc = 0.0;
        for i in 0..4 {
            let mut w = 1.0;
            for j in 0..4 {
                if i != j {
                    w *= (x - pts[j]) / (pts[i] - pts[j]);
                }
            }
            acc += w * vals[i];
        }
        acc
    };
    // two-point Gauss-Legendre is exact for cubics
    let mid = 0.5 * (u + v);
    let half = 0.5 * (v - u);
    let g = half / 3f64.sqrt();
    half * (lagrange(mid - g) + lagrange(mid + g))
}

fn partial_span(f_nodes: &[f64], f_mids: &[f64], u: f64, v: f64, dx: f64) -> f64 {
    if v <= u {
        return 0.0;
    }
    let h = dx / 2.0;
    let last = 2 * (f_nodes.len() - 1);
    let mut total = 0.0;
    let mut a = u;
    while a < v {
        let s = ((a / h).floor() as usize).min(last - 1);
        let b = ((s + 1) as f64 * h).min(v);
        if b > a {
            total += partial_cell(f_nodes, f_mids, s, a, b, dx);
        }
        if b <= a {
            break;
        }
        a = b;
    }
    total
}

/// Integral over an arbitrary interval `[a, b]` inside the tank: Simpson on
/// the nodes enclosed by the interval plus exact integration of the local
/// cubic interpolant on the two partial cells at the ends.
pub fn integrate_interval(f_nodes: &[f64], f_mids: &[f64], a: f64, b: f64, dx: f64) -> f64 {
    let n = f_nodes.len();
    let tank = (n - 1) as f64 * dx;
    let a = a.max(0.0);
    let b = b.min(tank);
    if b <= a {
        return 0.0;
    }
    let eps = 1e-12;
    let j = ((a / dx - eps).ceil().max(0.0) as usize).min(n - 1);
    let k = ((b / dx + eps).floor().max(0.0) as usize).min(n - 1);
    if k > j {
        let xj = j as f64 * dx;
        let xk = k as f64 * dx;
        simpson_support(f_nodes, f_mids, j, k, dx)
            + partial_span(f_nodes, f_mids, a, xj, dx)
            + partial_span(f_nodes, f_mids, xk, b, dx)
    } else {
        partial_span(f_nodes, f_mids, a, b, dx)
    }
}
