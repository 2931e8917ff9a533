use proptest::prelude::*;

use sliding_bed::grid::{build_grid, gaussian_bottom};
use sliding_bed::integrator::{BottomMode, Simulation, SolverOptions};
use sliding_bed::physics::{helmholtz_apply, FluidState, Helmholtz, PhysicalParams};
use sliding_bed::solid::{solid_step, SolidState, DEFAULT_DELTA, DEFAULT_M_TILDE};
use sliding_bed::stencils::{self, Family, Parity};

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

fn dpoly(c: &[f64], k: usize, x: f64) -> f64 {
    let mut d = c.to_vec();
    for _ in 0..k {
        d = d.iter().enumerate().skip(1).map(|(i, a)| i as f64 * a).collect();
    }
    poly(&d, x)
}

fn coeffs(degree: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, degree + 1)
}

const N: usize = 24;
// interior points never read a reflected ghost
const INTERIOR: std::ops::Range<usize> = 3..N - 4;

fn close(got: f64, want: f64, scale: f64) -> bool {
    (got - want).abs() <= 1e-9 * scale.max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn derivatives_exact_on_quartics(c in coeffs(4), dx in 0.05..0.5f64, x0 in -3.0..3.0f64) {
        let node = |i: usize| x0 + i as f64 * dx;
        let mid = |i: usize| x0 + (i as f64 + 0.5) * dx;
        let f: Vec<f64> = (0..N).map(|i| poly(&c, node(i))).collect();
        let fm: Vec<f64> = (0..N - 1).map(|i| poly(&c, mid(i))).collect();
        let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs())) / (dx * dx * dx);
        let d1 = stencils::d1_same(&f, Family::Node, Parity::Even, dx);
        let d2 = stencils::d2_same(&f, Family::Node, Parity::Even, dx);
        let d3 = stencils::d3_same(&f, Family::Node, Parity::Even, dx);
        let dc = stencils::d1_cross(&f, Family::Node, Parity::Even, dx);
        let dm = stencils::d1_cross(&fm, Family::Mid, Parity::Even, dx);
        for i in INTERIOR {
            prop_assert!(close(d1[i], dpoly(&c, 1, node(i)), scale));
            prop_assert!(close(d2[i], dpoly(&c, 2, node(i)), scale));
            prop_assert!(close(d3[i], dpoly(&c, 3, node(i)), scale));
            prop_assert!(close(dc[i], dpoly(&c, 1, mid(i)), scale));
            prop_assert!(close(dm[i], dpoly(&c, 1, node(i)), scale));
        }
    }

    #[test]
    fn interpolation_and_quadrature_exact_on_cubics(c in coeffs(3), dx in 0.05..0.5f64, x0 in -3.0..3.0f64) {
        let node = |i: usize| x0 + i as f64 * dx;
        let mid = |i: usize| x0 + (i as f64 + 0.5) * dx;
        let f: Vec<f64> = (0..N).map(|i| poly(&c, node(i))).collect();
        let fm: Vec<f64> = (0..N - 1).map(|i| poly(&c, mid(i))).collect();
        let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let to_mid = stencils::interp(&f, Family::Node, Parity::Even);
        let to_node = stencils::interp(&fm, Family::Mid, Parity::Even);
        for i in INTERIOR {
            prop_assert!(close(to_mid[i], fm[i], scale));
            prop_assert!(close(to_node[i], f[i], scale));
        }
        let antider: Vec<f64> = std::iter::once(0.0)
            .chain(c.iter().enumerate().map(|(i, a)| a / (i + 1) as f64))
            .collect();
        let exact = poly(&antider, node(N - 1)) - poly(&antider, node(0));
        let got = stencils::simpson_support(&f, &fm, 0, N - 1, dx);
        prop_assert!(close(got, exact, scale * N as f64 * dx));
    }

    #[test]
    fn stencils_are_linear(
        f in prop::collection::vec(-1.0..1.0f64, N),
        g in prop::collection::vec(-1.0..1.0f64, N),
        a in -3.0..3.0f64,
        dx in 0.05..0.5f64,
    ) {
        let comb: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + y).collect();
        for parity in [Parity::Even, Parity::Odd] {
            let df = stencils::d1_same(&f, Family::Node, parity, dx);
            let dg = stencils::d1_same(&g, Family::Node, parity, dx);
            let dcomb = stencils::d1_same(&comb, Family::Node, parity, dx);
            for i in 0..N {
                prop_assert!((dcomb[i] - (a * df[i] + dg[i])).abs() < 1e-10 / dx);
            }
        }
    }

    #[test]
    fn helmholtz_round_trip(
        v in prop::collection::vec(-1.0..1.0f64, 8..200),
        mu in 0.0..1.0f64,
        dx in 0.01..1.0f64,
    ) {
        let op = Helmholtz::new(v.len(), mu, dx).unwrap();
        let back = op.solve(&helmholtz_apply(&v, mu, dx));
        for (a, b) in v.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn friction_alone_never_speeds_the_solid_up(
        x in prop::array::uniform3(-1.0..1.0f64),
        c in 1e-4..10.0f64,
        dt in 1e-3..0.1f64,
    ) {
        let mut s = SolidState { x_curr: x[2], x_prev: x[1], x_prev2: x[0], ..Default::default() };
        let mut last = (s.x_curr - s.x_prev).powi(2);
        for _ in 0..10_000 {
            let next = solid_step(&s, c, 0.0, dt, DEFAULT_DELTA);
            let jump = (next - s.x_curr).powi(2);
            prop_assert!(jump <= last * (1.0 + 1e-12));
            last = jump;
            s.advance(next, dt);
        }
    }
}

fn params(beta: f64, c_fric: f64) -> PhysicalParams {
    PhysicalParams {
        mu: 0.2,
        eps: 0.2,
        beta,
        c_fric,
        m_tilde: DEFAULT_M_TILDE,
        delta: DEFAULT_DELTA,
        h0_dim: 20.0,
        g_dim: 9.81,
        c_solid: 1.0,
    }
}

fn bump(grid: &sliding_bed::grid::StaggeredGrid, center: f64, amp: f64) -> FluidState {
    let mut s = FluidState::rest(grid);
    s.zeta = grid
        .node_coords
        .iter()
        .map(|x| amp * (-(x - center).powi(2)).exp())
        .collect();
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // the tank is symmetric about its middle, so the mirrored initial state
    // evolves into the mirrored solution
    #[test]
    fn mirror_symmetry(center in 6.0..9.0f64, amp in 0.1..0.5f64) {
        let grid = build_grid(20.0, 0.1).unwrap();
        let bathy = gaussian_bottom(0.3, 1.0, 10.0, 1e-4).unwrap();
        for mode in [BottomMode::Flat, BottomMode::Moving] {
            let run = |init: FluidState| {
                let mut sim = Simulation::new(
                    grid.clone(), params(0.3, 0.01), Some(bathy), mode, SolverOptions::new(0.02), init, 0.0,
                ).unwrap();
                for _ in 0..60 {
                    sim.step().unwrap();
                }
                sim
            };
            let a = run(bump(&grid, center, amp));
            let mut mirrored = bump(&grid, center, amp);
            mirrored.zeta.reverse();
            let b = run(mirrored);
            let n = grid.n_nodes;
            for i in 0..n {
                prop_assert!((a.state.zeta[i] - b.state.zeta[n - 1 - i]).abs() < 1e-11);
            }
            let m = grid.n_mids();
            for j in 0..m {
                prop_assert!((a.state.vbar[j] + b.state.vbar[m - 1 - j]).abs() < 1e-11);
            }
            prop_assert!((a.displacement() + b.displacement()).abs() < 1e-11);
        }
    }
}
