//! Scheme-validation fixtures shared by the integration and acceptance
//! targets.
#![allow(dead_code)]

use aggdiff::solver::stable_dt;
use aggdiff::spectral::{forward, inverse, Spectrum};
use aggdiff::{gaussian, Field, Grid, SolverState};

/// Relative discrete L2 distance `|a - b| / |b|`.
pub fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Exact heat flow of `u0` on the periodic box, by the multiplier
/// `exp(-eps |k|^2 t)`.
pub fn heat_flow(u0: &Field, eps: f64, t: f64) -> Field {
    let s = forward(u0);
    let coeffs = s
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| c * (-eps * s.wavenumber_sq(i) * t).exp())
        .collect();
    inverse(&Spectrum::new(*u0.grid(), coeffs).unwrap())
}

/// Advances `state` to `t_end` with `steps` equal steps.
pub fn advance_uniform(state: &mut SolverState, t_end: f64, steps: usize) {
    let dt = t_end / steps as f64;
    for _ in 0..steps {
        state.advance(dt).unwrap();
    }
}

/// Tiny-mass Gaussian under strong diffusion against the exact heat flow at
/// `t = 0.01`; returns the relative L2 error.
pub fn heat_limit_error(dim: usize) -> f64 {
    let (eps, t) = (1.0, 0.01);
    let n = if dim == 1 { 1024 } else { 128 };
    let grid = Grid::new(dim, n, 16.0).unwrap();
    let u0 = gaussian(&grid, 1e-6, 0.5).unwrap();
    let want = heat_flow(&u0, eps, t);
    let mut s = SolverState::new(u0, eps).unwrap();
    advance_uniform(&mut s, t, 100);
    rel_l2(s.field().values(), want.values())
}

/// Line solution at `t_end` on `n` cells, stepping at a fixed Courant number
/// so that `dt` scales with `h`.
pub fn line_solution(n: usize, eps: f64, t_end: f64) -> Field {
    let grid = Grid::new(1, n, 16.0).unwrap();
    let mut s = SolverState::new(gaussian(&grid, 1.0, 0.5).unwrap(), eps).unwrap();
    let dt = stable_dt(&s, 0.5, t_end);
    let steps = (t_end / dt).ceil() as usize;
    advance_uniform(&mut s, t_end, steps);
    s.field().clone()
}

/// Averages adjacent cell pairs, repeatedly, down to `n` cells.
pub fn restrict(values: &[f64], n: usize) -> Vec<f64> {
    let mut v = values.to_vec();
    while v.len() > n {
        v = v.chunks(2).map(|c| 0.5 * (c[0] + c[1])).collect();
    }
    v
}

/// Observed order of the line scheme from runs on `n`, `2n` and a reference
/// on `4n` cells, all compared on the `n`-cell grid.
pub fn line_refinement_order(n: usize, eps: f64, t_end: f64) -> f64 {
    let coarse = line_solution(n, eps, t_end);
    let mid = line_solution(2 * n, eps, t_end);
    let reference = line_solution(4 * n, eps, t_end);
    let r = restrict(reference.values(), n);
    let e1 = rel_l2(coarse.values(), &r);
    let e2 = rel_l2(&restrict(mid.values(), n), &r);
    (e1 / e2).log2()
}

/// Observed temporal order of the planar scheme from step counts `k`, `2k`
/// and a reference with `4k` steps.
pub fn planar_time_order(k: usize) -> f64 {
    let grid = Grid::new(2, 64, 8.0).unwrap();
    let (eps, t_end) = (0.1, 0.2);
    let solve = |steps: usize| {
        let mut s = SolverState::new(gaussian(&grid, 1.0, 0.5).unwrap(), eps).unwrap();
        advance_uniform(&mut s, t_end, steps);
        s.field().clone()
    };
    let reference = solve(4 * k);
    let e1 = rel_l2(solve(k).values(), reference.values());
    let e2 = rel_l2(solve(2 * k).values(), reference.values());
    (e1 / e2).log2()
}
