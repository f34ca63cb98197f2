//! Spectral routines against direct quadrature and closed forms.

use std::cmp::Ordering;
use std::f64::consts::PI;

use aggdiff::grid::gaussian_at;
use aggdiff::inequalities::{check_inequality, hls_solve, InequalityParams};
use aggdiff::kernel::{
    riesz_convolve, riesz_kernel_samples, riesz_origin_average, velocity_1d, velocity_2d_spectral,
    velocity_direct_oracle,
};
use aggdiff::norms::{first_moment, lp_norm, mass, sobolev_seminorm};
use aggdiff::{gaussian, Field, Grid};
use statrs::function::gamma::gamma;

fn rel_max_err(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        / scale
}

fn off_center_bumps(grid: Grid) -> Field {
    Field::from_fn(grid, |x| {
        let r2a: f64 = x
            .iter()
            .zip([0.3, -0.2])
            .map(|(a, c)| (a - c).powi(2))
            .sum();
        let r2b: f64 = x
            .iter()
            .zip([-0.5, 0.4])
            .map(|(a, c)| (a - c).powi(2))
            .sum();
        (-r2a / 0.18).exp() + 0.4 * (-r2b / 0.08).exp()
    })
    .unwrap()
}

#[test]
fn velocity_2d_matches_direct_quadrature() {
    for n in [32, 64] {
        let f = off_center_bumps(Grid::new(2, n, 4.0).unwrap());
        let fast = velocity_2d_spectral(&f).unwrap();
        let slow = velocity_direct_oracle(&f).unwrap();
        for axis in 0..2 {
            let e = rel_max_err(fast.component(axis), slow.component(axis));
            assert!(e <= 1e-10, "n = {n} axis {axis}: {e:e}");
        }
    }
}

#[test]
fn velocity_1d_matches_sign_kernel_sum() {
    let grid = Grid::new(1, 512, 8.0).unwrap();
    let u = off_center_bumps(grid);
    let h = grid.spacing();
    let v = velocity_1d(&u).unwrap();
    let direct: Vec<f64> = (0..grid.n())
        .map(|i| {
            (0..grid.n())
                .map(|j| match j.cmp(&i) {
                    Ordering::Greater => u.values()[j] * h,
                    Ordering::Less => -u.values()[j] * h,
                    Ordering::Equal => 0.0,
                })
                .sum()
        })
        .collect();
    let e = rel_max_err(v.component(0), &direct);
    assert!(e <= 1e-12, "{e:e}");
}

#[test]
fn velocity_bounded_by_mass() {
    let f = off_center_bumps(Grid::new(2, 64, 4.0).unwrap());
    let v = velocity_2d_spectral(&f).unwrap();
    assert!(v.max_abs() <= mass(&f) * (1.0 + 1e-8));
}

#[test]
fn translation_equivariance_of_oracle() {
    let grid = Grid::new(2, 16, 2.0).unwrap();
    let f = off_center_bumps(grid);
    let n = grid.n();
    let shifted: Vec<f64> = (0..grid.len())
        .map(|idx| {
            let [i, j] = grid.unflatten(idx);
            f.values()[((i + n - 1) % n) * n + j]
        })
        .collect();
    let g = Field::new(grid, shifted).unwrap();
    let vf = velocity_direct_oracle(&f).unwrap();
    let vg = velocity_direct_oracle(&g).unwrap();
    for axis in 0..2 {
        for idx in 0..grid.len() {
            let [i, j] = grid.unflatten(idx);
            let src = ((i + n - 1) % n) * n + j;
            // same terms, rotated summation order
            let (a, b) = (vg.component(axis)[idx], vf.component(axis)[src]);
            assert!((a - b).abs() <= 1e-14, "{a} vs {b}");
        }
    }
}

fn riesz_direct(field: &Field, lambda: f64) -> Vec<f64> {
    let grid = *field.grid();
    let k = riesz_kernel_samples(&grid, lambda).unwrap();
    let n = grid.n();
    let vol = grid.cell_volume();
    (0..grid.len())
        .map(|x| {
            let xi = grid.unflatten(x);
            (0..grid.len())
                .map(|y| {
                    let yi = grid.unflatten(y);
                    let d = if grid.dim() == 1 {
                        (xi[0] + n - yi[0]) % n
                    } else {
                        ((xi[0] + n - yi[0]) % n) * n + (xi[1] + n - yi[1]) % n
                    };
                    k[d] * field.values()[y] * vol
                })
                .sum()
        })
        .collect()
}

#[test]
fn riesz_matches_direct_quadrature() {
    for (grid, lambda) in [
        (Grid::new(1, 256, 8.0).unwrap(), 0.5),
        (Grid::new(2, 32, 4.0).unwrap(), 1.0),
        (Grid::new(2, 64, 4.0).unwrap(), 0.7),
    ] {
        let f = off_center_bumps(grid);
        let fast = riesz_convolve(&f, lambda).unwrap();
        let e = rel_max_err(fast.values(), &riesz_direct(&f, lambda));
        assert!(e <= 1e-10, "{grid:?} lambda {lambda}: {e:e}");
        assert!(fast.min() >= -1e-12 * fast.max());
    }
}

#[test]
fn riesz_origin_cell_averages() {
    // 1D: (1/h) int_{-h/2}^{h/2} |x|^{-1/2} dx = 2 (h/2)^{-1/2}
    let g1 = Grid::new(1, 64, 4.0).unwrap();
    let a = g1.spacing() / 2.0;
    let got = riesz_origin_average(&g1, 0.5).unwrap();
    assert!((got - 2.0 / a.sqrt()).abs() <= 1e-14 * got);
    // 2D, lambda = 1: the square integral is 8 a ln(1 + sqrt 2)
    let g2 = Grid::new(2, 64, 4.0).unwrap();
    let a = g2.spacing() / 2.0;
    let want = 8.0 * a * (1.0 + 2f64.sqrt()).ln() / (4.0 * a * a);
    let got = riesz_origin_average(&g2, 1.0).unwrap();
    assert!((got - want).abs() <= 1e-10 * want, "{got} vs {want}");
    // 2D, lambda = 1/2, against a midpoint sum that skips the singular point
    let lambda = 0.5;
    let k = 2000;
    let step = 2.0 * a / k as f64;
    let mut s = 0.0;
    for i in 0..k {
        for j in 0..k {
            let x = -a + (i as f64 + 0.5) * step;
            let y = -a + (j as f64 + 0.5) * step;
            s += (x * x + y * y).powf(-lambda / 2.0);
        }
    }
    let approx = s * step * step / (4.0 * a * a);
    let got = riesz_origin_average(&g2, lambda).unwrap();
    assert!((got - approx).abs() <= 1e-3 * got, "{got} vs {approx}");
}

fn gaussian_h(dim: usize, m: usize, mass: f64, sigma: f64) -> f64 {
    // |u|_{H^m}^2 = M^2 / (2 pi)^N int |k|^{2m} exp(-sigma^2 |k|^2) dk
    let sq = match dim {
        1 => mass * mass * gamma(m as f64 + 0.5) / (2.0 * PI * sigma.powi(2 * m as i32 + 1)),
        _ => mass * mass * gamma(m as f64 + 1.0) / (4.0 * PI * sigma.powi(2 * m as i32 + 2)),
    };
    sq.sqrt()
}

#[test]
fn gaussian_sobolev_closed_forms() {
    let g1 = Grid::new(1, 1024, 16.0).unwrap();
    let g2 = Grid::new(2, 256, 16.0).unwrap();
    for (grid, mass_, sigma) in [
        (g1, 1.0, 0.5),
        (g1, 3.7, 0.3),
        (g2, 1.0, 0.5),
        (g2, 2.0, 0.7),
    ] {
        let u = gaussian(&grid, mass_, sigma).unwrap();
        for m in 0..=3 {
            let want = gaussian_h(grid.dim(), m, mass_, sigma);
            let got = sobolev_seminorm(&u, m);
            assert!(
                (got - want).abs() <= 1e-6 * want,
                "dim {} m {m}: {got} vs {want}",
                grid.dim()
            );
        }
    }
}

#[test]
fn gaussian_lebesgue_closed_forms() {
    let sigma = 0.5;
    let g1 = Grid::new(1, 1024, 16.0).unwrap();
    let u = gaussian(&g1, 1.0, sigma).unwrap();
    let l2 = (2.0 * sigma * PI.sqrt()).powf(-0.5);
    assert!((lp_norm(&u, 2.0).unwrap() - l2).abs() <= 1e-12 * l2);
    assert!((mass(&u) - 1.0).abs() <= 1e-12);

    // put the peak on a cell center so the discrete max is the true peak
    for dim in [1, 2] {
        let grid = Grid::new(dim, 256, 16.0).unwrap();
        let c = vec![grid.spacing() / 2.0; dim];
        let u = gaussian_at(&grid, 1.0, sigma, &c).unwrap();
        let peak = (2.0 * PI * sigma * sigma).powf(-(dim as f64) / 2.0);
        let got = lp_norm(&u, f64::INFINITY).unwrap();
        assert!((got - peak).abs() <= 1e-12 * peak, "dim {dim}");
    }
}

#[test]
fn gaussian_first_moments() {
    let sigma = 0.5;
    // the kink of |x| costs O(h^2) with midpoint sampling
    let g1 = Grid::new(1, 65536, 16.0).unwrap();
    let want = sigma * (2.0 / PI).sqrt();
    let got = first_moment(&gaussian(&g1, 1.0, sigma).unwrap());
    assert!((got - want).abs() <= 1e-8 * want, "{got} vs {want}");

    let g2 = Grid::new(2, 1024, 16.0).unwrap();
    let want = sigma * (PI / 2.0).sqrt();
    let got = first_moment(&gaussian(&g2, 1.0, sigma).unwrap());
    assert!((got - want).abs() <= 1e-6 * want, "{got} vs {want}");
}

#[test]
fn first_moment_of_bump_pair() {
    let grid = Grid::new(1, 4096, 16.0).unwrap();
    let a = 2.0;
    let s = 0.1;
    let u = Field::from_fn(grid, |x| {
        let g = |c: f64| (-(x[0] - c).powi(2) / (2.0 * s * s)).exp();
        (g(a) + g(-a)) / (2.0 * (2.0 * PI).sqrt() * s)
    })
    .unwrap();
    // the bumps do not reach the origin, so |x| is smooth on their support
    assert!((first_moment(&u) - a).abs() <= 1e-10);
}

#[test]
fn hls_ensemble_below_sharp_constant() {
    // diagonal case p = 2N/(2N - lambda): the sharp constant is
    // pi^(lambda/2) G(N/2 - lambda/2) / G(N - lambda/2) (G(N/2)/G(N))^(lambda/N - 1)
    let (n, lambda) = (1.0, 0.5);
    let sharp = PI.powf(lambda / 2.0) * gamma(n / 2.0 - lambda / 2.0) / gamma(n - lambda / 2.0)
        * (gamma(n / 2.0) / gamma(n)).powf(lambda / n - 1.0);
    assert!((sharp - gamma(0.25) / gamma(0.75)).abs() < 1e-12);
    let params = InequalityParams::HardyLittlewoodSobolev(hls_solve(1, 4.0 / 3.0, lambda).unwrap());
    let report = check_inequality(params, 200, 3).unwrap();
    assert!(report.ensemble_max > 0.0);
    assert!(
        report.ensemble_max <= 1.1 * sharp,
        "{} vs {sharp}",
        report.ensemble_max
    );
    assert!(report.dilation_max <= 1.1 * sharp);
}
