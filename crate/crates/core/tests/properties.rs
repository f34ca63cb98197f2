use aggdiff::experiments::fit_exponent;
use aggdiff::inequalities::{
    gn_ratio, gn_solve, hls_ratio, hls_solve, random_bump_field, suite_grid, GnParams, HlsParams,
};
use aggdiff::norms::{
    first_moment, lp_norm, mass, multiindices, sobolev_seminorm, sobolev_seminorms, wmp_seminorm,
};
use aggdiff::spectral::{forward, inverse, spectral_derivative};
use aggdiff::{gaussian, Field, Grid};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rough_field() -> impl Strategy<Value = Field> {
    (1usize..=2, 3u32..=6, 1.0f64..20.0).prop_flat_map(|(dim, log_n, extent)| {
        let grid = Grid::new(dim, 1 << log_n, extent).unwrap();
        prop::collection::vec(-1.0f64..1.0, grid.len())
            .prop_map(move |v| Field::new(grid, v).unwrap())
    })
}

fn smooth_field(dim: usize, seed: u64) -> Field {
    let grid = match dim {
        1 => Grid::new(1, 512, 16.0).unwrap(),
        _ => Grid::new(2, 128, 16.0).unwrap(),
    };
    random_bump_field(&grid, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn suite_field(dim: usize, seed: u64) -> Field {
    let grid = suite_grid(dim).unwrap();
    random_bump_field(&grid, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn binomial(m: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn transform_roundtrip_and_parseval(f in rough_field()) {
        let s = forward(&f);
        let back = inverse(&s);
        let scale = f.max_abs();
        for (a, b) in back.values().iter().zip(f.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
        let grid = f.grid();
        let lhs: f64 = f.values().iter().map(|v| v * v).sum::<f64>() * grid.cell_volume();
        let rhs: f64 = s.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>()
            / grid.extent().powi(grid.dim() as i32);
        prop_assert!(close(lhs, rhs, 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn mass_is_linear(f in rough_field(), a in -5.0f64..5.0, b in -5.0f64..5.0, seed in any::<u64>()) {
        let grid = *f.grid();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_bump_field(&grid, &mut rng).unwrap();
        let combo = f.combine(a, &g, b).unwrap();
        let want = a * mass(&f) + b * mass(&g);
        let scale = (a.abs() * lp_norm(&f, 1.0).unwrap() + b.abs() * mass(&g)).max(1e-300);
        prop_assert!((mass(&combo) - want).abs() <= 1e-13 * scale);
    }

    #[test]
    fn norms_are_homogeneous(f in rough_field(), c in 0.01f64..100.0) {
        let g = f.scaled(c);
        prop_assert!(close(mass(&g), c * mass(&f), 1e-12) || mass(&f).abs() < 1e-12);
        prop_assert!(close(first_moment(&g), c * first_moment(&f), 1e-12));
        for p in [1.0, 2.0, 3.0, 4.5, f64::INFINITY] {
            prop_assert!(close(lp_norm(&g, p).unwrap(), c * lp_norm(&f, p).unwrap(), 1e-12));
        }
        for m in 0..=3 {
            prop_assert!(close(sobolev_seminorm(&g, m), c * sobolev_seminorm(&f, m), 1e-12));
        }
    }

    #[test]
    fn seminorms_are_log_convex(f in rough_field()) {
        let h = sobolev_seminorms(&f, 4);
        prop_assert!(close(h[0], lp_norm(&f, 2.0).unwrap(), 1e-12));
        for m in 1..4 {
            prop_assert!(h[m] * h[m] <= h[m - 1] * h[m + 1] * (1.0 + 1e-10));
        }
    }

    #[test]
    fn gaussian_samples_are_even(dim in 1usize..=2, log_n in 3u32..=8, sigma in 0.2f64..1.0, m in 0.1f64..5.0) {
        let grid = Grid::new(dim, 1 << log_n, 16.0).unwrap();
        let u = gaussian(&grid, m, sigma).unwrap();
        let n = grid.n();
        for idx in 0..grid.len() {
            let [i, j] = grid.unflatten(idx);
            let mirror = if dim == 1 { n - 1 - i } else { (n - 1 - i) * n + (n - 1 - j) };
            prop_assert_eq!(u.values()[idx], u.values()[mirror]);
            prop_assert!(u.values()[idx] >= 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn derivatives_compose(dim in 1usize..=2, seed in any::<u64>()) {
        let f = smooth_field(dim, seed);
        let unit: Vec<usize> = (0..dim).map(|a| usize::from(a == 0)).collect();
        let twice = spectral_derivative(&spectral_derivative(&f, &unit).unwrap(), &unit).unwrap();
        let double: Vec<usize> = unit.iter().map(|i| 2 * i).collect();
        let once = spectral_derivative(&f, &double).unwrap();
        let scale = once.max_abs();
        for (a, b) in twice.values().iter().zip(once.values()) {
            prop_assert!((a - b).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn line_multiindex_norm_is_spectral(seed in any::<u64>(), m in 0usize..=3) {
        let f = smooth_field(1, seed);
        prop_assert!(close(wmp_seminorm(&f, m, 2.0).unwrap(), sobolev_seminorm(&f, m), 1e-10));
    }

    #[test]
    fn plane_multiindex_norm_is_equivalent(seed in any::<u64>(), m in 1usize..=3) {
        // |k|^2m = sum_a C(m, a) k1^2a k2^2(m-a), so the unweighted sum of the
        // m + 1 derivative norms lies within these factors of the spectral norm
        let f = smooth_field(2, seed);
        let ratio = wmp_seminorm(&f, m, 2.0).unwrap() / sobolev_seminorm(&f, m);
        let count = multiindices(2, m).len() as f64;
        let widest = binomial(m, m / 2);
        prop_assert!(ratio >= (1.0 / widest.sqrt()) * (1.0 - 1e-10), "ratio {}", ratio);
        prop_assert!(ratio <= count.sqrt() * (1.0 + 1e-10), "ratio {}", ratio);
    }

    #[test]
    fn radial_partials_agree(sigma in 0.3f64..1.0) {
        let grid = Grid::new(2, 128, 16.0).unwrap();
        let u = gaussian(&grid, 1.0, sigma).unwrap();
        let a = lp_norm(&spectral_derivative(&u, &[1, 0]).unwrap(), 2.0).unwrap();
        let b = lp_norm(&spectral_derivative(&u, &[0, 1]).unwrap(), 2.0).unwrap();
        prop_assert!(close(a, b, 1e-10));
        prop_assert!(close(wmp_seminorm(&u, 1, 2.0).unwrap(), a + b, 1e-12));
    }

    #[test]
    fn gn_relation_roundtrips(
        dim in 1usize..=2,
        m in 1usize..=4,
        beta_frac in 0.0f64..1.0,
        p in 1.0f64..12.0,
        q in 1.0f64..12.0,
        theta_frac in 0.0f64..1.0,
    ) {
        let beta = ((m as f64) * beta_frac) as usize;
        let lo = beta as f64 / m as f64;
        let theta = lo + (1.0 - lo) * theta_frac;
        if let Ok(g) = gn_solve(dim, m, beta, p, q, theta) {
            prop_assert!(g.residual().abs() <= 1e-12);
            prop_assert!(g.r >= 1.0);
            let n = dim as f64;
            let rhs = beta as f64 - theta * (m as f64 - n / p) + (1.0 - theta) * n / q;
            prop_assert!((n / g.r - rhs).abs() <= 1e-12);
        }
    }

    #[test]
    fn hls_relation_roundtrips(dim in 1usize..=2, p in 1.0f64..8.0, lf in 0.0f64..1.0) {
        let lambda = lf * dim as f64;
        if let Ok(h) = hls_solve(dim, p, lambda) {
            prop_assert!(h.residual().abs() <= 1e-12);
            prop_assert!(h.q > 1.0 && h.q.is_finite());
            prop_assert!((1.0 / p + lambda / dim as f64 - 1.0 / h.q - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn fit_is_exact_on_power_laws(slope in -3.0f64..3.0, c in 0.1f64..10.0, lo in -3.0f64..-1.0) {
        let pairs: Vec<(f64, f64)> = (0..8)
            .map(|i| {
                let e = 10f64.powf(lo + 0.25 * i as f64);
                (e, c * e.powf(slope))
            })
            .collect();
        let fit = fit_exponent(&pairs).unwrap();
        prop_assert!((fit.slope - slope).abs() <= 1e-12);
        prop_assert!((fit.intercept - c.ln()).abs() <= 1e-11);
        prop_assert!((fit.r2 - 1.0).abs() <= 1e-12 || slope.abs() < 1e-9);
    }
}

fn gn_set() -> Vec<GnParams> {
    vec![
        gn_solve(1, 1, 0, 2.0, 1.0, 1.0 / 3.0).unwrap(),
        gn_solve(1, 2, 1, 2.0, 1.0, 0.8).unwrap(),
        gn_solve(2, 1, 0, 2.0, 1.0, 0.5).unwrap(),
    ]
}

fn hls_set() -> Vec<HlsParams> {
    vec![
        hls_solve(1, 4.0 / 3.0, 0.5).unwrap(),
        hls_solve(2, 4.0 / 3.0, 1.0).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ratios_are_scale_invariant(seed in any::<u64>(), c in 0.01f64..100.0) {
        for g in gn_set() {
            let f = suite_field(g.dim, seed);
            let a = gn_ratio(&f, &g).unwrap();
            let b = gn_ratio(&f.scaled(c), &g).unwrap();
            prop_assert!(a > 0.0 && close(a, b, 1e-12), "{} vs {}", a, b);
        }
        for h in hls_set() {
            let f = suite_field(h.dim, seed);
            let a = hls_ratio(&f, &h).unwrap();
            let b = hls_ratio(&f.scaled(c), &h).unwrap();
            prop_assert!(a > 0.0 && close(a, b, 1e-12), "{} vs {}", a, b);
        }
    }
}
