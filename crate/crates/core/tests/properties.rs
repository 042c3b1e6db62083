use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use statrs::function::erf::erfc;

use tfconc::frames::{frame_bounds_finite, gram_matrix, tail_sum};
use tfconc::moments::{concentration_reports, mean_and_dispersion};
use tfconc::separation::{greedy_separated_subset, inner_product_bound, is_separated, Gram};
use tfconc::testfns::{clustered_gram, rng, shifted_gaussian, smooth_family};
use tfconc::{
    concentration_report, fourier, inner_product, inverse_fourier, make_grid, tail_mass, Complex64,
    Execution, Grid, SampledFunction,
};

fn grid() -> Grid {
    make_grid(16.0, 1024).unwrap()
}

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 32,
        ..ProptestConfig::default()
    }
}

fn bump(t: f64, x: f64, xi: f64, w: f64) -> Complex64 {
    Complex64::from_polar((-PI * ((t - x) / w).powi(2)).exp(), 2.0 * PI * xi * t)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn transform_is_unitary(values in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 256)) {
        let g = make_grid(8.0, 256).unwrap();
        let f = SampledFunction::from_values(g, values.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap();
        let fh = fourier(&f);
        prop_assert!((fh.norm() - f.norm()).abs() <= 1e-12 * f.norm().max(1.0));
        let back = inverse_fourier(&fh);
        let err = back.values().iter().zip(f.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-12);
    }

    #[test]
    fn translation_moves_the_mean(
        x in -2.0f64..2.0, xi in -1.0f64..1.0, w in 0.7f64..1.5, s in -3.0f64..3.0, p in 1.2f64..4.0,
    ) {
        let g = grid();
        let h = SampledFunction::sample(g, |t| bump(t, x, xi, w) + 0.5 * bump(t, x + 1.0, 0.0, 1.0))
            .unwrap().normalized().unwrap();
        let hs = SampledFunction::sample(g, |t| bump(t - s, x, xi, w) + 0.5 * bump(t - s, x + 1.0, 0.0, 1.0))
            .unwrap().normalized().unwrap();
        let (mu, delta) = mean_and_dispersion(&h, p).unwrap();
        let (mu_s, delta_s) = mean_and_dispersion(&hs, p).unwrap();
        prop_assert!((mu_s - mu - s).abs() < 1e-6, "mean moved by {} instead of {s}", mu_s - mu);
        prop_assert!((delta_s - delta).abs() < 1e-6);
    }

    #[test]
    fn modulation_leaves_time_moments(x in -2.0f64..2.0, w in 0.7f64..1.5, nu in -2.0f64..2.0) {
        let g = grid();
        let h = SampledFunction::sample(g, |t| bump(t, x, 0.0, w)).unwrap().normalized().unwrap();
        let a = concentration_report(&h, 1.5, 2.0).unwrap();
        let b = concentration_report(&h.modulated(nu), 1.5, 2.0).unwrap();
        prop_assert!((a.time_mean - b.time_mean).abs() < 1e-9);
        prop_assert!((a.time_dispersion - b.time_dispersion).abs() < 1e-9);
        prop_assert!((b.freq_mean - a.freq_mean - nu).abs() < 1e-6);
    }

    #[test]
    fn uncertainty_product_is_bounded_below(seed in 0u64..1000) {
        for f in smooth_family(grid(), 3, seed).unwrap() {
            let r = concentration_report(&f, 2.0, 2.0).unwrap();
            prop_assert!(r.heisenberg_product >= 1.0 / (4.0 * PI) - 1e-9);
        }
    }

    #[test]
    fn greedy_subset_is_separated_and_large(seed in 0u64..10_000, k in 2usize..30) {
        let gram = clustered_gram(20, k, &mut rng(seed));
        let d = k as f64;
        let res = greedy_separated_subset(&gram, d).unwrap();
        prop_assert!(is_separated(&gram, &res.selected));
        prop_assert!(res.selected.len() >= res.guarantee);
        prop_assert_eq!(res.selected[0], 0);
    }

    #[test]
    fn gaussian_overlap_respects_bound(
        x0 in -4.0f64..4.0, x1 in -4.0f64..4.0, y0 in -3.0f64..3.0, y1 in -3.0f64..3.0,
    ) {
        prop_assume!((x0 - x1).abs().max((y0 - y1).abs()) > 0.05);
        let g = grid();
        let f = shifted_gaussian(g, x0, y0);
        let h = shifted_gaussian(g, x1, y1);
        let bound = inner_product_bound(
            &concentration_report(&f, 2.0, 2.0).unwrap(),
            &concentration_report(&h, 2.0, 2.0).unwrap(),
        ).unwrap();
        prop_assert!(inner_product(&f, &h).unwrap().norm() <= bound + 1e-9);
    }

    #[test]
    fn tail_sum_decreases_in_n(n in 1.0f64..500.0, step in 1.0f64..100.0, r in 1.1f64..3.0) {
        let a = tail_sum(n, 0.0, 1.0, 2.0, 2.0, r, 10_000).unwrap();
        let b = tail_sum(n + step, 0.0, 1.0, 2.0, 2.0, r, 10_000).unwrap();
        prop_assert!(b < a);
    }

    #[test]
    fn scaled_identity_bounds(k in 1usize..12, c in 0.1f64..10.0) {
        let gram = Gram::identity(k, k) * Complex64::new(c, 0.0);
        let (lo, hi) = frame_bounds_finite(&gram).unwrap();
        prop_assert!((lo - c).abs() < 1e-12 * c && (hi - c).abs() < 1e-12 * c);
    }
}

#[test]
fn gaussian_tail_matches_erfc() {
    // |g|² = √2 e^{-2πt²}, so the mass beyond R is erfc(√(2π) R); the sum is
    // a trapezoid rule at ±R, with error dt²/12 |w'(R)| from each end
    let g = make_grid(32.0, 4096).unwrap();
    let dt = g.spacing();
    let f = shifted_gaussian(g, 0.0, 0.0);
    for r in [0.25, 0.5, 1.0, 1.5] {
        let slope = 4.0 * PI * r * 2f64.sqrt() * (-2.0 * PI * r * r).exp();
        let budget = 1.05 * dt * dt / 6.0 * slope + 1e-13;
        assert_abs_diff_eq!(
            tail_mass(&f, r).unwrap(),
            erfc((2.0 * PI).sqrt() * r),
            epsilon = budget
        );
    }
}

#[test]
fn execution_strategies_agree() {
    let g = grid();
    let family = smooth_family(g, 12, 5).unwrap();
    let seq = concentration_reports(&family, 1.7, 2.5, Execution::Sequential).unwrap();
    let par = concentration_reports(&family, 1.7, 2.5, Execution::Parallel).unwrap();
    assert_eq!(seq, par);
    let gs = gram_matrix(&family, Execution::Sequential).unwrap();
    let gp = gram_matrix(&family, Execution::Parallel).unwrap();
    assert_eq!(gs, gp);
}
