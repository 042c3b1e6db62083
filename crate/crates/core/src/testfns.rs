//! Seeded test families shared by the verification suite, the benches and the
//! integration tests.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::grid::{Grid, SampledFunction, StepFunction};
use crate::separation::Gram;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `2^{1/4} e^{-π(t-x)²} e^{2πiξt}`, for real `x` and `ξ`.
pub fn shifted_gaussian(grid: Grid, x: f64, xi: f64) -> SampledFunction {
    let c = 2f64.powf(0.25);
    SampledFunction::sample(grid, |t| {
        Complex64::from_polar(c * (-PI * (t - x).powi(2)).exp(), 2.0 * PI * xi * t)
    })
    .expect("gaussian samples are finite")
}

/// A normalized sum of one to three modulated Gaussians of random width,
/// kept well inside both the time and the frequency window of `grid`.
pub fn smooth_random<R: Rng>(grid: Grid, rng: &mut R) -> Result<SampledFunction> {
    let t_room = (grid.extent() / 8.0).min(4.0);
    let xi_room = (grid.dual_extent() / 8.0).min(3.0);
    // spectral width 1/w must leave the bump negligible at the window edge
    let w_min = (4.0 / (grid.dual_extent() / 2.0 - xi_room)).max(0.5);
    let terms = rng.random_range(1..=3);
    let mut acc = SampledFunction::zero(grid);
    for _ in 0..terms {
        let x = rng.random_range(-t_room..=t_room);
        let xi = rng.random_range(-xi_room..=xi_room);
        let width: f64 = rng.random_range(w_min..=w_min + 1.0);
        let w = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        let bump = SampledFunction::sample(grid, |t| {
            Complex64::from_polar((-PI * ((t - x) / width).powi(2)).exp(), 2.0 * PI * xi * t)
        })?;
        acc = acc.combine(Complex64::new(1.0, 0.0), &bump, w)?;
    }
    acc.normalized()
}

pub fn smooth_family(grid: Grid, count: usize, seed: u64) -> Result<Vec<SampledFunction>> {
    let mut r = rng(seed);
    (0..count).map(|_| smooth_random(grid, &mut r)).collect()
}

/// `ψ_s = (1-s)^{1/2} χ_{[-1/2,1/2]} + s^{1/2} χ_{[s^{-4}, 1+s^{-4}]}`.
pub fn psi(s: f64) -> Result<StepFunction> {
    let far = s.powi(-4);
    StepFunction::new(vec![
        (-0.5, 0.5, (1.0 - s).sqrt()),
        (far, far + 1.0, s.sqrt()),
    ])
}

/// `2^{-1/2}(χ_{[-2,-1]} + χ_{[1,2]})`, whose 1-objective is flat on `[-1, 1]`.
pub fn two_bump() -> StepFunction {
    let c = 0.5f64.sqrt();
    StepFunction::new(vec![(-2.0, -1.0, c), (1.0, 2.0, c)]).expect("disjoint pieces")
}

/// Gram matrix of `k` random unit vectors in `C^dim`.
///
/// The vectors are drawn around a few random centers so that the coherence
/// counts are neither all one nor all `k`.
pub fn clustered_gram<R: Rng>(dim: usize, k: usize, rng: &mut R) -> Gram {
    let mut normal = || Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    let clusters = 1 + k / 4;
    let centers: Vec<Vec<Complex64>> = (0..clusters)
        .map(|_| (0..dim).map(|_| normal()).collect())
        .collect();
    let vectors: Vec<Vec<Complex64>> = (0..k)
        .map(|i| {
            let spread = [0.3, 0.8, 3.0][i % 3];
            let center = &centers[i % clusters];
            let mut v: Vec<Complex64> = center.iter().map(|c| c + normal() * spread).collect();
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|z| *z /= n);
            v
        })
        .collect();
    Gram::from_fn(k, k, |m, n| {
        if m == n {
            return Complex64::new(1.0, 0.0);
        }
        vectors[m]
            .iter()
            .zip(&vectors[n])
            .map(|(a, b)| a * b.conj())
            .sum()
    })
}

/// Two Gaussians with random real time and frequency shifts whose centers
/// differ by at least `0.1` in one coordinate.
pub fn gaussian_pair<R: Rng>(grid: Grid, rng: &mut R) -> (SampledFunction, SampledFunction) {
    let t_room = (grid.extent() / 2.0 - 5.0).clamp(0.5, 6.0);
    let xi_room = (grid.dual_extent() / 2.0 - 5.0).clamp(0.5, 6.0);
    loop {
        let a = (
            rng.random_range(-t_room..=t_room),
            rng.random_range(-xi_room..=xi_room),
        );
        let b = (
            rng.random_range(-t_room..=t_room),
            rng.random_range(-xi_room..=xi_room),
        );
        if (a.0 - b.0).abs().max((a.1 - b.1).abs()) >= 0.1 {
            return (
                shifted_gaussian(grid, a.0, a.1),
                shifted_gaussian(grid, b.0, b.1),
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::separation::coherence_counts;
    use crate::Execution;

    #[test]
    fn smooth_family_is_unit_and_reproducible() {
        let grid = make_grid(32.0, 1024).unwrap();
        let a = smooth_family(grid, 5, 3).unwrap();
        let b = smooth_family(grid, 5, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|f| f.is_unit(1e-12)));
    }

    #[test]
    fn psi_has_unit_energy() {
        for s in [0.5, 0.6, 0.7] {
            assert!((psi(s).unwrap().energy() - 1.0).abs() < 1e-15);
        }
        assert!((two_bump().energy() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn clustered_gram_mixes_coherence() {
        let mut r = rng(0);
        let gram = clustered_gram(40, 20, &mut r);
        assert!(gram.is_square());
        let counts = coherence_counts(&gram, Execution::Sequential).unwrap();
        assert!(counts.iter().any(|&c| c > 1));
        assert!(counts.iter().any(|&c| c < 20));
    }

    #[test]
    fn shifted_gaussian_matches_atom() {
        let grid = make_grid(32.0, 1024).unwrap();
        let atom =
            crate::systems::gabor_atom(grid, crate::systems::GaborIndex::new(2, -3)).unwrap();
        assert_eq!(shifted_gaussian(grid, -3.0, 2.0).values(), atom.values());
    }
}
