//! Coherence counts, well-separated subsets and covering-number bounds for
//! unit-norm systems, plus the inner-product decay bound and the
//! frequency-mean growth certificate.
//!
//! Two unit vectors are *separated* when `|⟨e_m, e_n⟩| < 1/2`. If no element
//! correlates at level `≥ 1/2` with `D` or more elements (itself included),
//! a greedy scan keeps at least `(k-1)/(⌈D⌉+1)` mutually separated elements
//! out of `k`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exec::Execution;
use crate::grid::{l2_distance, SampledFunction};
use crate::moments::ConcentrationReport;

/// Hermitian matrix of pairwise inner products.
pub type Gram = DMatrix<Complex64>;

/// Correlation level at or above which two elements are "close".
pub const THRESHOLD: f64 = 0.5;

const DIAGONAL_TOL: f64 = 1e-6;

/// Exhaustive search is limited to this many elements.
pub const EXHAUSTIVE_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationResult {
    /// Indices kept, in scan order.
    pub selected: Vec<usize>,
    pub threshold: f64,
    pub d_count: f64,
    /// `⌈(k-1)/(⌈D⌉+1)⌉`.
    pub guarantee: usize,
    /// False when some element has coherence count `≥ D`; the cardinality
    /// guarantee is then not promised.
    pub hypothesis_holds: bool,
}

fn ensure_unit_diagonal(gram: &Gram) -> Result<()> {
    if !gram.is_square() {
        return Err(invalid("Gram matrix must be square"));
    }
    for i in 0..gram.nrows() {
        let d = gram[(i, i)];
        if (d.re - 1.0).abs() > DIAGONAL_TOL || d.im.abs() > DIAGONAL_TOL {
            return Err(invalid(format!(
                "Gram diagonal entry {i} is {d}, expected 1"
            )));
        }
    }
    Ok(())
}

/// Number of `n` (including `m`) with `|gram(n, m)| ≥ 1/2`.
pub fn coherence_count(gram: &Gram, m: usize) -> Result<usize> {
    ensure_unit_diagonal(gram)?;
    if m >= gram.nrows() {
        return Err(invalid(format!("row {m} out of range")));
    }
    Ok(row_count(gram, m))
}

fn row_count(gram: &Gram, m: usize) -> usize {
    (0..gram.nrows())
        .filter(|&n| gram[(n, m)].norm() >= THRESHOLD)
        .count()
}

pub fn coherence_counts(gram: &Gram, exec: Execution) -> Result<Vec<usize>> {
    ensure_unit_diagonal(gram)?;
    Ok(exec.map_range(gram.nrows(), |m| row_count(gram, m)))
}

/// `D = 2^s C^s + 1`, the Chebyshev-inequality coherence bound.
pub fn tchebyshev_d(c: f64, s: f64) -> Result<f64> {
    if !(c > 0.0 && s > 0.0) {
        return Err(invalid("C and s must be positive"));
    }
    Ok((2.0 * c).powf(s) + 1.0)
}

pub fn separation_guarantee(k: usize, d: f64) -> usize {
    if k == 0 {
        return 0;
    }
    let denom = d.ceil() as usize + 1;
    (k - 1).div_ceil(denom)
}

/// Scans indices in order, keeping the first unprocessed index and discarding
/// every later index correlated with it at level `≥ 1/2`.
pub fn greedy_separated_subset(gram: &Gram, d: f64) -> Result<SeparationResult> {
    ensure_unit_diagonal(gram)?;
    if !(d > 0.0) {
        return Err(invalid("D must be positive"));
    }
    let k = gram.nrows();
    let hypothesis_holds = (0..k).all(|m| (row_count(gram, m) as f64) < d);
    let mut discarded = vec![false; k];
    let mut selected = Vec::new();
    for i in 0..k {
        if discarded[i] {
            continue;
        }
        selected.push(i);
        for j in i + 1..k {
            if gram[(i, j)].norm() >= THRESHOLD {
                discarded[j] = true;
            }
        }
    }
    Ok(SeparationResult {
        selected,
        threshold: THRESHOLD,
        d_count: d,
        guarantee: separation_guarantee(k, d),
        hypothesis_holds,
    })
}

/// True when every pair of distinct `indices` is separated.
pub fn is_separated(gram: &Gram, indices: &[usize]) -> bool {
    indices.iter().enumerate().all(|(a, &i)| {
        indices[a + 1..]
            .iter()
            .all(|&j| gram[(i, j)].norm() < THRESHOLD)
    })
}

/// Largest separated subset by exhaustive enumeration (k ≤ 20).
pub fn max_separated_subset_exhaustive(gram: &Gram) -> Result<Vec<usize>> {
    ensure_unit_diagonal(gram)?;
    let k = gram.nrows();
    if k > EXHAUSTIVE_LIMIT {
        return Err(invalid(format!(
            "exhaustive search limited to {EXHAUSTIVE_LIMIT} elements, got {k}"
        )));
    }
    let mut conflicts = vec![0u32; k];
    for i in 0..k {
        for j in 0..k {
            if i != j && gram[(i, j)].norm() >= THRESHOLD {
                conflicts[i] |= 1 << j;
            }
        }
    }
    let mut best = 0u32;
    for mask in 0u32..(1u32 << k) {
        if mask.count_ones() <= best.count_ones() {
            continue;
        }
        let ok = (0..k).all(|i| mask & (1 << i) == 0 || conflicts[i] & mask == 0);
        if ok {
            best = mask;
        }
    }
    Ok((0..k).filter(|i| best & (1 << i) != 0).collect())
}

/// `N = M(⌈D⌉+1) + 1`.
pub fn covering_number_bound(m: usize, d: f64) -> Result<usize> {
    if m == 0 || !(d > 0.0) {
        return Err(invalid("M must be at least 1 and D positive"));
    }
    Ok(m * (d.ceil() as usize + 1) + 1)
}

/// Greedy 1/2-net: keeps a point when it is at distance `≥ 1/2` from every
/// point kept so far. The balls of radius 1/2 around the kept points cover the
/// input.
pub fn greedy_half_net(points: &[SampledFunction]) -> Result<Vec<usize>> {
    let mut kept: Vec<usize> = Vec::new();
    for (i, f) in points.iter().enumerate() {
        let mut far = true;
        for &j in &kept {
            if l2_distance(f, &points[j])? < THRESHOLD {
                far = false;
                break;
            }
        }
        if far {
            kept.push(i);
        }
    }
    Ok(kept)
}

/// Upper bound on `|⟨f, g⟩|` from the concentration of `f` and `g`:
///
/// `[2^{p/2}(Δ_p(f)+Δ_p(g)) + 2^{q/2}(Δ_q(f̂)+Δ_q(ĝ))] /
///  [|μ_p(f)-μ_p(g)|^{p/2} + |μ_q(f̂)-μ_q(ĝ)|^{q/2}]`.
///
/// Returns `+∞` when both means coincide (the bound is vacuous).
pub fn inner_product_bound(rf: &ConcentrationReport, rg: &ConcentrationReport) -> Result<f64> {
    if rf.p != rg.p || rf.q != rg.q {
        return Err(invalid("reports must share the same exponents"));
    }
    let (p, q) = (rf.p, rf.q);
    let numer = 2f64.powf(p / 2.0) * (rf.time_dispersion + rg.time_dispersion)
        + 2f64.powf(q / 2.0) * (rf.freq_dispersion + rg.freq_dispersion);
    let denom = (rf.time_mean - rg.time_mean).abs().powf(p / 2.0)
        + (rf.freq_mean - rg.freq_mean).abs().powf(q / 2.0);
    if denom == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(numer / denom)
}

/// `c* = min_n |x_n| / n` over the 1-based positions of `freq_means`.
pub fn growth_certificate(freq_means: &[f64]) -> Result<f64> {
    if freq_means.is_empty() {
        return Err(invalid("growth certificate needs at least one mean"));
    }
    Ok(freq_means
        .iter()
        .enumerate()
        .map(|(i, x)| x.abs() / (i + 1) as f64)
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::gram_matrix;
    use crate::grid::make_grid;
    use crate::moments::concentration_report;
    use crate::systems::{enumerate_exact_g0, gabor_atom, gaussian, materialize};
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_counts() {
        let id = Gram::identity(6, 6);
        for m in 0..6 {
            assert_eq!(coherence_count(&id, m).unwrap(), 1);
        }
        let r = greedy_separated_subset(&Gram::identity(5, 5), 2.0).unwrap();
        assert_eq!(r.selected.len(), 5);
        assert_eq!(r.guarantee, 2);
        assert!(r.hypothesis_holds);
    }

    #[test]
    fn duplicates_count_twice() {
        let mut g = Gram::identity(4, 4);
        g[(0, 3)] = c(1.0);
        g[(3, 0)] = c(1.0);
        assert_eq!(coherence_count(&g, 0).unwrap(), 2);
        assert_eq!(coherence_count(&g, 3).unwrap(), 2);
        assert_eq!(coherence_count(&g, 1).unwrap(), 1);
        let r = greedy_separated_subset(&g, 2.0).unwrap();
        assert!(!r.hypothesis_holds);
        assert_eq!(r.selected, vec![0, 1, 2]);
        let r = greedy_separated_subset(&g, 3.0).unwrap();
        assert!(r.hypothesis_holds);
    }

    #[test]
    fn non_unit_diagonal_rejected() {
        let g = Gram::identity(3, 3) * c(2.0);
        assert!(coherence_count(&g, 0).is_err());
        assert!(greedy_separated_subset(&g, 2.0).is_err());
    }

    #[test]
    fn ten_elements_guarantee() {
        let mut g = Gram::identity(10, 10);
        for i in 0..9 {
            g[(i, i + 1)] = c(0.3);
            g[(i + 1, i)] = c(0.3);
        }
        let r = greedy_separated_subset(&g, 2.0).unwrap();
        assert_eq!(r.guarantee, 3);
        assert!(r.selected.len() >= 3);
    }

    #[test]
    fn chebyshev_and_covering_formulas() {
        assert_eq!(tchebyshev_d(1.0, 2.0).unwrap(), 5.0);
        assert_eq!(tchebyshev_d(1.0, 1.0).unwrap(), 3.0);
        assert_eq!(tchebyshev_d(2.0, 2.0).unwrap(), 17.0);
        assert_eq!(covering_number_bound(7, 2.0).unwrap(), 22);
        assert_eq!(covering_number_bound(1, 1.0).unwrap(), 3);
        assert_eq!(covering_number_bound(10, 4.5).unwrap(), 61);
        assert!(covering_number_bound(0, 1.0).is_err());
    }

    #[test]
    fn g0_truncations_are_separated() {
        let grid = make_grid(32.0, 4096).unwrap();
        let sys = materialize(&enumerate_exact_g0(30), grid, Execution::default()).unwrap();
        let gram = gram_matrix(&sys, Execution::default()).unwrap();
        let counts = coherence_counts(&gram, Execution::default()).unwrap();
        assert!(counts.iter().all(|&n| n == 1));
        let r = greedy_separated_subset(&gram, 2.0).unwrap();
        assert_eq!(r.selected, (0..30).collect::<Vec<_>>());
    }

    #[test]
    fn half_nets() {
        let grid = make_grid(32.0, 4096).unwrap();
        let g = gaussian(grid);
        let same = vec![g.clone(); 10];
        assert_eq!(greedy_half_net(&same).unwrap(), vec![0]);

        let shifts: Vec<SampledFunction> = (0..10)
            .map(|j| {
                let s = j as f64 / 10.0;
                SampledFunction::sample_real(grid, |t| {
                    2f64.powf(0.25) * (-PI * (t - s).powi(2)).exp()
                })
                .unwrap()
            })
            .collect();
        // ‖g - g(·-s)‖² = 2 - 2e^{-πs²/2} < 1/4 exactly when s < 0.2906
        assert_eq!(greedy_half_net(&shifts).unwrap(), vec![0, 3, 6, 9]);

        let a = gabor_atom(grid, crate::systems::GaborIndex::new(0, 0)).unwrap();
        let b = StepOrthogonal::build(&a);
        assert_eq!(greedy_half_net(&[a, b]).unwrap(), vec![0, 1]);
    }

    // Odd function orthogonal to the Gaussian.
    struct StepOrthogonal;
    impl StepOrthogonal {
        fn build(g: &SampledFunction) -> SampledFunction {
            let grid = *g.grid();
            SampledFunction::sample_real(grid, |t| t * (-PI * t * t).exp())
                .unwrap()
                .normalized()
                .unwrap()
        }
    }

    #[test]
    fn inner_product_bound_values() {
        let grid = make_grid(32.0, 4096).unwrap();
        let g = gaussian(grid);
        let g4 = gabor_atom(grid, crate::systems::GaborIndex::new(0, 4)).unwrap();
        let rf = concentration_report(&g, 2.0, 2.0).unwrap();
        let rg = concentration_report(&g4, 2.0, 2.0).unwrap();
        let b = inner_product_bound(&rf, &rg).unwrap();
        assert!((b - 0.564190).abs() < 1e-5, "{b}");

        let g50 = gabor_atom(grid, crate::systems::GaborIndex::new(5, 0)).unwrap();
        let rm = concentration_report(&g50, 2.0, 2.0).unwrap();
        let b = inner_product_bound(&rf, &rm).unwrap();
        assert!((b - 4.0 * 2.0 * 0.2820948 / 5.0).abs() < 1e-5);
        assert!((b - 0.451).abs() < 1e-3);

        assert_eq!(inner_product_bound(&rf, &rf).unwrap(), f64::INFINITY);
        let r3 = concentration_report(&g, 3.0, 2.0).unwrap();
        assert!(inner_product_bound(&rf, &r3).is_err());
    }

    #[test]
    fn growth() {
        assert_eq!(growth_certificate(&[1.0, 2.0, 3.0, 4.0]).unwrap(), 1.0);
        assert_eq!(growth_certificate(&[1.0, 2.1, 3.05, 4.5]).unwrap(), 1.0);
        assert_eq!(growth_certificate(&[0.5, 2.0, 3.0]).unwrap(), 0.5);
        assert_eq!(growth_certificate(&[-2.0, -4.0]).unwrap(), 2.0);
        assert!(growth_certificate(&[]).is_err());
    }

    #[test]
    fn exhaustive_matches_small_cases() {
        let mut g = Gram::identity(4, 4);
        g[(0, 1)] = c(0.9);
        g[(1, 0)] = c(0.9);
        assert_eq!(max_separated_subset_exhaustive(&g).unwrap().len(), 3);
        assert!(max_separated_subset_exhaustive(&Gram::identity(21, 21)).is_err());
    }
}
