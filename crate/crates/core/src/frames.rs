//! Finite-section frame diagnostics and the (ℓ^r, ℓ^s) coefficient
//! inequalities.
//!
//! For a finite system the optimal frame constants on its span are the extreme
//! eigenvalues of its Gram matrix. These are finite-section estimates: as the
//! section grows the lower bound can only drop and the upper can only rise.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::grid::{inner_product, Grid, SampledFunction};
use crate::moments::{concentration_reports, ConcentrationReport};
use crate::separation::{growth_certificate, Gram};
use crate::systems::{gabor_atom, GaborIndex};

const HERMITIAN_TOL: f64 = 1e-9;

/// Gram eigenvalues below this fraction of the largest are treated as zero.
const RANK_RTOL: f64 = 1e-9;

/// Coefficient sums at or below this fraction of `‖f‖` count as zero.
const ZERO_COEFF_RTOL: f64 = 1e-12;

/// Entry `(m, n)` is `⟨e_m, e_n⟩`.
pub fn gram_matrix(system: &[SampledFunction], exec: Execution) -> Result<Gram> {
    let k = system.len();
    if let Some(first) = system.first() {
        for f in system {
            first.grid().ensure_same(f.grid())?;
        }
    }
    let rows = exec.map_range(k, |m| {
        (m..k)
            .map(|n| inner_product(&system[m], &system[n]).expect("grids checked"))
            .collect::<Vec<_>>()
    });
    let mut gram = DMatrix::from_element(k, k, Complex64::new(0.0, 0.0));
    for (m, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let n = m + off;
            gram[(m, n)] = v;
            gram[(n, m)] = v.conj();
        }
    }
    Ok(gram)
}

fn ensure_hermitian(gram: &Gram) -> Result<()> {
    if !gram.is_square() {
        return Err(invalid("Gram matrix must be square"));
    }
    let k = gram.nrows();
    for i in 0..k {
        for j in i..k {
            if (gram[(i, j)] - gram[(j, i)].conj()).norm() > HERMITIAN_TOL {
                return Err(invalid(format!(
                    "Gram matrix is not hermitian at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// Extreme eigenvalues of the frame operator on the span of the section.
///
/// These are the extreme *nonzero* eigenvalues of the Gram matrix (the frame
/// operator and the Gram matrix share their nonzero spectrum). Eigenvalues
/// below `RANK_RTOL·λ_max` belong to the kernel of the synthesis map, which
/// only appears when elements are linearly dependent; that dependence is
/// visible in [`FrameDiagnostics::smallest_singular_value`].
pub fn frame_bounds_finite(gram: &Gram) -> Result<(f64, f64)> {
    ensure_hermitian(gram)?;
    if gram.nrows() == 0 {
        return Err(invalid("empty Gram matrix"));
    }
    let eig = SymmetricEigen::new(gram.clone());
    let hi = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if !(hi > 0.0) {
        return Err(invalid("Gram matrix has no positive eigenvalue"));
    }
    let lo = eig
        .eigenvalues
        .iter()
        .copied()
        .filter(|&l| l > RANK_RTOL * hi)
        .fold(f64::INFINITY, f64::min);
    Ok((lo, hi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameDiagnostics {
    #[serde(skip)]
    pub gram: Gram,
    pub lower_bound_est: f64,
    pub upper_bound_est: f64,
    pub smallest_singular_value: f64,
    pub section_size: usize,
}

pub fn frame_diagnostics_from_gram(gram: Gram) -> Result<FrameDiagnostics> {
    let (lower_bound_est, upper_bound_est) = frame_bounds_finite(&gram)?;
    let svd = gram.clone().svd(false, false);
    let smallest_singular_value = svd
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(FrameDiagnostics {
        section_size: gram.nrows(),
        gram,
        lower_bound_est,
        upper_bound_est,
        smallest_singular_value,
    })
}

pub fn frame_diagnostics(system: &[SampledFunction], exec: Execution) -> Result<FrameDiagnostics> {
    frame_diagnostics_from_gram(gram_matrix(system, exec)?)
}

/// Diagnostics of the leading sections of each requested size.
pub fn section_sweep(
    system: &[SampledFunction],
    sizes: &[usize],
    exec: Execution,
) -> Result<Vec<FrameDiagnostics>> {
    let gram = gram_matrix(system, exec)?;
    sizes
        .iter()
        .map(|&s| {
            if s == 0 || s > gram.nrows() {
                return Err(invalid(format!("section size {s} out of range")));
            }
            frame_diagnostics_from_gram(gram.view((0, 0), (s, s)).into_owned())
        })
        .collect()
}

/// Empirical constants of `B(Σ|⟨f,e_n⟩|^s)^{1/s} ≤ ‖f‖ ≤ C(Σ|⟨f,e_n⟩|^r)^{1/r}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RSCheck {
    pub r: f64,
    pub s: f64,
    /// Largest `B` valid on every test function.
    pub lower_const_est: f64,
    /// Smallest `C` valid on every test function; `+∞` when a test function
    /// has vanishing coefficients.
    pub upper_const_est: f64,
    /// Test functions whose coefficients all vanish (incompleteness witnesses).
    pub incomplete_witnesses: Vec<usize>,
}

fn lp_norm(coeffs: &[f64], exp: f64) -> f64 {
    coeffs
        .iter()
        .map(|c| c.powf(exp))
        .sum::<f64>()
        .powf(1.0 / exp)
}

pub fn rs_check(
    system: &[SampledFunction],
    test_functions: &[SampledFunction],
    r: f64,
    s: f64,
) -> Result<RSCheck> {
    if test_functions.is_empty() {
        return Err(invalid("rs_check needs at least one test function"));
    }
    if !(r > 0.0 && s > 0.0) {
        return Err(invalid("exponents r and s must be positive"));
    }
    let mut lower = f64::INFINITY;
    let mut upper: f64 = 0.0;
    let mut witnesses = Vec::new();
    for (i, f) in test_functions.iter().enumerate() {
        let coeffs = system
            .iter()
            .map(|e| inner_product(f, e).map(|c| c.norm()))
            .collect::<Result<Vec<_>>>()?;
        let norm = f.norm();
        let s_sum = lp_norm(&coeffs, s);
        let r_sum = lp_norm(&coeffs, r);
        if r_sum <= ZERO_COEFF_RTOL * norm {
            witnesses.push(i);
            continue;
        }
        lower = lower.min(norm / s_sum);
        upper = upper.max(norm / r_sum);
    }
    if !witnesses.is_empty() {
        upper = f64::INFINITY;
    }
    Ok(RSCheck {
        r,
        s,
        lower_const_est: if lower.is_finite() { lower } else { 0.0 },
        upper_const_est: upper,
        incomplete_witnesses: witnesses,
    })
}

/// Default test family: the system itself, `n_random` normalized random
/// combinations of its elements, and Gaussian atoms at `atoms`.
pub fn default_test_functions(
    system: &[SampledFunction],
    n_random: usize,
    atoms: &[GaborIndex],
    grid: Grid,
    seed: u64,
) -> Result<Vec<SampledFunction>> {
    let mut out: Vec<SampledFunction> = system.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if !system.is_empty() {
        for _ in 0..n_random {
            let mut acc = SampledFunction::zero(*system[0].grid());
            for e in system {
                let w = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
                acc = acc.combine(Complex64::new(1.0, 0.0), e, w)?;
            }
            out.push(acc.normalized()?);
        }
    }
    for &idx in atoms {
        out.push(gabor_atom(grid, idx)?);
    }
    Ok(out)
}

/// `Σ_{n≥1} (|N-A|^{p/2} + (cn)^{q/2})^{-r}`, summed to `n_max` with the
/// remainder bounded by an integral.
pub fn tail_sum(n_big: f64, a: f64, c: f64, p: f64, q: f64, r: f64, n_max: u64) -> Result<f64> {
    if !(q * r > 2.0) {
        return Err(Error::HypothesisViolation(format!(
            "q·r = {} must exceed 2 for the series to converge",
            q * r
        )));
    }
    if !(n_big > a) {
        return Err(invalid(format!("N = {n_big} must exceed A = {a}")));
    }
    if !(c > 0.0 && p > 1.0 && q > 1.0 && r > 0.0) || n_max == 0 {
        return Err(invalid("need c > 0, p, q > 1, r > 0 and n_max ≥ 1"));
    }
    let offset = (n_big - a).abs().powf(p / 2.0);
    let term = |x: f64| (offset + (c * x).powf(q / 2.0)).powf(-r);
    // smallest terms first
    let partial: f64 = (1..=n_max).rev().map(|n| term(n as f64)).sum();
    Ok(partial + tail_remainder_bound(offset, c, q, r, n_max as f64))
}

/// Upper bound on `∫_{n_max}^∞ (offset + (cx)^{q/2})^{-r} dx`: exact for
/// `q = 2`, otherwise the integral with `offset` dropped.
fn tail_remainder_bound(offset: f64, c: f64, q: f64, r: f64, n_max: f64) -> f64 {
    if q == 2.0 {
        (offset + c * n_max).powf(1.0 - r) / (c * (r - 1.0))
    } else {
        let e = q * r / 2.0;
        c.powf(-e) * n_max.powf(1.0 - e) / (e - 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementObstruction {
    pub index: usize,
    pub report: ConcentrationReport,
    /// `[|μ_p(e_n)| ≤ A, Δ_p(e_n) ≤ A, Δ_q(ê_n) ≤ A]`.
    pub premise_flags: [bool; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub elements: Vec<ElementObstruction>,
    pub growth_certificate: f64,
    pub bound: f64,
    pub qr_exceeds_two: bool,
    pub premises_hold_for_all: bool,
    /// Set when all premises hold, `q·r > 2`, and the system therefore cannot
    /// satisfy the (ℓ^r, ℓ^s) inequality on L²(ℝ).
    pub flag: bool,
    pub narrative: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rs_check: Option<RSCheck>,
}

pub struct ObstructionParams {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
    /// Common cap on the time mean and both dispersions.
    pub bound: f64,
}

pub fn obstruction_report(
    system: &[SampledFunction],
    params: &ObstructionParams,
    test_functions: Option<&[SampledFunction]>,
    exec: Execution,
) -> Result<ObstructionReport> {
    if system.is_empty() {
        return Err(invalid("empty system"));
    }
    let ObstructionParams { p, q, r, s, bound } = *params;
    let reports = concentration_reports(system, p, q, exec)?;
    let elements: Vec<ElementObstruction> = reports
        .into_iter()
        .enumerate()
        .map(|(index, report)| ElementObstruction {
            index,
            premise_flags: [
                report.time_mean.abs() <= bound,
                report.time_dispersion <= bound,
                report.freq_dispersion <= bound,
            ],
            report,
        })
        .collect();
    let freq_means: Vec<f64> = elements.iter().map(|e| e.report.freq_mean).collect();
    let growth = growth_certificate(&freq_means)?;
    let premises_hold_for_all = elements.iter().all(|e| e.premise_flags.iter().all(|&b| b));
    let qr_exceeds_two = q * r > 2.0;
    let flag = premises_hold_for_all && qr_exceeds_two;
    let failing = elements
        .iter()
        .filter(|e| !e.premise_flags.iter().all(|&b| b))
        .count();
    let narrative = if flag {
        format!(
            "all {} elements satisfy |time mean|, time dispersion, frequency dispersion <= {bound}; \
             with q*r = {} > 2 no such system satisfies the (l^{r}, l^{s}) coefficient inequality on L2(R): \
             it cannot be a Schauder basis (q*r > 2) nor a frame",
            elements.len(),
            q * r
        )
    } else if !premises_hold_for_all {
        format!(
            "{failing} of {} elements violate the concentration caps; no obstruction applies",
            elements.len()
        )
    } else {
        format!(
            "premises hold but q*r = {} <= 2; no obstruction applies",
            q * r
        )
    };
    let rs = test_functions
        .map(|tests| rs_check(system, tests, r, s))
        .transpose()?;
    Ok(ObstructionReport {
        elements,
        growth_certificate: growth,
        bound,
        qr_exceeds_two,
        premises_hold_for_all,
        flag,
        narrative,
        rs_check: rs,
    })
}
