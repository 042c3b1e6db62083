//! Generalized p-means and p-dispersions.
//!
//! For a unit-norm `h` and `p > 1` the objective `φ(a) = ∫ |t-a|^p |h(t)|² dt`
//! is strictly convex, so it has a unique minimizer, the p-mean `μ_p(h)`. The
//! p-dispersion is `Δ_p(h) = sqrt(φ(μ_p(h)))` (square root for every `p`).
//! The minimizer lies in the convex hull of the support of `h` and is found by
//! golden-section search there.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::grid::{fourier, SampledFunction};
use crate::minimize::golden_section_by;
use crate::quadrature::power_weight_defect;

/// Inputs are accepted as unit norm within this tolerance.
pub const UNIT_NORM_TOL: f64 = 1e-6;
/// Absolute tolerance of the p-mean in its argument.
pub const MEAN_TOL: f64 = 1e-10;
/// Samples with modulus at or below this value are outside the support hull.
pub const SUPPORT_FLOOR: f64 = 1e-14;
/// `√38/2 - 3`, the largest |α| for which the mean-deviation bound of the
/// perturbation argument is valid.
pub const STEP_TWO_ALPHA_MAX: f64 = 0.082_207_001_484_488_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub p: f64,
    pub q: f64,
    pub time_mean: f64,
    pub time_dispersion: f64,
    pub freq_mean: f64,
    pub freq_dispersion: f64,
    pub heisenberg_product: f64,
}

fn ensure_unit(h: &SampledFunction) -> Result<()> {
    if h.is_unit(UNIT_NORM_TOL) {
        Ok(())
    } else {
        Err(invalid(format!(
            "function must have unit L2 norm (got {})",
            h.norm()
        )))
    }
}

fn ensure_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::UnsupportedExponent(p))
    }
}

/// Quadrature value of `∫ |t-a|^p |h(t)|² dt`: the Riemann sum with its
/// leading error terms from the kink at `t = a` removed.
pub fn moment_objective(h: &SampledFunction, p: f64, a: f64) -> Result<f64> {
    ensure_unit(h)?;
    if !(p.is_finite() && p > 0.0) {
        return Err(invalid(format!("exponent p = {p} must be positive")));
    }
    if !a.is_finite() {
        return Err(invalid("evaluation point must be finite"));
    }
    let grid = h.grid();
    let dt = grid.spacing();
    let weights = h.densities();
    let sum: f64 = weights
        .iter()
        .enumerate()
        .map(|(k, w)| (grid.point(k) - a).abs().powf(p) * w)
        .sum();
    let defect = power_weight_defect(&weights, grid.point(0), dt, p, a);
    Ok((sum * dt - defect).max(0.0))
}

/// Weighted sample points restricted to the support hull of `h`.
struct Density {
    points: Vec<f64>,
    weights: Vec<f64>,
    dt: f64,
}

impl Density {
    fn of(h: &SampledFunction) -> Option<Self> {
        let vals = h.values();
        let first = vals.iter().position(|v| v.norm() > SUPPORT_FLOOR)?;
        let last = vals.iter().rposition(|v| v.norm() > SUPPORT_FLOOR)?;
        let grid = h.grid();
        let points = (first..=last).map(|k| grid.point(k)).collect();
        let weights = vals[first..=last].iter().map(|v| v.norm_sqr()).collect();
        Some(Density {
            points,
            weights,
            dt: grid.spacing(),
        })
    }

    fn hull(&self) -> (f64, f64) {
        (self.points[0], *self.points.last().unwrap())
    }

    /// `φ(a) - φ(b)` up to the common factor `dt`, summed term by term as
    /// `|t-a|^p - |t-b|^p` in a cancellation-free form.
    fn objective_difference(&self, p: f64, a: f64, b: f64) -> f64 {
        let defect = |x: f64| power_weight_defect(&self.weights, self.points[0], self.dt, p, x);
        self.raw_difference(p, a, b) - (defect(a) - defect(b)) / self.dt
    }

    fn raw_difference(&self, p: f64, a: f64, b: f64) -> f64 {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let ba = b - a;
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| {
                let u = (t - a).abs();
                let v = (t - b).abs();
                let d = if t >= hi {
                    ba
                } else if t <= lo {
                    -ba
                } else {
                    u - v
                };
                w * power_difference(u, v, d, p)
            })
            .sum()
    }
}

/// `u^p - v^p` given `d = u - v` computed without cancellation.
#[inline]
fn power_difference(u: f64, v: f64, d: f64, p: f64) -> f64 {
    if p == 2.0 {
        return d * (u + v);
    }
    if v == 0.0 {
        return u.powf(p);
    }
    v.powf(p) * (p * (d / v).ln_1p()).exp_m1()
}

/// The unique minimizer of [`moment_objective`] for `p > 1`.
pub fn p_mean(h: &SampledFunction, p: f64) -> Result<f64> {
    ensure_unit(h)?;
    ensure_exponent(p)?;
    let density = Density::of(h).ok_or_else(|| invalid("function has empty support"))?;
    let (lo, hi) = density.hull();
    Ok(golden_section_by(lo, hi, MEAN_TOL, |x, y| {
        density.objective_difference(p, x, y)
    }))
}

/// `sqrt(min_a φ(a))`, returned together with the minimizer.
pub fn mean_and_dispersion(h: &SampledFunction, p: f64) -> Result<(f64, f64)> {
    let mean = p_mean(h, p)?;
    let value = moment_objective(h, p, mean)?;
    Ok((mean, value.sqrt()))
}

pub fn p_dispersion(h: &SampledFunction, p: f64) -> Result<f64> {
    mean_and_dispersion(h, p).map(|(_, d)| d)
}

/// Ordinary mean `∫ t|h|²` and standard deviation; these coincide with the
/// p = 2 mean and dispersion.
pub fn second_order_moments(h: &SampledFunction) -> Result<(f64, f64)> {
    ensure_unit(h)?;
    let grid = h.grid();
    let dt = grid.spacing();
    let dens = h.densities();
    let mass: f64 = dens.iter().sum::<f64>() * dt;
    let mean = grid.points().zip(&dens).map(|(t, w)| t * w).sum::<f64>() * dt / mass;
    let var = grid
        .points()
        .zip(&dens)
        .map(|(t, w)| (t - mean).powi(2) * w)
        .sum::<f64>()
        * dt;
    Ok((mean, var.sqrt()))
}

/// Time and frequency concentration of `f` with exponents `p` (time) and `q`
/// (frequency).
pub fn concentration_report(f: &SampledFunction, p: f64, q: f64) -> Result<ConcentrationReport> {
    ensure_unit(f)?;
    ensure_exponent(p)?;
    ensure_exponent(q)?;
    let fh = fourier(f);
    report_with_transform(f, &fh, p, q)
}

pub(crate) fn report_with_transform(
    f: &SampledFunction,
    fh: &SampledFunction,
    p: f64,
    q: f64,
) -> Result<ConcentrationReport> {
    let (time_mean, time_dispersion) = mean_and_dispersion(f, p)?;
    let (freq_mean, freq_dispersion) = mean_and_dispersion(fh, q)?;
    Ok(ConcentrationReport {
        p,
        q,
        time_mean,
        time_dispersion,
        freq_mean,
        freq_dispersion,
        heisenberg_product: time_dispersion * freq_dispersion,
    })
}

/// Reports for every element, in order.
pub fn concentration_reports(
    system: &[SampledFunction],
    p: f64,
    q: f64,
    exec: Execution,
) -> Result<Vec<ConcentrationReport>> {
    exec.try_map_slice(system, |f| concentration_report(f, p, q))
}

/// Mean-deviation certificate `|μ_p(h_α) - μ_p(f)| ≤ 2(4Δ_p(f)²)^{1/p}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepTwoCertificate {
    pub bound: f64,
    pub deviation: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeEntry {
    pub alpha: f64,
    pub report: ConcentrationReport,
    /// Present only for `|α| ≤ √38/2 - 3`.
    pub step_two: Option<StepTwoCertificate>,
}

/// Concentration of `h_α = (f + αg)/‖f + αg‖₂` for each `α`, with the
/// mean-deviation certificate wherever it applies.
pub fn convergence_probe(
    f: &SampledFunction,
    g: &SampledFunction,
    alphas: &[f64],
    p: f64,
    q: f64,
    exec: Execution,
) -> Result<Vec<ProbeEntry>> {
    ensure_unit(f)?;
    ensure_unit(g)?;
    if let Some(a) = alphas.iter().find(|a| !(a.abs() < 1.0)) {
        return Err(invalid(format!("|alpha| must be below 1, got {a}")));
    }
    let base = concentration_report(f, p, q)?;
    let bound = 2.0 * (4.0 * base.time_dispersion.powi(2)).powf(1.0 / p);
    exec.try_map_slice(alphas, |&alpha| {
        let report = if alpha == 0.0 {
            base
        } else {
            let h = f
                .combine(Complex64::new(1.0, 0.0), g, Complex64::new(alpha, 0.0))?
                .normalized()?;
            concentration_report(&h, p, q)?
        };
        let step_two = (alpha.abs() <= STEP_TWO_ALPHA_MAX).then(|| {
            let deviation = (report.time_mean - base.time_mean).abs();
            StepTwoCertificate {
                bound,
                deviation,
                holds: deviation <= bound,
            }
        });
        Ok(ProbeEntry {
            alpha,
            report,
            step_two,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, Grid, StepFunction};
    use std::f64::consts::PI;

    fn grid() -> Grid {
        make_grid(32.0, 4096).unwrap()
    }

    fn gaussian_at(grid: Grid, s: f64) -> SampledFunction {
        SampledFunction::sample_real(grid, |t| 2f64.powf(0.25) * (-PI * (t - s).powi(2)).exp())
            .unwrap()
    }

    #[test]
    fn step_two_threshold_value() {
        assert!((STEP_TWO_ALPHA_MAX - (38f64.sqrt() / 2.0 - 3.0)).abs() < 1e-15);
    }

    #[test]
    fn gaussian_second_moment() {
        let g = gaussian_at(grid(), 0.0);
        let v = moment_objective(&g, 2.0, 0.0).unwrap();
        assert!((v - 1.0 / (4.0 * PI)).abs() < 1e-7);
    }

    #[test]
    fn flat_minimum_for_p_one() {
        let h = StepFunction::new(vec![(-2.0, -1.0, 0.5f64.sqrt()), (1.0, 2.0, 0.5f64.sqrt())])
            .unwrap()
            .sample(grid())
            .unwrap();
        for a in [-1.0, -0.5, 0.0, 0.5, 1.0] {
            let v = moment_objective(&h, 1.0, a).unwrap();
            assert!((v - 1.5).abs() < 1e-3, "a = {a}: {v}");
        }
        assert!(matches!(
            p_mean(&h, 1.0),
            Err(Error::UnsupportedExponent(_))
        ));
        assert!(matches!(
            p_dispersion(&h, 0.5),
            Err(Error::UnsupportedExponent(_))
        ));
    }

    #[test]
    fn indicator_moments() {
        let chi = StepFunction::indicator(-0.5, 0.5)
            .unwrap()
            .sample(grid())
            .unwrap();
        let v = moment_objective(&chi, 2.0, 0.0).unwrap();
        assert!((v - 1.0 / 12.0).abs() < 1e-4);
        assert!(p_mean(&chi, 2.0).unwrap().abs() < 1e-8);

        let chi01 = StepFunction::indicator(0.0, 1.0)
            .unwrap()
            .sample(grid())
            .unwrap();
        let d = p_dispersion(&chi01, 2.0).unwrap();
        assert!((d - 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-4);
    }

    #[test]
    fn non_unit_input_rejected() {
        let g = gaussian_at(grid(), 0.0).scaled(Complex64::new(2.0, 0.0));
        assert!(matches!(
            moment_objective(&g, 2.0, 0.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(p_mean(&g, 2.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn translated_gaussian_mean() {
        let g5 = gaussian_at(grid(), 5.0);
        assert!((p_mean(&g5, 3.0).unwrap() - 5.0).abs() < 1e-7);
    }

    #[test]
    fn far_bump_drags_the_mean() {
        let grid = make_grid(64.0, 8192).unwrap();
        let s: f64 = 0.5;
        let far = s.powi(-4);
        let psi = StepFunction::new(vec![
            (-0.5, 0.5, (1.0 - s).sqrt()),
            (far, far + 1.0, s.sqrt()),
        ])
        .unwrap()
        .sample(grid)
        .unwrap();
        let m = p_mean(&psi, 2.0).unwrap();
        assert!((m - (s.powi(-3) + s / 2.0)).abs() < 1e-3, "{m}");
    }

    #[test]
    fn gaussian_report() {
        let r = concentration_report(&gaussian_at(grid(), 0.0), 2.0, 2.0).unwrap();
        let d = 1.0 / (2.0 * PI.sqrt());
        assert!(r.time_mean.abs() < 1e-6 && r.freq_mean.abs() < 1e-6);
        assert!((r.time_dispersion - d).abs() < 1e-6);
        assert!((r.freq_dispersion - d).abs() < 1e-6);
        assert!((r.heisenberg_product - 1.0 / (4.0 * PI)).abs() < 1e-6);
    }

    #[test]
    fn modulation_moves_frequency_mean_only() {
        let f = gaussian_at(grid(), 0.3).modulated(1.25);
        let r = concentration_report(&f, 2.0, 3.0).unwrap();
        let r2 = concentration_report(&f.modulated(-7.0), 2.0, 3.0).unwrap();
        assert!((r2.freq_mean - (r.freq_mean - 7.0)).abs() < 1e-6);
        assert!((r2.time_mean - r.time_mean).abs() < 1e-9);
        assert!((r2.time_dispersion - r.time_dispersion).abs() < 1e-9);
        assert!((r2.freq_dispersion - r.freq_dispersion).abs() < 1e-6);
    }

    #[test]
    fn second_order_closed_form_agrees() {
        let f = gaussian_at(grid(), 0.0)
            .combine(
                Complex64::new(1.0, 0.0),
                &gaussian_at(grid(), 1.3),
                Complex64::new(0.0, 0.7),
            )
            .unwrap()
            .normalized()
            .unwrap();
        let (m, d) = second_order_moments(&f).unwrap();
        let (m2, d2) = mean_and_dispersion(&f, 2.0).unwrap();
        assert!((m - m2).abs() < 1e-8);
        assert!((d - d2).abs() < 1e-8);
    }

    #[test]
    fn probe_rejects_large_alpha_and_is_exact_at_zero() {
        let f = gaussian_at(grid(), 0.0);
        let g = gaussian_at(grid(), 1.0);
        assert!(convergence_probe(&f, &g, &[0.5, 1.0], 2.0, 2.0, Execution::Sequential).is_err());
        let probe = convergence_probe(&f, &g, &[0.0], 2.0, 2.0, Execution::Sequential).unwrap();
        assert_eq!(probe[0].report, concentration_report(&f, 2.0, 2.0).unwrap());
    }

    #[test]
    fn probe_step_two_bound() {
        let f = gaussian_at(grid(), 0.0);
        let g = gaussian_at(grid(), 1.0);
        let probe =
            convergence_probe(&f, &g, &[0.05, 0.1], 2.0, 2.0, Execution::default()).unwrap();
        let cert = probe[0].step_two.unwrap();
        assert!((cert.bound - 2.0 * (1.0 / PI).sqrt()).abs() < 1e-6);
        assert!(cert.holds && cert.deviation <= 1.128);
        assert!(probe[1].step_two.is_none());
    }
}
