//! Kolmogorov–Riesz diagnostics for finite families in L²(ℝ): the shift
//! modulus `ω(a) = max_f ∫|f(t+a) - f(t)|² dt`, the decay modulus
//! `ρ(R) = max_f ∫_{|t|≥R} |f|²`, its counterpart on the transformed family,
//! and membership tests for the sets bounded by concentration caps or by
//! pointwise envelopes.
//!
//! Shifts are circular on the periodic grid, so the diagnostics are only
//! meaningful for families with negligible mass at the window edge.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exec::Execution;
use crate::grid::{fourier, l2_distance, tail_mass, SampledFunction};
use crate::moments::ConcentrationReport;
use crate::systems::EnvelopePair;

/// Edge mass above which circular shifts visibly wrap around.
pub const EDGE_MASS_WARN: f64 = 1e-9;

const ENVELOPE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactnessProfile {
    pub shift_modulus: Vec<[f64; 2]>,
    pub decay_modulus: Vec<[f64; 2]>,
    pub dual_decay_modulus: Vec<[f64; 2]>,
}

fn max_reduce(values: Vec<Vec<f64>>, len: usize) -> Vec<f64> {
    let mut out = vec![0.0f64; len];
    for row in values {
        for (o, v) in out.iter_mut().zip(row) {
            *o = o.max(v);
        }
    }
    out
}

/// Per shift `a` (a multiple of the grid spacing), `max_f ‖f(·+a) - f‖₂²`.
pub fn equicontinuity_modulus(
    family: &[SampledFunction],
    shifts: &[f64],
    exec: Execution,
) -> Result<Vec<[f64; 2]>> {
    let first = family.first().ok_or_else(|| invalid("empty family"))?;
    let grid = *first.grid();
    let steps = shifts
        .iter()
        .map(|&a| {
            grid.aligned_steps(a)
                .ok_or_else(|| invalid(format!("shift {a} is not a multiple of the grid spacing")))
        })
        .collect::<Result<Vec<i64>>>()?;
    for f in family {
        grid.ensure_same(f.grid())?;
    }
    let per_member = exec.map_slice(family, |f| {
        steps
            .iter()
            .map(|&s| {
                // f(t + a) is the sample s places ahead
                let moved = f.circular_shift(-s);
                l2_distance(&moved, f).expect("same grid").powi(2)
            })
            .collect::<Vec<_>>()
    });
    let maxima = max_reduce(per_member, shifts.len());
    Ok(shifts.iter().zip(maxima).map(|(&a, w)| [a, w]).collect())
}

/// Per radius, `max_f tail_mass(f, R)`.
pub fn decay_modulus(
    family: &[SampledFunction],
    radii: &[f64],
    exec: Execution,
) -> Result<Vec<[f64; 2]>> {
    if family.is_empty() {
        return Err(invalid("empty family"));
    }
    let per_member = exec.try_map_slice(family, |f| {
        radii
            .iter()
            .map(|&r| tail_mass(f, r))
            .collect::<Result<Vec<_>>>()
    })?;
    let maxima = max_reduce(per_member, radii.len());
    Ok(radii.iter().zip(maxima).map(|(&r, v)| [r, v]).collect())
}

/// Members whose mass beyond 95% of the half-window exceeds [`EDGE_MASS_WARN`].
pub fn edge_mass_warnings(family: &[SampledFunction]) -> Vec<usize> {
    family
        .iter()
        .enumerate()
        .filter(|(_, f)| {
            let r = 0.475 * f.grid().extent();
            tail_mass(f, r).map(|m| m > EDGE_MASS_WARN).unwrap_or(true)
        })
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityRow {
    pub shift: f64,
    pub radius: f64,
    pub shift_modulus: f64,
    pub dual_decay: f64,
    /// `4ρ̂(R) + (2πaR)²·max‖f‖²`; diagnostic only.
    pub heuristic_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub profile: CompactnessProfile,
    pub rows: Vec<DualityRow>,
    /// Members with noticeable mass at the window edge (time or frequency).
    pub edge_warnings: Vec<usize>,
}

/// Shift modulus of the family next to the decay modulus of its transforms.
///
/// The `heuristic_bound` column follows from
/// `|e^{2πiaξ} - 1|² ≤ min(4, (2πaξ)²)` split at `|ξ| = R`; it is reported
/// for inspection, not asserted.
pub fn duality_check(
    family: &[SampledFunction],
    shifts: &[f64],
    radii: &[f64],
    exec: Execution,
) -> Result<DualityReport> {
    let transformed: Vec<SampledFunction> = exec.map_slice(family, fourier);
    let shift_modulus = equicontinuity_modulus(family, shifts, exec)?;
    let decay = decay_modulus(family, radii, exec)?;
    let dual_decay_modulus = decay_modulus(&transformed, radii, exec)?;
    let max_norm_sq = family.iter().map(|f| f.norm().powi(2)).fold(0.0, f64::max);
    let mut rows = Vec::new();
    for &[a, w] in &shift_modulus {
        for &[r, rho] in &dual_decay_modulus {
            rows.push(DualityRow {
                shift: a,
                radius: r,
                shift_modulus: w,
                dual_decay: rho,
                heuristic_bound: 4.0 * rho + (2.0 * PI * a * r).powi(2) * max_norm_sq,
            });
        }
    }
    let mut edge_warnings = edge_mass_warnings(family);
    for i in edge_mass_warnings(&transformed) {
        if !edge_warnings.contains(&i) {
            edge_warnings.push(i);
        }
    }
    edge_warnings.sort_unstable();
    Ok(DualityReport {
        profile: CompactnessProfile {
            shift_modulus,
            decay_modulus: decay,
            dual_decay_modulus,
        },
        rows,
        edge_warnings,
    })
}

/// All four concentration values bounded by `a` in magnitude.
pub fn kaq_membership(report: &ConcentrationReport, a: f64) -> bool {
    report.time_mean.abs() <= a
        && report.time_dispersion.abs() <= a
        && report.freq_mean.abs() <= a
        && report.freq_dispersion.abs() <= a
}

/// `|f| ≤ φ` and `|f̂| ≤ ψ` at every sample, with slack 1e-9.
pub fn envelope_membership(f: &SampledFunction, pair: &EnvelopePair) -> Result<bool> {
    pair.time_grid.ensure_same(f.grid())?;
    let fh = fourier(f);
    let time_ok = f
        .values()
        .iter()
        .zip(&pair.time_envelope)
        .all(|(v, e)| v.norm() <= e + ENVELOPE_SLACK);
    let freq_ok = fh
        .values()
        .iter()
        .zip(&pair.freq_envelope)
        .all(|(v, e)| v.norm() <= e + ENVELOPE_SLACK);
    Ok(time_ok && freq_ok)
}

/// Uniform tail bound `2^p A² / R^p` for the concentration-capped set, valid
/// for `R > 2A`.
pub fn kaq_tail_bound(a: f64, p: f64, r: f64) -> Result<f64> {
    if !(a > 0.0 && p > 1.0) {
        return Err(invalid("need A > 0 and p > 1"));
    }
    if !(r > 2.0 * a) {
        return Err(invalid(format!("radius {r} must exceed 2A = {}", 2.0 * a)));
    }
    Ok(2f64.powf(p) * a * a / r.powf(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, Grid, StepFunction};
    use crate::moments::concentration_report;
    use crate::systems::{build_perturbed_exact, envelopes, gabor_atom, gaussian, GaborIndex};
    use num_complex::Complex64;

    fn grid() -> Grid {
        make_grid(32.0, 4096).unwrap()
    }

    #[test]
    fn indicator_shift_modulus() {
        // extent 25.6 makes a = 0.1 a whole number of samples
        let grid = make_grid(25.6, 4096).unwrap();
        let chi = StepFunction::indicator(0.0, 1.0)
            .unwrap()
            .sample(grid)
            .unwrap();
        let w = equicontinuity_modulus(&[chi], &[0.1, 0.0], Execution::Sequential).unwrap();
        assert!((w[0][1] - 0.2).abs() <= 2.0 * grid.spacing());
        assert_eq!(w[1][1], 0.0);
    }

    #[test]
    fn gaussian_shift_modulus() {
        let w =
            equicontinuity_modulus(&[gaussian(grid())], &[0.25], Execution::Sequential).unwrap();
        let expected = 2.0 * (1.0 - (-PI * 0.0625 / 2.0).exp());
        assert!((w[0][1] - expected).abs() < 1e-4);
        assert!((w[0][1] - 0.187019).abs() < 1e-5);
    }

    #[test]
    fn misaligned_shift_rejected() {
        assert!(
            equicontinuity_modulus(&[gaussian(grid())], &[0.1], Execution::Sequential).is_err()
        );
    }

    #[test]
    fn decay_cases() {
        let g = gaussian(grid());
        let d = decay_modulus(std::slice::from_ref(&g), &[2.0], Execution::Sequential).unwrap();
        assert!(d[0][1] <= 1e-11);
        let fam: Vec<SampledFunction> = [-1, 0, 1]
            .iter()
            .map(|&n| gabor_atom(grid(), GaborIndex::new(0, n)).unwrap())
            .collect();
        let d = decay_modulus(&fam, &[4.0], Execution::default()).unwrap();
        assert!(d[0][1] <= 1e-12);
        let chi = StepFunction::indicator(-0.5, 0.5)
            .unwrap()
            .sample(grid())
            .unwrap();
        let d = decay_modulus(&[chi], &[1.0], Execution::Sequential).unwrap();
        assert_eq!(d[0][1], 0.0);
        let d = decay_modulus(&[g], &[0.5, 1.0, 2.0, 4.0], Execution::Sequential).unwrap();
        assert!(d.windows(2).all(|w| w[1][1] <= w[0][1]));
    }

    #[test]
    fn band_limited_family() {
        // f̂ = normalized cos² bump on [-1, 1]
        let dual = grid().dual();
        let bump = SampledFunction::sample_real(dual, |xi| {
            if xi.abs() < 1.0 {
                (PI * xi / 2.0).cos().powi(2)
            } else {
                0.0
            }
        })
        .unwrap()
        .normalized()
        .unwrap();
        let f = crate::grid::inverse_fourier(&bump);
        let shifts: Vec<f64> = (0..6).map(|j| j as f64 * grid().spacing()).collect();
        let rep = duality_check(&[f], &shifts, &[1.0, 2.0], Execution::Sequential).unwrap();
        for &[a, w] in &rep.profile.shift_modulus {
            assert!(w <= (2.0 * PI * a).powi(2) + 1e-6);
        }
        for &[_, rho] in &rep.profile.dual_decay_modulus {
            assert!(rho < 1e-12);
        }
        for row in &rep.rows {
            assert!(row.shift_modulus <= row.heuristic_bound + 1e-12);
        }
    }

    #[test]
    fn modulated_family_degrades_on_both_sides() {
        let base = gaussian(grid());
        let mut prev: Option<(f64, f64)> = None;
        for m_max in [0usize, 5, 10, 20] {
            let fam: Vec<SampledFunction> = (0..=m_max).map(|m| base.modulated(m as f64)).collect();
            let rep = duality_check(&fam, &[0.125], &[3.0], Execution::default()).unwrap();
            let w = rep.profile.shift_modulus[0][1];
            let rho = rep.profile.dual_decay_modulus[0][1];
            if let Some((pw, prho)) = prev {
                assert!(w >= pw && rho >= prho);
            }
            prev = Some((w, rho));
        }
        let (w, rho) = prev.unwrap();
        assert!(w > 1.0 && rho > 0.99);
    }

    #[test]
    fn dual_column_is_decay_of_transforms() {
        let fam: Vec<SampledFunction> = (0..3)
            .map(|m| gabor_atom(grid(), GaborIndex::new(m, 1 - m)).unwrap())
            .collect();
        let rep = duality_check(&fam, &[0.0], &[1.0, 2.0], Execution::default()).unwrap();
        let transformed: Vec<_> = fam.iter().map(fourier).collect();
        let direct = decay_modulus(&transformed, &[1.0, 2.0], Execution::Sequential).unwrap();
        assert_eq!(direct, rep.profile.dual_decay_modulus);
        assert!(rep.edge_warnings.is_empty());
    }

    #[test]
    fn kaq_cases() {
        let r = concentration_report(&gaussian(grid()), 2.0, 2.0).unwrap();
        assert!(kaq_membership(&r, 1.0));
        assert!(!kaq_membership(&r, 0.0));
        let r32 = concentration_report(
            &gabor_atom(grid(), GaborIndex::new(3, 2)).unwrap(),
            2.0,
            2.0,
        )
        .unwrap();
        assert!(!kaq_membership(&r32, 1.0));
    }

    #[test]
    fn kaq_tail_formula() {
        assert!((kaq_tail_bound(1.0, 2.0, 4.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((kaq_tail_bound(1.0, 2.0, 40.0).unwrap() - 0.0025).abs() < 1e-15);
        assert!(kaq_tail_bound(1.0, 2.0, 1.5).is_err());
        assert!(kaq_tail_bound(1.0, 2.0, 2.0).is_err());
    }

    #[test]
    fn envelope_cases() {
        let sys = build_perturbed_exact(grid(), 4, 0.1, 2.0, 2.0, Execution::default()).unwrap();
        let env = envelopes(&sys.elements).unwrap();
        for f in &sys.elements {
            assert!(envelope_membership(f, &env).unwrap());
        }
        let g = gaussian(grid());
        let genv = envelopes(std::slice::from_ref(&g)).unwrap();
        let twice = g.scaled(Complex64::new(2.0, 0.0));
        assert!(!envelope_membership(&twice, &genv).unwrap());
        let far = gabor_atom(grid(), GaborIndex::new(0, 5)).unwrap();
        assert!(!envelope_membership(&far, &env).unwrap());
        let far_time_ok = far
            .values()
            .iter()
            .zip(&env.time_envelope)
            .all(|(v, e)| v.norm() <= e + 1e-9);
        assert!(!far_time_ok);
    }
}
