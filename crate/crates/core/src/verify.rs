//! Self-verification suite: every invariant of the library checked on one
//! grid, in a fixed order, with a pass/fail/skip verdict per check.
//!
//! The transform checks run against an injected forward transform so that a
//! deliberately broken transform can be used as a negative control.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::compactness::{
    decay_modulus, duality_check, equicontinuity_modulus, kaq_membership, kaq_tail_bound,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::frames::{default_test_functions, frame_bounds_finite, gram_matrix, rs_check, tail_sum};
use crate::grid::{
    fourier, inner_product, inverse_fourier, l2_distance, tail_mass, Grid, SampledFunction,
    StepFunction,
};
use crate::moments::{
    concentration_report, mean_and_dispersion, moment_objective, p_mean, second_order_moments,
    SUPPORT_FLOOR,
};
use crate::separation::{
    coherence_counts, greedy_separated_subset, inner_product_bound, is_separated,
    max_separated_subset_exhaustive, Gram,
};
use crate::systems::{
    build_perturbed_exact, enumerate_exact_g0, gabor_atom, gaussian, materialize, reconstruct_e,
};
use crate::testfns::{
    clustered_gram, gaussian_pair, psi, rng, shifted_gaussian, smooth_family, two_bump,
};

/// Tolerances used by the suite. Grids with a dual extent below 64 use the
/// coarse schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Unitarity, inversion and linearity of the discrete transform.
    pub exact: f64,
    /// Agreement of sampled transforms with closed forms.
    pub analytic: f64,
    /// Means and dispersions against closed forms and covariance laws.
    pub moment: f64,
    /// Means of even and odd functions.
    pub symmetry: f64,
    /// p = 2 minimizer against the first and second moments.
    pub closed_form: f64,
    /// Slack below 1/(4π) for the uncertainty product.
    pub heisenberg: f64,
}

impl Tolerances {
    pub const FINE: Tolerances = Tolerances {
        exact: 1e-10,
        analytic: 1e-9,
        moment: 1e-6,
        symmetry: 1e-7,
        closed_form: 1e-8,
        heisenberg: 1e-6,
    };

    pub const COARSE: Tolerances = Tolerances {
        exact: 1e-10,
        analytic: 1e-6,
        moment: 1e-4,
        symmetry: 1e-5,
        closed_form: 1e-7,
        heisenberg: 1e-5,
    };

    pub fn for_grid(grid: &Grid) -> Tolerances {
        if grid.dual_extent() < 64.0 {
            Self::COARSE
        } else {
            Self::FINE
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub grid: Grid,
    pub seed: u64,
    pub exec: Execution,
    /// Multiplies the forward transform by a per-sample phase.
    pub corrupt_fft_phase: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub tolerances: Tolerances,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.first_failure().is_none()
    }

    pub fn first_failure(&self) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.status == CheckStatus::Fail)
    }

    /// One line per check: `status  name  detail`.
    pub fn table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        self.checks
            .iter()
            .map(|c| {
                let status = match c.status {
                    CheckStatus::Pass => "PASS",
                    CheckStatus::Fail => "FAIL",
                    CheckStatus::Skip => "SKIP",
                };
                format!("{status}  {:width$}  {}\n", c.name, c.detail)
            })
            .collect()
    }
}

enum Verdict {
    Pass(String),
    Fail(String),
}

fn within(what: &str, worst: f64, tol: f64) -> Verdict {
    let detail = format!("{what} {worst:.3e} (tol {tol:.0e})");
    if worst <= tol {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn holds(cond: bool, detail: String) -> Verdict {
    if cond {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

type Transform<'a> = &'a dyn Fn(&SampledFunction) -> SampledFunction;

struct Ctx<'a> {
    grid: Grid,
    seed: u64,
    exec: Execution,
    tol: Tolerances,
    forward: Transform<'a>,
}

type Check = fn(&Ctx) -> Result<Verdict>;

const CHECKS: &[(&str, Check)] = &[
    ("plancherel", plancherel),
    ("inversion", inversion),
    ("linearity", linearity),
    ("order_four", order_four),
    ("translation_modulation", translation_modulation),
    ("gaussian_fixed_point", gaussian_fixed_point),
    ("gaussian_report", gaussian_report),
    ("translation_covariance", translation_covariance),
    ("symmetry", symmetry),
    ("strict_convexity", strict_convexity),
    ("minimizer_bracket", minimizer_bracket),
    ("heisenberg", heisenberg),
    ("p2_closed_form", p2_closed_form),
    ("g0_covariance", g0_covariance),
    ("g0_coherence", g0_coherence),
    ("perturbed_self_certification", perturbed_self_certification),
    ("greedy_invariants", greedy_invariants),
    ("brute_force_separation", brute_force_separation),
    ("inner_product_bound", inner_product_bound_check),
    ("distance_identity", distance_identity),
    ("frame_unitary_invariance", frame_unitary_invariance),
    ("finite_section_bounds", finite_section_bounds),
    ("parseval_rs_check", parseval_rs_check),
    ("tail_sum", tail_sum_check),
    ("kaq_tail_chain", kaq_tail_chain),
    ("decay_monotone", decay_monotone),
    ("shift_modulus_zero", shift_modulus_zero),
    ("shift_duality_bound", shift_duality_bound),
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(n, _)| *n).collect()
}

pub fn run_verify(opts: &VerifyOptions) -> VerifyReport {
    let corrupted = |f: &SampledFunction| {
        let fh = fourier(f);
        let grid = *fh.grid();
        let values = fh
            .into_values()
            .into_iter()
            .enumerate()
            .map(|(j, v)| v * Complex64::from_polar(1.0, 1e-3 * (j * j) as f64))
            .collect();
        SampledFunction::from_values(grid, values).expect("finite")
    };
    let forward: Transform = if opts.corrupt_fft_phase {
        &corrupted
    } else {
        &fourier
    };
    let ctx = Ctx {
        grid: opts.grid,
        seed: opts.seed,
        exec: opts.exec,
        tol: Tolerances::for_grid(&opts.grid),
        forward,
    };
    let checks = CHECKS
        .iter()
        .map(|&(name, check)| {
            let (status, detail) = match check(&ctx) {
                Ok(Verdict::Pass(d)) => (CheckStatus::Pass, d),
                Ok(Verdict::Fail(d)) => (CheckStatus::Fail, d),
                Err(Error::OutOfWindow { m, n }) => (
                    CheckStatus::Skip,
                    format!("atom ({m}, {n}) does not fit the grid"),
                ),
                Err(e) => (CheckStatus::Fail, format!("error: {e}")),
            };
            CheckOutcome {
                name,
                status,
                detail,
            }
        })
        .collect();
    VerifyReport {
        tolerances: ctx.tol,
        checks,
    }
}

fn random_vector<R: Rng>(grid: Grid, r: &mut R) -> SampledFunction {
    let values = (0..grid.n_points())
        .map(|_| Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal)))
        .collect();
    SampledFunction::from_values(grid, values)
        .expect("finite")
        .normalized()
        .expect("nonzero")
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn plancherel(ctx: &Ctx) -> Result<Verdict> {
    let mut r = rng(ctx.seed);
    let mut family = smooth_family(ctx.grid, 4, ctx.seed)?;
    family.push(random_vector(ctx.grid, &mut r));
    let mut worst: f64 = 0.0;
    for f in &family {
        let fh = (ctx.forward)(f);
        worst = worst.max((fh.norm() - f.norm()).abs() / f.norm());
        let h = random_vector(*fh.grid(), &mut r);
        let lhs = inner_product(&fh, &h)?;
        let rhs = inner_product(f, &inverse_fourier(&h))?;
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(within("norm and adjoint error", worst, ctx.tol.exact))
}

fn inversion(ctx: &Ctx) -> Result<Verdict> {
    let mut r = rng(ctx.seed.wrapping_add(1));
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let v = random_vector(ctx.grid, &mut r);
        let back = inverse_fourier(&(ctx.forward)(&v));
        worst = worst.max(l2_distance(&back, &v)?);
    }
    Ok(within("relative roundtrip error", worst, ctx.tol.exact))
}

fn linearity(ctx: &Ctx) -> Result<Verdict> {
    let mut r = rng(ctx.seed.wrapping_add(2));
    let f = random_vector(ctx.grid, &mut r);
    let g = random_vector(ctx.grid, &mut r);
    let (a, b) = (Complex64::new(0.7, -1.3), Complex64::new(-2.1, 0.4));
    let lhs = (ctx.forward)(&f.combine(a, &g, b)?);
    let rhs = (ctx.forward)(&f).combine(a, &(ctx.forward)(&g), b)?;
    let scale = f.combine(a, &g, b)?.norm();
    Ok(within(
        "relative error",
        l2_distance(&lhs, &rhs)? / scale,
        ctx.tol.exact,
    ))
}

fn order_four(ctx: &Ctx) -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    for f in smooth_family(ctx.grid, 3, ctx.seed.wrapping_add(3))? {
        let mut h = f.clone();
        for _ in 0..4 {
            h = (ctx.forward)(&h);
        }
        worst = worst.max(l2_distance(&h, &f)?);
    }
    Ok(within("‖F⁴f - f‖", worst, ctx.tol.analytic))
}

fn translation_modulation(ctx: &Ctx) -> Result<Verdict> {
    let dual = ctx.grid.dual();
    let mut worst: f64 = 0.0;
    for x in [1.5, -2.25, 0.3] {
        let fh = (ctx.forward)(&shifted_gaussian(ctx.grid, x, 0.0));
        worst = worst.max(l2_distance(&fh, &shifted_gaussian(dual, 0.0, -x))?);
    }
    for m in [1.0, -0.5] {
        let fh = (ctx.forward)(&shifted_gaussian(ctx.grid, 0.0, m));
        worst = worst.max(l2_distance(&fh, &shifted_gaussian(dual, m, 0.0))?);
    }
    Ok(within("error against closed form", worst, ctx.tol.analytic))
}

fn gaussian_fixed_point(ctx: &Ctx) -> Result<Verdict> {
    let g = gaussian(ctx.grid);
    let err = l2_distance(&(ctx.forward)(&g), &gaussian(ctx.grid.dual()))?;
    Ok(within("‖ĝ - g‖", err, ctx.tol.analytic))
}

fn gaussian_report(ctx: &Ctx) -> Result<Verdict> {
    let r = concentration_report(&gaussian(ctx.grid), 2.0, 2.0)?;
    let d = 1.0 / (2.0 * PI.sqrt());
    let worst = [
        r.time_mean.abs(),
        r.freq_mean.abs(),
        (r.time_dispersion - d).abs(),
        (r.freq_dispersion - d).abs(),
        (r.heisenberg_product - 1.0 / (4.0 * PI)).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(within("componentwise error", worst, ctx.tol.moment))
}

/// A smooth function with no symmetry.
fn lopsided(t: f64) -> Complex64 {
    let a = (-PI * ((t - 0.3) / 0.8).powi(2)).exp();
    let b = (t + 0.5) * (-PI * (t / 1.2).powi(2)).exp();
    Complex64::new(a, 0.0) + Complex64::new(0.4, 0.3) * b
}

fn translation_covariance(ctx: &Ctx) -> Result<Verdict> {
    let h = SampledFunction::sample(ctx.grid, lopsided)?.normalized()?;
    let mut worst: f64 = 0.0;
    for p in [1.5, 2.0, 3.0] {
        let (mu, delta) = mean_and_dispersion(&h, p)?;
        for s in [-2.0, 0.3, 5.0] {
            let hs = SampledFunction::sample(ctx.grid, |t| lopsided(t - s))?.normalized()?;
            let (mu_s, delta_s) = mean_and_dispersion(&hs, p)?;
            worst = worst
                .max((mu_s - mu - s).abs())
                .max((delta_s - delta).abs());
        }
    }
    Ok(within("covariance defect", worst, ctx.tol.moment))
}

fn symmetry(ctx: &Ctx) -> Result<Verdict> {
    let g = |t: f64| (-PI * t * t).exp();
    let even = SampledFunction::sample_real(ctx.grid, |t| g(t) + 0.5 * (g(t - 2.0) + g(t + 2.0)))?
        .normalized()?;
    let odd =
        SampledFunction::sample(ctx.grid, |t| Complex64::new(0.0, t * g(t / 1.5)))?.normalized()?;
    let mut worst: f64 = 0.0;
    for h in [&even, &odd] {
        for p in [1.5, 2.0, 3.0] {
            worst = worst.max(p_mean(h, p)?.abs());
        }
    }
    Ok(within("|mean|", worst, ctx.tol.symmetry))
}

fn strict_convexity(ctx: &Ctx) -> Result<Verdict> {
    let mut r = rng(ctx.seed.wrapping_add(4));
    let mut worst_gap = f64::INFINITY;
    for h in smooth_family(ctx.grid, 5, ctx.seed.wrapping_add(4))? {
        for p in [1.5, 2.0, 3.0] {
            let mu = p_mean(&h, p)?;
            for _ in 0..10 {
                let a = mu + r.random_range(-2.0..2.0);
                let b = loop {
                    let b = mu + r.random_range(-2.0..2.0);
                    if (a - b).abs() >= 0.1 {
                        break b;
                    }
                };
                let mid = moment_objective(&h, p, 0.5 * (a + b))?;
                let avg = 0.5 * (moment_objective(&h, p, a)? + moment_objective(&h, p, b)?);
                worst_gap = worst_gap.min(avg - mid);
            }
        }
    }
    Ok(holds(
        worst_gap > 1e-12,
        format!("smallest convexity gap {worst_gap:.3e} (must exceed 1e-12)"),
    ))
}

fn support_hull(h: &SampledFunction) -> (f64, f64) {
    let first = h
        .values()
        .iter()
        .position(|v| v.norm() > SUPPORT_FLOOR)
        .unwrap_or(0);
    let last = h
        .values()
        .iter()
        .rposition(|v| v.norm() > SUPPORT_FLOOR)
        .unwrap_or(0);
    (h.grid().point(first), h.grid().point(last))
}

fn minimizer_bracket(ctx: &Ctx) -> Result<Verdict> {
    let mut family = smooth_family(ctx.grid, 5, ctx.seed.wrapping_add(5))?;
    for step in [
        psi(0.7)?,
        two_bump(),
        StepFunction::new(vec![(0.2, 1.7, (1.0f64 / 1.5).sqrt())])?,
    ] {
        family.push(step.sample(ctx.grid)?);
    }
    let mut outside = 0;
    for h in &family {
        let (lo, hi) = support_hull(h);
        for p in [1.5, 2.0, 3.0] {
            let mu = p_mean(h, p)?;
            if !(lo <= mu && mu <= hi) {
                outside += 1;
            }
        }
    }
    Ok(holds(
        outside == 0,
        format!(
            "{outside} of {} means outside the support hull",
            3 * family.len()
        ),
    ))
}

fn heisenberg(ctx: &Ctx) -> Result<Verdict> {
    let family = smooth_family(ctx.grid, 50, ctx.seed.wrapping_add(6))?;
    let min = family
        .iter()
        .map(|f| concentration_report(f, 2.0, 2.0).map(|r| r.heisenberg_product))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let floor = 1.0 / (4.0 * PI) - ctx.tol.heisenberg;
    Ok(holds(
        min >= floor,
        format!("smallest product {min:.9} (floor {floor:.9})"),
    ))
}

fn p2_closed_form(ctx: &Ctx) -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    for h in smooth_family(ctx.grid, 10, ctx.seed.wrapping_add(7))? {
        let (mu, delta) = mean_and_dispersion(&h, 2.0)?;
        let (mean, sd) = second_order_moments(&h)?;
        worst = worst.max((mu - mean).abs()).max((delta - sd).abs());
    }
    Ok(within("deviation from moments", worst, ctx.tol.closed_form))
}

fn g0_covariance(ctx: &Ctx) -> Result<Verdict> {
    let spec = enumerate_exact_g0(12);
    let system = materialize(&spec, ctx.grid, ctx.exec)?;
    let d = 1.0 / (2.0 * PI.sqrt());
    let mut worst: f64 = 0.0;
    for (f, idx) in system.iter().zip(&spec.indices) {
        let r = concentration_report(f, 2.0, 2.0)?;
        worst = worst
            .max((r.time_mean - idx.n as f64).abs())
            .max((r.freq_mean - idx.m as f64).abs())
            .max((r.time_dispersion - d).abs())
            .max((r.freq_dispersion - d).abs());
    }
    Ok(within("deviation from (n, m, Δ, Δ)", worst, ctx.tol.moment))
}

fn g0_coherence(ctx: &Ctx) -> Result<Verdict> {
    let spec = enumerate_exact_g0(12);
    let system = materialize(&spec, ctx.grid, ctx.exec)?;
    let gram = gram_matrix(&system, ctx.exec)?;
    let mut worst: f64 = 0.0;
    for (i, a) in spec.indices.iter().enumerate() {
        for (j, b) in spec.indices.iter().enumerate() {
            let dm = (a.m - b.m) as f64;
            let dn = (a.n - b.n) as f64;
            let expected = (-PI * (dm * dm + dn * dn) / 2.0).exp();
            worst = worst.max((gram[(i, j)].norm() - expected).abs());
        }
    }
    if worst > ctx.tol.analytic {
        return Ok(within("|⟨g_a, g_b⟩| error", worst, ctx.tol.analytic));
    }
    let counts = coherence_counts(&gram, ctx.exec)?;
    Ok(holds(
        counts.iter().all(|&c| c == 1),
        format!("|⟨g_a, g_b⟩| error {worst:.3e}; coherence counts {counts:?}"),
    ))
}

fn perturbed_self_certification(ctx: &Ctx) -> Result<Verdict> {
    let count = 6;
    let sys = match build_perturbed_exact(ctx.grid, count, 0.1, 2.0, 2.0, ctx.exec) {
        Err(Error::ConstructionFailure {
            element, condition, ..
        }) => return Ok(Verdict::Fail(format!("element {element}: {condition}"))),
        other => other?,
    };
    let bounds_ok = sys.bounds.iter().all(|b| b.all_ok());
    let alphas_ok = sys
        .spec
        .alphas
        .iter()
        .enumerate()
        .all(|(i, &a)| a > 0.0 && a < 0.5f64.powi(i as i32 + 1));
    let mut recon: f64 = 0.0;
    for n in 1..=count {
        let e = reconstruct_e(&sys, n)?;
        let target = gabor_atom(ctx.grid, sys.base_indices[n])?;
        recon = recon.max(l2_distance(&e, &target)?);
    }
    Ok(holds(
        bounds_ok && alphas_ok && recon <= 1e-7,
        format!("bounds {bounds_ok}, alphas {alphas_ok}, reconstruction error {recon:.3e}"),
    ))
}

fn max_count(gram: &Gram, exec: Execution) -> Result<usize> {
    Ok(coherence_counts(gram, exec)?.into_iter().max().unwrap_or(0))
}

fn greedy_invariants(ctx: &Ctx) -> Result<Verdict> {
    let mut r = rng(ctx.seed.wrapping_add(8));
    let mut bad = 0;
    for i in 0..200 {
        let k = 2 + i % 24;
        let gram = clustered_gram(40, k, &mut r);
        let d = max_count(&gram, ctx.exec)? as f64 + 0.5;
        for d in [d, d - 1.0] {
            let res = greedy_separated_subset(&gram, d)?;
            let separated = is_separated(&gram, &res.selected);
            let large = !res.hypothesis_holds || res.selected.len() >= res.guarantee;
            if !(separated && large) {
                bad += 1;
            }
        }
    }
    Ok(holds(
        bad == 0,
        format!("{bad} of 400 greedy runs violate an invariant"),
    ))
}

fn brute_force_separation(ctx: &Ctx) -> Result<Verdict> {
    let mut r = rng(ctx.seed.wrapping_add(9));
    let mut bad = 0;
    let mut runs = 0;
    for i in 0..60 {
        let k = 2 + i % 11;
        let gram = clustered_gram(40, k, &mut r);
        let d = max_count(&gram, ctx.exec)? as f64 + 0.5;
        let greedy = greedy_separated_subset(&gram, d)?;
        let best = max_separated_subset_exhaustive(&gram)?;
        runs += 1;
        if !is_separated(&gram, &best)
            || best.len() < greedy.selected.len()
            || best.len() < greedy.guarantee
        {
            bad += 1;
        }
    }
    Ok(holds(
        bad == 0,
        format!("{bad} of {runs} exhaustive comparisons disagree"),
    ))
}

fn inner_product_bound_check(ctx: &Ctx) -> Result<Verdict> {
    let mut r = rng(ctx.seed.wrapping_add(10));
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let (f, g) = gaussian_pair(ctx.grid, &mut r);
        let rf = concentration_report(&f, 2.0, 2.0)?;
        let rg = concentration_report(&g, 2.0, 2.0)?;
        let overlap = inner_product(&f, &g)?.norm();
        worst = worst.max(overlap - inner_product_bound(&rf, &rg)?);
    }
    let f = shifted_gaussian(ctx.grid, 0.0, 0.0);
    let g = shifted_gaussian(ctx.grid, 4.0, 0.0);
    let spot = inner_product_bound(
        &concentration_report(&f, 2.0, 2.0)?,
        &concentration_report(&g, 2.0, 2.0)?,
    )?;
    let overlap = inner_product(&f, &g)?.norm();
    let spot_ok = (spot - 0.564190).abs() < 1e-5 && (overlap - (-8.0 * PI).exp()).abs() < 1e-13;
    Ok(holds(
        worst <= 1e-9 && spot_ok,
        format!("largest excess {worst:.3e}; separation 4 bound {spot:.6}, overlap {overlap:.3e}"),
    ))
}

fn distance_identity(ctx: &Ctx) -> Result<Verdict> {
    let family = smooth_family(ctx.grid, 12, ctx.seed.wrapping_add(11))?;
    let mut worst: f64 = 0.0;
    let mut separated_but_close = 0;
    for (i, f) in family.iter().enumerate() {
        for g in &family[i + 1..] {
            let ip = inner_product(f, g)?;
            let dist2 = l2_distance(f, g)?.powi(2);
            worst = worst.max((dist2 - (2.0 - 2.0 * ip.re)).abs());
            if ip.norm() < 0.5 && dist2 <= 1.0 {
                separated_but_close += 1;
            }
        }
    }
    Ok(holds(
        worst <= ctx.tol.exact && separated_but_close == 0,
        format!(
            "identity error {worst:.3e}; separated pairs within distance 1: {separated_but_close}"
        ),
    ))
}

fn frame_unitary_invariance(ctx: &Ctx) -> Result<Verdict> {
    let family = smooth_family(ctx.grid, 8, ctx.seed.wrapping_add(12))?;
    let (lo, hi) = frame_bounds_finite(&gram_matrix(&family, ctx.exec)?)?;
    let mu = 3.0 * ctx.grid.dual_spacing();
    let images: [Vec<SampledFunction>; 3] = [
        family.iter().map(|f| f.circular_shift(37)).collect(),
        family.iter().map(|f| f.modulated(mu)).collect(),
        ctx.exec.map_slice(&family, fourier),
    ];
    let mut worst: f64 = 0.0;
    for image in &images {
        let (l, h) = frame_bounds_finite(&gram_matrix(image, ctx.exec)?)?;
        worst = worst.max((l - lo).abs() / hi).max((h - hi).abs() / hi);
    }
    Ok(within("relative change of bounds", worst, 1e-9))
}

fn finite_section_bounds(_: &Ctx) -> Result<Verdict> {
    let c = |x: f64| Complex64::new(x, 0.0);
    let id = Gram::identity(4, 4);
    let doubled = Gram::from_fn(6, 6, |i, j| if i % 3 == j % 3 { one() } else { c(0.0) });
    let mut worst: f64 = 0.0;
    let (l, h) = frame_bounds_finite(&id)?;
    worst = worst.max((l - 1.0).abs()).max((h - 1.0).abs());
    let (l, h) = frame_bounds_finite(&doubled)?;
    worst = worst.max((l - 2.0).abs()).max((h - 2.0).abs());
    for x in [0.5, 0.1, 0.9] {
        let z = Complex64::from_polar(x, 0.7);
        let pair = Gram::from_row_slice(2, 2, &[one(), z, z.conj(), one()]);
        let (l, h) = frame_bounds_finite(&pair)?;
        worst = worst.max((l - (1.0 - x)).abs()).max((h - (1.0 + x)).abs());
    }
    Ok(within("error against exact spectra", worst, 1e-9))
}

/// Disjoint normalized blocks of samples.
fn orthonormal_blocks(grid: Grid, k: usize) -> Result<Vec<SampledFunction>> {
    let n = grid.n_points();
    let len = n / (4 * k);
    let height = 1.0 / (len as f64 * grid.spacing()).sqrt();
    (0..k)
        .map(|i| {
            let start = n / 4 + 2 * i * len;
            let values = (0..n)
                .map(|j| {
                    let inside = (start..start + len).contains(&j);
                    c_real(if inside { height } else { 0.0 })
                })
                .collect();
            SampledFunction::from_values(grid, values)
        })
        .collect()
}

fn c_real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn parseval_rs_check(ctx: &Ctx) -> Result<Verdict> {
    let basis = orthonormal_blocks(ctx.grid, 5)?;
    let tests = default_test_functions(&basis, 10, &[], ctx.grid, ctx.seed)?;
    let rs = rs_check(&basis, &tests, 2.0, 2.0)?;
    let worst = (rs.lower_const_est - 1.0)
        .abs()
        .max((rs.upper_const_est - 1.0).abs());
    Ok(within("deviation of both constants from 1", worst, 1e-8))
}

/// `ψ'(x)` by its asymptotic series, accurate to rounding for `x ≥ 50`.
fn trigamma_large(x: f64) -> f64 {
    let x2 = x * x;
    1.0 / x + 1.0 / (2.0 * x2) + 1.0 / (6.0 * x2 * x) - 1.0 / (30.0 * x2 * x2 * x)
        + 1.0 / (42.0 * x2 * x2 * x2 * x)
}

fn tail_sum_check(_: &Ctx) -> Result<Verdict> {
    let v = tail_sum(100.0, 0.0, 1.0, 2.0, 2.0, 2.0, 1_000_000)?;
    let oracle = trigamma_large(101.0);
    let sweep = [10.0, 100.0, 1000.0]
        .iter()
        .map(|&n| tail_sum(n, 0.0, 1.0, 2.0, 2.0, 2.0, 1_000_000))
        .collect::<Result<Vec<_>>>()?;
    let monotone = sweep.windows(2).all(|w| w[1] < w[0]);
    let rejects = matches!(
        tail_sum(100.0, 0.0, 1.0, 2.0, 2.0, 1.0, 1000),
        Err(Error::HypothesisViolation(_))
    );
    Ok(holds(
        (v - oracle).abs() <= 1e-6 && (v - 0.0099503).abs() <= 1e-6 && monotone && rejects,
        format!(
            "value {v:.7} (oracle {oracle:.7}); decreasing {monotone}; qr = 2 rejected {rejects}"
        ),
    ))
}

fn kaq_tail_chain(ctx: &Ctx) -> Result<Verdict> {
    let mut family = smooth_family(ctx.grid, 20, ctx.seed.wrapping_add(13))?;
    if let Ok(atoms) = materialize(&enumerate_exact_g0(9), ctx.grid, ctx.exec) {
        family.extend(atoms);
    }
    let half = ctx.grid.extent() / 2.0;
    let radii: Vec<f64> = [4.0, 8.0, 16.0]
        .into_iter()
        .filter(|&r| r <= half)
        .collect();
    let mut members = 0;
    let mut violations = 0;
    for f in &family {
        let report = concentration_report(f, 2.0, 2.0)?;
        if !kaq_membership(&report, 1.0) {
            continue;
        }
        members += 1;
        for &r in &radii {
            if tail_mass(f, r)? > kaq_tail_bound(1.0, 2.0, r)? {
                violations += 1;
            }
        }
    }
    let spot = kaq_tail_bound(1.0, 2.0, 4.0)?;
    Ok(holds(
        members > 0 && violations == 0 && spot == 0.25,
        format!("{members} members, {violations} tail violations, bound at R = 4 is {spot}"),
    ))
}

fn decay_monotone(ctx: &Ctx) -> Result<Verdict> {
    let family = smooth_family(ctx.grid, 10, ctx.seed.wrapping_add(14))?;
    let transformed = ctx.exec.map_slice(&family, fourier);
    let radii = [0.25, 0.5, 1.0, 2.0, 4.0];
    let mut ok = true;
    for fam in [&family, &transformed] {
        let d = decay_modulus(fam, &radii, ctx.exec)?;
        ok &= d.windows(2).all(|w| w[1][1] <= w[0][1]);
        ok &= d.iter().all(|x| x[1] >= 0.0);
    }
    Ok(holds(ok, format!("decay moduli nonincreasing in R: {ok}")))
}

fn shift_modulus_zero(ctx: &Ctx) -> Result<Verdict> {
    let family = smooth_family(ctx.grid, 10, ctx.seed.wrapping_add(15))?;
    let dt = ctx.grid.spacing();
    let w = equicontinuity_modulus(&family, &[0.0, dt, 4.0 * dt, 16.0 * dt], ctx.exec)?;
    let ok = w[0][1] == 0.0 && w.iter().skip(1).all(|x| x[1] > 0.0);
    Ok(holds(
        ok,
        format!("ω(0) = {}, ω(a) > 0 for a > 0: {ok}", w[0][1]),
    ))
}

fn shift_duality_bound(ctx: &Ctx) -> Result<Verdict> {
    let family = smooth_family(ctx.grid, 10, ctx.seed.wrapping_add(16))?;
    let dt = ctx.grid.spacing();
    let report = duality_check(
        &family,
        &[2.0 * dt, 8.0 * dt, 32.0 * dt],
        &[0.5, 1.0, 2.0],
        ctx.exec,
    )?;
    let worst = report
        .rows
        .iter()
        .map(|r| r.shift_modulus - r.heuristic_bound)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(holds(
        worst <= 1e-12,
        format!("largest excess of ω(a) over 4ρ̂(R) + (2πaR)² {worst:.3e}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn enough_checks_with_plancherel_first() {
        let names = check_names();
        assert!(names.len() >= 20);
        assert_eq!(names[0], "plancherel");
        let mut sorted = names.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
    }

    #[test]
    fn schedule_follows_resolution() {
        assert_eq!(
            Tolerances::for_grid(&make_grid(32.0, 4096).unwrap()),
            Tolerances::FINE
        );
        assert_eq!(
            Tolerances::for_grid(&make_grid(32.0, 256).unwrap()),
            Tolerances::COARSE
        );
    }

    #[test]
    fn trigamma_series_matches_recurrence() {
        // ψ'(x) = ψ'(x+1) + 1/x²
        for x in [50.0, 101.0, 333.3] {
            let lhs = trigamma_large(x);
            let rhs = trigamma_large(x + 1.0) + 1.0 / (x * x);
            assert!((lhs - rhs).abs() < 1e-16);
        }
    }
}
