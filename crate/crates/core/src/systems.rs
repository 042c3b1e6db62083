//! Gaussian Gabor systems and the perturbed exact system with uniformly
//! bounded concentration.
//!
//! The window is `g(t) = 2^{1/4} e^{-πt²}` and the atoms are
//! `g_{m,n}(t) = e^{2πimt} g(t-n)`. Removing `g_{1,1}` from the integer lattice
//! leaves an exact system `G₀ = {e_1, e_2, …}` with `e_1 = g`. The perturbed
//! system is `f_n = (e_1 + α_n e_{n+1}) / ‖e_1 + α_n e_{n+1}‖₂` with each `α_n`
//! small enough that all four concentration bounds hold within `ε` of the
//! Gaussian's.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::grid::{fourier, quadrature_norm, Grid, SampledFunction};
use crate::moments::{mean_and_dispersion, report_with_transform, MEAN_TOL};

/// Atoms need this much room (in t and in ξ) beyond their center.
const WINDOW_MARGIN: f64 = 4.0;

/// Maximum number of halvings of α_n before giving up.
pub const MAX_HALVINGS: usize = 60;

/// A bound `x < b` counts as met only when `x + CERT_MARGIN < b`, since the
/// means themselves are only resolved to [`MEAN_TOL`].
pub const CERT_MARGIN: f64 = MEAN_TOL;

/// Cap on the initial α, inside the validity region of the mean-deviation
/// bound (`√38/2 - 3 ≈ 0.0822`).
const ALPHA_CAP: f64 = 0.08;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct GaborIndex {
    /// Modulation.
    pub m: i64,
    /// Translation.
    pub n: i64,
}

impl GaborIndex {
    pub const fn new(m: i64, n: i64) -> Self {
        GaborIndex { m, n }
    }

    fn shell(&self) -> i64 {
        self.m.abs().max(self.n.abs())
    }
}

impl From<[i64; 2]> for GaborIndex {
    fn from([m, n]: [i64; 2]) -> Self {
        GaborIndex { m, n }
    }
}

impl From<GaborIndex> for [i64; 2] {
    fn from(idx: GaborIndex) -> Self {
        [idx.m, idx.n]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemKind {
    #[serde(rename = "gabor_full")]
    GaborFull,
    #[serde(rename = "gabor_exact_G0")]
    GaborExactG0,
    #[serde(rename = "perturbed_exact")]
    PerturbedExact,
    #[serde(rename = "explicit")]
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub kind: SystemKind,
    pub count: usize,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub indices: Vec<GaborIndex>,
    #[serde(default)]
    pub alphas: Vec<f64>,
}

impl SystemSpec {
    /// Checks the structural invariants of the spec.
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            SystemKind::GaborFull | SystemKind::GaborExactG0 => {
                if self.indices.len() != self.count {
                    return Err(invalid(format!(
                        "count {} does not match {} indices",
                        self.count,
                        self.indices.len()
                    )));
                }
                if self.kind == SystemKind::GaborExactG0
                    && self.indices.contains(&GaborIndex::new(1, 1))
                {
                    return Err(invalid("G0 must not contain the index (1,1)"));
                }
            }
            SystemKind::PerturbedExact => {
                if self.alphas.len() != self.count {
                    return Err(invalid(format!(
                        "count {} does not match {} alphas",
                        self.count,
                        self.alphas.len()
                    )));
                }
                for (i, &a) in self.alphas.iter().enumerate() {
                    let cap = 0.5f64.powi(i as i32 + 1);
                    if !(a > 0.0 && a < cap) {
                        return Err(invalid(format!(
                            "alpha_{} = {a} must lie in (0, {cap})",
                            i + 1
                        )));
                    }
                }
                if !self.epsilon.is_some_and(|e| e > 0.0) {
                    return Err(invalid("perturbed_exact requires a positive epsilon"));
                }
            }
            SystemKind::Explicit => {}
        }
        Ok(())
    }
}

/// Lattice points ordered by square shells `max(|m|,|n|) = 0, 1, 2, …`,
/// lexicographic in `(m, n)` inside a shell.
pub fn shell_order() -> impl Iterator<Item = GaborIndex> {
    (0i64..).flat_map(|r| {
        (-r..=r).flat_map(move |m| {
            (-r..=r)
                .map(move |n| GaborIndex::new(m, n))
                .filter(move |idx| idx.shell() == r)
        })
    })
}

pub fn enumerate_gabor_full(count: usize) -> SystemSpec {
    SystemSpec {
        kind: SystemKind::GaborFull,
        count,
        epsilon: None,
        indices: shell_order().take(count).collect(),
        alphas: Vec::new(),
    }
}

/// First `count` elements of `G₀ = G(g,1,1) \ {g_{1,1}}`; the first is `(0,0)`.
pub fn enumerate_exact_g0(count: usize) -> SystemSpec {
    SystemSpec {
        kind: SystemKind::GaborExactG0,
        count,
        epsilon: None,
        indices: shell_order()
            .filter(|idx| *idx != GaborIndex::new(1, 1))
            .take(count)
            .collect(),
        alphas: Vec::new(),
    }
}

/// `g(t) = 2^{1/4} e^{-πt²}`.
pub fn gaussian(grid: Grid) -> SampledFunction {
    let c = 2f64.powf(0.25);
    let values = grid
        .points()
        .map(|t| Complex64::new(c * (-PI * t.powi(2)).exp(), 0.0))
        .collect();
    SampledFunction::from_finite(grid, values)
}

/// `g_{m,n}(t) = e^{2πimt} g(t-n)`.
pub fn gabor_atom(grid: Grid, idx: GaborIndex) -> Result<SampledFunction> {
    let (m, n) = (idx.m as f64, idx.n as f64);
    if n.abs() + WINDOW_MARGIN >= grid.extent() / 2.0
        || m.abs() + WINDOW_MARGIN >= grid.dual_extent() / 2.0
    {
        return Err(Error::OutOfWindow { m: idx.m, n: idx.n });
    }
    let c = 2f64.powf(0.25);
    let values = grid
        .points()
        .map(|t| Complex64::from_polar(c * (-PI * (t - n).powi(2)).exp(), 2.0 * PI * m * t))
        .collect();
    Ok(SampledFunction::from_finite(grid, values))
}

/// The four bounds each perturbed element must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementBounds {
    pub time_mean: f64,
    pub freq_mean: f64,
    pub time_dispersion: f64,
    pub freq_dispersion: f64,
    pub time_mean_ok: bool,
    pub freq_mean_ok: bool,
    pub time_dispersion_ok: bool,
    pub freq_dispersion_ok: bool,
    /// Halvings applied to the initial α.
    pub halvings: usize,
}

impl ElementBounds {
    pub fn all_ok(&self) -> bool {
        self.time_mean_ok && self.freq_mean_ok && self.time_dispersion_ok && self.freq_dispersion_ok
    }

    fn first_violation(&self) -> &'static str {
        if !self.time_mean_ok {
            "|time mean| < epsilon"
        } else if !self.freq_mean_ok {
            "|frequency mean| < epsilon"
        } else if !self.time_dispersion_ok {
            "time dispersion < gaussian + epsilon"
        } else {
            "frequency dispersion < gaussian + epsilon"
        }
    }
}

#[derive(Debug, Clone)]
pub struct PerturbedSystem {
    pub spec: SystemSpec,
    /// `f_1, …, f_count`.
    pub elements: Vec<SampledFunction>,
    /// `‖e_1 + α_n e_{n+1}‖₂` for each element.
    pub normalizers: Vec<f64>,
    pub bounds: Vec<ElementBounds>,
    /// Indices of `e_1, …, e_{count+1}` in `G₀`.
    pub base_indices: Vec<GaborIndex>,
    pub p: f64,
    pub q: f64,
}

struct Baseline {
    time_dispersion: f64,
    freq_dispersion: f64,
}

fn perturbed_element(
    e1: &SampledFunction,
    next: &SampledFunction,
    alpha: f64,
) -> Result<(SampledFunction, f64)> {
    let raw = e1.combine(Complex64::new(1.0, 0.0), next, Complex64::new(alpha, 0.0))?;
    let norm = raw.norm();
    Ok((raw.normalized()?, norm))
}

fn check_bounds(
    f: &SampledFunction,
    base: &Baseline,
    epsilon: f64,
    p: f64,
    q: f64,
    halvings: usize,
) -> Result<ElementBounds> {
    let r = report_with_transform(f, &fourier(f), p, q)?;
    Ok(ElementBounds {
        time_mean: r.time_mean,
        freq_mean: r.freq_mean,
        time_dispersion: r.time_dispersion,
        freq_dispersion: r.freq_dispersion,
        time_mean_ok: r.time_mean.abs() + CERT_MARGIN < epsilon,
        freq_mean_ok: r.freq_mean.abs() + CERT_MARGIN < epsilon,
        time_dispersion_ok: r.time_dispersion + CERT_MARGIN < base.time_dispersion + epsilon,
        freq_dispersion_ok: r.freq_dispersion + CERT_MARGIN < base.freq_dispersion + epsilon,
        halvings,
    })
}

/// Builds `f_1, …, f_count`, choosing each `α_n` by halving from
/// `min(2^{-n}, 0.08)/2` until the four bounds hold.
pub fn build_perturbed_exact(
    grid: Grid,
    count: usize,
    epsilon: f64,
    p: f64,
    q: f64,
    exec: Execution,
) -> Result<PerturbedSystem> {
    if count == 0 {
        return Err(invalid("count must be at least 1"));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(invalid(format!("epsilon = {epsilon} must be positive")));
    }
    let base_spec = enumerate_exact_g0(count + 1);
    let atoms = exec.try_map_slice(&base_spec.indices, |&idx| gabor_atom(grid, idx))?;
    let e1 = &atoms[0];
    let (_, time_dispersion) = mean_and_dispersion(e1, p)?;
    let (_, freq_dispersion) = mean_and_dispersion(&fourier(e1), q)?;
    let base = Baseline {
        time_dispersion,
        freq_dispersion,
    };

    let ns: Vec<usize> = (1..=count).collect();
    let built = exec.try_map_slice(&ns, |&n| -> Result<_> {
        let mut alpha = 0.5f64.powi(n as i32).min(ALPHA_CAP) / 2.0;
        let mut halvings = 0;
        loop {
            let (f, norm) = perturbed_element(e1, &atoms[n], alpha)?;
            let bounds = check_bounds(&f, &base, epsilon, p, q, halvings)?;
            if bounds.all_ok() {
                return Ok((alpha, f, norm, bounds));
            }
            if halvings == MAX_HALVINGS {
                return Err(Error::ConstructionFailure {
                    element: n,
                    condition: bounds.first_violation().to_string(),
                    iterations: MAX_HALVINGS,
                });
            }
            alpha /= 2.0;
            halvings += 1;
        }
    })?;

    let mut alphas = Vec::with_capacity(count);
    let mut elements = Vec::with_capacity(count);
    let mut normalizers = Vec::with_capacity(count);
    let mut bounds = Vec::with_capacity(count);
    for (a, f, nrm, b) in built {
        alphas.push(a);
        elements.push(f);
        normalizers.push(nrm);
        bounds.push(b);
    }
    let spec = SystemSpec {
        kind: SystemKind::PerturbedExact,
        count,
        epsilon: Some(epsilon),
        indices: Vec::new(),
        alphas,
    };
    spec.validate()?;
    Ok(PerturbedSystem {
        spec,
        elements,
        normalizers,
        bounds,
        base_indices: base_spec.indices,
        p,
        q,
    })
}

/// Samples every element described by `spec`.
pub fn materialize(spec: &SystemSpec, grid: Grid, exec: Execution) -> Result<Vec<SampledFunction>> {
    spec.validate()?;
    match spec.kind {
        SystemKind::GaborFull | SystemKind::GaborExactG0 => {
            exec.try_map_slice(&spec.indices, |&idx| gabor_atom(grid, idx))
        }
        SystemKind::PerturbedExact => {
            let base = enumerate_exact_g0(spec.count + 1);
            let e1 = gabor_atom(grid, base.indices[0])?;
            let ns: Vec<usize> = (1..=spec.count).collect();
            exec.try_map_slice(&ns, |&n| {
                let next = gabor_atom(grid, base.indices[n])?;
                perturbed_element(&e1, &next, spec.alphas[n - 1]).map(|(f, _)| f)
            })
        }
        SystemKind::Explicit => Err(invalid(
            "explicit systems carry their own samples and cannot be regenerated",
        )),
    }
}

/// Pointwise suprema `φ(t) = sup_n |f_n(t)|`, `ψ(ξ) = sup_n |f̂_n(ξ)|`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopePair {
    pub time_grid: Grid,
    pub freq_grid: Grid,
    pub time_envelope: Vec<f64>,
    pub freq_envelope: Vec<f64>,
    pub time_envelope_norm: f64,
    pub freq_envelope_norm: f64,
}

pub fn envelopes(system: &[SampledFunction]) -> Result<EnvelopePair> {
    let first = system.first().ok_or_else(|| invalid("empty system"))?;
    let grid = *first.grid();
    let n = grid.n_points();
    let mut time_envelope = vec![0.0f64; n];
    let mut freq_envelope = vec![0.0f64; n];
    for f in system {
        grid.ensure_same(f.grid())?;
        let fh = fourier(f);
        for (env, v) in time_envelope.iter_mut().zip(f.values()) {
            *env = env.max(v.norm());
        }
        for (env, v) in freq_envelope.iter_mut().zip(fh.values()) {
            *env = env.max(v.norm());
        }
    }
    let norm = |dt: f64, env: &[f64]| {
        let as_complex: Vec<Complex64> = env.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        quadrature_norm(dt, &as_complex)
    };
    Ok(EnvelopePair {
        time_grid: grid,
        freq_grid: grid.dual(),
        time_envelope_norm: norm(grid.spacing(), &time_envelope),
        freq_envelope_norm: norm(grid.dual_spacing(), &freq_envelope),
        time_envelope,
        freq_envelope,
    })
}

/// Recovers `e_{n+1} = (‖e_1 + α_n e_{n+1}‖₂ f_n - e_1) / α_n`.
pub fn reconstruct_e(system: &PerturbedSystem, n: usize) -> Result<SampledFunction> {
    if system.spec.kind != SystemKind::PerturbedExact {
        return Err(invalid("reconstruction needs a perturbed_exact system"));
    }
    if n == 0 || n > system.spec.count {
        return Err(invalid(format!(
            "element {n} out of range 1..={}",
            system.spec.count
        )));
    }
    let f = &system.elements[n - 1];
    let e1 = gabor_atom(*f.grid(), system.base_indices[0])?;
    let alpha = system.spec.alphas[n - 1];
    let nrm = system.normalizers[n - 1];
    f.combine(
        Complex64::new(nrm / alpha, 0.0),
        &e1,
        Complex64::new(-1.0 / alpha, 0.0),
    )
}
