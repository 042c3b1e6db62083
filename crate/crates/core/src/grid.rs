//! Uniform centered discretization of the real line and the unitary Fourier
//! transform `f̂(ξ) = ∫ f(t) e^{-2πitξ} dt` realized on it.
//!
//! A [`Grid`] with `n` points and extent `T` samples `t_k = (k - n/2)·dt` with
//! `dt = T/n`, so `t = 0` is always a sample. Its dual grid has spacing
//! `dξ = 1/T` and extent `1/dt`, and the pairing `dt·dξ = 1/n` makes the
//! centered DFT below exactly unitary for the quadrature inner product
//! `⟨f, g⟩ = dt·Σ f_k conj(g_k)`.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Relative tolerance used when deciding whether two grids coincide.
const GRID_MATCH_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n_points: usize,
    extent: f64,
    spacing: f64,
    dual_spacing: f64,
    dual_extent: f64,
}

impl Grid {
    /// Builds the grid of `n_points` samples covering `[-extent/2, extent/2)`.
    pub fn new(extent: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 || !n_points.is_power_of_two() {
            return Err(invalid(format!(
                "n_points = {n_points} is not a power of two >= 2"
            )));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(invalid(format!(
                "extent = {extent} must be positive and finite"
            )));
        }
        let spacing = extent / n_points as f64;
        Ok(Grid {
            n_points,
            extent,
            spacing,
            dual_spacing: 1.0 / extent,
            dual_extent: 1.0 / spacing,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn dual_spacing(&self) -> f64 {
        self.dual_spacing
    }

    pub fn dual_extent(&self) -> f64 {
        self.dual_extent
    }

    /// Sample point `t_k`.
    #[inline]
    pub fn point(&self, k: usize) -> f64 {
        (k as f64 - (self.n_points / 2) as f64) * self.spacing
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_points).map(move |k| self.point(k))
    }

    /// The frequency grid on which transforms of functions on `self` live.
    pub fn dual(&self) -> Grid {
        Grid {
            n_points: self.n_points,
            extent: self.dual_extent,
            spacing: self.dual_spacing,
            dual_spacing: self.spacing,
            dual_extent: self.extent,
        }
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.n_points == other.n_points
            && (self.extent - other.extent).abs() <= GRID_MATCH_RTOL * self.extent.max(other.extent)
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(invalid(format!(
                "grid mismatch: ({}, {}) vs ({}, {})",
                self.extent, self.n_points, other.extent, other.n_points
            )))
        }
    }

    /// Number of samples a shift of `a` corresponds to, if `a` is grid aligned.
    pub fn aligned_steps(&self, a: f64) -> Option<i64> {
        let steps = a / self.spacing;
        let rounded = steps.round();
        if (steps - rounded).abs() <= 1e-9 * rounded.abs().max(1.0) {
            Some(rounded as i64)
        } else {
            None
        }
    }
}

/// Shorthand for [`Grid::new`].
pub fn make_grid(extent: f64, n_points: usize) -> Result<Grid> {
    Grid::new(extent, n_points)
}

/// Complex samples of an L² function on a [`Grid`], with its quadrature norm.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<Complex64>,
    norm: f64,
}

impl SampledFunction {
    pub fn from_values(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(invalid(format!(
                "expected {} samples, got {}",
                grid.n_points(),
                values.len()
            )));
        }
        if let Some(k) = values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::NumericDomain(format!(
                "non-finite sample at t = {}",
                grid.point(k)
            )));
        }
        Ok(Self::from_finite(grid, values))
    }

    /// Caller guarantees every value is finite and the length matches.
    pub(crate) fn from_finite(grid: Grid, values: Vec<Complex64>) -> Self {
        let norm = quadrature_norm(grid.spacing(), &values);
        SampledFunction { grid, values, norm }
    }

    /// Samples `f` at every grid point.
    pub fn sample<F>(grid: Grid, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Complex64,
    {
        let values = grid.points().map(f).collect();
        Self::from_values(grid, values)
    }

    pub fn sample_real<F>(grid: Grid, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        Self::sample(grid, |t| Complex64::new(f(t), 0.0))
    }

    pub fn zero(grid: Grid) -> Self {
        SampledFunction {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n_points()],
            norm: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Cached quadrature L² norm `sqrt(dt·Σ|f_k|²)`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        (self.norm - 1.0).abs() <= tol
    }

    pub fn normalized(&self) -> Result<Self> {
        if self.norm == 0.0 {
            return Err(Error::NumericDomain(
                "cannot normalize the zero function".into(),
            ));
        }
        Ok(self.scaled(Complex64::new(1.0 / self.norm, 0.0)))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self::from_finite(self.grid, self.values.iter().map(|v| v * c).collect())
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: Complex64, other: &SampledFunction, b: Complex64) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(Self::from_finite(self.grid, values))
    }

    /// Multiplies by `e^{2πiμt}`, moving frequency content by `μ`.
    pub fn modulated(&self, mu: f64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| v * Complex64::from_polar(1.0, 2.0 * PI * mu * self.grid.point(k)))
            .collect();
        Self::from_finite(self.grid, values)
    }

    /// Periodic shift by a whole number of samples: result(t_k) = self(t_{k-steps}).
    pub fn circular_shift(&self, steps: i64) -> Self {
        let n = self.values.len() as i64;
        let values = (0..n)
            .map(|k| self.values[(k - steps).rem_euclid(n) as usize])
            .collect();
        SampledFunction {
            grid: self.grid,
            values,
            norm: self.norm,
        }
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Weights `|f_k|²` used by every quadrature moment.
    pub fn densities(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }
}

pub(crate) fn quadrature_norm(dt: f64, values: &[Complex64]) -> f64 {
    (dt * values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Inverse,
}

/// Centered-grid DFT approximating `∫ f(t) e^{∓2πitξ} dt` at the dual samples.
///
/// With `t_k ξ_j = kj/n - k/2 - j/2 + n/4` the kernel factors into a plain DFT
/// sandwiched between `(-1)^k` and `(-1)^j` sign flips and a global phase.
fn centered_dft(f: &SampledFunction, direction: Direction) -> SampledFunction {
    let grid = f.grid;
    let n = grid.n_points();
    let sign = match direction {
        Direction::Forward => -1.0,
        Direction::Inverse => 1.0,
    };
    let mut buf: Vec<Complex64> = f
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| if k % 2 == 1 { -v } else { *v })
        .collect();
    PLANNER.with(|planner| {
        let mut planner = planner.borrow_mut();
        let plan = match direction {
            Direction::Forward => planner.plan_fft_forward(n),
            Direction::Inverse => planner.plan_fft_inverse(n),
        };
        plan.process(&mut buf);
    });
    let global = Complex64::from_polar(grid.spacing(), sign * 2.0 * PI * ((n % 4) as f64) / 4.0);
    for (j, v) in buf.iter_mut().enumerate() {
        *v *= if j % 2 == 1 { -global } else { global };
    }
    SampledFunction::from_finite(grid.dual(), buf)
}

/// Unitary transform onto the dual grid: `f̂(ξ_j) ≈ ∫ f(t) e^{-2πitξ_j} dt`.
pub fn fourier(f: &SampledFunction) -> SampledFunction {
    centered_dft(f, Direction::Forward)
}

/// Adjoint (and inverse) of [`fourier`].
pub fn inverse_fourier(f: &SampledFunction) -> SampledFunction {
    centered_dft(f, Direction::Inverse)
}

/// Quadrature pairing `dt·Σ f_k conj(g_k)`.
pub fn inner_product(f: &SampledFunction, g: &SampledFunction) -> Result<Complex64> {
    f.grid.ensure_same(&g.grid)?;
    let sum: Complex64 = f
        .values
        .iter()
        .zip(&g.values)
        .map(|(a, b)| a * b.conj())
        .sum();
    Ok(sum * f.grid.spacing())
}

pub fn l2_distance(f: &SampledFunction, g: &SampledFunction) -> Result<f64> {
    f.grid.ensure_same(&g.grid)?;
    let sum: f64 = f
        .values
        .iter()
        .zip(&g.values)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok((sum * f.grid.spacing()).sqrt())
}

/// Mass outside the window: `dt·Σ_{|t_k| ≥ radius} |f_k|²`.
pub fn tail_mass(f: &SampledFunction, radius: f64) -> Result<f64> {
    let half = f.grid.extent() / 2.0;
    if !(radius > 0.0 && radius <= half) {
        return Err(invalid(format!(
            "tail radius {radius} must lie in (0, {half}] for this grid"
        )));
    }
    let dt = f.grid.spacing();
    // a sample sitting exactly on |t| = R contributes half its cell
    let edge = 1e-9 * dt;
    let sum: f64 = f
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let d = f.grid.point(k).abs() - radius;
            if d > edge {
                v.norm_sqr()
            } else if d >= -edge {
                0.5 * v.norm_sqr()
            } else {
                0.0
            }
        })
        .sum();
    Ok(sum * dt)
}

/// Piecewise-constant function built from disjoint intervals.
///
/// Sampling assigns each grid cell `[t_k - dt/2, t_k + dt/2]` the root mean
/// energy of the function over the cell. A jump lying on a sample therefore
/// gets `sqrt((|left|² + |right|²)/2)` and the quadrature norm reproduces the
/// continuous one exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    pieces: Vec<(f64, f64, f64)>,
}

impl StepFunction {
    pub fn new(pieces: Vec<(f64, f64, f64)>) -> Result<Self> {
        let mut sorted = pieces.clone();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        for p in &sorted {
            if !(p.0 < p.1) || !p.2.is_finite() {
                return Err(invalid(format!("malformed step piece {p:?}")));
            }
        }
        if sorted.windows(2).any(|w| w[1].0 < w[0].1) {
            return Err(invalid("step pieces overlap"));
        }
        Ok(StepFunction { pieces })
    }

    /// The characteristic function of `[a, b]`.
    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![(a, b, 1.0)])
    }

    /// Squared L² norm of the continuous function.
    pub fn energy(&self) -> f64 {
        self.pieces.iter().map(|(a, b, c)| (b - a) * c * c).sum()
    }

    pub fn sample(&self, grid: Grid) -> Result<SampledFunction> {
        let n = grid.n_points();
        let dt = grid.spacing();
        let mut energy = vec![0.0; n];
        let mut dominant = vec![(0.0f64, 0.0f64); n];
        let lo = grid.point(0) - dt / 2.0;
        for &(a, b, c) in &self.pieces {
            let first = (((a - lo) / dt).floor().max(0.0)) as usize;
            let last = (((b - lo) / dt).ceil().max(0.0) as usize).min(n);
            for k in first..last {
                let t = grid.point(k);
                let overlap = (b.min(t + dt / 2.0) - a.max(t - dt / 2.0)).max(0.0);
                if overlap <= 0.0 {
                    continue;
                }
                energy[k] += c * c * overlap / dt;
                if overlap >= dominant[k].0 {
                    dominant[k] = (overlap, c.signum());
                }
            }
        }
        let values = energy
            .iter()
            .zip(&dominant)
            .map(|(e, (_, s))| Complex64::new(s * e.sqrt(), 0.0))
            .collect();
        SampledFunction::from_values(grid, values)
    }
}
