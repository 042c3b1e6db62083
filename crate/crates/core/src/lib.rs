//! Time-frequency concentration toolkit.
//!
//! Functions on the real line are represented by samples on a centered
//! uniform [`grid::Grid`]. On top of that the crate computes generalized
//! p-means and p-dispersions ([`moments`]), builds Gaussian Gabor systems and
//! an exact system with uniformly bounded concentration ([`systems`]), and
//! evaluates the quantitative ingredients of the uncertainty obstructions for
//! such systems: separation and covering counts ([`separation`]),
//! Kolmogorov–Riesz compactness moduli ([`compactness`]) and finite-section
//! frame diagnostics ([`frames`]).

// `!(x > 0.0)` style guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compactness;
pub mod error;
pub mod exec;
pub mod frames;
pub mod grid;
pub mod io;
pub mod minimize;
pub mod moments;
mod quadrature;
pub mod separation;
pub mod systems;
pub mod testfns;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
pub use grid::{
    fourier, inner_product, inverse_fourier, make_grid, tail_mass, Grid, SampledFunction,
    StepFunction,
};
pub use moments::{concentration_report, p_dispersion, p_mean, ConcentrationReport};

pub use num_complex::Complex64;
