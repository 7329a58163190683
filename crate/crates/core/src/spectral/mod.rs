//! Chebyshev collocation solver for the stereographic equation
//! `z_t = i z_ss ∓ 2i z̄ z_s² / (1 ± |z|²)`.
//!
//! The linear part is implicit (BDF2), the nonlinearity explicit. Derivatives
//! are taken in coefficient space and products at the nodes.

mod run;
mod stepper;
pub mod tau;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chebyshev::{cheb_transform, spectral_interpolate};
use crate::error::Result;
use crate::geometry::Metric;
use crate::grid::ChebyshevGrid;
use crate::selfsim::AsymptoticConstants;

pub use run::{
    exact_state, spectral_run_backward, spectral_run_forward, spectral_run_forward_two_stage, step_datum, SpectralOutcome,
    SpectralRunOptions, StageOptions, TwoStageOutcome,
};
pub use stepper::{bootstrap_first_step, sbdf2_step, Stepper, StepLevel};

/// Samples and coefficients of `z` on a Chebyshev grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZFieldState {
    pub grid: ChebyshevGrid,
    pub values: Vec<Complex64>,
    pub coeffs: Vec<Complex64>,
    pub t: f64,
    pub metric: Metric,
    pub dt: f64,
}

impl ZFieldState {
    pub fn from_values(grid: ChebyshevGrid, values: Vec<Complex64>, t: f64, metric: Metric, dt: f64) -> Result<Self> {
        let coeffs = cheb_transform(&values)?;
        Ok(Self { grid, values, coeffs, t, metric, dt })
    }

    /// Evaluate the series at arbitrary points of `[-L, L]`.
    pub fn interpolate(&self, targets: &[f64]) -> Result<Vec<Complex64>> {
        spectral_interpolate(&self.coeffs, self.grid.half_width, targets)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralBcKind {
    ProjectedSecondOrder,
    SelfSimilarity,
    Radiation,
    Fixed,
}

impl SpectralBcKind {
    pub fn name(self) -> &'static str {
        match self {
            SpectralBcKind::ProjectedSecondOrder => "projected_second_order",
            SpectralBcKind::SelfSimilarity => "self_similarity",
            SpectralBcKind::Radiation => "radiation",
            SpectralBcKind::Fixed => "fixed",
        }
    }
}

/// Boundary strategy with whatever data it needs.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralBc {
    /// Dirichlet values from the two-term tangent asymptotics, projected.
    ProjectedSecondOrder(AsymptoticConstants),
    /// `z_t = -(s / 2t) z_s` at `s = ±L`, leapfrog in time.
    SelfSimilarity,
    /// Neumann data carrying the self-similar Hasimoto amplitude.
    Radiation { c0: f64 },
    /// Constant Dirichlet values at `s = +L` and `s = -L`.
    Fixed { plus: Complex64, minus: Complex64 },
}

impl SpectralBc {
    pub fn kind(&self) -> SpectralBcKind {
        match self {
            SpectralBc::ProjectedSecondOrder(_) => SpectralBcKind::ProjectedSecondOrder,
            SpectralBc::SelfSimilarity => SpectralBcKind::SelfSimilarity,
            SpectralBc::Radiation { .. } => SpectralBcKind::Radiation,
            SpectralBc::Fixed { .. } => SpectralBcKind::Fixed,
        }
    }
}
