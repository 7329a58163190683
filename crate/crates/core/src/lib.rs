//! Numerical laboratory for self-similar solutions of the vortex filament
//! equation `X_t = X_s ∧ X_ss` and its tangent flow `T_t = T ∧ T_ss`, in
//! Euclidean and hyperbolic geometry.
//!
//! * [`geometry`]: signed-metric products, normalization, stereographic maps.
//! * [`selfsim`]: exact self-similar frames and profiles, asymptotic constants.
//! * [`fd`]: explicit finite differences for `T`.
//! * [`spectral`]: Chebyshev collocation for the stereographic field `z`.
//! * [`diagnostics`]: curvature, torsion, energy, error metrics.
//! * [`config`], [`experiment`]: canonical experiments and their outputs.

pub mod chebyshev;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod fd;
pub mod geometry;
pub mod grid;
pub mod report;
pub mod selfsim;
pub mod spectral;

pub use error::{Error, Result};
pub use geometry::{Metric, Vec3};
