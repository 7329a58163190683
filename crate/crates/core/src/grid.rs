use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `N + 1` equally spaced nodes `s_i = -L + i ds` on `[-L, L]`, `N` even.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub half_width: f64,
    pub intervals: usize,
    pub ds: f64,
}

impl UniformGrid {
    pub fn new(half_width: f64, intervals: usize) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidGrid(format!("half-width {half_width} must be positive")));
        }
        if intervals < 2 || intervals % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "interval count {intervals} must be even and >= 2"
            )));
        }
        Ok(Self { half_width, intervals, ds: 2.0 * half_width / intervals as f64 })
    }

    /// Grid with spacing `ds`; `2L / ds` must be (close to) an even integer.
    pub fn with_spacing(half_width: f64, ds: f64) -> Result<Self> {
        if !(ds > 0.0) || ds > half_width {
            return Err(Error::InvalidGrid(format!("spacing {ds} must lie in (0, L]")));
        }
        let n = 2.0 * half_width / ds;
        let rounded = n.round();
        if (n - rounded).abs() > 1e-6 * n.max(1.0) {
            return Err(Error::InvalidGrid(format!("spacing {ds} does not divide 2L = {}", 2.0 * half_width)));
        }
        Self::new(half_width, rounded as usize)
    }

    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        // Symmetric evaluation keeps the centre node exactly zero.
        let c = self.center() as isize;
        (i as isize - c) as f64 * self.ds
    }

    pub fn center(&self) -> usize {
        self.intervals / 2
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// Index of the node closest to `s` (clamped to the grid).
    pub fn nearest(&self, s: f64) -> usize {
        let i = ((s + self.half_width) / self.ds).round();
        i.clamp(0.0, self.intervals as f64) as usize
    }
}

/// Chebyshev–Gauss–Lobatto nodes `s_i = L cos(i pi / N)`, `i = 0..=N`.
///
/// Index 0 is `s = +L` and index `N` is `s = -L`; the centre `i = N/2` is `s = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevGrid {
    pub half_width: f64,
    pub degree: usize,
}

impl ChebyshevGrid {
    pub fn new(half_width: f64, degree: usize) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidGrid(format!("half-width {half_width} must be positive")));
        }
        if degree < 4 || degree % 2 != 0 {
            return Err(Error::InvalidGrid(format!("degree {degree} must be even and >= 4")));
        }
        Ok(Self { half_width, degree })
    }

    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Reference coordinate `x_i = cos(i pi / N)` in `[-1, 1]`.
    #[inline]
    pub fn reference_node(&self, i: usize) -> f64 {
        // sin form is symmetric about the centre and gives an exact zero there.
        let n = self.degree as f64;
        (std::f64::consts::PI * (n - 2.0 * i as f64) / (2.0 * n)).sin()
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.half_width * self.reference_node(i)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    pub fn center(&self) -> usize {
        self.degree / 2
    }

    pub fn refined(&self) -> Self {
        Self { half_width: self.half_width, degree: 2 * self.degree }
    }
}
