//! Chebyshev series on Gauss–Lobatto nodes `x_i = cos(i pi / N)`.
//!
//! Transforms go through a complex FFT of length `2N` applied to the even
//! extension of the samples (a type-I DCT).

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Default magnitude threshold of [`spectral_filter`].
pub const FILTER_EPS: f64 = 1e-14;

fn degree_of(len: usize) -> Result<usize> {
    if len < 3 || (len - 1) % 2 != 0 {
        return Err(Error::BadLength(len));
    }
    Ok(len - 1)
}

/// Reusable forward/inverse transform for one degree `N`.
pub struct ChebTransform {
    degree: usize,
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl std::fmt::Debug for ChebTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChebTransform").field("degree", &self.degree).finish()
    }
}

impl Clone for ChebTransform {
    fn clone(&self) -> Self {
        Self {
            degree: self.degree,
            fft: Arc::clone(&self.fft),
            buf: self.buf.clone(),
            scratch: self.scratch.clone(),
        }
    }
}

impl ChebTransform {
    pub fn new(degree: usize) -> Result<Self> {
        degree_of(degree + 1)?;
        let fft = FftPlanner::new().plan_fft_forward(2 * degree);
        let scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        Ok(Self { degree, fft, buf: vec![Complex64::new(0.0, 0.0); 2 * degree], scratch })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Node values (index 0 at `x = +1`) to coefficients `a_0..a_N`.
    pub fn forward(&mut self, values: &[Complex64], coeffs: &mut [Complex64]) -> Result<()> {
        let n = self.degree;
        if values.len() != n + 1 || coeffs.len() != n + 1 {
            return Err(Error::BadLength(values.len().max(coeffs.len())));
        }
        self.buf[..=n].copy_from_slice(values);
        for j in 1..n {
            self.buf[2 * n - j] = values[j];
        }
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        let inv = 1.0 / n as f64;
        for k in 0..=n {
            coeffs[k] = self.buf[k] * inv;
        }
        coeffs[0] *= 0.5;
        coeffs[n] *= 0.5;
        Ok(())
    }

    /// Coefficients to node values.
    pub fn inverse(&mut self, coeffs: &[Complex64], values: &mut [Complex64]) -> Result<()> {
        let n = self.degree;
        if values.len() != n + 1 || coeffs.len() != n + 1 {
            return Err(Error::BadLength(values.len().max(coeffs.len())));
        }
        self.buf[0] = coeffs[0];
        self.buf[n] = coeffs[n];
        for k in 1..n {
            let h = coeffs[k] * 0.5;
            self.buf[k] = h;
            self.buf[2 * n - k] = h;
        }
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        values.copy_from_slice(&self.buf[..=n]);
        Ok(())
    }
}

/// Coefficients of the polynomial interpolating `values` at the nodes.
pub fn cheb_transform(values: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = degree_of(values.len())?;
    let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
    ChebTransform::new(n)?.forward(values, &mut out)?;
    Ok(out)
}

/// Node values of a Chebyshev series.
pub fn cheb_inverse(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = degree_of(coeffs.len())?;
    let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
    ChebTransform::new(n)?.inverse(coeffs, &mut out)?;
    Ok(out)
}

/// Coefficients of `d/ds` of the series in `s = L x`, written into `out`.
pub fn cheb_derivative_into(coeffs: &[Complex64], half_width: f64, out: &mut [Complex64]) {
    let n = coeffs.len() - 1;
    out[n] = Complex64::new(0.0, 0.0);
    if n == 0 {
        return;
    }
    out[n - 1] = coeffs[n] * (2.0 * n as f64);
    for k in (1..n).rev() {
        let next = if k + 1 <= n { out[k + 1] } else { Complex64::new(0.0, 0.0) };
        out[k - 1] = next + coeffs[k] * (2.0 * k as f64);
    }
    out[0] *= 0.5;
    let scale = 1.0 / half_width;
    for b in out.iter_mut() {
        *b *= scale;
    }
}

/// Coefficients `b_k` of `d/ds`, including the `1/L` factor.
pub fn cheb_derivative(coeffs: &[Complex64], half_width: f64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); coeffs.len()];
    cheb_derivative_into(coeffs, half_width, &mut out);
    out
}

/// Coefficients (degree `N + 1`) of an antiderivative in `s = L x`.
/// The constant term is zero.
pub fn cheb_antiderivative(coeffs: &[Complex64], half_width: f64) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let a = |k: usize| if k <= n { coeffs[k] } else { Complex64::new(0.0, 0.0) };
    let mut out = vec![Complex64::new(0.0, 0.0); n + 2];
    for k in 1..=n + 1 {
        let prev = if k == 1 { a(0) * 2.0 } else { a(k - 1) };
        out[k] = (prev - a(k + 1)) * (half_width / (2.0 * k as f64));
    }
    out
}

/// Series value at `x = 1`, `x = -1`, and `x = 0`.
pub fn endpoint_values(coeffs: &[Complex64]) -> (Complex64, Complex64, Complex64) {
    let mut plus = Complex64::new(0.0, 0.0);
    let mut minus = Complex64::new(0.0, 0.0);
    let mut zero = Complex64::new(0.0, 0.0);
    for (k, a) in coeffs.iter().enumerate() {
        plus += a;
        if k % 2 == 0 {
            minus += a;
            zero += if (k / 2) % 2 == 0 { *a } else { -a };
        } else {
            minus -= a;
        }
    }
    (plus, minus, zero)
}

/// Clenshaw evaluation of the series at reference coordinate `x`.
pub fn clenshaw(coeffs: &[Complex64], x: f64) -> Complex64 {
    let mut b1 = Complex64::new(0.0, 0.0);
    let mut b2 = Complex64::new(0.0, 0.0);
    for a in coeffs.iter().skip(1).rev() {
        let b0 = a + b1 * (2.0 * x) - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs[0] + b1 * x - b2
}

/// Evaluate a series on `[-L, L]` at arbitrary points.
pub fn spectral_interpolate(coeffs: &[Complex64], half_width: f64, targets: &[f64]) -> Result<Vec<Complex64>> {
    targets
        .iter()
        .map(|&s| {
            if s.abs() > half_width * (1.0 + 1e-14) {
                return Err(Error::OutOfDomain { point: s, half_width });
            }
            Ok(clenshaw(coeffs, (s / half_width).clamp(-1.0, 1.0)))
        })
        .collect()
}

/// Zero every coefficient with modulus below `eps`. Returns how many changed.
pub fn spectral_filter(coeffs: &mut [Complex64], eps: f64) -> usize {
    let mut zeroed = 0;
    for a in coeffs.iter_mut() {
        if a.norm() < eps && (a.re != 0.0 || a.im != 0.0) {
            *a = Complex64::new(0.0, 0.0);
            zeroed += 1;
        }
    }
    zeroed
}

/// Coefficients of the same series on degree `new_degree >= N` (zero padding).
pub fn zero_pad(coeffs: &[Complex64], new_degree: usize) -> Vec<Complex64> {
    let mut out = coeffs.to_vec();
    out.resize(new_degree + 1, Complex64::new(0.0, 0.0));
    out
}
