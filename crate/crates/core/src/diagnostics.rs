//! Geometric observables: curvature, torsion, frames recovered from `z`,
//! the energy `∫ c² ds`, and errors against the law `c = c0 / sqrt(t)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dot_pm, stereo_inverse, wedge_pm, Metric, Vec3};
use crate::grid::UniformGrid;
use crate::selfsim::FrameTriad;

/// Below this `|z_s|` the frame and torsion are undefined.
pub const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureProfile {
    pub s: Vec<f64>,
    pub c: Vec<f64>,
    pub t: f64,
    /// Nodes where a negative radicand was clamped to zero.
    pub clamped: Vec<usize>,
}

impl CurvatureProfile {
    pub fn max(&self) -> f64 {
        self.c.iter().copied().fold(f64::NAN, f64::max)
    }

    /// Value at the node closest to `s = 0`.
    pub fn at_origin(&self) -> f64 {
        self.c[nearest_index(&self.s, 0.0)]
    }
}

fn nearest_index(s: &[f64], x: f64) -> usize {
    let mut best = 0;
    for (i, v) in s.iter().enumerate() {
        if (v - x).abs() < (s[best] - x).abs() {
            best = i;
        }
    }
    best
}

fn curvature_from_derivatives(ts: &[Vec3], m: Metric, s: Vec<f64>, t: f64) -> CurvatureProfile {
    let mut clamped = Vec::new();
    let c = ts
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let q = dot_pm(*d, *d, m);
            if q < 0.0 {
                clamped.push(i);
                0.0
            } else {
                q.sqrt()
            }
        })
        .collect();
    CurvatureProfile { s, c, t, clamped }
}

/// `c = sqrt(T_s ∘ T_s)` with centred differences inside and one-sided
/// second-order differences at both ends.
pub fn curvature_from_t(tangents: &[Vec3], grid: &UniformGrid, m: Metric, t: f64) -> CurvatureProfile {
    let n = tangents.len();
    assert!(n >= 3 && n == grid.len(), "need a tangent per grid node (>= 3)");
    let h = 1.0 / grid.ds;
    let mut ts = Vec::with_capacity(n);
    ts.push((tangents[0] * -3.0 + tangents[1] * 4.0 - tangents[2]) * (0.5 * h));
    for i in 1..n - 1 {
        ts.push((tangents[i + 1] - tangents[i - 1]) * (0.5 * h));
    }
    ts.push((tangents[n - 1] * 3.0 - tangents[n - 2] * 4.0 + tangents[n - 3]) * (0.5 * h));
    curvature_from_derivatives(&ts, m, grid.nodes(), t)
}

/// Finite-difference weights for the first derivative at `x0` on the
/// stencil `xs` (Fornberg's recursion).
pub fn derivative_weights(x0: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    // c[j][k]: weight of node j for derivative order k (k = 0, 1).
    let mut c = vec![[0.0f64; 2]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|w| w[1]).collect()
}

/// Curvature from `T` with nine-point (eighth-order) first differences.
///
/// The stencil is centred where it fits and shifted inward at the ends.
/// Meant for checking exact profiles, where the second-order formula's
/// `ds² τ² / 6` relative error dominates at large `|s|`.
pub fn curvature_from_t_high_order(tangents: &[Vec3], grid: &UniformGrid, m: Metric, t: f64) -> CurvatureProfile {
    const WIDTH: usize = 9;
    let n = tangents.len();
    assert!(n >= WIDTH && n == grid.len(), "need a tangent per grid node (>= 9)");
    let offsets: Vec<f64> = (0..WIDTH).map(|k| k as f64).collect();
    let table: Vec<Vec<f64>> = (0..WIDTH)
        .map(|p| derivative_weights(p as f64, &offsets).into_iter().map(|w| w / grid.ds).collect())
        .collect();
    let half = WIDTH / 2;
    let ts: Vec<Vec3> = (0..n)
        .map(|i| {
            let start = i.saturating_sub(half).min(n - WIDTH);
            let w = &table[i - start];
            let mut d = Vec3::ZERO;
            for (k, wk) in w.iter().enumerate() {
                d += tangents[start + k] * *wk;
            }
            d
        })
        .collect();
    curvature_from_derivatives(&ts, m, grid.nodes(), t)
}

/// `c = 2 |z_s| / (1 ± |z|²)`.
pub fn curvature_from_z(z: &[Complex64], zs: &[Complex64], m: Metric) -> Vec<f64> {
    let sg = m.sign();
    z.iter().zip(zs).map(|(z, d)| 2.0 * d.norm() / (1.0 + sg * z.norm_sqr())).collect()
}

/// `τ = 2 Im(z z̄_s) / (|z|² ± 1) + Im(z̄_s z_ss) / |z_s|²`; NaN where `|z_s| <= 1e-12`.
pub fn torsion_from_z(z: &[Complex64], zs: &[Complex64], zss: &[Complex64], m: Metric) -> Vec<f64> {
    let sg = m.sign();
    z.iter()
        .zip(zs)
        .zip(zss)
        .map(|((z, d), dd)| {
            let q = d.norm_sqr();
            if q.sqrt() <= DEGENERATE_TOL {
                return f64::NAN;
            }
            2.0 * (z * d.conj()).im / (z.norm_sqr() + sg) + (d.conj() * dd).im / q
        })
        .collect()
}

/// Frame `(T, e1, e2)` from `z` and `z_s`: `e1 = T_s / c`, `e2 = T ∧ e1`.
pub fn frame_from_z(z: &[Complex64], zs: &[Complex64], m: Metric) -> Result<Vec<FrameTriad>> {
    let sg = m.sign();
    z.iter()
        .zip(zs)
        .map(|(z, d)| {
            let modulus = d.norm();
            if modulus <= DEGENERATE_TOL {
                return Err(Error::FrameDegenerate { modulus });
            }
            let (x, y, xs, ys) = (z.re, z.im, d.re, d.im);
            let den = 1.0 + sg * (x * x + y * y);
            let k = 1.0 / (modulus * den);
            let e1 = Vec3::new(
                (xs * (1.0 - sg * x * x + sg * y * y) - 2.0 * sg * x * y * ys) * k,
                (ys * (1.0 + sg * x * x - sg * y * y) - 2.0 * sg * x * y * xs) * k,
                (-2.0 * sg * (x * xs + y * ys)) * k,
            );
            let t = stereo_inverse(*z, m)?;
            Ok(FrameTriad { t, e1, e2: wedge_pm(t, e1, m) })
        })
        .collect()
}

/// Largest `|s|` where `c` exceeds a tenth of `c0 / sqrt(t)`.
pub fn curvature_front(profile: &CurvatureProfile, c0: f64) -> f64 {
    let level = 0.1 * c0 / profile.t.sqrt();
    profile
        .s
        .iter()
        .zip(&profile.c)
        .filter(|(_, c)| **c > level)
        .map(|(s, _)| s.abs())
        .fold(0.0, f64::max)
}

/// Trapezoidal `∫ c² ds` over nodes in either order.
pub fn energy_trapezoid(c: &[f64], s: &[f64]) -> f64 {
    c.windows(2)
        .zip(s.windows(2))
        .map(|(cw, sw)| 0.5 * (cw[0] * cw[0] + cw[1] * cw[1]) * (sw[1] - sw[0]).abs())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureError {
    pub max_abs: f64,
    pub l2: f64,
    pub at_origin: f64,
}

impl CurvatureError {
    pub fn max_relative(&self, c0: f64, t: f64) -> f64 {
        self.max_abs / (c0 / t.sqrt())
    }
}

/// Error of `c` against `c0 / sqrt(t)` on nodes with `s` inside `window`.
///
/// `l2` is the trapezoidal `sqrt(∫ (c - c_exact)² ds)` over the window.
pub fn curvature_error(profile: &CurvatureProfile, c0: f64, window: (f64, f64)) -> CurvatureError {
    let exact = c0 / profile.t.sqrt();
    let (lo, hi) = (window.0.min(window.1), window.0.max(window.1));
    let mut max_abs: f64 = 0.0;
    let mut err = Vec::new();
    let mut nodes = Vec::new();
    for (s, c) in profile.s.iter().zip(&profile.c) {
        if *s >= lo - 1e-12 && *s <= hi + 1e-12 {
            let e = c - exact;
            max_abs = if e.is_nan() { f64::NAN } else { max_abs.max(e.abs()) };
            err.push(e);
            nodes.push(*s);
        }
    }
    CurvatureError {
        max_abs,
        l2: energy_trapezoid(&err, &nodes).sqrt(),
        at_origin: (profile.at_origin() - exact).abs(),
    }
}
