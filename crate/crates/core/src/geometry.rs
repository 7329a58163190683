//! Signed-metric vector algebra on R^3 and the stereographic chart.
//!
//! Every operation takes a [`Metric`]. The Euclidean metric is the usual
//! dot/cross product and the tangent lives on the unit sphere. The hyperbolic
//! metric flips the sign of the third component of both products, and the
//! tangent lives on the upper sheet of the hyperboloid `T . T = -1`.
//!
//! For the generalized Frenet frame `(T, e1, e2)` the wedge relations are
//! `T ^ e1 = e2`, `e2 ^ T = e1` and `e1 ^ e2 = sign * T`: with the initial
//! frame `T = (0,0,1)`, `e1 = (1,0,0)`, `e2 = (0,1,0)` the third relation is
//! `(0, 0, sign)`. Only the `sign * T` form is consistent with the definition
//! of the product.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stereographic coordinate `x + iy`.
pub type ComplexSample = Complex64;

/// Radicands at or below this are treated as a degenerate frame.
pub const NORMALIZE_TOL: f64 = 1e-14;
/// Minimum distance of `1 + T3` from zero for the projection.
pub const POLE_TOL: f64 = 1e-12;
/// Minimum distance of `|z|^2` from the unit circle in the hyperbolic chart.
pub const DISC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Hyperbolic,
}

impl Metric {
    /// `+1` for the sphere, `-1` for the hyperboloid.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Metric::Euclidean => 1.0,
            Metric::Hyperbolic => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Hyperbolic => "hyperbolic",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "+" | "sphere" => Ok(Metric::Euclidean),
            "hyperbolic" | "-" | "hyperboloid" => Ok(Metric::Hyperbolic),
            other => Err(format!("unknown metric '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);
    pub const E1: Vec3 = Vec3([1.0, 0.0, 0.0]);
    pub const E2: Vec3 = Vec3([0.0, 1.0, 0.0]);
    pub const E3: Vec3 = Vec3([0.0, 0.0, 1.0]);

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.0[0]
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.0[1]
    }

    #[inline]
    pub fn z(&self) -> f64 {
        self.0[2]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Ordinary Euclidean length, regardless of metric.
    pub fn euclidean_norm(&self) -> f64 {
        dot_pm(*self, *self, Metric::Euclidean).sqrt()
    }

    pub fn max_abs_diff(&self, other: &Vec3) -> f64 {
        (0..3)
            .map(|k| (self.0[k] - other.0[k]).abs())
            .fold(0.0, f64::max)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        for k in 0..3 {
            self.0[k] += o.0[k];
        }
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, k: f64) -> Vec3 {
        Vec3([self.0[0] * k, self.0[1] * k, self.0[2] * k])
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

/// A complex vector `re + i im`, used for `e1 - i e2` and its limits.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexVec3 {
    pub re: Vec3,
    pub im: Vec3,
}

impl ComplexVec3 {
    pub fn new(re: Vec3, im: Vec3) -> Self {
        Self { re, im }
    }

    /// Multiply every component by the unit complex number `exp(i phase)`.
    pub fn rotate(&self, phase: f64) -> Self {
        let (s, c) = phase.sin_cos();
        Self {
            re: self.re * c - self.im * s,
            im: self.re * s + self.im * c,
        }
    }
}

/// `a o b = a1 b1 + a2 b2 + sign a3 b3`.
#[inline]
pub fn dot_pm(a: Vec3, b: Vec3, m: Metric) -> f64 {
    a.0[0] * b.0[0] + a.0[1] * b.0[1] + m.sign() * a.0[2] * b.0[2]
}

/// Generalized cross product; the third component carries the metric sign.
#[inline]
pub fn wedge_pm(a: Vec3, b: Vec3, m: Metric) -> Vec3 {
    let [a1, a2, a3] = a.0;
    let [b1, b2, b3] = b.0;
    Vec3([
        a2 * b3 - a3 * b2,
        a3 * b1 - a1 * b3,
        m.sign() * (a1 * b2 - a2 * b1),
    ])
}

/// Which signed norm [`normalize`] should produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormTarget {
    /// `w o w = 1` (the frame vectors `e1`, `e2`).
    PlusOne,
    /// `w o w = sign` (the tangent `T`).
    MetricSign,
}

/// Rescale `v` to the requested signed unit length.
///
/// The radicand is `v o v` for [`NormTarget::PlusOne`] and `sign * (v o v)`
/// for [`NormTarget::MetricSign`]; it must be positive.
pub fn normalize(v: Vec3, target: NormTarget, m: Metric) -> Result<Vec3> {
    let q = dot_pm(v, v, m);
    let radicand = match target {
        NormTarget::PlusOne => q,
        NormTarget::MetricSign => m.sign() * q,
    };
    if !(radicand > NORMALIZE_TOL) {
        return Err(Error::NonNormalizable { radicand });
    }
    Ok(v * radicand.sqrt().recip())
}

/// Project a tangent from `(0, 0, -1)` onto the plane: `(T1 + i T2) / (1 + T3)`.
pub fn stereo_project(t: Vec3, _m: Metric) -> Result<ComplexSample> {
    let denominator = 1.0 + t.z();
    if !(denominator > POLE_TOL) {
        return Err(Error::ProjectionPole { denominator });
    }
    Ok(ComplexSample::new(t.x() / denominator, t.y() / denominator))
}

/// Inverse of [`stereo_project`].
pub fn stereo_inverse(z: ComplexSample, m: Metric) -> Result<Vec3> {
    let r2 = z.norm_sqr();
    if m == Metric::Hyperbolic && r2 >= 1.0 - DISC_TOL {
        return Err(Error::DiscBoundary { modulus_sq: r2 });
    }
    let sg = m.sign();
    let den = 1.0 + sg * r2;
    Ok(Vec3([2.0 * z.re / den, 2.0 * z.im / den, (1.0 - sg * r2) / den]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EU: Metric = Metric::Euclidean;
    const HY: Metric = Metric::Hyperbolic;

    #[test]
    fn dot_examples() {
        assert_eq!(dot_pm(Vec3::E3, Vec3::E3, EU), 1.0);
        assert_eq!(dot_pm(Vec3::E3, Vec3::E3, HY), -1.0);
        assert_eq!(
            dot_pm(Vec3::new(1., 2., 3.), Vec3::new(4., 5., 6.), EU),
            32.0
        );
    }

    #[test]
    fn wedge_examples() {
        assert_eq!(wedge_pm(Vec3::E1, Vec3::E2, EU), Vec3::E3);
        assert_eq!(wedge_pm(Vec3::E1, Vec3::E2, HY), Vec3::new(0., 0., -1.));
        assert_eq!(wedge_pm(Vec3::E2, Vec3::E3, EU), Vec3::E1);
    }

    #[test]
    fn frame_wedge_relations() {
        // T = e3, e1, e2 as in the profile's initial frame.
        for m in [EU, HY] {
            let (t, e1, e2) = (Vec3::E3, Vec3::E1, Vec3::E2);
            assert_eq!(wedge_pm(t, e1, m), e2);
            assert_eq!(wedge_pm(e2, t, m), e1);
            assert_eq!(wedge_pm(e1, e2, m), t * m.sign());
        }
    }

    #[test]
    fn normalize_examples() {
        let v = Vec3::new(0., 0., 2.);
        assert_eq!(normalize(v, NormTarget::MetricSign, EU).unwrap(), Vec3::E3);
        assert_eq!(normalize(v, NormTarget::MetricSign, HY).unwrap(), Vec3::E3);
        let w = normalize(Vec3::new(3., 4., 0.), NormTarget::PlusOne, EU).unwrap();
        assert!(w.max_abs_diff(&Vec3::new(0.6, 0.8, 0.0)) < 1e-15);
    }

    #[test]
    fn normalize_rejects_wrong_sign() {
        // A spacelike vector cannot be put on the hyperboloid.
        let err = normalize(Vec3::E1, NormTarget::MetricSign, HY).unwrap_err();
        assert!(matches!(err, Error::NonNormalizable { .. }));
        assert!(normalize(Vec3::ZERO, NormTarget::PlusOne, EU).is_err());
    }

    #[test]
    fn projection_examples() {
        assert_eq!(stereo_project(Vec3::E3, EU).unwrap(), ComplexSample::new(0., 0.));
        assert_eq!(stereo_project(Vec3::E1, EU).unwrap(), ComplexSample::new(1., 0.));
        let z = stereo_project(Vec3::new(0., 0.6, 0.8), EU).unwrap();
        assert!((z.im - 1.0 / 3.0).abs() < 1e-15 && z.re == 0.0);
        assert!(matches!(
            stereo_project(Vec3::new(0., 0., -1.), EU),
            Err(Error::ProjectionPole { .. })
        ));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(stereo_inverse(ComplexSample::new(0., 0.), EU).unwrap(), Vec3::E3);
        assert_eq!(stereo_inverse(ComplexSample::new(1., 0.), EU).unwrap(), Vec3::E1);
        let t = stereo_inverse(ComplexSample::new(0.5, 0.), HY).unwrap();
        assert!(t.max_abs_diff(&Vec3::new(4. / 3., 0., 5. / 3.)) < 1e-15);
        assert!((dot_pm(t, t, HY) + 1.0).abs() < 1e-14);
        assert!(matches!(
            stereo_inverse(ComplexSample::new(1.0, 0.), HY),
            Err(Error::DiscBoundary { .. })
        ));
    }

    fn unit_sphere() -> impl Strategy<Value = Vec3> {
        // Keep away from the projection pole.
        (-0.95f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(z, phi)| {
            let r = (1.0 - z * z).sqrt();
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
    }

    fn hyperboloid() -> impl Strategy<Value = Vec3> {
        (0.0f64..3.0, 0.0f64..std::f64::consts::TAU).prop_map(|(rho, phi)| {
            Vec3::new(rho.sinh() * phi.cos(), rho.sinh() * phi.sin(), rho.cosh())
        })
    }

    fn unit_box() -> impl Strategy<Value = Vec3> {
        prop::array::uniform3(-1.0f64..1.0).prop_map(Vec3)
    }

    proptest! {
        #[test]
        fn sphere_round_trip(t in unit_sphere()) {
            let back = stereo_inverse(stereo_project(t, EU).unwrap(), EU).unwrap();
            prop_assert!(back.max_abs_diff(&t) < 1e-12);
            prop_assert!((dot_pm(back, back, EU) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn hyperboloid_round_trip(t in hyperboloid()) {
            let back = stereo_inverse(stereo_project(t, HY).unwrap(), HY).unwrap();
            // Components grow like cosh(3) ~ 10; compare relatively.
            prop_assert!(back.max_abs_diff(&t) < 1e-12 * t.euclidean_norm());
            prop_assert!((dot_pm(back, back, HY) + 1.0).abs() < 1e-12 * t.euclidean_norm().powi(2));
        }

        #[test]
        fn wedge_is_orthogonal(a in unit_box(), b in unit_box()) {
            for m in [EU, HY] {
                let w = wedge_pm(a, b, m);
                prop_assert!(dot_pm(w, a, m).abs() < 1e-12);
                prop_assert!(dot_pm(w, b, m).abs() < 1e-12);
            }
        }

        #[test]
        fn euclidean_wedge_is_cross(a in unit_box(), b in unit_box()) {
            let w = wedge_pm(a, b, EU);
            let [a1, a2, a3] = a.0;
            let [b1, b2, b3] = b.0;
            prop_assert_eq!(w, Vec3::new(a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1));
        }
    }
}
