//! Exact self-similar data: frame profiles, stereographic profiles, the
//! asymptotic constants `A^±`, `B^±`, and reconstruction of the filament.
//!
//! The self-similar family is indexed by `c0 >= 0`. At time `t` the frame
//! `(T, e1, e2)` solves a linear Frenet system with constant curvature
//! `c0 / sqrt(t)` and torsion `s / 2t`, starting from `T = (0,0,1)`,
//! `e1 = (1,0,0)`, `e2 = (0,1,0)` at `s = 0`.
//!
//! The profile has the reflection symmetry `T(-s) = R T(s)`,
//! `e1(-s) = -R e1(s)`, `e2(-s) = -R e2(s)` with `R = diag(-1, -1, 1)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    dot_pm, normalize, ComplexSample, ComplexVec3, Metric, NormTarget, Vec3,
};
use crate::grid::UniformGrid;

/// Largest phase advance `h * |generator|` allowed in one RK4 sub-step.
const MAX_PHASE_PER_STEP: f64 = 0.01;
/// Smallest half-width accepted by [`extract_asymptotics`].
pub const MIN_ASYMPTOTIC_LENGTH: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfSimilarParams {
    pub c0: f64,
    pub t: f64,
    pub metric: Metric,
}

impl SelfSimilarParams {
    pub fn new(c0: f64, t: f64, metric: Metric) -> Result<Self> {
        if !(c0 >= 0.0) || !c0.is_finite() {
            return Err(Error::InvalidParameter(format!("c0 = {c0} must be >= 0")));
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!("t = {t} must be > 0")));
        }
        Ok(Self { c0, t, metric })
    }

    /// Exact curvature `c0 / sqrt(t)`.
    pub fn curvature(&self) -> f64 {
        self.c0 / self.t.sqrt()
    }

    /// Exact torsion `s / 2t`.
    pub fn torsion(&self, s: f64) -> f64 {
        s / (2.0 * self.t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameTriad {
    pub t: Vec3,
    pub e1: Vec3,
    pub e2: Vec3,
}

impl FrameTriad {
    pub const INITIAL: FrameTriad = FrameTriad { t: Vec3::E3, e1: Vec3::E1, e2: Vec3::E2 };

    fn axpy(&self, h: f64, d: &FrameTriad) -> FrameTriad {
        FrameTriad { t: self.t + d.t * h, e1: self.e1 + d.e1 * h, e2: self.e2 + d.e2 * h }
    }

    fn renormalized(&self, m: Metric) -> Result<FrameTriad> {
        Ok(FrameTriad {
            t: normalize(self.t, NormTarget::MetricSign, m)?,
            e1: normalize(self.e1, NormTarget::PlusOne, m)?,
            e2: normalize(self.e2, NormTarget::PlusOne, m)?,
        })
    }

    /// Largest deviation from the signed orthonormality relations.
    pub fn orthonormality_defect(&self, m: Metric) -> f64 {
        [
            (dot_pm(self.t, self.t, m) - m.sign()).abs(),
            (dot_pm(self.e1, self.e1, m) - 1.0).abs(),
            (dot_pm(self.e2, self.e2, m) - 1.0).abs(),
            dot_pm(self.t, self.e1, m).abs(),
            dot_pm(self.t, self.e2, m).abs(),
            dot_pm(self.e1, self.e2, m).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// `e1 - i e2`.
    pub fn complex_normal(&self) -> ComplexVec3 {
        ComplexVec3::new(self.e1, -self.e2)
    }
}

/// Frames of the self-similar solution on a uniform grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameProfile {
    pub grid: UniformGrid,
    pub frames: Vec<FrameTriad>,
    pub params: SelfSimilarParams,
}

impl FrameProfile {
    pub fn tangents(&self) -> Vec<Vec3> {
        self.frames.iter().map(|f| f.t).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,T1,T2,T3,e11,e12,e13,e21,e22,e23\n");
        for (i, f) in self.frames.iter().enumerate() {
            let mut row = vec![self.grid.node(i)];
            row.extend_from_slice(&f.t.0);
            row.extend_from_slice(&f.e1.0);
            row.extend_from_slice(&f.e2.0);
            out.push_str(&crate::report::csv_row(&row));
        }
        out
    }
}

fn frenet_rhs(s: f64, y: &FrameTriad, kappa: f64, inv_2t: f64, sign: f64) -> FrameTriad {
    let tau = s * inv_2t;
    FrameTriad {
        t: y.e1 * kappa,
        e1: y.t * (-sign * kappa) + y.e2 * tau,
        e2: y.e1 * (-tau),
    }
}

/// One classical RK4 step of the Frenet system from `s` to `s + h`.
fn frenet_rk4(s: f64, h: f64, y: &FrameTriad, p: &SelfSimilarParams) -> FrameTriad {
    let kappa = p.curvature();
    let inv_2t = 0.5 / p.t;
    let sign = p.metric.sign();
    let k1 = frenet_rhs(s, y, kappa, inv_2t, sign);
    let k2 = frenet_rhs(s + 0.5 * h, &y.axpy(0.5 * h, &k1), kappa, inv_2t, sign);
    let k3 = frenet_rhs(s + 0.5 * h, &y.axpy(0.5 * h, &k2), kappa, inv_2t, sign);
    let k4 = frenet_rhs(s + h, &y.axpy(h, &k3), kappa, inv_2t, sign);
    let w = h / 6.0;
    FrameTriad {
        t: y.t + (k1.t + (k2.t + k3.t) * 2.0 + k4.t) * w,
        e1: y.e1 + (k1.e1 + (k2.e1 + k3.e1) * 2.0 + k4.e1) * w,
        e2: y.e2 + (k1.e2 + (k2.e2 + k3.e2) * 2.0 + k4.e2) * w,
    }
}

/// Equal RK4 sub-steps needed on `[a, a + h]` to keep the phase error small.
fn substeps(a: f64, h: f64, p: &SelfSimilarParams) -> usize {
    let s_far = a.abs().max((a + h).abs());
    let omega = p.curvature().hypot(p.torsion(s_far));
    ((h.abs() * omega / MAX_PHASE_PER_STEP).ceil() as usize).max(1)
}

/// Advance the frame from `s` to `s + h`, renormalizing after every sub-step.
fn frenet_advance(s: f64, h: f64, y: FrameTriad, p: &SelfSimilarParams) -> Result<FrameTriad> {
    let n = substeps(s, h, p);
    let hs = h / n as f64;
    let mut y = y;
    for k in 0..n {
        y = frenet_rk4(s + k as f64 * hs, hs, &y, p).renormalized(p.metric)?;
    }
    Ok(y)
}

/// Integrate the self-similar Frenet system on `[-L, L]` with spacing `ds`.
///
/// The integration starts from the exact frame at `s = 0` and sweeps
/// outward in both directions. Each grid interval is split into RK4
/// sub-steps so that the rotation per sub-step stays below 0.01 rad; the
/// torsion `s / 2t` reaches 25 at `s = 50`, where a single step of 0.01
/// would lose orthogonality at the 1e-6 level.
pub fn integrate_frenet_profile(p: SelfSimilarParams, length: f64, ds: f64) -> Result<FrameProfile> {
    let grid = UniformGrid::with_spacing(length, ds)?;
    integrate_frenet_on_grid(p, grid)
}

pub fn integrate_frenet_on_grid(p: SelfSimilarParams, grid: UniformGrid) -> Result<FrameProfile> {
    let n = grid.len();
    let c = grid.center();
    let mut frames = vec![FrameTriad::INITIAL; n];
    for dir in [1isize, -1] {
        let mut y = FrameTriad::INITIAL;
        let mut i = c as isize;
        loop {
            let j = i + dir;
            if j < 0 || j >= n as isize {
                break;
            }
            let s = grid.node(i as usize);
            let h = grid.node(j as usize) - s;
            y = frenet_advance(s, h, y, &p)?;
            frames[j as usize] = y;
            i = j;
        }
    }
    Ok(FrameProfile { grid, frames, params: p })
}

/// Frame at a single arclength value, integrated from `s = 0`.
pub fn frame_at(p: SelfSimilarParams, s: f64) -> Result<FrameTriad> {
    if s == 0.0 {
        return Ok(FrameTriad::INITIAL);
    }
    frenet_advance(0.0, s, FrameTriad::INITIAL, &p)
}

/// `A3 = exp(-sign c0^2 pi / 2)`: below one on the sphere, above one on the hyperboloid.
pub fn closed_form_a3(c0: f64, m: Metric) -> f64 {
    (-m.sign() * c0 * c0 * std::f64::consts::PI / 2.0).exp()
}

/// Corner directions `A^± = (± sqrt(sign (1 - exp(-sign c0^2 pi))), 0, A3)`.
///
/// These are the limits used for the step datum of the forward problem;
/// the self-similar profile has the same limits up to a rotation about the
/// third axis.
pub fn closed_form_corner(c0: f64, m: Metric) -> (Vec3, Vec3) {
    let sg = m.sign();
    let a1 = (sg * (1.0 - (-sg * c0 * c0 * std::f64::consts::PI).exp())).max(0.0).sqrt();
    let a3 = closed_form_a3(c0, m);
    (Vec3::new(-a1, 0.0, a3), Vec3::new(a1, 0.0, a3))
}

/// Which end of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Minus => -1.0,
            Side::Plus => 1.0,
        }
    }
}

/// Limits of `T` and of `e1 - i e2` as `s -> ±inf`.
///
/// `a_*` and `b_*` are the normalized limit vectors. `b_tilde_*` is
/// `(e1 - i e2)(±L, t_ref) exp(-i L^2 / 4 t_ref)`: it keeps the slowly
/// varying logarithmic phase of the reference time and is what the
/// second-order boundary formulas consume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticConstants {
    pub c0: f64,
    pub metric: Metric,
    pub length: f64,
    pub t_ref: f64,
    pub a_minus: Vec3,
    pub a_plus: Vec3,
    pub b_minus: ComplexVec3,
    pub b_plus: ComplexVec3,
    pub b_tilde_minus: ComplexVec3,
    pub b_tilde_plus: ComplexVec3,
}

impl AsymptoticConstants {
    pub fn a(&self, side: Side) -> Vec3 {
        match side {
            Side::Minus => self.a_minus,
            Side::Plus => self.a_plus,
        }
    }

    pub fn b(&self, side: Side) -> ComplexVec3 {
        match side {
            Side::Minus => self.b_minus,
            Side::Plus => self.b_plus,
        }
    }

    pub fn b_tilde(&self, side: Side) -> ComplexVec3 {
        match side {
            Side::Minus => self.b_tilde_minus,
            Side::Plus => self.b_tilde_plus,
        }
    }

    /// Two-term asymptotic tangent at `s = ±L`, time `t`, normalized:
    /// `A^+ + 2 c0 sqrt(t) Im[B~ e^{i L^2/4t}] / L` at `+L` and the same with
    /// the correction subtracted at `-L`.
    pub fn boundary_tangent(&self, side: Side, t: f64) -> Result<Vec3> {
        let l = self.length;
        let phase = l * l / (4.0 * t);
        let oscillation = self.b_tilde(side).rotate(phase).im;
        let amplitude = 2.0 * self.c0 * t.sqrt() / l;
        let raw = self.a(side) + oscillation * (side.sign() * amplitude);
        normalize(raw, NormTarget::MetricSign, self.metric)
    }
}

/// [`boundary_constants`] read off the exact profile at `s = ±length`.
pub fn boundary_constants_at(p: SelfSimilarParams, length: f64) -> Result<AsymptoticConstants> {
    boundary_constants(p.c0, p.metric, p.t, length, &frame_at(p, -length)?, &frame_at(p, length)?)
}

/// Constants estimated from the frames at `s = ±L` of a self-similar state at time `t`.
///
/// `A^±` is `λ T(±L) + 2 c0 sqrt(t) e2(±L) / (±L)`, removing the `1/s` term of
/// the tangent asymptotics, with `λ` fixing the norm of `A^±`. `B^±` removes the quadratic
/// phase and the logarithmic phase `exp(i sign c0^2 log(L / sqrt t))`, then
/// the component along `A^±` is projected out. `B~^±` keeps both, so
/// [`AsymptoticConstants::boundary_tangent`] reproduces `T(±L, t)` exactly.
pub fn boundary_constants(
    c0: f64,
    metric: Metric,
    t: f64,
    length: f64,
    minus: &FrameTriad,
    plus: &FrameTriad,
) -> Result<AsymptoticConstants> {
    let amplitude = 2.0 * c0 * t.sqrt() / length;
    let quad = length * length / (4.0 * t);
    let log_phase = metric.sign() * c0 * c0 * (length / t.sqrt()).ln();
    let sg = metric.sign();

    let estimate = |f: &FrameTriad, side: Side| -> Result<(Vec3, ComplexVec3, ComplexVec3)> {
        // Scale T so that A has metric norm sign and the two-term tangent at `t` is exactly `T`.
        let lambda_sq = 1.0 - sg * amplitude * amplitude;
        if !(lambda_sq > 0.0) {
            return Err(Error::InsufficientDomain { length, required: 2.0 * c0 * t.sqrt() });
        }
        let a = f.t * lambda_sq.sqrt() + f.e2 * (side.sign() * amplitude);
        let b_tilde = f.complex_normal().rotate(-quad);
        let b = b_tilde.rotate(-log_phase);
        // Remove the A-component (signed Gram–Schmidt; A o A = sign).
        let re = b.re - a * (dot_pm(a, b.re, metric) * sg);
        let im = b.im - a * (dot_pm(a, b.im, metric) * sg);
        Ok((a, ComplexVec3::new(re, im), b_tilde))
    };
    let (a_minus, b_minus, b_tilde_minus) = estimate(minus, Side::Minus)?;
    let (a_plus, b_plus, b_tilde_plus) = estimate(plus, Side::Plus)?;
    Ok(AsymptoticConstants {
        c0,
        metric,
        length,
        t_ref: t,
        a_minus,
        a_plus,
        b_minus,
        b_plus,
        b_tilde_minus,
        b_tilde_plus,
    })
}

/// Read `A^±`, `B^±` off the ends of a frame profile (needs `L >= 20`).
pub fn extract_asymptotics(fp: &FrameProfile) -> Result<AsymptoticConstants> {
    let length = fp.grid.half_width;
    if length < MIN_ASYMPTOTIC_LENGTH {
        return Err(Error::InsufficientDomain { length, required: MIN_ASYMPTOTIC_LENGTH });
    }
    let p = fp.params;
    boundary_constants(
        p.c0,
        p.metric,
        p.t,
        length,
        &fp.frames[0],
        fp.frames.last().expect("grid has nodes"),
    )
}

/// Stereographic profile `g(s) = z(s, t)` with its derivative.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZProfile {
    pub nodes: Vec<f64>,
    pub values: Vec<ComplexSample>,
    pub derivatives: Vec<ComplexSample>,
    pub params: SelfSimilarParams,
}

impl ZProfile {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,re_z,im_z\n");
        for (s, z) in self.nodes.iter().zip(&self.values) {
            out.push_str(&crate::report::csv_row(&[*s, z.re, z.im]));
        }
        out
    }
}

#[derive(Clone, Copy)]
struct ZState {
    g: Complex64,
    dg: Complex64,
}

fn profile_rhs(s: f64, y: ZState, p: &SelfSimilarParams) -> ZState {
    let sg = p.metric.sign();
    let nonlinear = 2.0 * sg * y.g.conj() * y.dg * y.dg / (1.0 + sg * y.g.norm_sqr());
    ZState { g: y.dg, dg: Complex64::i() * p.torsion(s) * y.dg + nonlinear }
}

fn profile_rk4(s: f64, h: f64, y: ZState, p: &SelfSimilarParams) -> ZState {
    let add = |y: ZState, k: ZState, a: f64| ZState { g: y.g + k.g * a, dg: y.dg + k.dg * a };
    let k1 = profile_rhs(s, y, p);
    let k2 = profile_rhs(s + 0.5 * h, add(y, k1, 0.5 * h), p);
    let k3 = profile_rhs(s + 0.5 * h, add(y, k2, 0.5 * h), p);
    let k4 = profile_rhs(s + h, add(y, k3, h), p);
    ZState {
        g: y.g + (k1.g + (k2.g + k3.g) * 2.0 + k4.g) * (h / 6.0),
        dg: y.dg + (k1.dg + (k2.dg + k3.dg) * 2.0 + k4.dg) * (h / 6.0),
    }
}

fn check_disc(y: &ZState, p: &SelfSimilarParams) -> Result<()> {
    let r2 = y.g.norm_sqr();
    if !r2.is_finite() || (p.metric == Metric::Hyperbolic && r2 >= 1.0 - crate::geometry::DISC_TOL) {
        return Err(Error::DiscBoundary { modulus_sq: r2 });
    }
    Ok(())
}

/// Integrate the profile ODE and sample it at arbitrary nodes.
///
/// The ODE is marched from `s = 0` with step `step`; each requested node
/// is reached by one partial RK4 step from the last marching point below it.
/// Negative nodes use `g(-s) = -g(s)`, `g'(-s) = g'(s)`.
pub fn profile_z_at_nodes(p: SelfSimilarParams, nodes: &[f64], step: f64) -> Result<ZProfile> {
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!("step {step} must be positive")));
    }
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&a, &b| nodes[a].abs().total_cmp(&nodes[b].abs()));

    let start = ZState { g: Complex64::new(0.0, 0.0), dg: Complex64::new(p.curvature() / 2.0, 0.0) };
    let mut values = vec![Complex64::new(0.0, 0.0); nodes.len()];
    let mut derivatives = vec![start.dg; nodes.len()];
    let mut y = start;
    let mut s = 0.0;
    let mut k = 0usize;
    for idx in order {
        let target = nodes[idx].abs();
        while s + step <= target {
            // Recompute the node from the step count to avoid drift in s.
            y = profile_rk4(s, step, y, &p);
            k += 1;
            s = k as f64 * step;
            check_disc(&y, &p)?;
        }
        let at = if target > s { profile_rk4(s, target - s, y, &p) } else { y };
        check_disc(&at, &p)?;
        let flip = if nodes[idx] < 0.0 { -1.0 } else { 1.0 };
        values[idx] = at.g * flip;
        derivatives[idx] = at.dg;
    }
    Ok(ZProfile { nodes: nodes.to_vec(), values, derivatives, params: p })
}

/// Default internal marching step for profile sampling on `[-L, L]`.
pub fn default_profile_step(length: f64, t: f64) -> f64 {
    // Keep the phase advance (s / 2t) h below 0.01 at the far end.
    let by_phase = 0.02 * t / length.max(f64::MIN_POSITIVE);
    1e-3f64.min(by_phase)
}

/// Integrate the stereographic profile ODE on the uniform grid of spacing `ds`.
pub fn integrate_profile_z(p: SelfSimilarParams, length: f64, ds: f64) -> Result<ZProfile> {
    let grid = UniformGrid::with_spacing(length, ds)?;
    let nodes = grid.nodes();
    profile_z_at_nodes(p, &nodes, ds.min(default_profile_step(length, p.t)))
}

/// Sampled filament positions `X(s, t)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveSamples {
    pub grid: UniformGrid,
    pub points: Vec<Vec3>,
    pub t: f64,
}

/// Quadrature weights for the interval at `offset` inside a four-point window.
const CUBIC_WEIGHTS: [[f64; 4]; 3] = [
    [9.0, 19.0, -5.0, 1.0],
    [-1.0, 13.0, 13.0, -1.0],
    [1.0, -5.0, 19.0, 9.0],
];

fn interval_integral(tangents: &[Vec3], window: usize, offset: usize, ds: f64) -> Vec3 {
    let w = CUBIC_WEIGHTS[offset];
    let mut acc = Vec3::ZERO;
    for (k, wk) in w.iter().enumerate() {
        acc += tangents[window + k] * *wk;
    }
    acc * (ds / 24.0)
}

/// Recover `X` from `X_s = T` with `X(0, t) = 2 c0 sqrt(t) (0, 1, 0)`.
///
/// Marches outward from the centre with the four-point rule
/// `X^{n+1} = X^n + ds/24 (9 T^n + 19 T^{n+1} - 5 T^{n+2} + T^{n+3})`
/// (mirrored for decreasing `s`). Near the ends the window is shifted inward
/// and the matching cubic weights are used.
pub fn reconstruct_x(tangents: &[Vec3], grid: &UniformGrid, p: &SelfSimilarParams) -> Result<CurveSamples> {
    let n = tangents.len();
    if n < 4 {
        return Err(Error::TooFewNodes { required: 4, got: n });
    }
    if n != grid.len() {
        return Err(Error::InvalidGrid(format!("{} tangents for a grid of {} nodes", n, grid.len())));
    }
    let c = grid.center();
    let mut points = vec![Vec3::ZERO; n];
    points[c] = Vec3::E2 * (2.0 * p.c0 * p.t.sqrt());
    for j in c..n - 1 {
        let window = j.min(n - 4);
        points[j + 1] = points[j] + interval_integral(tangents, window, j - window, grid.ds);
    }
    for j in (1..=c).rev() {
        // Interval [j-1, j]; preferred window ends at j.
        let window = j.saturating_sub(3).min(n - 4);
        points[j - 1] = points[j] - interval_integral(tangents, window, j - 1 - window, grid.ds);
    }
    Ok(CurveSamples { grid: *grid, points, t: p.t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::stereo_project;

    const EU: Metric = Metric::Euclidean;
    const HY: Metric = Metric::Hyperbolic;

    fn params(c0: f64, m: Metric) -> SelfSimilarParams {
        SelfSimilarParams::new(c0, 1.0, m).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(SelfSimilarParams::new(-0.1, 1.0, EU).is_err());
        assert!(SelfSimilarParams::new(0.2, 0.0, EU).is_err());
    }

    #[test]
    fn centre_frame_is_exact() {
        let fp = integrate_frenet_profile(params(0.2, EU), 5.0, 0.01).unwrap();
        assert_eq!(fp.frames[fp.grid.center()], FrameTriad::INITIAL);
    }

    #[test]
    fn zero_curvature_is_straight() {
        for m in [EU, HY] {
            let fp = integrate_frenet_profile(params(0.0, m), 5.0, 0.05).unwrap();
            for f in &fp.frames {
                assert!(f.t.max_abs_diff(&Vec3::E3) < 1e-14);
            }
        }
    }

    #[test]
    fn frames_stay_orthonormal() {
        for m in [EU, HY] {
            let fp = integrate_frenet_profile(params(0.2, m), 50.0, 0.01).unwrap();
            let worst = fp.frames.iter().map(|f| f.orthonormality_defect(m)).fold(0.0, f64::max);
            assert!(worst < 1e-8, "{m:?}: defect {worst:e}");
        }
    }

    #[test]
    fn third_component_is_even() {
        let fp = integrate_frenet_profile(params(0.2, EU), 20.0, 0.01).unwrap();
        let n = fp.grid.intervals;
        for i in 0..=n / 2 {
            let (a, b) = (fp.frames[i].t, fp.frames[n - i].t);
            assert!((a.z() - b.z()).abs() < 1e-8);
            assert!((a.x() + b.x()).abs() < 1e-8);
        }
    }

    #[test]
    fn a3_closed_form_values() {
        assert_eq!(closed_form_a3(0.0, EU), 1.0);
        // exp(-0.02 pi) and exp(0.02 pi), evaluated independently.
        assert!((closed_form_a3(0.2, EU) - 0.939_101_367_424_292_6).abs() < 1e-12);
        assert!((closed_form_a3(0.2, HY) - 1.064_847_773_294_949_3).abs() < 1e-12);
    }

    #[test]
    fn closed_form_corner_is_unit() {
        for m in [EU, HY] {
            let (am, ap) = closed_form_corner(0.2, m);
            assert!((dot_pm(ap, ap, m) - m.sign()).abs() < 1e-14);
            assert_eq!(am.x(), -ap.x());
        }
    }

    #[test]
    fn asymptotics_need_room() {
        let fp = integrate_frenet_profile(params(0.2, EU), 10.0, 0.01).unwrap();
        assert!(matches!(extract_asymptotics(&fp), Err(Error::InsufficientDomain { .. })));
    }

    #[test]
    fn asymptotics_of_straight_line() {
        let fp = integrate_frenet_profile(params(0.0, EU), 20.0, 0.05).unwrap();
        let k = extract_asymptotics(&fp).unwrap();
        assert!(k.a_plus.max_abs_diff(&Vec3::E3) < 1e-14);
        assert!(k.a_minus.max_abs_diff(&Vec3::E3) < 1e-14);
    }

    #[test]
    fn asymptotic_invariants() {
        for m in [EU, HY] {
            let fp = integrate_frenet_profile(params(0.2, m), 50.0, 0.01).unwrap();
            let k = extract_asymptotics(&fp).unwrap();
            for side in [Side::Minus, Side::Plus] {
                let a = k.a(side);
                let b = k.b(side);
                assert!((dot_pm(a, a, m) - m.sign()).abs() < 1e-8);
                assert!(dot_pm(a, b.re, m).abs() < 1e-6);
                assert!(dot_pm(a, b.im, m).abs() < 1e-6);
            }
            assert!((k.a_plus.z() - k.a_minus.z()).abs() < 1e-6);
            assert!((k.a_plus.x() + k.a_minus.x()).abs() < 1e-3);
            assert!((k.a_plus.y() + k.a_minus.y()).abs() < 1e-3);
            assert!((k.a_plus.z() - closed_form_a3(0.2, m)).abs() < 3.0 * 0.2 / 50.0);
            // B^- = (B1^+, B2^+, -B3^+).
            let (bp, bm) = (k.b_plus, k.b_minus);
            assert!((bp.re.x() - bm.re.x()).abs() < 1e-3 && (bp.im.y() - bm.im.y()).abs() < 1e-3);
            assert!((bp.re.z() + bm.re.z()).abs() < 1e-3);
        }
    }

    #[test]
    fn boundary_tangent_reproduces_reference() {
        let fp = integrate_frenet_profile(params(0.2, EU), 50.0, 0.01).unwrap();
        let k = extract_asymptotics(&fp).unwrap();
        let plus = k.boundary_tangent(Side::Plus, 1.0).unwrap();
        let minus = k.boundary_tangent(Side::Minus, 1.0).unwrap();
        assert!(plus.max_abs_diff(&fp.frames.last().unwrap().t) < 1e-12);
        assert!(minus.max_abs_diff(&fp.frames[0].t) < 1e-12);
    }

    #[test]
    fn profile_z_basics() {
        let zp = integrate_profile_z(params(0.2, EU), 5.0, 0.01).unwrap();
        let c = zp.nodes.len() / 2;
        assert_eq!(zp.values[c], Complex64::new(0.0, 0.0));
        assert!((zp.derivatives[c].re - 0.1).abs() < 1e-15);
        for i in 0..zp.nodes.len() {
            assert!((zp.values[i] + zp.values[zp.nodes.len() - 1 - i]).norm() < 1e-10);
        }
        let zero = integrate_profile_z(params(0.0, EU), 5.0, 0.01).unwrap();
        assert!(zero.values.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn profile_z_matches_projected_frames() {
        for m in [EU, HY] {
            let p = params(0.2, m);
            let fp = integrate_frenet_profile(p, 20.0, 0.01).unwrap();
            let zp = integrate_profile_z(p, 20.0, 0.01).unwrap();
            for (f, z) in fp.frames.iter().zip(&zp.values) {
                let proj = stereo_project(f.t, m).unwrap();
                assert!((proj - z).norm() < 1e-6, "{m:?}: {proj} vs {z}");
            }
        }
    }

    #[test]
    fn quadrature_weights_integrate_cubics() {
        // Exact for T(s) = s^3 on any window.
        let ds = 0.1;
        let t: Vec<Vec3> = (0..4).map(|i| Vec3::new((i as f64 * ds).powi(3), 0.0, 0.0)).collect();
        for offset in 0..3 {
            let a = offset as f64 * ds;
            let b = a + ds;
            let exact = (b.powi(4) - a.powi(4)) / 4.0;
            assert!((interval_integral(&t, 0, offset, ds).x() - exact).abs() < 1e-16);
        }
    }

    #[test]
    fn reconstruct_constant_tangents() {
        let grid = UniformGrid::new(0.2, 4).unwrap();
        let p = params(0.0, EU);
        let x = reconstruct_x(&[Vec3::E1; 5], &grid, &p).unwrap();
        assert!(x.points[3].max_abs_diff(&Vec3::new(0.1, 0.0, 0.0)) < 1e-15);
        assert!(x.points[0].max_abs_diff(&Vec3::new(-0.2, 0.0, 0.0)) < 1e-15);
        let line = reconstruct_x(&[Vec3::E3; 5], &grid, &p).unwrap();
        for (i, pt) in line.points.iter().enumerate() {
            assert!(pt.max_abs_diff(&Vec3::new(0.0, 0.0, grid.node(i))) < 1e-15);
        }
        assert!(matches!(
            reconstruct_x(&[Vec3::E3; 3], &UniformGrid::new(0.2, 2).unwrap(), &p),
            Err(Error::TooFewNodes { .. })
        ));
    }

    #[test]
    fn reconstructed_curve_has_unit_tangent() {
        let p = params(0.2, EU);
        let fp = integrate_frenet_profile(p, 10.0, 0.01).unwrap();
        let x = reconstruct_x(&fp.tangents(), &fp.grid, &p).unwrap();
        assert!(x.points[fp.grid.center()].max_abs_diff(&Vec3::new(0.0, 0.4, 0.0)) < 1e-15);
        let ds = fp.grid.ds;
        for i in 1..fp.grid.intervals {
            let d = (x.points[i + 1] - x.points[i - 1]) * (0.5 / ds);
            // Central difference error ~ ds^2 |T_ss| / 6 with |T_ss| ~ c tau.
            assert!(d.max_abs_diff(&fp.frames[i].t) < 2e-4);
        }
    }

    #[test]
    fn curve_approaches_corner() {
        let p = params(0.2, EU);
        let fp = integrate_frenet_profile(p, 50.0, 0.01).unwrap();
        let k = extract_asymptotics(&fp).unwrap();
        let x = reconstruct_x(&fp.tangents(), &fp.grid, &p).unwrap();
        let err = |s: f64| {
            let i = fp.grid.nearest(s);
            let side = if s > 0.0 { Side::Plus } else { Side::Minus };
            (x.points[i] * (1.0 / s)).max_abs_diff(&k.a(side))
        };
        for s in [10.0, 20.0, 40.0, -10.0, -20.0, -40.0] {
            assert!(err(s) < 2.0 / s.abs(), "s = {s}: {}", err(s));
        }
        assert!(err(40.0) < err(10.0));
    }
}
