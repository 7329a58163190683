//! Explicit solver for `T_t = T ∧ T_ss` on a uniform grid: centred second
//! differences, classical RK4 in time, renormalization after every step.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{curvature_error, curvature_front, curvature_from_t, energy_trapezoid, CurvatureProfile};
use crate::error::{Error, Result};
use crate::geometry::{normalize, wedge_pm, Metric, NormTarget, Vec3};
use crate::grid::UniformGrid;
use crate::report::{ProbeRecord, RunEvent, RunParams, RunReport, SeriesPoint};
use crate::selfsim::{closed_form_corner, boundary_constants_at, integrate_frenet_on_grid, AsymptoticConstants, SelfSimilarParams, Side};

/// Empirical RK4 stability bound `|dt| <= 0.7 ds²`.
pub const STABILITY_FACTOR: f64 = 0.7;

/// A run stops once the maximum curvature exceeds this multiple of `c0 / sqrt(t)`.
pub const BLOWUP_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TFieldState {
    pub grid: UniformGrid,
    pub tangents: Vec<Vec3>,
    pub t: f64,
    pub metric: Metric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FdBcKind {
    FixedFirstOrder,
    AsymptoticSecondOrder,
}

impl FdBcKind {
    pub fn name(self) -> &'static str {
        match self {
            FdBcKind::FixedFirstOrder => "fixed_first_order",
            FdBcKind::AsymptoticSecondOrder => "asymptotic_second_order",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FdBoundaryCondition {
    /// Constant values at `s = -L` and `s = +L`.
    FixedFirstOrder { minus: Vec3, plus: Vec3 },
    /// Two-term asymptotics `A ± 2 c0 sqrt(t) Im[B~ e^{iL²/4t}] / L`, normalized.
    AsymptoticSecondOrder(AsymptoticConstants),
}

impl FdBoundaryCondition {
    pub fn kind(&self) -> FdBcKind {
        match self {
            FdBoundaryCondition::FixedFirstOrder { .. } => FdBcKind::FixedFirstOrder,
            FdBoundaryCondition::AsymptoticSecondOrder(_) => FdBcKind::AsymptoticSecondOrder,
        }
    }
}

/// Boundary values `(T(-L), T(+L))` at time `t_new`.
pub fn fd_apply_bc(bc: &FdBoundaryCondition, t_new: f64) -> Result<(Vec3, Vec3)> {
    match bc {
        FdBoundaryCondition::FixedFirstOrder { minus, plus } => Ok((*minus, *plus)),
        FdBoundaryCondition::AsymptoticSecondOrder(k) => {
            Ok((k.boundary_tangent(Side::Minus, t_new)?, k.boundary_tangent(Side::Plus, t_new)?))
        }
    }
}

fn rhs_into(tangents: &[Vec3], ds: f64, m: Metric, out: &mut [Vec3]) {
    let n = tangents.len();
    let inv = 1.0 / (ds * ds);
    out[0] = Vec3::ZERO;
    out[n - 1] = Vec3::ZERO;
    for i in 1..n - 1 {
        let lap = (tangents[i + 1] - tangents[i] * 2.0 + tangents[i - 1]) * inv;
        out[i] = wedge_pm(tangents[i], lap, m);
    }
}

/// `T_i ∧ (T_{i+1} - 2T_i + T_{i-1}) / ds²` inside, zero at both ends.
pub fn fd_rhs(state: &TFieldState) -> Vec<Vec3> {
    let mut out = vec![Vec3::ZERO; state.tangents.len()];
    rhs_into(&state.tangents, state.grid.ds, state.metric, &mut out);
    out
}

/// Reusable RK4 buffers.
#[derive(Debug, Clone)]
pub struct FdStepper {
    k: [Vec<Vec3>; 4],
    stage: Vec<Vec3>,
}

impl FdStepper {
    pub fn new(len: usize) -> Self {
        let z = vec![Vec3::ZERO; len];
        Self { k: [z.clone(), z.clone(), z.clone(), z.clone()], stage: z }
    }

    /// Advance in place. Boundary nodes keep their values through the
    /// stages and are overwritten at `t + dt`.
    pub fn step(&mut self, state: &mut TFieldState, dt: f64, bc: &FdBoundaryCondition) -> Result<()> {
        let n = state.tangents.len();
        if n < 3 {
            return Err(Error::TooFewNodes { required: 3, got: n });
        }
        let (ds, m) = (state.grid.ds, state.metric);
        let y = &mut state.tangents;
        rhs_into(y, ds, m, &mut self.k[0]);
        for s in 1..4 {
            let h = if s == 3 { dt } else { 0.5 * dt };
            let (done, rest) = self.k.split_at_mut(s);
            for i in 0..n {
                self.stage[i] = y[i] + done[s - 1][i] * h;
            }
            rhs_into(&self.stage, ds, m, &mut rest[0]);
        }
        let w = dt / 6.0;
        for i in 0..n {
            y[i] += (self.k[0][i] + (self.k[1][i] + self.k[2][i]) * 2.0 + self.k[3][i]) * w;
        }
        let t_new = state.t + dt;
        let (minus, plus) = fd_apply_bc(bc, t_new)?;
        y[0] = minus;
        y[n - 1] = plus;
        for v in y.iter_mut() {
            if !v.is_finite() {
                return Err(Error::NonFinite { t: t_new });
            }
            *v = normalize(*v, NormTarget::MetricSign, m)?;
        }
        state.t = t_new;
        Ok(())
    }
}

/// One RK4 step followed by boundary overwrite and renormalization.
pub fn fd_step(state: &TFieldState, dt: f64, bc: &FdBoundaryCondition) -> Result<TFieldState> {
    if dt.abs() > STABILITY_FACTOR * state.grid.ds * state.grid.ds {
        log::warn!("|dt| = {:e} exceeds 0.7 ds² = {:e}", dt.abs(), STABILITY_FACTOR * state.grid.ds * state.grid.ds);
    }
    let mut next = state.clone();
    FdStepper::new(state.tangents.len()).step(&mut next, dt, bc)?;
    Ok(next)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdRunOptions {
    pub dt: f64,
    pub t_end: f64,
    pub probes: Vec<f64>,
    /// Record a series point every this many steps (0 disables).
    pub series_every: usize,
    /// Error window in `s`; the whole domain when `None`.
    pub window: Option<(f64, f64)>,
}

impl FdRunOptions {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self { dt, t_end, probes: Vec::new(), series_every: 20, window: None }
    }
}

#[derive(Debug, Clone)]
pub struct FdOutcome {
    pub report: RunReport,
    pub state: TFieldState,
    /// Time at which the run was stopped by a blow-up, if it was.
    pub blowup: Option<f64>,
}

fn observe(state: &TFieldState, c0: f64, opts: &FdRunOptions, probe: bool, series: bool, report: &mut RunReport) -> CurvatureProfile {
    let profile = curvature_from_t(&state.tangents, &state.grid, state.metric, state.t);
    let energy = energy_trapezoid(&profile.c, &profile.s);
    if !profile.clamped.is_empty() {
        report.events.push(RunEvent::CurvatureClamped { t: state.t, nodes: profile.clamped.len() });
    }
    if series {
        report.series.push(SeriesPoint { t: state.t, c_origin: profile.at_origin(), energy, max_curvature: profile.max() });
    }
    if probe {
        let l = state.grid.half_width;
        let window = opts.window.unwrap_or((-l, l));
        report.probes.push(ProbeRecord {
            t: state.t,
            s: profile.s.clone(),
            curvature: profile.c.clone(),
            c_origin: profile.at_origin(),
            energy,
            error: curvature_error(&profile, c0, window),
            spectrum: None,
            front: (state.t > 0.0).then(|| curvature_front(&profile, c0)),
        });
    }
    profile
}

fn evolve(mut state: TFieldState, bc: &FdBoundaryCondition, c0: f64, opts: &FdRunOptions, mut report: RunReport) -> Result<FdOutcome> {
    let dt = opts.dt;
    let limit = STABILITY_FACTOR * state.grid.ds * state.grid.ds;
    if dt.abs() > limit {
        log::warn!("|dt| = {:e} exceeds the stability bound {:e}", dt.abs(), limit);
        report.events.push(RunEvent::StabilityWarning { dt, limit });
    }
    let dir = dt.signum();
    let t0 = state.t;
    let total = ((opts.t_end - t0) / dt).round().max(0.0) as u64;
    let mut probes: Vec<f64> = opts.probes.clone();
    probes.sort_by(|a, b| (dir * a).total_cmp(&(dir * b)));
    probes.retain(|p| dir * (p - t0) >= -0.5 * dt.abs());
    let mut next_probe = 0usize;
    let mut stepper = FdStepper::new(state.tangents.len());
    let mut blowup = None;
    let mut touched = false;

    let due = |t: f64, next: usize| next < probes.len() && dir * (t - probes[next]) >= -0.5 * dt.abs() * (1.0 + 1e-9);
    let record = |state: &TFieldState, step: u64, next_probe: &mut usize, report: &mut RunReport| {
        let probe = due(state.t, *next_probe);
        let series = opts.series_every > 0 && step % opts.series_every as u64 == 0;
        while due(state.t, *next_probe) {
            *next_probe += 1;
        }
        (probe || series).then(|| observe(state, c0, opts, probe, series, report))
    };
    record(&state, 0, &mut next_probe, &mut report);

    for step in 1..=total {
        let t_target = t0 + step as f64 * dt;
        match stepper.step(&mut state, dt, bc) {
            Ok(()) => state.t = t_target,
            Err(e @ (Error::NonFinite { .. } | Error::NonNormalizable { .. })) => {
                report.events.push(RunEvent::Aborted { t: state.t, reason: e.to_string() });
                blowup = Some(state.t);
                break;
            }
            Err(e) => return Err(e),
        }
        report.steps = step;
        report.final_t = state.t;
        if let Some(profile) = record(&state, step, &mut next_probe, &mut report) {
            let scale = if state.t > 0.0 { c0 / state.t.sqrt() } else { c0 };
            let max = profile.max();
            if !max.is_finite() || max > BLOWUP_FACTOR * scale.max(1.0) {
                report.events.push(RunEvent::Aborted { t: state.t, reason: format!("curvature blow-up ({max:e})") });
                blowup = Some(state.t);
                break;
            }
            if dir > 0.0 && !touched && curvature_front(&profile, c0) >= 0.95 * state.grid.half_width {
                touched = true;
                report.events.push(RunEvent::BoundaryTouch { t: state.t });
            }
        }
    }
    Ok(FdOutcome { report, state, blowup })
}

fn params_block(solver: &str, bc: FdBcKind, p: &SelfSimilarParams, grid: &UniformGrid, t0: f64, opts: &FdRunOptions) -> RunParams {
    RunParams {
        solver: solver.into(),
        bc: bc.name().into(),
        metric: p.metric,
        c0: p.c0,
        length: grid.half_width,
        nodes: grid.intervals,
        dt: opts.dt,
        t_start: t0,
        t_end: opts.t_end,
        refine_threshold: None,
    }
}

/// Backward run from the exact profile at `p.t` toward `t = 0`.
///
/// The fixed condition holds the initial boundary values `T(±L, t0)`; the
/// asymptotic one takes its constants from the exact profile at `s = ±L`.
pub fn fd_run_backward(p: SelfSimilarParams, grid: UniformGrid, bc: FdBcKind, opts: &FdRunOptions) -> Result<FdOutcome> {
    if !(opts.dt < 0.0) || !(opts.t_end > 0.0) || opts.t_end > p.t {
        return Err(Error::InvalidParameter(format!(
            "backward run needs dt < 0 and 0 < t_end <= {} (got dt = {}, t_end = {})",
            p.t, opts.dt, opts.t_end
        )));
    }
    let fp = integrate_frenet_on_grid(p, grid)?;
    let (first, last) = (fp.frames[0], *fp.frames.last().expect("non-empty grid"));
    let condition = match bc {
        FdBcKind::FixedFirstOrder => FdBoundaryCondition::FixedFirstOrder { minus: first.t, plus: last.t },
        FdBcKind::AsymptoticSecondOrder => {
            FdBoundaryCondition::AsymptoticSecondOrder(boundary_constants_at(p, grid.half_width)?)
        }
    };
    let state = TFieldState { grid, tangents: fp.tangents(), t: p.t, metric: p.metric };
    let report = RunReport::new(params_block("fd_backward", bc, &p, &grid, p.t, opts));
    evolve(state, &condition, p.c0, opts, report)
}

/// Corner datum `A-` on `s < 0`, `(0,0,1)` at `s = 0`, `A+` on `s > 0`.
pub fn corner_datum(c0: f64, metric: Metric, grid: &UniformGrid) -> (Vec<Vec3>, Vec3, Vec3) {
    let (a_minus, a_plus) = closed_form_corner(c0, metric);
    let c = grid.center();
    let t = (0..grid.len())
        .map(|i| match i.cmp(&c) {
            std::cmp::Ordering::Less => a_minus,
            std::cmp::Ordering::Equal => Vec3::E3,
            std::cmp::Ordering::Greater => a_plus,
        })
        .collect();
    (t, a_minus, a_plus)
}

/// Forward run of the corner datum from `t = 0` with fixed ends.
pub fn fd_run_forward(c0: f64, metric: Metric, grid: UniformGrid, opts: &FdRunOptions) -> Result<FdOutcome> {
    if !(opts.dt > 0.0) || !(opts.t_end > 0.0) {
        return Err(Error::InvalidParameter(format!("forward run needs dt > 0 and t_end > 0 (got {}, {})", opts.dt, opts.t_end)));
    }
    let p = SelfSimilarParams::new(c0, 1.0, metric)?;
    let (tangents, minus, plus) = corner_datum(c0, metric, &grid);
    let state = TFieldState { grid, tangents, t: 0.0, metric };
    let report = RunReport::new(params_block("fd_forward", FdBcKind::FixedFirstOrder, &p, &grid, 0.0, opts));
    evolve(state, &FdBoundaryCondition::FixedFirstOrder { minus, plus }, c0, opts, report)
}
