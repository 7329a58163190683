use num_complex::Complex64;

use super::stepper::{StepLevel, Stepper};
use super::{SpectralBc, SpectralBcKind, ZFieldState};
use crate::chebyshev::zero_pad;
use crate::diagnostics::{curvature_error, curvature_front, curvature_from_z, energy_trapezoid, CurvatureProfile};
use crate::error::{Error, Result};
use crate::geometry::{stereo_project, Metric};
use crate::grid::ChebyshevGrid;
use crate::report::{ProbeRecord, Refinement, RunEvent, RunParams, RunReport, SeriesPoint};
use crate::selfsim::{closed_form_corner, boundary_constants_at, default_profile_step, profile_z_at_nodes, SelfSimilarParams};

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralRunOptions {
    pub dt: f64,
    pub t_end: f64,
    /// Tail threshold for node doubling; `None` disables refinement.
    pub refine_threshold: Option<f64>,
    pub max_degree: usize,
    pub probes: Vec<f64>,
    /// Record a series point every this many steps (0 disables).
    pub series_every: usize,
    pub spectrum: bool,
    /// Error window in `s`; the whole domain when `None`.
    pub window: Option<(f64, f64)>,
}

impl SpectralRunOptions {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            refine_threshold: None,
            max_degree: 16384,
            probes: Vec::new(),
            series_every: 100,
            spectrum: false,
            window: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectralOutcome {
    pub report: RunReport,
    pub state: ZFieldState,
}

fn profile_of(level: &StepLevel, grid: &ChebyshevGrid, metric: Metric) -> CurvatureProfile {
    CurvatureProfile {
        s: grid.nodes(),
        c: curvature_from_z(&level.values, &level.deriv_values, metric),
        t: level.t,
        clamped: Vec::new(),
    }
}

struct Recorder<'a> {
    opts: &'a SpectralRunOptions,
    c0: f64,
    dir: f64,
    next_probe: usize,
    probes: Vec<f64>,
    touched: bool,
}

impl<'a> Recorder<'a> {
    fn new(opts: &'a SpectralRunOptions, c0: f64, t0: f64) -> Self {
        let dir = opts.dt.signum();
        let mut probes: Vec<f64> = opts
            .probes
            .iter()
            .copied()
            .filter(|p| dir * (p - t0) >= -0.5 * opts.dt.abs() && dir * (opts.t_end - p) >= -0.5 * opts.dt.abs())
            .collect();
        probes.sort_by(|a, b| (dir * a).total_cmp(&(dir * b)));
        probes.dedup();
        Self { opts, c0, dir, next_probe: 0, probes, touched: false }
    }

    fn observe(&mut self, level: &StepLevel, grid: &ChebyshevGrid, metric: Metric, dt: f64, step: u64, report: &mut RunReport) {
        let due_probe = self.next_probe < self.probes.len()
            && self.dir * (level.t - self.probes[self.next_probe]) >= -0.5 * dt.abs() * (1.0 + 1e-9);
        let due_series = self.opts.series_every > 0 && step % self.opts.series_every as u64 == 0;
        if !due_probe && !due_series {
            return;
        }
        let profile = profile_of(level, grid, metric);
        let energy = energy_trapezoid(&profile.c, &profile.s);
        if due_series {
            report.series.push(SeriesPoint {
                t: level.t,
                c_origin: profile.at_origin(),
                energy,
                max_curvature: profile.max(),
            });
            if !self.touched && self.dir > 0.0 && level.t > 0.0 {
                let front = curvature_front(&profile, self.c0);
                if front >= 0.95 * grid.half_width {
                    self.touched = true;
                    report.events.push(RunEvent::BoundaryTouch { t: level.t });
                }
            }
        }
        while self.next_probe < self.probes.len()
            && self.dir * (level.t - self.probes[self.next_probe]) >= -0.5 * dt.abs() * (1.0 + 1e-9)
        {
            self.next_probe += 1;
        }
        if due_probe {
            let window = self.opts.window.unwrap_or((-grid.half_width, grid.half_width));
            let error = curvature_error(&profile, self.c0, window);
            report.probes.push(ProbeRecord {
                t: level.t,
                c_origin: profile.at_origin(),
                energy,
                error,
                spectrum: self.opts.spectrum.then(|| level.coeffs.iter().map(|a| a.norm()).collect()),
                front: (level.t > 0.0).then(|| curvature_front(&profile, self.c0)),
                s: profile.s,
                curvature: profile.c,
            });
        }
    }
}

/// Time loop shared by all spectral runs.
fn evolve(initial: ZFieldState, bc: SpectralBc, c0: f64, opts: &SpectralRunOptions, report: &mut RunReport) -> Result<ZFieldState> {
    let metric = initial.metric;
    let mut grid = initial.grid;
    let mut stepper = Stepper::new(grid, metric, bc)?;
    let mut cur = stepper.level(initial.coeffs, initial.t)?;
    let mut prev: Option<StepLevel> = None;
    let mut dt = opts.dt;
    let dir = dt.signum();
    let mut recorder = Recorder::new(opts, c0, initial.t);
    let mut steps: u64 = 0;
    let (mut seg_t0, mut seg_n) = (cur.t, 0u64);
    recorder.observe(&cur, &grid, metric, dt, 0, report);

    while dir * (opts.t_end - cur.t) > 0.5 * dt.abs() {
        seg_n += 1;
        let t_next = seg_t0 + seg_n as f64 * dt;
        let next = match &prev {
            None => stepper.bootstrap(&cur, dt),
            Some(p) => stepper.sbdf2(&cur, p, dt, t_next),
        };
        let next = match next {
            Ok(level) => level,
            Err(e) => {
                report.events.push(RunEvent::Aborted { t: cur.t, reason: e.to_string() });
                report.final_t = cur.t;
                report.steps = steps;
                return Err(e);
            }
        };
        prev = Some(std::mem::replace(&mut cur, next));
        steps += 1;
        recorder.observe(&cur, &grid, metric, dt, steps, report);

        if let Some(threshold) = opts.refine_threshold {
            let tail = cur.derivative_tail();
            if tail > threshold && 2 * grid.degree <= opts.max_degree {
                grid = grid.refined();
                dt /= 4.0;
                log::info!("refining to N = {} at t = {:.6e} (tail {:.3e})", grid.degree, cur.t, tail);
                report.refinements.push(Refinement { t: cur.t, degree: grid.degree, dt, tail });
                let bc = stepper.bc.clone();
                stepper = Stepper::new(grid, metric, bc)?;
                cur = stepper.level(zero_pad(&cur.coeffs, grid.degree), cur.t)?;
                prev = None;
                seg_t0 = cur.t;
                seg_n = 0;
            }
        }
    }
    report.final_t = cur.t;
    report.steps = steps;
    Ok(cur.to_state(grid, metric, dt))
}

fn params_block(solver: &str, bc: SpectralBcKind, metric: Metric, c0: f64, grid: &ChebyshevGrid, t0: f64, opts: &SpectralRunOptions) -> RunParams {
    RunParams {
        solver: solver.into(),
        bc: bc.name().into(),
        metric,
        c0,
        length: grid.half_width,
        nodes: grid.degree,
        dt: opts.dt,
        t_start: t0,
        t_end: opts.t_end,
        refine_threshold: opts.refine_threshold,
    }
}

/// Exact self-similar state at time `p.t` on the nodes of `grid`.
pub fn exact_state(p: SelfSimilarParams, grid: ChebyshevGrid, dt: f64) -> Result<ZFieldState> {
    let nodes = grid.nodes();
    let step = default_profile_step(grid.half_width, p.t);
    let zp = profile_z_at_nodes(p, &nodes, step)?;
    ZFieldState::from_values(grid, zp.values, p.t, p.metric, dt)
}

fn build_bc(kind: SpectralBcKind, state: &ZFieldState, p: SelfSimilarParams) -> Result<SpectralBc> {
    Ok(match kind {
        SpectralBcKind::ProjectedSecondOrder => SpectralBc::ProjectedSecondOrder(boundary_constants_at(p, state.grid.half_width)?),
        SpectralBcKind::SelfSimilarity => SpectralBc::SelfSimilarity,
        SpectralBcKind::Radiation => SpectralBc::Radiation { c0: p.c0 },
        SpectralBcKind::Fixed => SpectralBc::Fixed { plus: state.values[0], minus: state.values[state.grid.degree] },
    })
}

fn check_direction(opts: &SpectralRunOptions, t0: f64, backward: bool) -> Result<()> {
    let ok = if backward { opts.dt < 0.0 && opts.t_end <= t0 } else { opts.dt > 0.0 && opts.t_end >= t0 };
    if !ok || !opts.dt.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "dt = {} and t_end = {} inconsistent with a {} run from t = {t0}",
            opts.dt,
            opts.t_end,
            if backward { "backward" } else { "forward" }
        )));
    }
    if backward && opts.t_end <= 0.0 {
        return Err(Error::InvalidParameter("backward runs must stop before t = 0".into()));
    }
    Ok(())
}

/// Backward run from the exact profile at `p.t` (normally 1) toward `t = 0`.
pub fn spectral_run_backward(p: SelfSimilarParams, grid: ChebyshevGrid, bc: SpectralBcKind, opts: &SpectralRunOptions) -> Result<SpectralOutcome> {
    check_direction(opts, p.t, true)?;
    run_from_exact("spectral_backward", p, grid, bc, opts)
}

/// Forward run from the exact profile at `p.t`.
pub fn spectral_run_forward(p: SelfSimilarParams, grid: ChebyshevGrid, bc: SpectralBcKind, opts: &SpectralRunOptions) -> Result<SpectralOutcome> {
    check_direction(opts, p.t, false)?;
    run_from_exact("spectral_forward", p, grid, bc, opts)
}

fn run_from_exact(name: &str, p: SelfSimilarParams, grid: ChebyshevGrid, bc: SpectralBcKind, opts: &SpectralRunOptions) -> Result<SpectralOutcome> {
    let initial = exact_state(p, grid, opts.dt)?;
    let bc = build_bc(bc, &initial, p)?;
    let mut report = RunReport::new(params_block(name, bc.kind(), p.metric, p.c0, &grid, p.t, opts));
    let state = evolve(initial, bc, p.c0, opts, &mut report)?;
    Ok(SpectralOutcome { report, state })
}

/// Corner datum at `t = 0`: `a+` on `s > 0` (low indices), `0` at `s = 0`,
/// `a-` on `s < 0`, with `a± = ±sqrt(±(1 - e^{∓c0²π})) / (1 + e^{∓c0²π/2})`.
pub fn step_datum(c0: f64, metric: Metric, grid: ChebyshevGrid) -> Result<(Vec<Complex64>, Complex64, Complex64)> {
    let (a_minus, a_plus) = closed_form_corner(c0, metric);
    let plus = stereo_project(a_plus, metric)?;
    let minus = stereo_project(a_minus, metric)?;
    let c = grid.center();
    let values = (0..grid.len())
        .map(|i| match i.cmp(&c) {
            std::cmp::Ordering::Less => plus,
            std::cmp::Ordering::Equal => Complex64::new(0.0, 0.0),
            std::cmp::Ordering::Greater => minus,
        })
        .collect();
    Ok((values, plus, minus))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageOptions {
    pub half_width: f64,
    pub degree: usize,
    pub dt: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone)]
pub struct TwoStageOutcome {
    pub stage1: SpectralOutcome,
    pub stage2: SpectralOutcome,
}

/// Corner datum evolved with fixed ends on a wide domain, then restarted by
/// spectral interpolation on a narrower one under the radiation condition.
/// Errors are measured on `window` in both stages.
pub fn spectral_run_forward_two_stage(
    c0: f64,
    metric: Metric,
    stage1: StageOptions,
    stage2: StageOptions,
    window: (f64, f64),
    probes: &[f64],
    series_every: usize,
) -> Result<TwoStageOutcome> {
    if stage2.half_width > stage1.half_width {
        return Err(Error::InvalidParameter("stage-2 domain must fit inside stage 1".into()));
    }
    let g1 = ChebyshevGrid::new(stage1.half_width, stage1.degree)?;
    let (values, plus, minus) = step_datum(c0, metric, g1)?;
    let initial = ZFieldState::from_values(g1, values, 0.0, metric, stage1.dt)?;
    let mut o1 = SpectralRunOptions::new(stage1.dt, stage1.t_end);
    o1.probes = probes.iter().copied().filter(|t| *t <= stage1.t_end).chain([stage1.t_end]).collect();
    o1.window = Some(window);
    o1.series_every = series_every;
    check_direction(&o1, 0.0, false)?;
    let mut r1 = RunReport::new(params_block("spectral_two_stage_1", SpectralBcKind::Fixed, metric, c0, &g1, 0.0, &o1));
    let s1 = evolve(initial, SpectralBc::Fixed { plus, minus }, c0, &o1, &mut r1)?;

    let g2 = ChebyshevGrid::new(stage2.half_width, stage2.degree)?;
    let restart = ZFieldState::from_values(g2, s1.interpolate(&g2.nodes())?, s1.t, metric, stage2.dt)?;
    let mut o2 = SpectralRunOptions::new(stage2.dt, stage2.t_end);
    o2.probes = probes.iter().copied().filter(|t| *t >= s1.t).chain([stage2.t_end]).collect();
    o2.window = Some(window);
    o2.series_every = series_every;
    check_direction(&o2, s1.t, false)?;
    let mut r2 = RunReport::new(params_block("spectral_two_stage_2", SpectralBcKind::Radiation, metric, c0, &g2, s1.t, &o2));
    r2.events.push(RunEvent::StageSwitch { t: s1.t, length: g2.half_width, degree: g2.degree });
    let s2 = evolve(restart, SpectralBc::Radiation { c0 }, c0, &o2, &mut r2)?;
    Ok(TwoStageOutcome {
        stage1: SpectralOutcome { report: r1, state: s1 },
        stage2: SpectralOutcome { report: r2, state: s2 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chebyshev::endpoint_values;
    use crate::spectral::{bootstrap_first_step, sbdf2_step};

    const EU: Metric = Metric::Euclidean;

    fn zero_state(n: usize, dt: f64) -> ZFieldState {
        let g = ChebyshevGrid::new(10.0, n).unwrap();
        ZFieldState::from_values(g, vec![Complex64::new(0.0, 0.0); n + 1], 1.0, EU, dt).unwrap()
    }

    #[test]
    fn zero_state_stays_zero() {
        let bc = SpectralBc::Fixed { plus: Complex64::new(0.0, 0.0), minus: Complex64::new(0.0, 0.0) };
        let s0 = zero_state(64, -1e-3);
        let s1 = bootstrap_first_step(&s0, &bc).unwrap();
        assert!(s1.coeffs.iter().all(|a| a.norm() == 0.0));
        let s2 = sbdf2_step(&s1, &s0, &bc).unwrap();
        assert!(s2.coeffs.iter().all(|a| a.norm() == 0.0));
        assert!((s2.t - (1.0 - 2e-3)).abs() < 1e-15);
    }

    #[test]
    fn bootstrap_hits_dirichlet_data() {
        let bc = SpectralBc::Fixed { plus: Complex64::new(0.1, 0.2), minus: Complex64::new(-0.3, 0.05) };
        let s1 = bootstrap_first_step(&zero_state(64, -1e-3), &bc).unwrap();
        let (p, m, _) = endpoint_values(&s1.coeffs);
        assert!((p - Complex64::new(0.1, 0.2)).norm() < 1e-10);
        assert!((m - Complex64::new(-0.3, 0.05)).norm() < 1e-10);
    }

    #[test]
    fn exact_datum_matches_profile_curvature() {
        let p = SelfSimilarParams::new(0.2, 1.0, EU).unwrap();
        let g = ChebyshevGrid::new(10.0, 256).unwrap();
        let s = exact_state(p, g, -1e-4).unwrap();
        let d = crate::chebyshev::cheb_inverse(&crate::chebyshev::cheb_derivative(&s.coeffs, 10.0)).unwrap();
        for c in curvature_from_z(&s.values, &d, EU) {
            assert!((c - 0.2).abs() < 1e-8);
        }
    }

    #[test]
    fn backward_zero_steps_echoes_initial_curvature() {
        let p = SelfSimilarParams::new(0.2, 1.0, EU).unwrap();
        let g = ChebyshevGrid::new(10.0, 256).unwrap();
        let mut o = SpectralRunOptions::new(-1e-4, 1.0);
        o.probes = vec![1.0];
        let out = spectral_run_backward(p, g, SpectralBcKind::SelfSimilarity, &o).unwrap();
        assert_eq!(out.report.steps, 0);
        assert!((out.report.probes[0].c_origin - 0.2).abs() < 1e-10);
    }

    #[test]
    fn short_backward_runs_stay_accurate() {
        let p = SelfSimilarParams::new(0.2, 1.0, EU).unwrap();
        let g = ChebyshevGrid::new(10.0, 512).unwrap();
        for bc in [SpectralBcKind::ProjectedSecondOrder, SpectralBcKind::SelfSimilarity, SpectralBcKind::Radiation] {
            let mut o = SpectralRunOptions::new(-1e-4, 0.9);
            o.probes = vec![0.9];
            o.window = Some((-5.0, 5.0));
            let out = spectral_run_backward(p, g, bc, &o).unwrap();
            let probe = &out.report.probes[0];
            assert!((probe.t - 0.9).abs() < 1e-9);
            let exact = 0.2 / 0.9f64.sqrt();
            assert!(probe.error.max_abs < 1e-3 * exact, "{bc:?}: {:e}", probe.error.max_abs);
        }
    }

    #[test]
    fn projected_bc_matches_initial_boundary() {
        let p = SelfSimilarParams::new(0.2, 1.0, EU).unwrap();
        let g = ChebyshevGrid::new(10.0, 256).unwrap();
        let s = exact_state(p, g, -1e-4).unwrap();
        let SpectralBc::ProjectedSecondOrder(k) = build_bc(SpectralBcKind::ProjectedSecondOrder, &s, p).unwrap() else {
            unreachable!()
        };
        let plus = stereo_project(k.boundary_tangent(crate::selfsim::Side::Plus, 1.0).unwrap(), EU).unwrap();
        let minus = stereo_project(k.boundary_tangent(crate::selfsim::Side::Minus, 1.0).unwrap(), EU).unwrap();
        assert!((plus - s.values[0]).norm() < 1.0 / 100.0);
        assert!((minus - s.values[256]).norm() < 1.0 / 100.0);
    }

    #[test]
    fn step_datum_orientation() {
        let g = ChebyshevGrid::new(50.0, 16).unwrap();
        let (v, plus, minus) = step_datum(0.2, EU, g).unwrap();
        assert!(plus.re > 0.0 && minus.re < 0.0);
        assert_eq!(v[0], plus);
        assert_eq!(v[16], minus);
        assert_eq!(v[8], Complex64::new(0.0, 0.0));
        // a+ = sqrt(1 - e^{-c0² π}) / (1 + e^{-c0² π / 2}).
        let e = (-0.04 * std::f64::consts::PI).exp();
        assert!((plus.re - (1.0 - e).sqrt() / (1.0 + e.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn direction_is_checked() {
        let p = SelfSimilarParams::new(0.2, 1.0, EU).unwrap();
        let g = ChebyshevGrid::new(10.0, 64).unwrap();
        let o = SpectralRunOptions::new(1e-4, 0.5);
        assert!(spectral_run_backward(p, g, SpectralBcKind::SelfSimilarity, &o).is_err());
    }

    #[test]
    fn large_steps_do_not_overflow() {
        let p = SelfSimilarParams::new(0.2, 1.0, EU).unwrap();
        let g = ChebyshevGrid::new(10.0, 256).unwrap();
        let mut o = SpectralRunOptions::new(-1e-3, 0.8);
        o.series_every = 1;
        let out = spectral_run_backward(p, g, SpectralBcKind::ProjectedSecondOrder, &o).unwrap();
        assert!(out.state.values.iter().all(|v| v.is_finite()));
    }
}

