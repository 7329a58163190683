use num_complex::Complex64;

use super::tau::{BoundaryKind, TauSolver};
use super::{SpectralBc, ZFieldState};
use crate::chebyshev::{cheb_antiderivative, cheb_derivative_into, endpoint_values, spectral_filter, ChebTransform, FILTER_EPS};
use crate::error::{Error, Result};
use crate::geometry::{stereo_project, Metric};
use crate::grid::ChebyshevGrid;
use crate::selfsim::Side;

/// Guard band inside the Poincaré disc.
const DISC_GUARD: f64 = 1e-10;

/// Everything the time stepper needs to know about one time level.
#[derive(Debug, Clone)]
pub struct StepLevel {
    pub t: f64,
    pub coeffs: Vec<Complex64>,
    pub values: Vec<Complex64>,
    /// Coefficients `b_k` of `z_s`.
    pub deriv_coeffs: Vec<Complex64>,
    pub deriv_values: Vec<Complex64>,
    /// Coefficients of the explicit term `∓ 2i z̄ z_s² / (1 ± |z|²)`.
    pub nonlinear: Vec<Complex64>,
    /// Radiation data `(F(+L), F(-L))` at this level.
    pub radiation: Option<(Complex64, Complex64)>,
}

impl StepLevel {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn boundary(&self, side: Side) -> Complex64 {
        match side {
            Side::Plus => self.values[0],
            Side::Minus => self.values[self.degree()],
        }
    }

    pub fn boundary_slope(&self, side: Side) -> Complex64 {
        match side {
            Side::Plus => self.deriv_values[0],
            Side::Minus => self.deriv_values[self.degree()],
        }
    }

    /// Largest `|b_k|` over `k` in `[3N/4, N]`.
    pub fn derivative_tail(&self) -> f64 {
        let n = self.degree();
        self.deriv_coeffs[3 * n / 4..].iter().map(|b| b.norm()).fold(0.0, f64::max)
    }

    pub fn to_state(&self, grid: ChebyshevGrid, metric: Metric, dt: f64) -> ZFieldState {
        ZFieldState { grid, values: self.values.clone(), coeffs: self.coeffs.clone(), t: self.t, metric, dt }
    }
}

/// Time stepper bound to one grid and boundary strategy.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub grid: ChebyshevGrid,
    pub metric: Metric,
    pub bc: SpectralBc,
    transform: ChebTransform,
    solvers: Vec<TauSolver>,
    work: Vec<Complex64>,
}

impl Stepper {
    pub fn new(grid: ChebyshevGrid, metric: Metric, bc: SpectralBc) -> Result<Self> {
        let n = grid.degree;
        Ok(Self {
            grid,
            metric,
            bc,
            transform: ChebTransform::new(n)?,
            solvers: Vec::new(),
            work: vec![Complex64::new(0.0, 0.0); n + 1],
        })
    }

    /// Complete a level from its coefficients.
    pub fn level(&mut self, coeffs: Vec<Complex64>, t: f64) -> Result<StepLevel> {
        let n = self.grid.degree;
        let mut values = vec![Complex64::new(0.0, 0.0); n + 1];
        self.transform.inverse(&coeffs, &mut values)?;
        self.check_values(&values, t)?;
        let mut deriv_coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        cheb_derivative_into(&coeffs, self.grid.half_width, &mut deriv_coeffs);
        let mut deriv_values = vec![Complex64::new(0.0, 0.0); n + 1];
        self.transform.inverse(&deriv_coeffs, &mut deriv_values)?;

        let sg = self.metric.sign();
        for ((w, z), d) in self.work.iter_mut().zip(&values).zip(&deriv_values) {
            *w = Complex64::new(0.0, -2.0 * sg) * z.conj() * d * d / (1.0 + sg * z.norm_sqr());
        }
        let mut nonlinear = vec![Complex64::new(0.0, 0.0); n + 1];
        self.transform.forward(&self.work, &mut nonlinear)?;

        let radiation = match self.bc {
            SpectralBc::Radiation { c0 } => Some(self.radiation_data(c0, t, &values, &deriv_values)?),
            _ => None,
        };
        Ok(StepLevel { t, coeffs, values, deriv_coeffs, deriv_values, nonlinear, radiation })
    }

    fn check_values(&self, values: &[Complex64], t: f64) -> Result<()> {
        let mut worst: f64 = 0.0;
        for v in values {
            let r = v.norm_sqr();
            if !r.is_finite() {
                return Err(Error::NonFinite { t });
            }
            worst = worst.max(r);
        }
        if self.metric == Metric::Hyperbolic && worst.sqrt() >= 1.0 - DISC_GUARD {
            return Err(Error::DiscBoundary { modulus_sq: worst });
        }
        Ok(())
    }

    /// `(1 ± |z|²)/2 · (c0/√t) e^{iL²/4t} · e^{-i ∫_0^{±L} 2 Im(z z̄_s)/(±1 + |z|²)} · e^{i arg z_s(0)}`.
    fn radiation_data(&mut self, c0: f64, t: f64, values: &[Complex64], deriv: &[Complex64]) -> Result<(Complex64, Complex64)> {
        let n = self.grid.degree;
        let l = self.grid.half_width;
        let sg = self.metric.sign();
        for ((w, z), d) in self.work.iter_mut().zip(values).zip(deriv) {
            *w = Complex64::new(2.0 * (z * d.conj()).im / (sg + z.norm_sqr()), 0.0);
        }
        let mut integrand = vec![Complex64::new(0.0, 0.0); n + 1];
        self.transform.forward(&self.work, &mut integrand)?;
        let (at_plus, at_minus, at_zero) = endpoint_values(&cheb_antiderivative(&integrand, l));
        let centre = deriv[self.grid.center()];
        let reference = centre.im.atan2(centre.re);
        let amplitude = c0 / t.sqrt();
        let phase = l * l / (4.0 * t) + reference;
        let f = |z: Complex64, integral: f64| {
            Complex64::from_polar(0.5 * (1.0 + sg * z.norm_sqr()) * amplitude, phase - integral)
        };
        Ok((f(values[0], (at_plus - at_zero).re), f(values[n], (at_minus - at_zero).re)))
    }

    fn solver(&mut self, sigma: f64, kind: BoundaryKind) -> Result<&mut TauSolver> {
        let (n, l) = (self.grid.degree, self.grid.half_width);
        if let Some(i) = self.solvers.iter().position(|s| s.matches(n, l, sigma, kind)) {
            return Ok(&mut self.solvers[i]);
        }
        if self.solvers.len() >= 4 {
            self.solvers.remove(0);
        }
        self.solvers.push(TauSolver::new(n, l, sigma, kind)?);
        Ok(self.solvers.last_mut().expect("just pushed"))
    }

    fn projected(&self, t: f64) -> Result<Option<(Complex64, Complex64)>> {
        match &self.bc {
            SpectralBc::ProjectedSecondOrder(k) => {
                let plus = stereo_project(k.boundary_tangent(Side::Plus, t)?, self.metric)?;
                let minus = stereo_project(k.boundary_tangent(Side::Minus, t)?, self.metric)?;
                Ok(Some((plus, minus)))
            }
            _ => Ok(None),
        }
    }

    /// Boundary data for a first-order step of size `h` from `cur` to `t_next`.
    fn boundary_euler(&self, cur: &StepLevel, h: f64, t_next: f64) -> Result<(BoundaryKind, Complex64, Complex64)> {
        let l = self.grid.half_width;
        Ok(match &self.bc {
            SpectralBc::ProjectedSecondOrder(_) => {
                let (p, m) = self.projected(t_next)?.expect("projected bc");
                (BoundaryKind::Dirichlet, p, m)
            }
            SpectralBc::SelfSimilarity => {
                let k = h * l / (2.0 * cur.t);
                (
                    BoundaryKind::Dirichlet,
                    cur.boundary(Side::Plus) - cur.boundary_slope(Side::Plus) * k,
                    cur.boundary(Side::Minus) + cur.boundary_slope(Side::Minus) * k,
                )
            }
            SpectralBc::Radiation { .. } => {
                let (p, m) = cur.radiation.expect("radiation data");
                (BoundaryKind::Neumann, p, m)
            }
            SpectralBc::Fixed { plus, minus } => (BoundaryKind::Dirichlet, *plus, *minus),
        })
    }

    fn boundary_bdf2(&self, cur: &StepLevel, prev: &StepLevel, dt: f64, t_next: f64) -> Result<(BoundaryKind, Complex64, Complex64)> {
        let l = self.grid.half_width;
        Ok(match &self.bc {
            SpectralBc::SelfSimilarity => {
                let k = dt * l / cur.t;
                (
                    BoundaryKind::Dirichlet,
                    prev.boundary(Side::Plus) - cur.boundary_slope(Side::Plus) * k,
                    prev.boundary(Side::Minus) + cur.boundary_slope(Side::Minus) * k,
                )
            }
            SpectralBc::Radiation { .. } => {
                let (pn, mn) = cur.radiation.expect("radiation data");
                let (pp, mp) = prev.radiation.expect("radiation data");
                (BoundaryKind::Neumann, pn * 2.0 - pp, mn * 2.0 - mp)
            }
            _ => self.boundary_euler(cur, dt, t_next)?,
        })
    }

    /// One semi-implicit Backward Euler step (unfiltered coefficients).
    fn backward_euler(&mut self, cur: &StepLevel, h: f64, t_next: f64) -> Result<Vec<Complex64>> {
        let (kind, plus, minus) = self.boundary_euler(cur, h, t_next)?;
        let inv = 1.0 / h;
        let rhs: Vec<Complex64> = cur.coeffs.iter().zip(&cur.nonlinear).map(|(a, nl)| a * inv + nl).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); rhs.len()];
        self.solver(inv, kind)?.solve(&rhs, plus, minus, &mut out);
        Ok(out)
    }

    /// First step: Richardson combination of one Backward Euler step of
    /// `dt` and two of `dt/2`.
    pub fn bootstrap(&mut self, cur: &StepLevel, dt: f64) -> Result<StepLevel> {
        let t_half = cur.t + 0.5 * dt;
        let t_next = cur.t + dt;
        let full = self.backward_euler(cur, dt, t_next)?;
        let half = self.backward_euler(cur, 0.5 * dt, t_half)?;
        let mid = self.level(half, t_half)?;
        let two = self.backward_euler(&mid, 0.5 * dt, t_next)?;
        let mut coeffs: Vec<Complex64> = two.iter().zip(&full).map(|(a, b)| a * 2.0 - b).collect();
        spectral_filter(&mut coeffs, FILTER_EPS);
        self.level(coeffs, t_next)
    }

    /// `(3/2dt) U^{n+1} - i U_ss^{n+1} = (4U^n - U^{n-1})/2dt + 2N^n - N^{n-1}`.
    pub fn sbdf2(&mut self, cur: &StepLevel, prev: &StepLevel, dt: f64, t_next: f64) -> Result<StepLevel> {
        let (kind, plus, minus) = self.boundary_bdf2(cur, prev, dt, t_next)?;
        let inv = 1.0 / (2.0 * dt);
        let rhs: Vec<Complex64> = (0..cur.coeffs.len())
            .map(|k| (cur.coeffs[k] * 4.0 - prev.coeffs[k]) * inv + cur.nonlinear[k] * 2.0 - prev.nonlinear[k])
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); rhs.len()];
        self.solver(3.0 * inv, kind)?.solve(&rhs, plus, minus, &mut out);
        spectral_filter(&mut out, FILTER_EPS);
        self.level(out, t_next)
    }
}

/// Advance `state_n` by one SBDF2 step using `state_nm1` as history.
pub fn sbdf2_step(state_n: &ZFieldState, state_nm1: &ZFieldState, bc: &SpectralBc) -> Result<ZFieldState> {
    let mut st = Stepper::new(state_n.grid, state_n.metric, bc.clone())?;
    let cur = st.level(state_n.coeffs.clone(), state_n.t)?;
    let prev = st.level(state_nm1.coeffs.clone(), state_nm1.t)?;
    let dt = state_n.t - state_nm1.t;
    let next = st.sbdf2(&cur, &prev, dt, state_n.t + dt)?;
    Ok(next.to_state(state_n.grid, state_n.metric, dt))
}

/// First step of size `state_0.dt` by Backward Euler and Richardson extrapolation.
pub fn bootstrap_first_step(state_0: &ZFieldState, bc: &SpectralBc) -> Result<ZFieldState> {
    let mut st = Stepper::new(state_0.grid, state_0.metric, bc.clone())?;
    let cur = st.level(state_0.coeffs.clone(), state_0.t)?;
    let next = st.bootstrap(&cur, state_0.dt)?;
    Ok(next.to_state(state_0.grid, state_0.metric, state_0.dt))
}
