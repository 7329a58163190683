//! Coefficient-space solver for `sigma u - i u_ss = r` with two boundary rows.
//!
//! Rows `k >= 2` are integrated twice in coefficient space, which turns the
//! dense second-derivative operator into a three-term recurrence coupling
//! `a_{k-2}, a_k, a_{k+2}`. Even and odd modes decouple; each parity is a
//! tridiagonal block closed by one dense boundary row, eliminated in O(N).

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    /// Values `u(+L)`, `u(-L)`.
    Dirichlet,
    /// Derivatives `u_s(+L)`, `u_s(-L)`.
    Neumann,
}

#[derive(Debug, Clone)]
struct ParityBlock {
    parity: usize,
    upper: Vec<Complex64>,
    den: Vec<Complex64>,
    gamma: Vec<Complex64>,
    q: Vec<Complex64>,
    weights: Vec<f64>,
    wq: Complex64,
    // Work arrays.
    alpha: Vec<Complex64>,
}

/// Weights of the integrated operator row `k` on `a_{k-2}`, `a_k`, `a_{k+2}`.
fn integration_weights(k: usize, degree: usize) -> (f64, f64, f64) {
    let kf = k as f64;
    let beta = |j: usize| if j + 2 <= degree { 1.0 } else { 0.0 };
    let c = if k == 2 { 2.0 } else { 1.0 };
    (
        c / (4.0 * kf * (kf - 1.0)),
        -beta(k) / (2.0 * (kf * kf - 1.0)),
        beta(k + 2) / (4.0 * kf * (kf + 1.0)),
    )
}

impl ParityBlock {
    fn new(parity: usize, degree: usize, sigma: f64, half_width: f64, kind: BoundaryKind) -> Result<Self> {
        let m = (degree - parity) / 2;
        let shift = Complex64::new(0.0, -1.0 / (half_width * half_width));
        let mut lower = vec![Complex64::new(0.0, 0.0); m + 1];
        let mut diag = vec![Complex64::new(0.0, 0.0); m + 1];
        let mut upper = vec![Complex64::new(0.0, 0.0); m + 1];
        for j in 1..=m {
            let (l, d, u) = integration_weights(parity + 2 * j, degree);
            lower[j] = Complex64::new(sigma * l, 0.0);
            diag[j] = Complex64::new(sigma * d, 0.0) + shift;
            upper[j] = Complex64::new(sigma * u, 0.0);
        }
        let mut den = vec![Complex64::new(1.0, 0.0); m + 1];
        let mut gamma = vec![Complex64::new(0.0, 0.0); m + 2];
        for j in (1..=m).rev() {
            den[j] = diag[j] + upper[j] * gamma[j + 1];
            if den[j].norm() == 0.0 || !den[j].is_finite() {
                return Err(Error::SolverSingular);
            }
            gamma[j] = -lower[j] / den[j];
        }
        let mut q = vec![Complex64::new(1.0, 0.0); m + 1];
        for j in 1..=m {
            q[j] = gamma[j] * q[j - 1];
        }
        let weights: Vec<f64> = (0..=m)
            .map(|j| {
                let k = (parity + 2 * j) as f64;
                match kind {
                    BoundaryKind::Dirichlet => 1.0,
                    BoundaryKind::Neumann => k * k,
                }
            })
            .collect();
        let wq: Complex64 = weights.iter().zip(&q).map(|(w, q)| q * *w).sum();
        let scale: f64 = weights.iter().zip(&q).map(|(w, q)| w * q.norm()).sum();
        if !(wq.norm() > 1e-13 * scale) {
            return Err(Error::SolverSingular);
        }
        Ok(Self {
            parity,
            upper,
            den,
            gamma,
            q,
            weights,
            wq,
            alpha: vec![Complex64::new(0.0, 0.0); m + 2],
        })
    }

    /// `f[j]` is the right side of row `k = parity + 2j` (entry 0 unused).
    fn solve(&mut self, f: &[Complex64], g: Complex64, out: &mut [Complex64]) {
        let m = self.q.len() - 1;
        self.alpha[m + 1] = Complex64::new(0.0, 0.0);
        for j in (1..=m).rev() {
            self.alpha[j] = (f[j] - self.upper[j] * self.alpha[j + 1]) / self.den[j];
        }
        // x_j = p_j + q_j x_0; reuse alpha for p.
        self.alpha[0] = Complex64::new(0.0, 0.0);
        let mut wp = Complex64::new(0.0, 0.0);
        for j in 1..=m {
            let p = self.alpha[j] + self.gamma[j] * self.alpha[j - 1];
            self.alpha[j] = p;
            wp += p * self.weights[j];
        }
        let x0 = (g - wp) / self.wq;
        for j in 0..=m {
            out[self.parity + 2 * j] = self.alpha[j] + self.q[j] * x0;
        }
    }
}

/// Factorized operator for one `(N, L, sigma, kind)`.
#[derive(Debug, Clone)]
pub struct TauSolver {
    degree: usize,
    half_width: f64,
    sigma: f64,
    kind: BoundaryKind,
    blocks: [ParityBlock; 2],
    rhs: Vec<Complex64>,
}

impl TauSolver {
    pub fn new(degree: usize, half_width: f64, sigma: f64, kind: BoundaryKind) -> Result<Self> {
        if degree < 4 || degree % 2 != 0 {
            return Err(Error::BadLength(degree + 1));
        }
        if !sigma.is_finite() || sigma == 0.0 {
            return Err(Error::SolverSingular);
        }
        Ok(Self {
            degree,
            half_width,
            sigma,
            kind,
            blocks: [
                ParityBlock::new(0, degree, sigma, half_width, kind)?,
                ParityBlock::new(1, degree, sigma, half_width, kind)?,
            ],
            rhs: vec![Complex64::new(0.0, 0.0); degree / 2 + 2],
        })
    }

    pub fn matches(&self, degree: usize, half_width: f64, sigma: f64, kind: BoundaryKind) -> bool {
        self.degree == degree && self.half_width == half_width && self.sigma == sigma && self.kind == kind
    }

    /// Solve for coefficients `out` given the right-side coefficients `r`
    /// and boundary data at `s = +L` and `s = -L`.
    pub fn solve(&mut self, r: &[Complex64], plus: Complex64, minus: Complex64, out: &mut [Complex64]) {
        let n = self.degree;
        debug_assert!(r.len() == n + 1 && out.len() == n + 1);
        let (even_g, odd_g) = match self.kind {
            BoundaryKind::Dirichlet => ((plus + minus) * 0.5, (plus - minus) * 0.5),
            BoundaryKind::Neumann => {
                let l = self.half_width;
                ((plus - minus) * (0.5 * l), (plus + minus) * (0.5 * l))
            }
        };
        // Rows k > N-2 of r are discarded (tau truncation).
        let rk = |k: usize| if k + 2 <= n { r[k] } else { Complex64::new(0.0, 0.0) };
        for (p, g) in [(0usize, even_g), (1usize, odd_g)] {
            let m = (n - p) / 2;
            for j in 1..=m {
                let k = p + 2 * j;
                let (l, d, u) = integration_weights(k, n);
                let up = if k + 2 <= n { rk(k + 2) } else { Complex64::new(0.0, 0.0) };
                self.rhs[j] = rk(k - 2) * l + rk(k) * d + up * u;
            }
            let rhs = &self.rhs[..=m];
            self.blocks[p].solve(rhs, g, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chebyshev::{cheb_derivative, endpoint_values};

    /// Dense Gaussian elimination with partial pivoting.
    fn dense_solve(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Vec<Complex64> {
        let n = b.len();
        for col in 0..n {
            let piv = (col..n).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm())).unwrap();
            a.swap(col, piv);
            b.swap(col, piv);
            for row in col + 1..n {
                let f = a[row][col] / a[col][col];
                for k in col..n {
                    let v = a[col][k];
                    a[row][k] -= f * v;
                }
                let v = b[col];
                b[row] -= f * v;
            }
        }
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for i in (0..n).rev() {
            let mut acc = b[i];
            for k in i + 1..n {
                acc -= a[i][k] * x[k];
            }
            x[i] = acc / a[i][i];
        }
        x
    }

    /// Classical tau system: equation rows 0..N-2 plus two boundary rows.
    fn dense_reference(n: usize, l: f64, sigma: f64, kind: BoundaryKind, r: &[Complex64], plus: Complex64, minus: Complex64) -> Vec<Complex64> {
        let mut rows = vec![vec![Complex64::new(0.0, 0.0); n + 1]; n + 1];
        for col in 0..=n {
            let mut e = vec![Complex64::new(0.0, 0.0); n + 1];
            e[col] = Complex64::new(1.0, 0.0);
            let d2 = cheb_derivative(&cheb_derivative(&e, l), l);
            for k in 0..=n - 2 {
                rows[k][col] = e[k] * sigma - Complex64::i() * d2[k];
            }
            let kk = (col * col) as f64;
            let sign_m = if col % 2 == 0 { 1.0 } else { -1.0 };
            match kind {
                BoundaryKind::Dirichlet => {
                    rows[n - 1][col] = Complex64::new(1.0, 0.0);
                    rows[n][col] = Complex64::new(sign_m, 0.0);
                }
                BoundaryKind::Neumann => {
                    rows[n - 1][col] = Complex64::new(kk / l, 0.0);
                    rows[n][col] = Complex64::new(-sign_m * kk / l, 0.0);
                }
            }
        }
        let mut b: Vec<Complex64> = r.to_vec();
        b[n - 1] = plus;
        b[n] = minus;
        dense_solve(rows, b)
    }

    fn sample_rhs(n: usize) -> Vec<Complex64> {
        (0..=n).map(|k| Complex64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos()) / (1.0 + k as f64)).collect()
    }

    #[test]
    fn matches_dense_tau() {
        for &(n, l, sigma) in &[(16usize, 10.0, -1.5e4), (32, 10.0, 3.0e2), (64, 2.0, -1.5e6), (16, 1.0, 1.0)] {
            for kind in [BoundaryKind::Dirichlet, BoundaryKind::Neumann] {
                let r = sample_rhs(n);
                let (plus, minus) = (Complex64::new(0.3, -0.2), Complex64::new(-0.1, 0.4));
                let mut fast = vec![Complex64::new(0.0, 0.0); n + 1];
                TauSolver::new(n, l, sigma, kind).unwrap().solve(&r, plus, minus, &mut fast);
                let slow = dense_reference(n, l, sigma, kind, &r, plus, minus);
                let scale = slow.iter().map(|v| v.norm()).fold(0.0, f64::max);
                for (a, b) in fast.iter().zip(&slow) {
                    assert!((a - b).norm() < 1e-10 * scale, "n={n} sigma={sigma} {kind:?}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn boundary_rows_are_exact() {
        let n = 1024;
        let l = 10.0;
        let r = sample_rhs(n);
        let (plus, minus) = (Complex64::new(0.25, 0.1), Complex64::new(-0.25, 0.1));
        let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
        TauSolver::new(n, l, -1.5e6, BoundaryKind::Dirichlet).unwrap().solve(&r, plus, minus, &mut out);
        let (p, m, _) = endpoint_values(&out);
        assert!((p - plus).norm() < 1e-10 && (m - minus).norm() < 1e-10);

        TauSolver::new(n, l, -1.5e6, BoundaryKind::Neumann).unwrap().solve(&r, plus, minus, &mut out);
        let (p, m, _) = endpoint_values(&cheb_derivative(&out, l));
        assert!((p - plus).norm() < 1e-10 && (m - minus).norm() < 1e-10);
    }

    #[test]
    fn zero_data_gives_zero() {
        let n = 64;
        let mut out = vec![Complex64::new(1.0, 1.0); n + 1];
        let zero = Complex64::new(0.0, 0.0);
        TauSolver::new(n, 10.0, -3e5, BoundaryKind::Dirichlet).unwrap().solve(&vec![zero; n + 1], zero, zero, &mut out);
        assert!(out.iter().all(|v| *v == zero));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(TauSolver::new(5, 1.0, 1.0, BoundaryKind::Dirichlet).is_err());
        assert!(matches!(TauSolver::new(8, 1.0, 0.0, BoundaryKind::Dirichlet), Err(Error::SolverSingular)));
    }
}
