//! Levenberg–Marquardt least squares with finite-difference Jacobians.
//!
//! Small and dense: the fitters here have at most a handful of parameters
//! and a few thousand residuals. Marquardt's diagonal scaling makes the
//! iteration insensitive to wildly different parameter magnitudes.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when the relative cost reduction falls below this.
    pub cost_tolerance: f64,
    /// Stop when the relative step falls below this.
    pub step_tolerance: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iterations: 300, cost_tolerance: 1e-16, step_tolerance: 1e-13 }
    }
}

#[derive(Debug, Clone)]
pub struct LmSolution {
    pub x: Vec<f64>,
    /// Sum of squared residuals at `x`.
    pub rss: f64,
    pub residual_count: usize,
    pub jacobian: DMatrix<f64>,
    pub iterations: usize,
}

impl LmSolution {
    /// Parameter covariance `s²(JᵀJ)⁻¹` with `s² = rss/(m − n)`.
    pub fn covariance(&self) -> Option<DMatrix<f64>> {
        let (m, n) = (self.residual_count, self.x.len());
        if m <= n {
            return None;
        }
        let s2 = self.rss / (m - n) as f64;
        let jtj = self.jacobian.transpose() * &self.jacobian;
        jtj.try_inverse().map(|inv| inv * s2)
    }
}

fn jacobian(f: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], steps: &[f64], m: usize) -> DMatrix<f64> {
    let n = x.len();
    let mut j = DMatrix::zeros(m, n);
    let mut xp = x.to_vec();
    for k in 0..n {
        let h = steps[k].max(1e-300);
        xp[k] = x[k] + h;
        let fp = f(&xp);
        xp[k] = x[k] - h;
        let fm = f(&xp);
        xp[k] = x[k];
        for i in 0..m {
            j[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    j
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Minimizes `Σ rᵢ(x)²`. `steps` are the finite-difference steps per parameter.
pub fn levenberg_marquardt(
    f: impl Fn(&[f64]) -> Vec<f64>,
    x0: &[f64],
    steps: &[f64],
    opts: LmOptions,
) -> Result<LmSolution> {
    let f = &f as &dyn Fn(&[f64]) -> Vec<f64>;
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = f(&x);
    let m = r.len();
    if m < n {
        return Err(Error::FitFailure { reason: "fewer residuals than parameters".into(), residual: f64::NAN });
    }
    let mut cost = sum_sq(&r);
    if !cost.is_finite() {
        return Err(Error::FitFailure { reason: "non-finite residual at the initial guess".into(), residual: cost });
    }
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut j = jacobian(f, &x, steps, m);
    while iterations < opts.max_iterations {
        iterations += 1;
        let jt = j.transpose();
        let jtj = &jt * &j;
        let g = &jt * DVector::from_column_slice(&r);
        let mut improved = false;
        let mut small_step = false;
        for _ in 0..40 {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(delta) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(xi, di)| xi + di).collect();
            let rt = f(&trial);
            let ct = sum_sq(&rt);
            if ct.is_finite() && ct <= cost {
                let rel_step = delta
                    .iter()
                    .zip(&x)
                    .zip(steps)
                    .map(|((d, xi), s)| d.abs() / (xi.abs() + s.abs() * 1e3))
                    .fold(0.0, f64::max);
                let rel_cost = (cost - ct) / cost.max(f64::MIN_POSITIVE);
                x = trial;
                r = rt;
                cost = ct;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                small_step = rel_step < opts.step_tolerance || rel_cost < opts.cost_tolerance;
                break;
            }
            lambda *= 10.0;
            if lambda > 1e16 {
                break;
            }
        }
        if !improved || small_step || cost == 0.0 {
            break;
        }
        j = jacobian(f, &x, steps, m);
    }
    let jacobian = jacobian(f, &x, steps, m);
    Ok(LmSolution { x, rss: cost, residual_count: m, jacobian, iterations })
}
