use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 50;
pub const TOLERANCE: f64 = 1e-8;
pub const RIDGE: f64 = 1e-8;
/// Linear predictors beyond this magnitude are taken as separation.
pub const SEPARATION_BOUND: f64 = 15.0;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    pub coefficients: Vec<f64>,
    pub iterations: usize,
    /// Fitting stopped because some linear predictor diverged.
    pub separation: bool,
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl LogisticFit {
    pub fn predict(&self, row: &[f64]) -> f64 {
        sigmoid(row.iter().zip(&self.coefficients).map(|(x, b)| x * b).sum())
    }
}

/// Logistic regression by iteratively reweighted least squares, starting
/// from zero. Rows of `x` include any intercept column.
pub fn fit_logistic(x: &DMatrix<f64>, y: &[f64]) -> Result<LogisticFit> {
    let (n, k) = x.shape();
    if n != y.len() {
        return Err(Error::InvalidArgument("design and response lengths differ".into()));
    }
    if n == 0 {
        return Err(Error::Data("logistic regression needs data".into()));
    }
    let y = DVector::from_column_slice(y);
    let mut beta = DVector::zeros(k);
    let mut last_change = f64::INFINITY;
    for it in 1..=MAX_ITERATIONS {
        let eta = x * &beta;
        let mu = eta.map(sigmoid);
        let w = mu.map(|m| (m * (1.0 - m)).max(1e-10));
        let z = DVector::from_fn(n, |i, _| eta[i] + (y[i] - mu[i]) / w[i]);
        let mut xtw = x.transpose();
        for (j, mut col) in xtw.column_iter_mut().enumerate() {
            col *= w[j];
        }
        let mut a = &xtw * x;
        for d in 0..k {
            a[(d, d)] += RIDGE;
        }
        let rhs = &xtw * z;
        let next = a
            .cholesky()
            .map(|c| c.solve(&rhs))
            .ok_or_else(|| Error::Convergence {
                iterations: it,
                max_change: f64::NAN,
            })?;
        last_change = (&next - &beta).amax();
        beta = next;
        let max_eta = (x * &beta).amax();
        if max_eta > SEPARATION_BOUND {
            return Ok(LogisticFit {
                coefficients: beta.iter().copied().collect(),
                iterations: it,
                separation: true,
            });
        }
        if last_change < TOLERANCE {
            return Ok(LogisticFit {
                coefficients: beta.iter().copied().collect(),
                iterations: it,
                separation: false,
            });
        }
    }
    Err(Error::Convergence {
        iterations: MAX_ITERATIONS,
        max_change: last_change,
    })
}
