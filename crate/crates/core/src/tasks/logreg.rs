//! L2-regularized logistic regression.
//!
//! Minimizes `mean NLL + ‖w‖² / (2 C n)` with the bias unpenalized, using
//! Nesterov-accelerated gradient steps with backtracking on the step size
//! and a monotone restart. Stops when the gradient's max-norm drops below
//! the tolerance or after `max_iter` iterations.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRegOptions {
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogRegOptions {
    fn default() -> Self {
        Self { c: 1.0, tol: 1e-4, max_iter: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogRegModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl LogRegModel {
    pub fn decision(&self, row: &[f64]) -> f64 {
        self.bias + row.iter().zip(&self.weights).map(|(x, w)| x * w).sum::<f64>()
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.decision(row))
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Training problem over row-major features `x` (`n x d`); the parameter
/// vector is `[w, b]`.
pub struct Problem<'a> {
    x: &'a [f64],
    y: &'a [bool],
    d: usize,
    lambda: f64,
}

impl<'a> Problem<'a> {
    pub fn new(x: &'a [f64], d: usize, y: &'a [bool], c: f64) -> Result<Self> {
        let n = y.len();
        if n == 0 || x.len() != n * d {
            return Err(Error::Validation(format!("feature matrix has {} values, expected {n} x {d}", x.len())));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite feature value".into()));
        }
        if !(c > 0.0) {
            return Err(Error::Config(format!("regularization strength must be positive, got {c}")));
        }
        Ok(Self { x, y, d, lambda: 1.0 / (c * n as f64) })
    }

    fn margins(&self, theta: &[f64], z: &mut [f64]) {
        let (w, b) = theta.split_at(self.d);
        for (zi, row) in z.iter_mut().zip(self.x.chunks_exact(self.d)) {
            *zi = b[0] + row.iter().zip(w).map(|(a, c)| a * c).sum::<f64>();
        }
    }

    /// Objective value.
    pub fn value(&self, theta: &[f64], z: &mut [f64]) -> f64 {
        self.margins(theta, z);
        let n = self.y.len() as f64;
        let nll: f64 = z.iter().zip(self.y).map(|(&zi, &yi)| softplus(zi) - if yi { zi } else { 0.0 }).sum();
        let reg: f64 = theta[..self.d].iter().map(|w| w * w).sum();
        nll / n + 0.5 * self.lambda * reg
    }

    /// Objective value and gradient.
    pub fn value_grad(&self, theta: &[f64], z: &mut [f64], grad: &mut [f64]) -> f64 {
        let f = self.value(theta, z);
        let n = self.y.len() as f64;
        grad.iter_mut().for_each(|g| *g = 0.0);
        for ((&zi, &yi), row) in z.iter().zip(self.y).zip(self.x.chunks_exact(self.d)) {
            let r = (sigmoid(zi) - if yi { 1.0 } else { 0.0 }) / n;
            for (g, a) in grad[..self.d].iter_mut().zip(row) {
                *g += r * a;
            }
            grad[self.d] += r;
        }
        for (g, w) in grad[..self.d].iter_mut().zip(&theta[..self.d]) {
            *g += self.lambda * w;
        }
        f
    }

    /// Hessian of the objective (dense, `(d+1) x (d+1)`, row-major).
    pub fn hessian(&self, theta: &[f64]) -> Vec<f64> {
        let m = self.d + 1;
        let mut z = vec![0.0; self.y.len()];
        self.margins(theta, &mut z);
        let n = self.y.len() as f64;
        let mut h = vec![0.0; m * m];
        let mut ext = vec![1.0; m];
        for (&zi, row) in z.iter().zip(self.x.chunks_exact(self.d)) {
            let s = sigmoid(zi);
            let wgt = s * (1.0 - s) / n;
            ext[..self.d].copy_from_slice(row);
            for i in 0..m {
                for j in 0..m {
                    h[i * m + j] += wgt * ext[i] * ext[j];
                }
            }
        }
        for i in 0..self.d {
            h[i * m + i] += self.lambda;
        }
        h
    }
}

pub fn train_logreg(x: &[f64], d: usize, y: &[bool], opts: &LogRegOptions) -> Result<LogRegModel> {
    let prob = Problem::new(x, d, y, opts.c)?;
    let m = d + 1;
    let n = y.len();
    let mut z = vec![0.0; n];
    let mut theta = vec![0.0; m];
    let mut prev = theta.clone();
    let mut look = theta.clone();
    let mut grad = vec![0.0; m];
    let mut cand = vec![0.0; m];
    let mut step = 1.0;
    let mut momentum = 1.0f64;
    let mut f_theta = prob.value(&theta, &mut z);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        // convergence is judged at the current iterate, not the look-ahead point
        prob.value_grad(&theta, &mut z, &mut grad);
        if grad.iter().fold(0.0f64, |a, g| a.max(g.abs())) < opts.tol {
            converged = true;
            break;
        }
        iterations += 1;
        let f_look = prob.value_grad(&look, &mut z, &mut grad);
        let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
        step *= 2.0;
        let f_cand = loop {
            for i in 0..m {
                cand[i] = look[i] - step * grad[i];
            }
            let f = prob.value(&cand, &mut z);
            if f <= f_look - 0.5 * step * gnorm2 || step < 1e-20 {
                break f;
            }
            step *= 0.5;
        };
        if f_cand > f_theta {
            // restart momentum when the objective goes up
            momentum = 1.0;
            look.copy_from_slice(&theta);
            continue;
        }
        let next = (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt()) / 2.0;
        let beta = (momentum - 1.0) / next;
        momentum = next;
        prev.copy_from_slice(&theta);
        theta.copy_from_slice(&cand);
        for i in 0..m {
            look[i] = theta[i] + beta * (theta[i] - prev[i]);
        }
        f_theta = f_cand;
    }
    if !converged {
        log::warn!("logistic regression stopped after {iterations} iterations without reaching tolerance");
    }
    let bias = theta[d];
    theta.truncate(d);
    Ok(LogRegModel { weights: theta, bias, iterations, converged })
}
