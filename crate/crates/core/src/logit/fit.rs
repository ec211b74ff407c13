//! Newton-Raphson maximum likelihood for the logistic model with Wald
//! inference.
//!
//! Columns are rescaled to unit root-mean-square before iterating; Newton is
//! invariant to that rescaling so it only affects conditioning. Estimates,
//! standard errors and the covariance are reported on the original scale.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logit::design::DesignMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Stop when the log-likelihood gain of a step falls below this.
    pub ll_tol: f64,
    /// Stop when the largest absolute score component falls below this.
    pub score_tol: f64,
    /// A final scaled coefficient beyond this is reported as separation
    /// when the fit did not converge or some fitted probability saturated.
    pub separation_bound: f64,
    pub max_halvings: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 50,
            ll_tol: 1e-10,
            score_tol: 1e-8,
            separation_bound: 30.0,
            max_halvings: 30,
        }
    }
}

/// Steps larger than this (scaled units) mean the iterates are still
/// moving, so a small likelihood change is not taken as convergence.
const DRIFT_TOL: f64 = 1e-3;
/// A flat likelihood alone is not enough; the iterate must also have settled.
const STEP_TOL: f64 = 1e-6;
const NEWTON_DECREMENT_TOL: f64 = 1e-8;
/// `mu (1 - mu)` below this means the fitted probability is saturated.
const SATURATED_WEIGHT: f64 = 1e-12;
const RIDGE: f64 = 1e-8;
const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub separation: bool,
    pub ridge_applied: bool,
    pub step_halvings: usize,
    pub max_abs_score: f64,
    pub last_ll_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub z_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
    pub covariance: Vec<Vec<f64>>,
    pub diagnostics: FitDiagnostics,
}

impl FitResult {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn n_params(&self) -> usize {
        self.coefficients.len()
    }
}

#[inline]
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Logistic function evaluated without overflow.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Two-sided normal tail probability `erfc(|z| / sqrt 2)`.
pub fn normal_two_sided_p(z: f64) -> f64 {
    libm::erfc(z.abs() / std::f64::consts::SQRT_2)
}

fn check_dims(x: &DesignMatrix, y: &[bool]) -> Result<()> {
    if x.n_rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.n_rows(),
            right: y.len(),
        });
    }
    Ok(())
}

fn linear_predictor(x: &DesignMatrix, beta: &[f64]) -> Vec<f64> {
    (0..x.n_rows())
        .map(|i| x.row(i).iter().zip(beta).map(|(a, b)| a * b).sum())
        .collect()
}

fn ll_from_eta(eta: &[f64], y: &[bool]) -> f64 {
    eta.iter()
        .zip(y)
        .map(|(&e, &yk)| if yk { -softplus(-e) } else { -softplus(e) })
        .sum()
}

/// Bernoulli log-likelihood of `beta` under design `x`.
pub fn log_likelihood(x: &DesignMatrix, y: &[bool], beta: &[f64]) -> Result<f64> {
    check_dims(x, y)?;
    if beta.len() != x.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: x.n_cols(),
            found: beta.len(),
        });
    }
    Ok(ll_from_eta(&linear_predictor(x, beta), y))
}

/// Gradient of the log-likelihood: `X^T (y - p)`.
pub fn score(x: &DesignMatrix, y: &[bool], beta: &[f64]) -> Result<Vec<f64>> {
    check_dims(x, y)?;
    if beta.len() != x.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: x.n_cols(),
            found: beta.len(),
        });
    }
    let eta = linear_predictor(x, beta);
    let mut g = vec![0.0; x.n_cols()];
    for (i, (&e, &yk)) in eta.iter().zip(y).enumerate() {
        let r = f64::from(u8::from(yk)) - sigmoid(e);
        for (gj, xij) in g.iter_mut().zip(x.row(i)) {
            *gj += r * xij;
        }
    }
    Ok(g)
}

/// Index of the first design column that is (numerically) a linear
/// combination of the columns before it.
pub fn dependent_column(x: &DesignMatrix) -> Option<usize> {
    let cols: Vec<Vec<f64>> = (0..x.n_cols()).map(|j| x.column(j)).collect();
    first_dependent_column(&cols)
}

/// Modified Gram-Schmidt with one reorthogonalization pass.
fn first_dependent_column(cols: &[Vec<f64>]) -> Option<usize> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for (j, col) in cols.iter().enumerate() {
        let norm0 = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            return Some(j);
        }
        let mut v = col.clone();
        for _ in 0..2 {
            for q in &basis {
                let d: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= d * qi;
                }
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm <= RANK_TOL * norm0 {
            return Some(j);
        }
        v.iter_mut().for_each(|a| *a /= norm);
        basis.push(v);
    }
    None
}

struct Scaled {
    rows: Vec<f64>,
    n: usize,
    p: usize,
    scale: Vec<f64>,
}

impl Scaled {
    fn new(x: &DesignMatrix) -> Result<Self> {
        let (n, p) = (x.n_rows(), x.n_cols());
        let cols: Vec<Vec<f64>> = (0..p).map(|j| x.column(j)).collect();
        if let Some(j) = first_dependent_column(&cols) {
            return Err(Error::RankDeficient {
                column: x.names()[j].clone(),
            });
        }
        let scale: Vec<f64> = cols
            .iter()
            .map(|c| (c.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt())
            .collect();
        let mut rows = Vec::with_capacity(n * p);
        for i in 0..n {
            rows.extend(x.row(i).iter().zip(&scale).map(|(v, s)| v / s));
        }
        Ok(Self { rows, n, p, scale })
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.p..(i + 1) * self.p]
    }

    fn eta(&self, beta: &DVector<f64>) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(beta.iter()).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn score_and_information(&self, eta: &[f64], y: &[bool]) -> (DVector<f64>, DMatrix<f64>) {
        let p = self.p;
        let mut g = DVector::zeros(p);
        let mut h = DMatrix::zeros(p, p);
        for i in 0..self.n {
            let mu = sigmoid(eta[i]);
            let r = f64::from(u8::from(y[i])) - mu;
            let w = mu * (1.0 - mu);
            let row = self.row(i);
            for a in 0..p {
                g[a] += r * row[a];
                let wa = w * row[a];
                for b in a..p {
                    h[(a, b)] += wa * row[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                h[(a, b)] = h[(b, a)];
            }
        }
        (g, h)
    }
}

/// Cholesky factor of `h`, adding a small ridge when plain factorization
/// fails. Returns the factor and whether a ridge was needed.
fn factor(h: &DMatrix<f64>) -> Option<(nalgebra::Cholesky<f64, nalgebra::Dyn>, bool)> {
    if let Some(c) = h.clone().cholesky() {
        return Some((c, false));
    }
    let p = h.nrows();
    let mut ridge = RIDGE;
    for _ in 0..8 {
        let jittered = h + DMatrix::identity(p, p) * ridge;
        if let Some(c) = jittered.cholesky() {
            return Some((c, true));
        }
        ridge *= 100.0;
    }
    None
}

pub fn fit(x: &DesignMatrix, y: &[bool]) -> Result<FitResult> {
    fit_with(x, y, &FitOptions::default())
}

/// Maximizes the log-likelihood by Newton steps with step halving.
///
/// Converged means the likelihood gain or the largest score component fell
/// below its tolerance while the iterates had stopped moving. A final
/// scaled coefficient past `separation_bound` together with non-convergence
/// or a saturated fitted probability is reported with `converged = false`
/// and `diagnostics.separation = true`.
pub fn fit_with(x: &DesignMatrix, y: &[bool], opts: &FitOptions) -> Result<FitResult> {
    check_dims(x, y)?;
    let (n, p) = (x.n_rows(), x.n_cols());
    if p == 0 || n < p {
        return Err(Error::TooFewRows { rows: n, cols: p });
    }
    let xs = Scaled::new(x)?;

    let mut beta = DVector::<f64>::zeros(p);
    let mut eta = xs.eta(&beta);
    let mut ll = ll_from_eta(&eta, y);
    let mut converged = false;
    let mut separation = false;
    let mut ridge_applied = false;
    let mut halvings = 0usize;
    let mut iterations = 0usize;
    let mut last_change = f64::INFINITY;
    let mut last_step = f64::INFINITY;

    let (mut g, mut h) = xs.score_and_information(&eta, y);
    while iterations < opts.max_iter {
        let small_score = g.amax() < opts.score_tol;
        let small_change = last_change < opts.ll_tol;
        if (small_score && last_step < DRIFT_TOL) || (small_change && last_step < STEP_TOL) {
            converged = true;
            break;
        }
        if small_score && iterations == 0 {
            converged = true;
            break;
        }

        let Some((chol, ridged)) = factor(&h) else {
            break;
        };
        ridge_applied |= ridged;
        let delta = chol.solve(&g);
        let decrement = g.dot(&delta);

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let cand = &beta + &delta * t;
            let cand_eta = xs.eta(&cand);
            let cand_ll = ll_from_eta(&cand_eta, y);
            // Inside the quadratic region the expected gain is below what the
            // summed likelihood can resolve, so rounding must not veto the step.
            if cand_ll >= ll || (t == 1.0 && decrement < NEWTON_DECREMENT_TOL) {
                accepted = Some((cand, cand_eta, cand_ll));
                break;
            }
            t *= 0.5;
            halvings += 1;
        }
        iterations += 1;
        let Some((cand, cand_eta, cand_ll)) = accepted else {
            // No ascent left in the Newton direction.
            converged = decrement.abs() < 1e-9;
            break;
        };
        last_change = cand_ll - ll;
        last_step = (t * delta.amax()).abs();
        beta = cand;
        eta = cand_eta;
        ll = cand_ll;
        (g, h) = xs.score_and_information(&eta, y);
    }
    // Separation: coefficients ran off and either never settled or pushed
    // some fitted probabilities to exactly 0 or 1.
    if beta.amax() > opts.separation_bound {
        let saturated = eta.iter().any(|&e| {
            let mu = sigmoid(e);
            mu * (1.0 - mu) < SATURATED_WEIGHT
        });
        separation = !converged || saturated;
    }
    if separation {
        converged = false;
    }

    let cov_scaled = match factor(&h) {
        Some((chol, ridged)) => {
            ridge_applied |= ridged;
            chol.inverse()
        }
        None => DMatrix::from_element(p, p, f64::NAN),
    };

    let s = &xs.scale;
    let coefficients: Vec<f64> = (0..p).map(|j| beta[j] / s[j]).collect();
    let covariance: Vec<Vec<f64>> = (0..p)
        .map(|a| (0..p).map(|b| cov_scaled[(a, b)] / (s[a] * s[b])).collect())
        .collect();
    let std_errors: Vec<f64> = (0..p).map(|j| covariance[j][j].max(0.0).sqrt()).collect();
    let z_values: Vec<f64> = coefficients
        .iter()
        .zip(&std_errors)
        .map(|(b, se)| if *se > 0.0 && se.is_finite() { b / se } else { 0.0 })
        .collect();
    let p_values = z_values.iter().map(|&z| normal_two_sided_p(z)).collect();
    let max_abs_score = g.iter().zip(s).map(|(gj, sj)| (gj / sj).abs()).fold(0.0, f64::max);

    Ok(FitResult {
        names: x.names().to_vec(),
        coefficients,
        std_errors,
        z_values,
        p_values,
        log_likelihood: ll,
        converged,
        iterations,
        covariance,
        diagnostics: FitDiagnostics {
            separation,
            ridge_applied,
            step_halvings: halvings,
            max_abs_score,
            last_ll_change: if last_change.is_finite() { last_change } else { 0.0 },
        },
    })
}

/// Fitted probabilities for `x` under a coefficient vector.
///
/// Outputs are kept strictly inside `(0, 1)`.
pub fn predict_with(coefficients: &[f64], x: &DesignMatrix) -> Result<Vec<f64>> {
    if coefficients.len() != x.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: coefficients.len(),
            found: x.n_cols(),
        });
    }
    let hi = 1.0 - f64::EPSILON / 2.0;
    Ok(linear_predictor(x, coefficients)
        .into_iter()
        .map(|z| sigmoid(z).clamp(f64::MIN_POSITIVE, hi))
        .collect())
}

pub fn predict_proba(fit: &FitResult, x: &DesignMatrix) -> Result<Vec<f64>> {
    predict_with(&fit.coefficients, x)
}

/// Class 1 exactly when the probability is larger than `pi`.
pub fn classify(probs: &[f64], pi: f64) -> Vec<bool> {
    probs.iter().map(|&p| p > pi).collect()
}
