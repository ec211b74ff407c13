//! Expectation-maximization imputation under a single multivariate normal
//! model over every non-response column.
//!
//! Rows are grouped by missingness pattern so the regression of missing on
//! observed coordinates is computed once per pattern and iteration.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::dataset::matrix::DataMatrix;
use crate::dataset::schema::Kind;
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 200;

const PINV_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
struct Gaussian {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

/// Per-pattern conditional regression: `x_m = mean_m + coef * (x_o - mean_o)`.
struct Conditional {
    missing: Vec<usize>,
    observed: Vec<usize>,
    coef: DMatrix<f64>,
    residual_cov: DMatrix<f64>,
}

impl Gaussian {
    fn conditional(&self, pattern: &[bool]) -> Conditional {
        let missing: Vec<usize> = (0..pattern.len()).filter(|&k| pattern[k]).collect();
        let observed: Vec<usize> = (0..pattern.len()).filter(|&k| !pattern[k]).collect();
        let s_mm = submatrix(&self.cov, &missing, &missing);
        if observed.is_empty() {
            return Conditional {
                coef: DMatrix::zeros(missing.len(), 0),
                residual_cov: s_mm,
                missing,
                observed,
            };
        }
        let s_mo = submatrix(&self.cov, &missing, &observed);
        let s_oo = submatrix(&self.cov, &observed, &observed);
        let s_oo_inv = s_oo
            .pseudo_inverse(PINV_EPS)
            .unwrap_or_else(|_| DMatrix::zeros(observed.len(), observed.len()));
        let coef = &s_mo * s_oo_inv;
        let residual_cov = &s_mm - &coef * s_mo.transpose();
        Conditional {
            missing,
            observed,
            coef,
            residual_cov,
        }
    }
}

fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

impl Conditional {
    fn fill(&self, model: &Gaussian, x: &mut [f64]) {
        let dev = DVector::from_iterator(self.observed.len(), self.observed.iter().map(|&k| x[k] - model.mean[k]));
        let shift = &self.coef * dev;
        for (a, &k) in self.missing.iter().enumerate() {
            x[k] = model.mean[k] + shift[a];
        }
    }
}

/// Replaces missing entries by their EM conditional means.
///
/// Observed cells are returned untouched. Imputed binary cells are clamped to
/// `[0, 1]` and rounded. Fails when a column has no observed value or when
/// the largest parameter change is still above `tol` after `max_iter` rounds.
///
/// EM runs on columns standardized by their observed mean and standard
/// deviation, so `tol` applies on a common scale whatever the units. The
/// conditional means are unaffected because EM is affine equivariant.
pub fn em_impute(data: &DataMatrix, tol: f64, max_iter: usize) -> Result<DataMatrix> {
    if tol.is_nan() || tol <= 0.0 || max_iter == 0 {
        return Err(Error::InvalidArgument("tol and max_iter must be positive".into()));
    }
    let schema = data.schema();
    let resp = schema.response_index();
    let cols: Vec<usize> = (0..data.n_cols()).filter(|&j| j != resp).collect();
    let n = data.n_rows();
    let p = cols.len();

    for &j in &cols {
        if (0..n).all(|i| data.is_missing(i, j)) {
            return Err(Error::FullyMissingColumn(schema.name(j).to_string()));
        }
    }
    if (0..n).any(|i| data.is_missing(i, resp)) {
        return Err(Error::MissingResponse);
    }
    if !data.has_missing() {
        return Ok(data.clone());
    }

    let (center, scale): (Vec<f64>, Vec<f64>) = cols.iter().map(|&j| observed_location(data, j)).unzip();

    // Standardized working copy of the predictor block, row-major n x p.
    let mut x: Vec<f64> = Vec::with_capacity(n * p);
    let mut patterns: BTreeMap<Vec<bool>, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let pattern: Vec<bool> = cols.iter().map(|&j| data.is_missing(i, j)).collect();
        x.extend(
            cols.iter()
                .enumerate()
                .map(|(k, &j)| (data.get(i, j) - center[k]) / scale[k]),
        );
        patterns.entry(pattern).or_default().push(i);
    }

    let mut model = initial_model(&x, n, p);
    let mut last_delta = f64::INFINITY;
    let mut converged = false;
    for iter in 0..max_iter {
        let next = em_step(&model, &mut x, n, p, &patterns);
        last_delta = max_abs_diff(&model, &next);
        model = next;
        if last_delta < tol {
            log::debug!("EM converged after {} iterations", iter + 1);
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::EmNotConverged {
            iterations: max_iter,
            last_delta,
        });
    }

    // Final conditional means under the converged parameters.
    for (pattern, rows) in &patterns {
        if !pattern.iter().any(|&m| m) {
            continue;
        }
        let cond = model.conditional(pattern);
        for &i in rows {
            cond.fill(&model, &mut x[i * p..(i + 1) * p]);
        }
    }

    let mut values = data.values().to_vec();
    let m = data.n_cols();
    for i in 0..n {
        for (k, &j) in cols.iter().enumerate() {
            if data.is_missing(i, j) {
                let mut v = center[k] + scale[k] * x[i * p + k];
                if schema.variables()[j].kind == Kind::Binary {
                    v = v.clamp(0.0, 1.0).round();
                }
                values[i * m + j] = v;
            }
        }
    }
    Ok(data.with_values(values))
}

fn initial_model(x: &[f64], n: usize, p: usize) -> Gaussian {
    let mut mean = DVector::zeros(p);
    let mut cov = DMatrix::zeros(p, p);
    for k in 0..p {
        let obs: Vec<f64> = (0..n).map(|i| x[i * p + k]).filter(|v| !v.is_nan()).collect();
        let mu = obs.iter().sum::<f64>() / obs.len() as f64;
        let var = obs.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / obs.len() as f64;
        mean[k] = mu;
        cov[(k, k)] = var;
    }
    Gaussian { mean, cov }
}

/// One E-step plus M-step. Missing cells of `x` are overwritten with the
/// current conditional means.
fn em_step(
    model: &Gaussian,
    x: &mut [f64],
    n: usize,
    p: usize,
    patterns: &BTreeMap<Vec<bool>, Vec<usize>>,
) -> Gaussian {
    let mut sum = DVector::<f64>::zeros(p);
    let mut cross = DMatrix::<f64>::zeros(p, p);
    for (pattern, rows) in patterns {
        let has_missing = pattern.iter().any(|&m| m);
        let cond = has_missing.then(|| model.conditional(pattern));
        for &i in rows {
            let row = &mut x[i * p..(i + 1) * p];
            if let Some(c) = &cond {
                c.fill(model, row);
            }
            for a in 0..p {
                sum[a] += row[a];
                for b in a..p {
                    cross[(a, b)] += row[a] * row[b];
                }
            }
        }
        if let Some(c) = &cond {
            let count = rows.len() as f64;
            for (ai, &a) in c.missing.iter().enumerate() {
                for (bi, &b) in c.missing.iter().enumerate() {
                    if a <= b {
                        cross[(a, b)] += count * c.residual_cov[(ai, bi)];
                    }
                }
            }
        }
    }
    let nf = n as f64;
    let mean = sum / nf;
    let mut cov = DMatrix::zeros(p, p);
    for a in 0..p {
        for b in a..p {
            let v = cross[(a, b)] / nf - mean[a] * mean[b];
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    Gaussian { mean, cov }
}

/// Mean and standard deviation of the observed cells of column `j`; a
/// constant column gets scale 1.
fn observed_location(data: &DataMatrix, j: usize) -> (f64, f64) {
    let vals: Vec<f64> = (0..data.n_rows())
        .filter(|&i| !data.is_missing(i, j))
        .map(|i| data.get(i, j))
        .collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
    let sd = var.sqrt();
    (mean, if sd > 0.0 && sd.is_finite() { sd } else { 1.0 })
}

fn max_abs_diff(a: &Gaussian, b: &Gaussian) -> f64 {
    let dm = (&a.mean - &b.mean).amax();
    let dc = (&a.cov - &b.cov).amax();
    dm.max(dc)
}
