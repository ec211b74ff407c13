use crate::cart::{CandidateEffect, EffectKind};
use crate::dataset::DataMatrix;
use crate::error::{Error, Result};

pub const INTERCEPT: &str = "Intercept";

/// Named real columns over `n` rows, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    names: Vec<String>,
    n_rows: usize,
    values: Vec<f64>,
}

impl DesignMatrix {
    pub fn from_columns(names: Vec<String>, columns: &[Vec<f64>]) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::LengthMismatch {
                left: names.len(),
                right: columns.len(),
            });
        }
        let n_rows = columns.first().map_or(0, Vec::len);
        if let Some(c) = columns.iter().find(|c| c.len() != n_rows) {
            return Err(Error::LengthMismatch {
                left: n_rows,
                right: c.len(),
            });
        }
        let p = columns.len();
        let mut values = vec![0.0; n_rows * p];
        for (j, col) in columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                values[i * p + j] = v;
            }
        }
        Ok(Self { names, n_rows, values })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_cols();
        &self.values[i * p..(i + 1) * p]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.row(i)[j]).collect()
    }

    /// Copy with one extra column appended on the right.
    pub fn with_column(&self, name: &str, column: &[f64]) -> Result<Self> {
        if column.len() != self.n_rows {
            return Err(Error::LengthMismatch {
                left: self.n_rows,
                right: column.len(),
            });
        }
        let p = self.n_cols();
        let mut values = Vec::with_capacity(self.n_rows * (p + 1));
        for (i, &c) in column.iter().enumerate() {
            values.extend_from_slice(self.row(i));
            values.push(c);
        }
        let mut names = self.names.clone();
        names.push(name.to_string());
        Ok(Self {
            names,
            n_rows: self.n_rows,
            values,
        })
    }

    /// Copy with column `j` multiplied by `factor`.
    pub fn scale_column(&self, j: usize, factor: f64) -> Self {
        let mut out = self.clone();
        let p = self.n_cols();
        for i in 0..self.n_rows {
            out.values[i * p + j] *= factor;
        }
        out
    }
}

/// Design over the schema's default predictors (demographic, geographic and
/// resource columns).
pub fn build_design(data: &DataMatrix, effects: &[CandidateEffect], rows: &[usize]) -> Result<DesignMatrix> {
    build_design_with(data, &data.schema().predictor_indices(), effects, rows)
}

/// Columns: intercept, `predictors` in the given order, univariate effects,
/// then bivariate effects (each group in input order).
pub fn build_design_with(
    data: &DataMatrix,
    predictors: &[usize],
    effects: &[CandidateEffect],
    rows: &[usize],
) -> Result<DesignMatrix> {
    let schema = data.schema();
    for &j in predictors {
        if j >= schema.len() {
            return Err(Error::UnknownFeature(j));
        }
    }
    for e in effects {
        e.validate(schema.len())?;
    }
    if let Some(&bad) = rows.iter().find(|&&i| i >= data.n_rows()) {
        return Err(Error::InvalidArgument(format!("row index {bad} out of range")));
    }
    let ordered: Vec<&CandidateEffect> = effects
        .iter()
        .filter(|e| e.kind == EffectKind::Univariate)
        .chain(effects.iter().filter(|e| e.kind == EffectKind::Bivariate))
        .collect();

    let p = 1 + predictors.len() + ordered.len();
    let mut names = Vec::with_capacity(p);
    names.push(INTERCEPT.to_string());
    names.extend(predictors.iter().map(|&j| schema.name(j).to_string()));
    names.extend(ordered.iter().map(|e| e.label(schema)));

    let mut values = Vec::with_capacity(rows.len() * p);
    for &i in rows {
        let row = data.row(i);
        values.push(1.0);
        values.extend(predictors.iter().map(|&j| row[j]));
        values.extend(ordered.iter().map(|e| e.value(row)));
    }
    Ok(DesignMatrix {
        names,
        n_rows: rows.len(),
        values,
    })
}
