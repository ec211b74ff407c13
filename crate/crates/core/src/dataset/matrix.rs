use crate::dataset::schema::{Kind, Schema};
use crate::error::{Error, Result};

/// Row-major numeric table with a missing-value mask.
///
/// Masked cells hold `NaN`. Binary columns hold only `0.0`/`1.0` in
/// observed cells and the response column is never masked.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    schema: Schema,
    values: Vec<f64>,
    missing: Vec<bool>,
    n: usize,
}

impl DataMatrix {
    /// Builds a matrix from row-major values; `NaN` cells become missing.
    pub fn from_rows(schema: Schema, rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = schema.len();
        let n = rows.len();
        let mut values = Vec::with_capacity(n * m);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidArgument(format!(
                    "row {i} has {} values, schema has {m} columns",
                    row.len()
                )));
            }
            values.extend(row);
        }
        let missing = values.iter().map(|v| v.is_nan()).collect();
        Self::from_parts(schema, values, missing)
    }

    pub(crate) fn from_parts(schema: Schema, values: Vec<f64>, missing: Vec<bool>) -> Result<Self> {
        let m = schema.len();
        if !values.len().is_multiple_of(m) || values.len() != missing.len() {
            return Err(Error::InvalidArgument("value buffer does not fit schema".into()));
        }
        let n = values.len() / m;
        let data = Self {
            schema,
            values,
            missing,
            n,
        };
        data.validate()?;
        Ok(data)
    }

    fn validate(&self) -> Result<()> {
        let resp = self.schema.response_index();
        for i in 0..self.n {
            for (j, spec) in self.schema.variables().iter().enumerate() {
                if self.is_missing(i, j) {
                    if j == resp {
                        return Err(Error::MissingResponse);
                    }
                    continue;
                }
                let v = self.get(i, j);
                if !v.is_finite() {
                    return Err(Error::BadCell {
                        row: i,
                        column: spec.name.clone(),
                        value: v.to_string(),
                    });
                }
                if spec.kind == Kind::Binary && v != 0.0 && v != 1.0 {
                    return Err(Error::NotBinary {
                        row: i,
                        column: spec.name.clone(),
                        value: v,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_cols(&self) -> usize {
        self.schema.len()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols() + col]
    }

    #[inline]
    pub fn is_missing(&self, row: usize, col: usize) -> bool {
        self.missing[row * self.n_cols() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let m = self.n_cols();
        &self.values[row * m..(row + 1) * m]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, col)).collect()
    }

    pub fn has_missing(&self) -> bool {
        self.missing.iter().any(|&m| m)
    }

    pub fn missing_count(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }

    pub fn missing_mask(&self) -> &[bool] {
        &self.missing
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Response column as class labels (`true` = 1).
    pub fn labels(&self) -> Vec<bool> {
        let r = self.schema.response_index();
        (0..self.n).map(|i| self.get(i, r) == 1.0).collect()
    }

    /// A new matrix holding the given rows in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let m = self.n_cols();
        let mut values = Vec::with_capacity(rows.len() * m);
        let mut missing = Vec::with_capacity(rows.len() * m);
        for &i in rows {
            if i >= self.n {
                return Err(Error::InvalidArgument(format!("row index {i} out of range")));
            }
            values.extend_from_slice(&self.values[i * m..(i + 1) * m]);
            missing.extend_from_slice(&self.missing[i * m..(i + 1) * m]);
        }
        Ok(Self {
            schema: self.schema.clone(),
            values,
            missing,
            n: rows.len(),
        })
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            schema: self.schema.clone(),
            missing: vec![false; values.len()],
            values,
            n: self.n,
        }
    }
}
