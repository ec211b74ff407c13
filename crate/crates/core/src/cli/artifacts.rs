//! On-disk forms of models, screening ledgers and detection ledgers.
//!
//! Features are referred to by name so that artifacts stay readable and can
//! be checked against the schema of whatever data they are applied to.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cart::{CandidateEffect, DetectionLedger, EffectKind, NamedCondition, TreeDepth};
use crate::dataset::{DataMatrix, Schema};
use crate::error::{Error, Result};
use crate::json::f64_or_nan;
use crate::logit::{self, FitResult};
use crate::selection::{ElrModel, ScreeningRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectArtifact {
    pub label: String,
    pub kind: EffectKind,
    pub source_tree: TreeDepth,
    pub features: Vec<String>,
    pub conditions: Vec<NamedCondition>,
}

impl EffectArtifact {
    pub fn from_effect(e: &CandidateEffect, schema: &Schema) -> Self {
        Self {
            label: e.label(schema),
            kind: e.kind,
            source_tree: e.source_tree,
            features: e.features.iter().map(|&f| schema.name(f).to_string()).collect(),
            conditions: e
                .conditions
                .iter()
                .map(|c| NamedCondition::from_condition(c, schema))
                .collect(),
        }
    }

    pub fn resolve(&self, schema: &Schema) -> Result<CandidateEffect> {
        let conditions = self
            .conditions
            .iter()
            .map(|c| c.resolve(schema))
            .collect::<Result<Vec<_>>>()?;
        let effect = match self.kind {
            EffectKind::Univariate => match conditions.as_slice() {
                [c] if c.comparator == crate::cart::Comparator::Gt => {
                    CandidateEffect::univariate(c.feature, c.threshold)
                }
                _ => {
                    return Err(Error::MalformedModel(format!(
                        "univariate effect {} must have one '>' condition",
                        self.label
                    )))
                }
            },
            EffectKind::Bivariate => CandidateEffect::bivariate(conditions, self.source_tree)
                .map_err(|e| Error::MalformedModel(format!("effect {}: {e}", self.label)))?,
        };
        Ok(effect)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub name: String,
    pub estimate: f64,
    #[serde(deserialize_with = "f64_or_nan")]
    pub std_error: f64,
    #[serde(deserialize_with = "f64_or_nan")]
    pub z: f64,
    #[serde(deserialize_with = "f64_or_nan")]
    pub p: f64,
}

pub fn coefficient_table(fit: &FitResult) -> Vec<CoefficientRow> {
    (0..fit.n_params())
        .map(|j| CoefficientRow {
            name: fit.names[j].clone(),
            estimate: fit.coefficients[j],
            std_error: fit.std_errors[j],
            z: fit.z_values[j],
            p: fit.p_values[j],
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub converged: bool,
    pub iterations: usize,
    #[serde(deserialize_with = "f64_or_nan")]
    pub log_likelihood: f64,
    pub separation: bool,
    pub ridge_applied: bool,
    pub step_halvings: usize,
    #[serde(deserialize_with = "f64_or_nan")]
    pub max_abs_score: f64,
    #[serde(deserialize_with = "f64_or_nan")]
    pub last_ll_change: f64,
}

impl Diagnostics {
    pub fn from_fit(fit: &FitResult) -> Self {
        Self {
            converged: fit.converged,
            iterations: fit.iterations,
            log_likelihood: fit.log_likelihood,
            separation: fit.diagnostics.separation,
            ridge_applied: fit.diagnostics.ridge_applied,
            step_halvings: fit.diagnostics.step_halvings,
            max_abs_score: fit.diagnostics.max_abs_score,
            last_ll_change: fit.diagnostics.last_ll_change,
        }
    }
}

/// A fitted model as written to `model.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub schema_digest: String,
    pub response: String,
    pub pi: f64,
    pub predictors: Vec<String>,
    pub effects: Vec<EffectArtifact>,
    pub coefficients: Vec<CoefficientRow>,
    pub diagnostics: Diagnostics,
    pub warnings: Vec<String>,
}

impl ModelArtifact {
    pub fn from_model(model: &ElrModel) -> Self {
        let schema = &model.schema;
        Self {
            schema_digest: schema.digest(),
            response: schema.name(schema.response_index()).to_string(),
            pi: model.pi,
            predictors: model.predictors.iter().map(|&j| schema.name(j).to_string()).collect(),
            effects: model
                .effects
                .iter()
                .map(|e| EffectArtifact::from_effect(e, schema))
                .collect(),
            coefficients: coefficient_table(&model.fit),
            diagnostics: Diagnostics::from_fit(&model.fit),
            warnings: model.warnings.clone(),
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::MalformedModel(format!("{}: {e}", path.display())))
    }

    /// Fitted probabilities for every row of `data`.
    ///
    /// The data schema must have the digest recorded in the artifact and the
    /// coefficient names must match the design the artifact describes.
    pub fn predict(&self, data: &DataMatrix) -> Result<Vec<f64>> {
        let schema = data.schema();
        let digest = schema.digest();
        if digest != self.schema_digest {
            return Err(Error::DigestMismatch {
                model: self.schema_digest.clone(),
                data: digest,
            });
        }
        let predictors = self
            .predictors
            .iter()
            .map(|name| {
                schema
                    .index_of(name)
                    .ok_or_else(|| Error::MalformedModel(format!("unknown predictor {name}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let effects = self
            .effects
            .iter()
            .map(|e| e.resolve(schema))
            .collect::<Result<Vec<_>>>()?;
        let rows: Vec<usize> = (0..data.n_rows()).collect();
        let x = logit::build_design_with(data, &predictors, &effects, &rows)?;
        let names: Vec<&str> = self.coefficients.iter().map(|c| c.name.as_str()).collect();
        if x.names().iter().map(String::as_str).ne(names.iter().copied()) {
            return Err(Error::MalformedModel(format!(
                "coefficient names [{}] do not match design [{}]",
                names.join(","),
                x.names().join(",")
            )));
        }
        if let Some(c) = self.coefficients.iter().find(|c| !c.estimate.is_finite()) {
            return Err(Error::MalformedModel(format!("non-finite estimate for {}", c.name)));
        }
        let beta: Vec<f64> = self.coefficients.iter().map(|c| c.estimate).collect();
        logit::predict_with(&beta, &x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreeningEntry {
    pub effect: EffectArtifact,
    pub lr_statistic: f64,
    pub lrt_p: f64,
    pub coef_p: Vec<f64>,
    pub selected: bool,
    pub rejection_reason: Option<String>,
}

pub fn screening_entries(records: &[ScreeningRecord], schema: &Schema) -> Vec<ScreeningEntry> {
    records
        .iter()
        .map(|r| ScreeningEntry {
            effect: EffectArtifact::from_effect(&r.effect, schema),
            lr_statistic: r.lr_statistic,
            lrt_p: r.lrt_p,
            coef_p: r.coef_p.clone(),
            selected: r.selected,
            rejection_reason: r.rejection_reason.map(|x| x.to_string()),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnivariateEntry {
    pub feature: String,
    pub candidate: Option<EffectArtifact>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairEntry {
    pub first: String,
    pub second: String,
    pub candidates: Vec<EffectArtifact>,
}

/// Every tree that detection grew, one entry per scanned feature or pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionArtifact {
    pub min_leaf: usize,
    pub univariate: Vec<UnivariateEntry>,
    pub pairs: Vec<PairEntry>,
}

impl DetectionArtifact {
    pub fn from_ledger(ledger: &DetectionLedger, schema: &Schema) -> Self {
        Self {
            min_leaf: ledger.min_leaf,
            univariate: ledger
                .univariate
                .iter()
                .map(|u| UnivariateEntry {
                    feature: schema.name(u.feature).to_string(),
                    candidate: u.candidate.as_ref().map(|c| EffectArtifact::from_effect(c, schema)),
                })
                .collect(),
            pairs: ledger
                .pairs
                .iter()
                .map(|p| PairEntry {
                    first: schema.name(p.first).to_string(),
                    second: schema.name(p.second).to_string(),
                    candidates: p
                        .candidates
                        .iter()
                        .map(|c| EffectArtifact::from_effect(c, schema))
                        .collect(),
                })
                .collect(),
        }
    }
}
