use std::path::Path;

use serde::Serialize;

use crate::cart;
use crate::cli::artifacts::{coefficient_table, CoefficientRow, DetectionArtifact, Diagnostics, ModelArtifact};
use crate::cli::config::MinLeafRule;
use crate::dataset::{self, DataMatrix, Schema};
use crate::error::{Error, Result};
use crate::metrics::{self, PredictionReport};
use crate::selection;
use crate::synth::{self, SynthConfig};

/// The schema at `path`, or the built-in household-evacuation schema.
pub fn load_schema(path: Option<&Path>) -> Result<Schema> {
    match path {
        Some(p) => Schema::from_json_file(p),
        None => Ok(Schema::table1()),
    }
}

fn load_imputed(data: &Path, schema: &Schema) -> Result<DataMatrix> {
    let raw = dataset::load_csv(data, schema)?;
    if raw.has_missing() {
        log::info!("imputing {} missing cells", raw.missing_count());
        dataset::em_impute(&raw, dataset::DEFAULT_TOL, dataset::DEFAULT_MAX_ITER)
    } else {
        Ok(raw)
    }
}

/// Generates a dataset and writes it as CSV. Returns the true probabilities.
pub fn synth(config: &SynthConfig, out: &Path) -> Result<Vec<f64>> {
    let generated = synth::generate(config)?;
    dataset::write_csv(&generated.data, out)?;
    Ok(generated.probabilities)
}

/// EM-imputes `data` and writes the completed table.
pub fn impute(data: &Path, schema: &Schema, out: &Path) -> Result<DataMatrix> {
    let raw = dataset::load_csv(data, schema)?;
    let imputed = dataset::em_impute(&raw, dataset::DEFAULT_TOL, dataset::DEFAULT_MAX_ITER)?;
    dataset::write_csv(&imputed, out)?;
    Ok(imputed)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineReport {
    pub schema_digest: String,
    pub n: usize,
    pub coefficients: Vec<CoefficientRow>,
    pub diagnostics: Diagnostics,
}

/// Baseline logistic fit on every row (imputing first when needed).
pub fn fit_baseline_table(data: &Path, schema: &Schema) -> Result<BaselineReport> {
    let d = load_imputed(data, schema)?;
    let fit = selection::fit_baseline(&d)?;
    Ok(BaselineReport {
        schema_digest: schema.digest(),
        n: d.n_rows(),
        coefficients: coefficient_table(&fit),
        diagnostics: Diagnostics::from_fit(&fit),
    })
}

/// Detection trees over every row (imputing first when needed).
pub fn detect(data: &Path, schema: &Schema, min_leaf: MinLeafRule) -> Result<DetectionArtifact> {
    let d = load_imputed(data, schema)?;
    let ledger = cart::scan(&d, min_leaf.resolve(d.n_rows())?)?;
    Ok(DetectionArtifact::from_ledger(&ledger, schema))
}

/// Applies a saved model to a CSV whose schema digest matches the model's.
pub fn evaluate_saved(model: &Path, data: &Path, schema: &Schema) -> Result<PredictionReport> {
    let artifact = ModelArtifact::read(model)?;
    if artifact.schema_digest != schema.digest() {
        return Err(Error::DigestMismatch {
            model: artifact.schema_digest,
            data: schema.digest(),
        });
    }
    let d = load_imputed(data, schema)?;
    let probs = artifact.predict(&d)?;
    metrics::prediction_report(&d.labels(), &probs, artifact.pi)
}
