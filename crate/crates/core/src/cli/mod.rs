//! End-to-end pipeline and the operations behind each `elr` subcommand.
//!
//! Order: load, impute (all rows), split, then baseline fit, detection,
//! screening and model assembly on training rows only. Test rows are used
//! only when the finished models are evaluated.

mod artifacts;
mod commands;
mod config;
mod summary;

use std::path::Path;

use serde::Serialize;

pub use artifacts::{
    coefficient_table, screening_entries, CoefficientRow, DetectionArtifact, Diagnostics, EffectArtifact,
    ModelArtifact, PairEntry, ScreeningEntry, UnivariateEntry,
};
pub use commands::{detect, evaluate_saved, fit_baseline_table, impute, load_schema, synth, BaselineReport};
pub use config::{MinLeafRule, RunConfig};

use crate::cart::{self, DetectionLedger, EffectKind};
use crate::dataset::{self, DataMatrix, SplitSpec};
use crate::error::{Error, Result};
use crate::json;
use crate::metrics::{self, EvaluationReport};
use crate::selection::{self, ElrModel, ScreeningConfig, ScreeningRecord};

pub const MODEL_FILE: &str = "model.json";
pub const SCREENING_FILE: &str = "screening.json";
pub const EVALUATION_FILE: &str = "evaluation.json";
pub const SUMMARY_FILE: &str = "summary.txt";

pub const BASELINE_NAME: &str = "LR";
pub const PSYCHOLOGICAL_NAME: &str = "LR with psychological variables";
pub const UNIVARIATE_NAME: &str = "ELR (univariate effects)";
pub const FULL_NAME: &str = "ELR (all effects)";

/// Contents of `evaluation.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationArtifact {
    pub seed: u64,
    pub ratio: f64,
    pub alpha: f64,
    pub pi: f64,
    pub min_leaf: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub models: Vec<EvaluationReport>,
}

/// Everything the pipeline computed, before anything is written.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub split: SplitSpec,
    pub min_leaf: usize,
    pub baseline: ElrModel,
    pub psychological: Option<ElrModel>,
    pub ledger: DetectionLedger,
    pub screening: Vec<ScreeningRecord>,
    pub univariate_model: ElrModel,
    pub model: ElrModel,
    pub evaluation: EvaluationArtifact,
}

impl PipelineOutput {
    pub fn selected(&self) -> impl Iterator<Item = &ScreeningRecord> {
        self.screening.iter().filter(|r| r.selected)
    }
}

fn all_rows(d: &DataMatrix) -> Vec<usize> {
    (0..d.n_rows()).collect()
}

fn report(name: &str, model: &ElrModel, train: &DataMatrix, test: &DataMatrix) -> Result<EvaluationReport> {
    let fitted = model.predict_proba(train, &all_rows(train))?;
    let probs = model.predict_proba(test, &all_rows(test))?;
    metrics::evaluate(
        name,
        &train.labels(),
        &fitted,
        &test.labels(),
        &probs,
        model.n_terms(),
        model.pi,
    )
}

/// Runs every stage on an already-imputed matrix.
pub fn run_on_imputed(imputed: &DataMatrix, config: &RunConfig) -> Result<PipelineOutput> {
    config.validate_parameters()?;
    let split = dataset::train_test_split(imputed, config.ratio, config.seed)?;
    let train = imputed.select_rows(&split.train_indices)?;
    let test = imputed.select_rows(&split.test_indices)?;
    let min_leaf = config.min_leaf.resolve(train.n_rows())?;
    log::info!(
        "split {} rows into {} train / {} test; min_leaf {min_leaf}",
        imputed.n_rows(),
        train.n_rows(),
        test.n_rows()
    );

    let schema = train.schema();
    let predictors = schema.predictor_indices();
    let baseline = selection::fit_model(&train, &predictors, &[], config.pi)?;
    let psychological = if schema.psychological_indices().is_empty() {
        None
    } else {
        let mut cols = predictors.clone();
        cols.extend(schema.psychological_indices());
        Some(selection::fit_model(&train, &cols, &[], config.pi)?)
    };

    let ledger = cart::scan(&train, min_leaf)?;
    let candidates = ledger.candidates();
    log::info!("screening {} candidate effects", candidates.len());
    let screening = selection::screen_candidates(
        &train,
        &candidates,
        &baseline.fit,
        &ScreeningConfig::new(config.alpha, min_leaf),
    )?;
    let selected: Vec<ScreeningRecord> = screening.iter().filter(|r| r.selected).cloned().collect();
    let univariate: Vec<ScreeningRecord> = selected
        .iter()
        .filter(|r| r.effect.kind == EffectKind::Univariate)
        .cloned()
        .collect();
    log::info!("{} effects selected ({} univariate)", selected.len(), univariate.len());
    let univariate_model = selection::assemble_elr(&train, &univariate, config.pi)?;
    let model = selection::assemble_elr(&train, &selected, config.pi)?;

    let mut models = vec![report(BASELINE_NAME, &baseline, &train, &test)?];
    if let Some(m) = &psychological {
        models.push(report(PSYCHOLOGICAL_NAME, m, &train, &test)?);
    }
    models.push(report(UNIVARIATE_NAME, &univariate_model, &train, &test)?);
    models.push(report(FULL_NAME, &model, &train, &test)?);

    let evaluation = EvaluationArtifact {
        seed: config.seed,
        ratio: config.ratio,
        alpha: config.alpha,
        pi: config.pi,
        min_leaf,
        n_train: train.n_rows(),
        n_test: test.n_rows(),
        models,
    };
    Ok(PipelineOutput {
        split,
        min_leaf,
        baseline,
        psychological,
        ledger,
        screening,
        univariate_model,
        model,
        evaluation,
    })
}

/// Loads and imputes the configured data, then runs every stage.
pub fn execute(config: &RunConfig) -> Result<PipelineOutput> {
    config.validate()?;
    let schema = load_schema(config.schema.as_deref())?;
    let raw = dataset::load_csv(&config.data, &schema)?;
    log::info!("loaded {} rows, {} missing cells", raw.n_rows(), raw.missing_count());
    let imputed = dataset::em_impute(&raw, dataset::DEFAULT_TOL, dataset::DEFAULT_MAX_ITER)?;
    run_on_imputed(&imputed, config)
}

/// Writes the four artifacts into `dir`, creating it if needed.
pub fn write_artifacts(output: &PipelineOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let schema = &output.model.schema;
    json::write_file(&dir.join(MODEL_FILE), &ModelArtifact::from_model(&output.model))?;
    json::write_file(&dir.join(SCREENING_FILE), &screening_entries(&output.screening, schema))?;
    json::write_file(&dir.join(EVALUATION_FILE), &output.evaluation)?;
    let summary_path = dir.join(SUMMARY_FILE);
    std::fs::write(&summary_path, summary::render(output)).map_err(|e| Error::io(&summary_path, e))
}

/// `execute` followed by `write_artifacts` into the configured directory.
pub fn run_pipeline(config: &RunConfig) -> Result<PipelineOutput> {
    let output = execute(config)?;
    write_artifacts(&output, &config.out)?;
    Ok(output)
}

/// Process exit status for an error: 2 for bad configuration or missing
/// inputs, 1 for everything else.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::MissingFile(_) => 2,
        _ => 1,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub error: &'static str,
    pub message: String,
}

/// The one-line JSON object printed on stderr when a command fails.
pub fn error_json(err: &Error) -> String {
    let report = ErrorReport {
        error: err.kind(),
        message: err.to_string(),
    };
    serde_json::to_string(&report).expect("plain struct serializes")
}
