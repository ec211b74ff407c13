//! Trains on one sample, saves the model as JSON and scores a fresh sample
//! drawn from the same generator.
//!
//! cargo run --release --example saved_model

use elr::cli::{self, ModelArtifact, RunConfig};
use elr::dataset::{self, Schema};
use elr::{json, synth};

fn main() -> elr::Result<()> {
    let dir = std::env::temp_dir().join("elr-saved-model-example");
    std::fs::create_dir_all(&dir).map_err(|e| elr::Error::io(&dir, e))?;
    let model_path = dir.join(cli::MODEL_FILE);
    let fresh_path = dir.join("fresh.csv");

    let raw = synth::generate(&synth::table1_like(2000, 1))?.data;
    let imputed = dataset::em_impute(&raw, dataset::DEFAULT_TOL, dataset::DEFAULT_MAX_ITER)?;
    let out = cli::run_on_imputed(&imputed, &RunConfig::new("in-memory", &dir))?;
    json::write_file(&model_path, &ModelArtifact::from_model(&out.model))?;

    cli::synth(&synth::table1_like(1000, 99), &fresh_path)?;
    let report = cli::evaluate_saved(&model_path, &fresh_path, &Schema::table1())?;
    println!("model: {}", model_path.display());
    println!(
        "fresh sample of {}: accuracy {:.4}, F1 {:.4}, AUC {:.4}",
        report.n, report.accuracy, report.f1, report.auc
    );
    Ok(())
}
