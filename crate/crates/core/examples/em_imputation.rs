//! Knocks out cells at random and fills them back by Gaussian EM.
//!
//! cargo run --example em_imputation

use elr::dataset::{self, DEFAULT_MAX_ITER, DEFAULT_TOL};
use elr::synth;

fn main() -> elr::Result<()> {
    let mut config = synth::table1_like(1000, 3);
    config.missing_rate = 0.0;
    let complete = synth::generate(&config)?.data;
    config.missing_rate = 0.1;
    let holed = synth::generate(&config)?.data;

    let filled = dataset::em_impute(&holed, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    println!("{} missing cells filled", holed.missing_count());

    let schema = holed.schema();
    for j in schema.predictor_indices() {
        let missing: Vec<usize> = (0..holed.n_rows()).filter(|&i| holed.is_missing(i, j)).collect();
        if missing.is_empty() {
            continue;
        }
        let rmse = (missing
            .iter()
            .map(|&i| (filled.get(i, j) - complete.get(i, j)).powi(2))
            .sum::<f64>()
            / missing.len() as f64)
            .sqrt();
        let values = complete.column(j);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64).sqrt();
        println!(
            "{:<10} {:>4} imputed, RMSE {:>12.4} (column sd {:>12.4})",
            schema.name(j),
            missing.len(),
            rmse,
            sd
        );
    }
    Ok(())
}
