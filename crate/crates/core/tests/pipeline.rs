use elr::cart::EffectKind;
use elr::cli::{self, ModelArtifact, RunConfig};
use elr::dataset::{self, DataMatrix};
use elr::synth;

fn fixture(n: usize, seed: u64) -> DataMatrix {
    let raw = synth::generate(&synth::table1_like(n, seed)).unwrap().data;
    dataset::em_impute(&raw, dataset::DEFAULT_TOL, dataset::DEFAULT_MAX_ITER).unwrap()
}

fn config(seed: u64) -> RunConfig {
    let mut c = RunConfig::new("unused.csv", "unused");
    c.seed = seed;
    c
}

#[test]
fn fixture_yields_univariate_and_bivariate_selections() {
    let data = fixture(2000, 0);
    for seed in 0..3 {
        let out = cli::run_on_imputed(&data, &config(seed)).unwrap();
        let uni = out
            .selected()
            .filter(|r| r.effect.kind == EffectKind::Univariate)
            .count();
        let bi = out
            .selected()
            .filter(|r| r.effect.kind == EffectKind::Bivariate)
            .count();
        assert!(uni >= 2, "seed {seed}: {uni} univariate effects selected");
        assert!(bi >= 1, "seed {seed}: {bi} bivariate effects selected");
    }
}

#[test]
fn test_rows_do_not_influence_training_stages() {
    let data = fixture(1500, 4);
    let c = config(2);
    let first = cli::run_on_imputed(&data, &c).unwrap();

    // Perturb held-out predictors; labels stay so the split is unchanged.
    let test_rows: std::collections::HashSet<usize> = first.split.test_indices.iter().copied().collect();
    let rows: Vec<Vec<f64>> = (0..data.n_rows())
        .map(|i| {
            let mut r = data.row(i).to_vec();
            if test_rows.contains(&i) {
                for (j, v) in r.iter_mut().enumerate() {
                    if data.schema().is_continuous_predictor(j) {
                        *v = -3.0 * *v + 7.0;
                    }
                }
            }
            r
        })
        .collect();
    let altered = DataMatrix::from_rows(data.schema().clone(), rows).unwrap();
    let second = cli::run_on_imputed(&altered, &c).unwrap();

    assert_eq!(first.split, second.split);
    assert_eq!(first.baseline.fit.coefficients, second.baseline.fit.coefficients);
    assert_eq!(first.ledger, second.ledger);
    assert_eq!(first.screening, second.screening);
    assert_eq!(first.model.fit.coefficients, second.model.fit.coefficients);
    assert_ne!(first.evaluation.models, second.evaluation.models);
}

#[test]
fn saved_model_reproduces_in_memory_predictions() {
    let data = fixture(1200, 5);
    let out = cli::run_on_imputed(&data, &config(0)).unwrap();
    let artifact = ModelArtifact::from_model(&out.model);
    let text = elr::json::to_string(&artifact).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    std::fs::write(&path, &text).unwrap();
    let reloaded = ModelArtifact::read(&path).unwrap();

    let rows: Vec<usize> = (0..data.n_rows()).collect();
    let direct = out.model.predict_proba(&data, &rows).unwrap();
    let via_file = reloaded.predict(&data).unwrap();
    assert_eq!(direct.len(), via_file.len());
    for (a, b) in direct.iter().zip(&via_file) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn config_errors_precede_computation() {
    let data = fixture(300, 1);
    let mut c = config(0);
    c.ratio = 1.2;
    assert!(matches!(cli::run_on_imputed(&data, &c), Err(elr::Error::Config(_))));
    let mut c = config(0);
    c.alpha = 1.5;
    assert!(matches!(cli::run_on_imputed(&data, &c), Err(elr::Error::Config(_))));
}

#[test]
fn evaluation_lists_every_model() {
    let data = fixture(1000, 6);
    let out = cli::run_on_imputed(&data, &config(0)).unwrap();
    let names: Vec<&str> = out.evaluation.models.iter().map(|m| m.model.as_str()).collect();
    assert_eq!(names, [cli::BASELINE_NAME, cli::UNIVARIATE_NAME, cli::FULL_NAME]);
    assert!(out.psychological.is_none());
    assert_eq!(out.evaluation.n_train + out.evaluation.n_test, 1000);
    assert_eq!(out.evaluation.n_train, 900);
}
