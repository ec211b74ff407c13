//! Fits a logistic regression by Newton's method, prints the coefficient
//! table and compares nested models with a likelihood-ratio test.
//!
//! cargo run --example logistic_fit

use elr::cart::CandidateEffect;
use elr::logit::{self, build_design};
use elr::selection;
use elr::synth;

fn main() -> elr::Result<()> {
    let config = synth::univariate_config(1000, 2, -0.5, 0.3, 2.0, 1.0);
    let data = synth::generate(&config)?.data;
    let rows: Vec<usize> = (0..data.n_rows()).collect();
    let y = data.labels();

    let base = logit::fit(&build_design(&data, &[], &rows)?, &y)?;
    let effect = CandidateEffect::univariate(0, 2.0);
    let augmented = logit::fit(&build_design(&data, &[effect], &rows)?, &y)?;

    println!(
        "{:<16} {:>10} {:>10} {:>8} {:>10}",
        "term", "estimate", "std.err", "z", "p"
    );
    for j in 0..augmented.n_params() {
        println!(
            "{:<16} {:>10.4} {:>10.4} {:>8.2} {:>10.3e}",
            augmented.names[j],
            augmented.coefficients[j],
            augmented.std_errors[j],
            augmented.z_values[j],
            augmented.p_values[j]
        );
    }
    println!("converged in {} iterations", augmented.iterations);

    let lr = selection::likelihood_ratio(&base, &augmented)?;
    println!(
        "log-likelihood {:.3} -> {:.3}",
        base.log_likelihood, augmented.log_likelihood
    );
    println!("LR = {lr:.3}, p = {:.3e} on 1 df", selection::chi2_sf_df1(lr)?);
    Ok(())
}
