//! Finds a planted univariate threshold with a one-layer tree and screens it
//! with a likelihood-ratio test.
//!
//! cargo run --example threshold_detection

use elr::cart::{self, default_min_leaf};
use elr::selection::{self, ScreeningConfig, SIGNIFICANCE_LEVEL};
use elr::synth;

fn main() -> elr::Result<()> {
    // logit p = -0.5 + 0.3 x + 1.5 x I(x > 2), with x ~ U(0, 4).
    let config = synth::univariate_config(3000, 11, -0.5, 0.3, 2.0, 1.5);
    let data = synth::generate(&config)?.data;
    let min_leaf = default_min_leaf(data.n_rows());

    let Some(candidate) = cart::fit_one_layer(&data, 0, min_leaf)? else {
        println!("no admissible split");
        return Ok(());
    };
    println!("tree threshold: {:.3} (planted 2.0)", candidate.conditions[0].threshold);

    let base = selection::fit_baseline(&data)?;
    let record = selection::screen_univariate(
        &data,
        &candidate,
        &base,
        &ScreeningConfig::new(SIGNIFICANCE_LEVEL, min_leaf),
    )?;
    println!("effect: {}", candidate.label(data.schema()));
    println!("LR statistic {:.2}, p = {:.3e}", record.lr_statistic, record.lrt_p);
    println!("Wald p [x, effect] = {:?}", record.coef_p);
    println!("selected: {}", record.selected);
    Ok(())
}
