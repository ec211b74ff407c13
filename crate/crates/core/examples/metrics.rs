//! Fit and classification metrics on a small hand-made example.
//!
//! cargo run --example metrics

use elr::metrics;

fn main() -> elr::Result<()> {
    let y = [true, true, false, true, false, false, true, false];
    let p = [0.9, 0.7, 0.6, 0.55, 0.4, 0.2, 0.35, 0.1];

    let r2 = metrics::r_squared(&y, &p)?;
    println!(
        "R2 {r2:.4}, adjusted (2 predictors) {:.4}",
        metrics::adjusted_r_squared(r2, y.len(), 2)?
    );

    let predicted: Vec<bool> = p.iter().map(|&v| v > 0.5).collect();
    let c = metrics::confusion(&y, &predicted)?;
    println!("TP {} TN {} FP {} FN {}", c.tp, c.tn, c.fp, c.fn_);
    let s = metrics::classification_scores(&c)?;
    println!(
        "accuracy {:.3}, precision {:.3}, recall {:.3}, F1 {:.3}",
        s.accuracy, s.precision, s.recall, s.f1
    );
    println!("AUC {:.4}", metrics::roc_auc(&y, &p)?);
    Ok(())
}
