use std::fmt::Write as _;

use crate::cart::EffectKind;
use crate::cli::PipelineOutput;

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.4}")
    } else {
        "NA".to_string()
    }
}

fn pval(p: f64) -> String {
    if !p.is_finite() {
        "NA".to_string()
    } else if p < 1e-4 {
        format!("{p:.2e}")
    } else {
        format!("{p:.4}")
    }
}

/// Plain-text report of a pipeline run.
pub(crate) fn render(out: &PipelineOutput) -> String {
    let mut s = String::new();
    let ev = &out.evaluation;
    let schema = &out.model.schema;
    // Writing into a String cannot fail.
    let _ = writeln!(s, "Enhanced logistic regression run");
    let _ = writeln!(
        s,
        "rows: {} train, {} test (ratio {}, seed {})",
        ev.n_train, ev.n_test, ev.ratio, ev.seed
    );
    let _ = writeln!(s, "min_leaf {}, alpha {}, pi {}", out.min_leaf, ev.alpha, ev.pi);

    let n_uni = out
        .screening
        .iter()
        .filter(|r| r.effect.kind == EffectKind::Univariate)
        .count();
    let _ = writeln!(
        s,
        "\nScreened {} candidates ({} univariate, {} bivariate); {} selected",
        out.screening.len(),
        n_uni,
        out.screening.len() - n_uni,
        out.selected().count()
    );
    for r in out.selected() {
        let _ = writeln!(
            s,
            "  {:<40} LR {:>10}  p {:>10}",
            r.effect.label(schema),
            num(r.lr_statistic),
            pval(r.lrt_p)
        );
    }

    let fit = &out.model.fit;
    let _ = writeln!(s, "\nFinal model (training rows)");
    let _ = writeln!(
        s,
        "  {:<40} {:>11} {:>11} {:>9} {:>10}",
        "term", "estimate", "std.error", "z", "p"
    );
    for j in 0..fit.n_params() {
        let _ = writeln!(
            s,
            "  {:<40} {:>11} {:>11} {:>9} {:>10}",
            fit.names[j],
            num(fit.coefficients[j]),
            num(fit.std_errors[j]),
            num(fit.z_values[j]),
            pval(fit.p_values[j])
        );
    }
    let _ = writeln!(
        s,
        "  log-likelihood {}, converged {}, iterations {}",
        num(fit.log_likelihood),
        fit.converged,
        fit.iterations
    );

    let _ = writeln!(s, "\nModel comparison (R2 on training rows, the rest on test rows)");
    let _ = writeln!(
        s,
        "  {:<32} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7}",
        "model", "R2", "adj.R2", "acc", "prec", "recall", "F1", "AUC"
    );
    for m in &ev.models {
        let _ = writeln!(
            s,
            "  {:<32} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7}",
            m.model,
            num(m.r2),
            num(m.adj_r2),
            num(m.accuracy),
            num(m.precision),
            num(m.recall),
            num(m.f1),
            num(m.auc)
        );
    }

    let warnings: Vec<&String> = out
        .baseline
        .warnings
        .iter()
        .chain(&out.univariate_model.warnings)
        .chain(&out.model.warnings)
        .collect();
    if !warnings.is_empty() {
        let _ = writeln!(s, "\nWarnings");
        for w in warnings {
            let _ = writeln!(s, "  {w}");
        }
    }
    s
}
