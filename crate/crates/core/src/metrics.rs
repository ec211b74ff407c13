//! Fit and prediction quality measures.
//!
//! `r_squared` is the regression-style ratio of explained to total sum of
//! squares applied directly to fitted probabilities, not a pseudo-R².

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch { left: a, right: b });
    }
    Ok(())
}

/// `sum (y_hat - y_bar)^2 / sum (y - y_bar)^2`.
pub fn r_squared(y: &[bool], y_hat: &[f64]) -> Result<f64> {
    check_len(y.len(), y_hat.len())?;
    if y.is_empty() {
        return Err(Error::EmptyInput);
    }
    let yv: Vec<f64> = y.iter().map(|&b| f64::from(u8::from(b))).collect();
    let mean = yv.iter().sum::<f64>() / yv.len() as f64;
    let ss_tot: f64 = yv.iter().map(|v| (v - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::ConstantResponse);
    }
    let ss_reg: f64 = y_hat.iter().map(|v| (v - mean).powi(2)).sum();
    Ok(ss_reg / ss_tot)
}

/// `1 - (1 - r2)(n - 1)/(n - p - 1)`, with `p` the number of non-intercept
/// design columns.
pub fn adjusted_r_squared(r2: f64, n: usize, p: usize) -> Result<f64> {
    if n <= p + 1 {
        return Err(Error::InvalidArgument(format!(
            "adjusted R² needs n > p + 1 (n = {n}, p = {p})"
        )));
    }
    Ok(1.0 - (1.0 - r2) * (n - 1) as f64 / (n - p - 1) as f64)
}

/// Confusion counts with class 1 as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }
}

pub fn confusion(y: &[bool], y_pred: &[bool]) -> Result<Confusion> {
    check_len(y.len(), y_pred.len())?;
    let mut c = Confusion::default();
    for (&t, &p) in y.iter().zip(y_pred) {
        match (t, p) {
            (true, true) => c.tp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fp += 1,
            (true, false) => c.fn_ += 1,
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationScores {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Accuracy, precision, recall and F1. Empty denominators give 0 and a
/// warning.
pub fn classification_scores(c: &Confusion) -> Result<ClassificationScores> {
    let total = c.total();
    if total == 0 {
        return Err(Error::EmptyConfusion);
    }
    let ratio = |num: usize, den: usize, what: &str| {
        if den == 0 {
            log::warn!("{what} undefined (zero denominator); reporting 0");
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let accuracy = (c.tp + c.tn) as f64 / total as f64;
    let precision = ratio(c.tp, c.tp + c.fp, "precision");
    let recall = ratio(c.tp, c.tp + c.fn_, "recall");
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(ClassificationScores {
        accuracy,
        precision,
        recall,
        f1,
    })
}

/// Area under the ROC curve from midranks (Mann-Whitney U / (n+ n-)).
/// Tied scores count one half.
pub fn roc_auc(y: &[bool], scores: &[f64]) -> Result<f64> {
    check_len(y.len(), scores.len())?;
    let n_pos = y.iter().filter(|&&b| b).count();
    let n_neg = y.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidArgument("NaN score".into()));
    }
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Ranks i+1..=j+1 share their average.
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        let pos_in_group = order[i..=j].iter().filter(|&&k| y[k]).count();
        rank_sum_pos += midrank * pos_in_group as f64;
        i = j + 1;
    }
    let np = n_pos as f64;
    let u = rank_sum_pos - np * (np + 1.0) / 2.0;
    Ok(u / (np * n_neg as f64))
}

/// One row of the model comparison: in-sample fit on the training rows and
/// out-of-sample prediction on the test rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub model: String,
    pub r2: f64,
    pub adj_r2: f64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub n_terms: usize,
    pub confusion: Confusion,
}

/// Out-of-sample part of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
    pub n: usize,
    pub confusion: Confusion,
}

pub fn prediction_report(y: &[bool], probs: &[f64], pi: f64) -> Result<PredictionReport> {
    let pred: Vec<bool> = probs.iter().map(|&p| p > pi).collect();
    let c = confusion(y, &pred)?;
    let s = classification_scores(&c)?;
    Ok(PredictionReport {
        accuracy: s.accuracy,
        precision: s.precision,
        recall: s.recall,
        f1: s.f1,
        auc: roc_auc(y, probs)?,
        n: y.len(),
        confusion: c,
    })
}

/// Builds a full report row. `n_terms` counts non-intercept design columns.
pub fn evaluate(
    model: &str,
    train_y: &[bool],
    train_fitted: &[f64],
    test_y: &[bool],
    test_probs: &[f64],
    n_terms: usize,
    pi: f64,
) -> Result<EvaluationReport> {
    let r2 = r_squared(train_y, train_fitted)?;
    let adj_r2 = adjusted_r_squared(r2, train_y.len(), n_terms)?;
    let pred = prediction_report(test_y, test_probs, pi)?;
    Ok(EvaluationReport {
        model: model.to_string(),
        r2,
        adj_r2,
        accuracy: pred.accuracy,
        precision: pred.precision,
        recall: pred.recall,
        f1: pred.f1,
        auc: pred.auc,
        n_train: train_y.len(),
        n_test: test_y.len(),
        n_terms,
        confusion: pred.confusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(v: &[u8]) -> Vec<bool> {
        v.iter().map(|&x| x == 1).collect()
    }

    fn pair_count(y: &[bool], s: &[f64]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..y.len() {
            for j in 0..y.len() {
                if y[i] && !y[j] {
                    den += 1.0;
                    if s[i] > s[j] {
                        num += 1.0;
                    } else if s[i] == s[j] {
                        num += 0.5;
                    }
                }
            }
        }
        num / den
    }

    #[test]
    fn r_squared_examples() {
        let y = b(&[0, 1, 1]);
        assert!((r_squared(&y, &[0.0, 1.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        let mean = 2.0 / 3.0;
        assert_eq!(r_squared(&y, &[mean; 3]).unwrap(), 0.0);
        // (0.2-2/3)^2 + 2 (0.8-2/3)^2 = 0.25333..; (2/3)^2 + 2 (1/3)^2 = 0.66666..
        let r2 = r_squared(&y, &[0.2, 0.8, 0.8]).unwrap();
        assert!((r2 - 0.38).abs() < 1e-12, "{r2}");
        assert!(matches!(
            r_squared(&b(&[1, 1]), &[0.5, 0.5]),
            Err(Error::ConstantResponse)
        ));
    }

    #[test]
    fn adjusted_r_squared_examples() {
        assert_eq!(adjusted_r_squared(1.0, 50, 3).unwrap(), 1.0);
        assert!((adjusted_r_squared(0.8316, 1277, 21).unwrap() - 0.8288).abs() < 1e-4);
        assert!((adjusted_r_squared(0.0, 100, 10).unwrap() - (1.0 - 99.0 / 89.0)).abs() < 1e-15);
        assert!(adjusted_r_squared(0.5, 5, 4).is_err());
    }

    #[test]
    fn confusion_examples() {
        let c = confusion(&b(&[1, 1, 0]), &b(&[1, 1, 0])).unwrap();
        assert_eq!((c.tp, c.tn, c.fp, c.fn_), (2, 1, 0, 0));
        let c = confusion(&b(&[1, 0]), &b(&[0, 1])).unwrap();
        assert_eq!((c.tp, c.tn, c.fp, c.fn_), (0, 0, 1, 1));
        let c = confusion(&b(&[1, 1, 1, 0, 0, 0, 0, 0, 1, 1]), &b(&[1, 1, 0, 1, 0, 0, 0, 0, 1, 0])).unwrap();
        assert_eq!((c.tp, c.fp, c.fn_, c.tn), (3, 1, 2, 4));
        assert!(confusion(&b(&[1]), &[]).is_err());
    }

    #[test]
    fn score_examples() {
        let s = classification_scores(&Confusion {
            tp: 3,
            tn: 5,
            fp: 1,
            fn_: 1,
        })
        .unwrap();
        assert!((s.accuracy - 0.8).abs() < 1e-15);
        assert!((s.precision - 0.75).abs() < 1e-15);
        assert!((s.recall - 0.75).abs() < 1e-15);
        assert!((s.f1 - 0.75).abs() < 1e-15);
        let s = classification_scores(&Confusion {
            tp: 4,
            tn: 6,
            fp: 0,
            fn_: 0,
        })
        .unwrap();
        assert_eq!((s.accuracy, s.precision, s.recall, s.f1), (1.0, 1.0, 1.0, 1.0));
        let s = classification_scores(&Confusion {
            tp: 0,
            tn: 3,
            fp: 2,
            fn_: 2,
        })
        .unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
        assert!(matches!(
            classification_scores(&Confusion::default()),
            Err(Error::EmptyConfusion)
        ));
    }

    #[test]
    fn auc_examples() {
        assert_eq!(roc_auc(&b(&[0, 0, 1, 1]), &[0.1, 0.2, 0.8, 0.9]).unwrap(), 1.0);
        assert_eq!(roc_auc(&b(&[0, 1, 1, 0]), &[0.5; 4]).unwrap(), 0.5);
        assert_eq!(roc_auc(&b(&[1, 0, 1, 0]), &[0.9, 0.8, 0.3, 0.2]).unwrap(), 0.75);
        assert!(matches!(roc_auc(&b(&[1, 1]), &[0.1, 0.2]), Err(Error::SingleClass)));
    }

    proptest! {
        #[test]
        fn auc_matches_pair_counting(pts in prop::collection::vec((0u8..20, any::<bool>()), 2..200)) {
            let y: Vec<bool> = pts.iter().map(|p| p.1).collect();
            prop_assume!(y.iter().any(|&v| v) && y.iter().any(|&v| !v));
            let s: Vec<f64> = pts.iter().map(|p| p.0 as f64 / 20.0).collect();
            prop_assert!((roc_auc(&y, &s).unwrap() - pair_count(&y, &s)).abs() < 1e-12);
        }

        #[test]
        fn auc_complement_without_ties(seed in any::<u64>(), n in 2usize..100) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let y: Vec<bool> = (0..n).map(|i| i % 2 == 0 || rng.random::<bool>()).collect();
            prop_assume!(y.iter().any(|&v| !v));
            let s: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let neg: Vec<f64> = s.iter().map(|v| -v).collect();
            prop_assert!((roc_auc(&y, &s).unwrap() + roc_auc(&y, &neg).unwrap() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn score_identities(tp in 0usize..50, tn in 0usize..50, fp in 0usize..50, fn_ in 0usize..50) {
            let c = Confusion { tp, tn, fp, fn_ };
            prop_assume!(c.total() > 0);
            let s = classification_scores(&c).unwrap();
            prop_assert_eq!((s.accuracy * c.total() as f64).round() as usize, tp + tn);
            if s.precision + s.recall > 0.0 {
                let f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
                prop_assert!((s.f1 - f1).abs() < 1e-12);
            }
        }

        #[test]
        fn adjusted_never_exceeds_plain(r2 in 0.0f64..1.0, n in 3usize..500, p in 1usize..50) {
            prop_assume!(n > p + 1);
            prop_assert!(adjusted_r_squared(r2, n, p).unwrap() <= r2 + 1e-15);
        }

        #[test]
        fn r_squared_permutation_invariant(seed in any::<u64>()) {
            use rand::{seq::SliceRandom, Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut rows: Vec<(bool, f64)> = (0..30).map(|i| (i % 3 == 0, rng.random::<f64>())).collect();
            let (y, p): (Vec<bool>, Vec<f64>) = rows.iter().copied().unzip();
            let a = r_squared(&y, &p).unwrap();
            rows.shuffle(&mut rng);
            let (y2, p2): (Vec<bool>, Vec<f64>) = rows.into_iter().unzip();
            prop_assert!((a - r_squared(&y2, &p2).unwrap()).abs() < 1e-12);
        }
    }
}
