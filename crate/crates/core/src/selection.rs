//! Likelihood-ratio screening of candidate effects and assembly of the
//! enhanced model.
//!
//! Every candidate is tested against the same baseline fit with one added
//! parameter, so each statistic is referred to chi-square with one degree of
//! freedom. There is no multiple-testing correction and no refitting between
//! candidates.

use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::cart::{CandidateEffect, EffectKind};
use crate::dataset::{DataMatrix, Schema};
use crate::error::{Error, Result};
use crate::logit::{self, build_design_with, DesignMatrix, FitResult};

/// Default significance level for both the LRT and the Wald checks.
pub const SIGNIFICANCE_LEVEL: f64 = 0.01;

/// Negative likelihood ratios down to this value are rounding noise.
pub const LR_NEGATIVE_SLACK: f64 = 1e-8;

/// Survival function of chi-square with one degree of freedom,
/// `erfc(sqrt(x / 2))`.
pub fn chi2_sf_df1(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::InvalidArgument(format!("chi-square statistic {x} is negative")));
    }
    Ok(libm::erfc((x / 2.0).sqrt()))
}

/// `-2 (L_base - L_augmented)` for nested fits.
///
/// The augmented design must extend the base design's columns. Values in
/// `[-LR_NEGATIVE_SLACK, 0)` are clamped to zero; anything lower means one
/// of the fits did not reach its maximum.
pub fn likelihood_ratio(base: &FitResult, augmented: &FitResult) -> Result<f64> {
    if augmented.names.len() < base.names.len() || augmented.names[..base.names.len()] != base.names[..] {
        return Err(Error::NotNested(format!(
            "[{}] is not a prefix of [{}]",
            base.names.join(","),
            augmented.names.join(",")
        )));
    }
    let lr = -2.0 * (base.log_likelihood - augmented.log_likelihood);
    if lr >= 0.0 {
        Ok(lr)
    } else if lr >= -LR_NEGATIVE_SLACK {
        Ok(0.0)
    } else {
        Err(Error::NegativeLikelihoodRatio(lr))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectionReason {
    LrtNotSignificant,
    CoefficientNotSignificant,
    RankDeficient,
    DegenerateRegion,
    NonConvergence,
    Duplicate,
}

impl RejectionReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectionReason::LrtNotSignificant => "lrt_not_significant",
            RejectionReason::CoefficientNotSignificant => "coefficient_not_significant",
            RejectionReason::RankDeficient => "rank_deficient",
            RejectionReason::DegenerateRegion => "degenerate_region",
            RejectionReason::NonConvergence => "separation/non-convergence",
            RejectionReason::Duplicate => "duplicate",
        }
    }
}

impl fmt::Display for RejectionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for RejectionReason {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreeningRecord {
    pub effect: CandidateEffect,
    pub lr_statistic: f64,
    pub lrt_p: f64,
    /// Wald p-values of the coefficients the selection rule inspects:
    /// `[x_i, effect]` for univariate candidates, `[effect]` for bivariate.
    pub coef_p: Vec<f64>,
    pub selected: bool,
    pub rejection_reason: Option<RejectionReason>,
}

impl ScreeningRecord {
    fn rejected(effect: &CandidateEffect, reason: RejectionReason) -> Self {
        Self {
            effect: effect.clone(),
            lr_statistic: 0.0,
            lrt_p: 1.0,
            coef_p: Vec::new(),
            selected: false,
            rejection_reason: Some(reason),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreeningConfig {
    pub alpha: f64,
    /// Bivariate regions with fewer rows than this are rejected outright.
    pub min_leaf: usize,
}

impl ScreeningConfig {
    pub fn new(alpha: f64, min_leaf: usize) -> Self {
        Self { alpha, min_leaf }
    }
}

fn all_rows(data: &DataMatrix) -> Vec<usize> {
    (0..data.n_rows()).collect()
}

/// Baseline design and fit over every row of `data`.
pub fn fit_baseline(data: &DataMatrix) -> Result<FitResult> {
    let predictors = data.schema().predictor_indices();
    let x = build_design_with(data, &predictors, &[], &all_rows(data))?;
    logit::fit(&x, &data.labels())
}

/// Fits the augmented model and applies the LRT; the caller then adds the
/// coefficient rule.
fn screen_common(
    data: &DataMatrix,
    candidate: &CandidateEffect,
    base_fit: &FitResult,
    wald_indices: impl FnOnce(&FitResult) -> Result<Vec<usize>>,
    alpha: f64,
) -> Result<ScreeningRecord> {
    let predictors = data.schema().predictor_indices();
    let x = build_design_with(data, &predictors, std::slice::from_ref(candidate), &all_rows(data))?;
    let aug = match logit::fit(&x, &data.labels()) {
        Ok(f) => f,
        Err(Error::RankDeficient { .. }) => {
            return Ok(ScreeningRecord::rejected(candidate, RejectionReason::RankDeficient))
        }
        Err(e) => return Err(e),
    };
    if !aug.converged {
        return Ok(ScreeningRecord::rejected(candidate, RejectionReason::NonConvergence));
    }
    let lr = likelihood_ratio(base_fit, &aug)?;
    let lrt_p = chi2_sf_df1(lr)?;
    let coef_p: Vec<f64> = wald_indices(&aug)?.into_iter().map(|j| aug.p_values[j]).collect();
    let reason = if lrt_p >= alpha {
        Some(RejectionReason::LrtNotSignificant)
    } else if coef_p.iter().any(|&p| p >= alpha) {
        Some(RejectionReason::CoefficientNotSignificant)
    } else {
        None
    };
    Ok(ScreeningRecord {
        effect: candidate.clone(),
        lr_statistic: lr,
        lrt_p,
        coef_p,
        selected: reason.is_none(),
        rejection_reason: reason,
    })
}

/// Screens `x_i * I(x_i > a_i)` against the baseline.
///
/// Selected when the LRT p-value and the Wald p-values of both `x_i` and the
/// effect column (from the augmented fit) are all below `alpha`.
pub fn screen_univariate(
    data: &DataMatrix,
    candidate: &CandidateEffect,
    base_fit: &FitResult,
    config: &ScreeningConfig,
) -> Result<ScreeningRecord> {
    if candidate.kind != EffectKind::Univariate {
        return Err(Error::InvalidArgument("expected a univariate candidate".into()));
    }
    candidate.validate(data.n_cols())?;
    let feature = candidate.features[0];
    let predictors = data.schema().predictor_indices();
    let pos = predictors
        .iter()
        .position(|&j| j == feature)
        .ok_or_else(|| Error::InvalidArgument(format!("{} is not a predictor", data.schema().name(feature))))?;
    screen_common(
        data,
        candidate,
        base_fit,
        |aug| Ok(vec![1 + pos, aug.n_params() - 1]),
        config.alpha,
    )
}

/// Screens a masked interaction `x_i * x_j * I(region)` against the
/// baseline. Selected when the LRT and the interaction's Wald p-value are
/// both below `alpha`.
pub fn screen_bivariate(
    data: &DataMatrix,
    candidate: &CandidateEffect,
    base_fit: &FitResult,
    config: &ScreeningConfig,
) -> Result<ScreeningRecord> {
    if candidate.kind != EffectKind::Bivariate {
        return Err(Error::InvalidArgument("expected a bivariate candidate".into()));
    }
    candidate.validate(data.n_cols())?;
    let in_region = (0..data.n_rows()).filter(|&i| candidate.is_active(data.row(i))).count();
    if in_region < config.min_leaf.max(1) {
        return Ok(ScreeningRecord::rejected(candidate, RejectionReason::DegenerateRegion));
    }
    screen_common(
        data,
        candidate,
        base_fit,
        |aug| Ok(vec![aug.n_params() - 1]),
        config.alpha,
    )
}

pub fn screen(
    data: &DataMatrix,
    candidate: &CandidateEffect,
    base_fit: &FitResult,
    config: &ScreeningConfig,
) -> Result<ScreeningRecord> {
    match candidate.kind {
        EffectKind::Univariate => screen_univariate(data, candidate, base_fit, config),
        EffectKind::Bivariate => screen_bivariate(data, candidate, base_fit, config),
    }
}

/// Screens candidates independently (in parallel) and returns records in
/// input order.
pub fn screen_candidates(
    data: &DataMatrix,
    candidates: &[CandidateEffect],
    base_fit: &FitResult,
    config: &ScreeningConfig,
) -> Result<Vec<ScreeningRecord>> {
    candidates
        .par_iter()
        .map(|c| screen(data, c, base_fit, config))
        .collect()
}

/// A fitted logistic model over a fixed set of predictors and effect terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ElrModel {
    pub schema: Schema,
    pub predictors: Vec<usize>,
    /// Univariate terms first, then bivariate, matching design column order.
    pub effects: Vec<CandidateEffect>,
    pub fit: FitResult,
    pub pi: f64,
    pub warnings: Vec<String>,
}

impl ElrModel {
    pub fn design(&self, data: &DataMatrix, rows: &[usize]) -> Result<DesignMatrix> {
        if data.schema().digest() != self.schema.digest() {
            return Err(Error::DigestMismatch {
                model: self.schema.digest(),
                data: data.schema().digest(),
            });
        }
        build_design_with(data, &self.predictors, &self.effects, rows)
    }

    pub fn predict_proba(&self, data: &DataMatrix, rows: &[usize]) -> Result<Vec<f64>> {
        logit::predict_proba(&self.fit, &self.design(data, rows)?)
    }

    pub fn n_univariate(&self) -> usize {
        self.effects.iter().filter(|e| e.kind == EffectKind::Univariate).count()
    }

    pub fn n_bivariate(&self) -> usize {
        self.effects.iter().filter(|e| e.kind == EffectKind::Bivariate).count()
    }

    /// Design columns other than the intercept.
    pub fn n_terms(&self) -> usize {
        self.fit.n_params() - 1
    }
}

/// Jointly fits `predictors` plus `effects` on every row of `data`.
///
/// Repeated terms and terms whose column is linearly dependent on earlier
/// columns are dropped with a warning.
pub fn fit_model(data: &DataMatrix, predictors: &[usize], effects: &[CandidateEffect], pi: f64) -> Result<ElrModel> {
    if !(pi > 0.0 && pi < 1.0) {
        return Err(Error::InvalidArgument(format!("cutoff {pi} not in (0, 1)")));
    }
    let schema = data.schema();
    let mut warnings = Vec::new();
    let mut kept: Vec<CandidateEffect> = Vec::new();
    for e in effects {
        if kept.iter().any(|k| k.same_term(e)) {
            let msg = format!("dropped duplicate effect {}", e.label(schema));
            log::warn!("{msg}");
            warnings.push(msg);
        } else {
            kept.push(e.clone());
        }
    }
    let mut ordered: Vec<CandidateEffect> = kept
        .iter()
        .filter(|e| e.kind == EffectKind::Univariate)
        .chain(kept.iter().filter(|e| e.kind == EffectKind::Bivariate))
        .cloned()
        .collect();

    let rows = all_rows(data);
    let x = loop {
        let x = build_design_with(data, predictors, &ordered, &rows)?;
        match logit::dependent_column(&x) {
            None => break x,
            Some(j) if j > predictors.len() => {
                let e = ordered.remove(j - 1 - predictors.len());
                let msg = format!("dropped linearly dependent effect {}", e.label(schema));
                log::warn!("{msg}");
                warnings.push(msg);
            }
            Some(j) => {
                return Err(Error::RankDeficient {
                    column: x.names()[j].clone(),
                })
            }
        }
    };
    let fit = logit::fit(&x, &data.labels())?;
    if !fit.converged {
        let msg = if fit.diagnostics.separation {
            "joint fit shows separation; estimates are not finite maxima".to_string()
        } else {
            format!("joint fit did not converge in {} iterations", fit.iterations)
        };
        log::warn!("{msg}");
        warnings.push(msg);
    }
    Ok(ElrModel {
        schema: schema.clone(),
        predictors: predictors.to_vec(),
        effects: ordered,
        fit,
        pi,
        warnings,
    })
}

/// One joint refit with every selected effect, all of which are kept
/// regardless of their joint p-values.
pub fn assemble_elr(data: &DataMatrix, selected: &[ScreeningRecord], pi: f64) -> Result<ElrModel> {
    if let Some(r) = selected.iter().find(|r| !r.selected) {
        return Err(Error::InvalidArgument(format!(
            "record for {} was not selected",
            r.effect.label(data.schema())
        )));
    }
    let effects: Vec<CandidateEffect> = selected.iter().map(|r| r.effect.clone()).collect();
    fit_model(data, &data.schema().predictor_indices(), &effects, pi)
}
