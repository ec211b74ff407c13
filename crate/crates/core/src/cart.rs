//! Shallow Gini trees used to locate threshold effects.
//!
//! Every tree here is restricted to one or two features and at most three
//! layers. Trees are never used to predict; their split values become the
//! thresholds of candidate effect terms. Nodes send `x <= threshold` left
//! and `x > threshold` right.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Category, DataMatrix, Kind, Schema};
use crate::error::{Error, Result};

/// Gains closer than this are treated as equal when ranking splits.
pub const GAIN_TIE_EPS: f64 = 1e-12;

/// Impurity `1 - p0^2 - p1^2` of a label sequence.
pub fn gini_impurity(labels: &[bool]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    let pos = labels.iter().filter(|&&y| y).count();
    Ok(gini_counts(pos, labels.len()))
}

fn gini_counts(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p1 = pos as f64 / total as f64;
    let p0 = 1.0 - p1;
    1.0 - p0 * p0 - p1 * p1
}

/// Smallest leaf size used when no explicit value is configured:
/// `max(5, ceil(0.05 * n_train))`.
pub fn default_min_leaf(n_train: usize) -> usize {
    let frac = (0.05 * n_train as f64).ceil() as usize;
    frac.max(5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub threshold: f64,
    pub gini_gain: f64,
    pub left_count: usize,
    pub right_count: usize,
}

/// Best binary split of `x` by weighted Gini reduction.
///
/// Candidate thresholds are midpoints between consecutive distinct sorted
/// values. Both children must hold at least `min_leaf` rows and the gain must
/// be positive. Ties go to the smallest threshold.
pub fn best_split(x: &[f64], labels: &[bool], min_leaf: usize) -> Result<Option<Split>> {
    if x.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: labels.len(),
        });
    }
    if min_leaf == 0 {
        return Err(Error::InvalidArgument("min_leaf must be at least 1".into()));
    }
    let n = x.len();
    if n < 2 * min_leaf {
        return Ok(None);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));

    let total_pos = labels.iter().filter(|&&y| y).count();
    let parent = gini_counts(total_pos, n);
    if parent == 0.0 {
        return Ok(None);
    }
    let nf = n as f64;
    let mut best: Option<Split> = None;
    let mut left_pos = 0usize;
    for k in 1..n {
        if labels[order[k - 1]] {
            left_pos += 1;
        }
        let lo = x[order[k - 1]];
        let hi = x[order[k]];
        if lo == hi || k < min_leaf || n - k < min_leaf {
            continue;
        }
        let right_pos = total_pos - left_pos;
        let weighted =
            (k as f64 / nf) * gini_counts(left_pos, k) + ((n - k) as f64 / nf) * gini_counts(right_pos, n - k);
        let gain = parent - weighted;
        if gain <= GAIN_TIE_EPS {
            continue;
        }
        if best.is_none_or(|b| gain > b.gini_gain + GAIN_TIE_EPS) {
            best = Some(Split {
                threshold: lo + (hi - lo) / 2.0,
                gini_gain: gain,
                left_count: k,
                right_count: n - k,
            });
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
}

impl Comparator {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparator::Le => value <= threshold,
            Comparator::Gt => value > threshold,
        }
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparator::Le => "<=",
            Comparator::Gt => ">",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub feature: usize,
    pub comparator: Comparator,
    pub threshold: f64,
}

impl Condition {
    pub fn new(feature: usize, comparator: Comparator, threshold: f64) -> Self {
        Self {
            feature,
            comparator,
            threshold,
        }
    }

    pub fn holds(&self, row: &[f64]) -> bool {
        self.comparator.holds(row[self.feature], self.threshold)
    }
}

/// A condition that refers to its feature by name, as stored in files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedCondition {
    pub feature: String,
    pub comparator: Comparator,
    pub threshold: f64,
}

impl NamedCondition {
    pub fn from_condition(c: &Condition, schema: &Schema) -> Self {
        Self {
            feature: schema.name(c.feature).to_string(),
            comparator: c.comparator,
            threshold: c.threshold,
        }
    }

    pub fn resolve(&self, schema: &Schema) -> Result<Condition> {
        let feature = schema
            .index_of(&self.feature)
            .ok_or_else(|| Error::UnknownFeatureName(self.feature.clone()))?;
        Ok(Condition::new(feature, self.comparator, self.threshold))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectKind {
    Univariate,
    Bivariate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeDepth {
    OneLayer,
    TwoLayer,
    ThreeLayer,
}

/// A threshold effect term: `x_i * I(x_i > a_i)` or `x_i * x_j * I(region)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateEffect {
    pub kind: EffectKind,
    pub features: Vec<usize>,
    pub conditions: Vec<Condition>,
    pub source_tree: TreeDepth,
}

impl CandidateEffect {
    pub fn univariate(feature: usize, threshold: f64) -> Self {
        Self {
            kind: EffectKind::Univariate,
            features: vec![feature],
            conditions: vec![Condition::new(feature, Comparator::Gt, threshold)],
            source_tree: TreeDepth::OneLayer,
        }
    }

    /// A bivariate region; the feature pair is taken from the conditions in
    /// order of first appearance.
    pub fn bivariate(conditions: Vec<Condition>, source_tree: TreeDepth) -> Result<Self> {
        let mut features = Vec::with_capacity(2);
        for c in &conditions {
            if !features.contains(&c.feature) {
                features.push(c.feature);
            }
        }
        if features.len() != 2 || !(2..=3).contains(&conditions.len()) {
            return Err(Error::InvalidArgument(
                "bivariate effect needs 2 or 3 conditions over exactly two features".into(),
            ));
        }
        Ok(Self {
            kind: EffectKind::Bivariate,
            features,
            conditions,
            source_tree,
        })
    }

    pub fn validate(&self, n_cols: usize) -> Result<()> {
        for &f in self.features.iter().chain(self.conditions.iter().map(|c| &c.feature)) {
            if f >= n_cols {
                return Err(Error::UnknownFeature(f));
            }
        }
        let ok = match self.kind {
            EffectKind::Univariate => {
                self.features.len() == 1
                    && self.conditions.len() == 1
                    && self.conditions[0].feature == self.features[0]
                    && self.conditions[0].comparator == Comparator::Gt
            }
            EffectKind::Bivariate => {
                self.features.len() == 2
                    && self.features[0] != self.features[1]
                    && (2..=3).contains(&self.conditions.len())
                    && self.conditions.iter().all(|c| self.features.contains(&c.feature))
                    && self
                        .features
                        .iter()
                        .all(|f| self.conditions.iter().any(|c| c.feature == *f))
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("malformed {:?} effect", self.kind)))
        }
    }

    pub fn is_active(&self, row: &[f64]) -> bool {
        self.conditions.iter().all(|c| c.holds(row))
    }

    /// Design-column value for one data row.
    pub fn value(&self, row: &[f64]) -> f64 {
        if !self.is_active(row) {
            return 0.0;
        }
        self.features.iter().map(|&f| row[f]).product()
    }

    /// Same term regardless of how it was found or the order its conditions
    /// are listed in.
    pub fn same_term(&self, other: &Self) -> bool {
        let subset = |a: &[Condition], b: &[Condition]| a.iter().all(|c| b.contains(c));
        self.kind == other.kind
            && self.conditions.len() == other.conditions.len()
            && subset(&self.conditions, &other.conditions)
            && subset(&other.conditions, &self.conditions)
    }

    /// Display label such as `HHSize(>2.39)` or `HHSize(<=15.00)*RegVeh(>2.99)`.
    pub fn label(&self, schema: &Schema) -> String {
        self.features
            .iter()
            .map(|&f| {
                let conds: Vec<String> = self
                    .conditions
                    .iter()
                    .filter(|c| c.feature == f)
                    .map(|c| format!("{}{:.2}", c.comparator, c.threshold))
                    .collect();
                format!("{}({})", schema.name(f), conds.join(","))
            })
            .collect::<Vec<_>>()
            .join("*")
    }
}

fn check_feature(schema: &Schema, feature: usize) -> Result<()> {
    match schema.get(feature) {
        Some(v) if v.is_predictor() => Ok(()),
        Some(v) => Err(Error::InvalidArgument(format!("{} is not a predictor", v.name))),
        None => Err(Error::UnknownFeature(feature)),
    }
}

fn require_complete(data: &DataMatrix) -> Result<()> {
    if data.has_missing() {
        return Err(Error::InvalidArgument(
            "threshold detection requires imputed data".into(),
        ));
    }
    Ok(())
}

/// Rows of one tree node plus their labels.
struct Node<'a> {
    data: &'a DataMatrix,
    labels: &'a [bool],
    rows: Vec<usize>,
}

impl<'a> Node<'a> {
    fn root(data: &'a DataMatrix, labels: &'a [bool]) -> Self {
        Self {
            data,
            labels,
            rows: (0..data.n_rows()).collect(),
        }
    }

    fn best_split(&self, feature: usize, min_leaf: usize) -> Result<Option<Split>> {
        let x: Vec<f64> = self.rows.iter().map(|&i| self.data.get(i, feature)).collect();
        let y: Vec<bool> = self.rows.iter().map(|&i| self.labels[i]).collect();
        best_split(&x, &y, min_leaf)
    }

    /// Best split over several features; ties go to the smaller threshold,
    /// then to the lower feature index.
    fn best_split_among(&self, features: &[usize], min_leaf: usize) -> Result<Option<(usize, Split)>> {
        let mut best: Option<(usize, Split)> = None;
        for &f in features {
            let Some(s) = self.best_split(f, min_leaf)? else {
                continue;
            };
            let better = match &best {
                None => true,
                Some((bf, b)) => {
                    if s.gini_gain > b.gini_gain + GAIN_TIE_EPS {
                        true
                    } else if s.gini_gain < b.gini_gain - GAIN_TIE_EPS {
                        false
                    } else {
                        (s.threshold, f) < (b.threshold, *bf)
                    }
                }
            };
            if better {
                best = Some((f, s));
            }
        }
        Ok(best)
    }

    fn partition(&self, feature: usize, threshold: f64) -> (Node<'a>, Node<'a>) {
        let (left, right): (Vec<usize>, Vec<usize>) =
            self.rows.iter().partition(|&&i| self.data.get(i, feature) <= threshold);
        (
            Node {
                data: self.data,
                labels: self.labels,
                rows: left,
            },
            Node {
                data: self.data,
                labels: self.labels,
                rows: right,
            },
        )
    }

    fn len(&self) -> usize {
        self.rows.len()
    }
}

/// One-layer tree on a single continuous predictor.
pub fn fit_one_layer(data: &DataMatrix, feature: usize, min_leaf: usize) -> Result<Option<CandidateEffect>> {
    let schema = data.schema();
    check_feature(schema, feature)?;
    if !schema.is_continuous_predictor(feature) {
        return Err(Error::NotContinuous(schema.name(feature).to_string()));
    }
    require_complete(data)?;
    let labels = data.labels();
    let split = Node::root(data, &labels).best_split(feature, min_leaf)?;
    Ok(split.map(|s| CandidateEffect::univariate(feature, s.threshold)))
}

/// Two-layer tree: root split on `root_feature`, then a split on
/// `second_feature` inside each child where one is feasible. Every feasible
/// second split yields its two leaf regions as candidates.
pub fn fit_two_layer(
    data: &DataMatrix,
    root_feature: usize,
    second_feature: usize,
    min_leaf: usize,
) -> Result<Vec<CandidateEffect>> {
    let schema = data.schema();
    check_feature(schema, root_feature)?;
    check_feature(schema, second_feature)?;
    if root_feature == second_feature {
        return Err(Error::InvalidArgument(
            "two-layer tree needs two distinct features".into(),
        ));
    }
    if !schema.is_continuous_predictor(root_feature) && !schema.is_continuous_predictor(second_feature) {
        return Err(Error::InvalidArgument(
            "two-layer tree needs at least one continuous feature".into(),
        ));
    }
    require_complete(data)?;
    let labels = data.labels();
    let root = Node::root(data, &labels);
    let Some(first) = root.best_split(root_feature, min_leaf)? else {
        return Ok(Vec::new());
    };
    let (left, right) = root.partition(root_feature, first.threshold);
    let mut out = Vec::new();
    for (side, child) in [(Comparator::Le, left), (Comparator::Gt, right)] {
        let Some(second) = child.best_split(second_feature, min_leaf)? else {
            continue;
        };
        let parent = Condition::new(root_feature, side, first.threshold);
        for cmp in [Comparator::Le, Comparator::Gt] {
            out.push(CandidateEffect::bivariate(
                vec![parent, Condition::new(second_feature, cmp, second.threshold)],
                TreeDepth::TwoLayer,
            )?);
        }
    }
    Ok(out)
}

/// Three-layer tree where `dominant` takes the first two splits and `other`
/// the third.
///
/// Only applies when an unrestricted tree over both features picks
/// `dominant` for the root and for the better (size-weighted gain) of the
/// two second-level splits; otherwise returns an empty list. The third split
/// is tried in both grandchildren of the second split.
pub fn fit_three_layer(
    data: &DataMatrix,
    dominant: usize,
    other: usize,
    min_leaf: usize,
) -> Result<Vec<CandidateEffect>> {
    let schema = data.schema();
    check_feature(schema, dominant)?;
    check_feature(schema, other)?;
    if dominant == other {
        return Err(Error::InvalidArgument(
            "three-layer tree needs two distinct features".into(),
        ));
    }
    if !schema.is_continuous_predictor(dominant) {
        return Err(Error::NotContinuous(schema.name(dominant).to_string()));
    }
    require_complete(data)?;
    let labels = data.labels();
    let pair = [dominant.min(other), dominant.max(other)];
    let root = Node::root(data, &labels);
    let n = root.len() as f64;

    let Some((f1, s1)) = root.best_split_among(&pair, min_leaf)? else {
        return Ok(Vec::new());
    };
    if f1 != dominant {
        return Ok(Vec::new());
    }
    let (left, right) = root.partition(dominant, s1.threshold);

    let mut chosen: Option<(Comparator, &Node<'_>, usize, Split, f64)> = None;
    for (side, child) in [(Comparator::Le, &left), (Comparator::Gt, &right)] {
        if let Some((f, s)) = child.best_split_among(&pair, min_leaf)? {
            let weighted = s.gini_gain * child.len() as f64 / n;
            if chosen.as_ref().is_none_or(|c| weighted > c.4 + GAIN_TIE_EPS) {
                chosen = Some((side, child, f, s, weighted));
            }
        }
    }
    let Some((side1, child, f2, s2, _)) = chosen else {
        return Ok(Vec::new());
    };
    if f2 != dominant {
        return Ok(Vec::new());
    }

    let c1 = Condition::new(dominant, side1, s1.threshold);
    let (g_left, g_right) = child.partition(dominant, s2.threshold);
    let mut out = Vec::new();
    for (side2, grandchild) in [(Comparator::Le, g_left), (Comparator::Gt, g_right)] {
        let Some(s3) = grandchild.best_split(other, min_leaf)? else {
            continue;
        };
        let c2 = Condition::new(dominant, side2, s2.threshold);
        for cmp in [Comparator::Le, Comparator::Gt] {
            out.push(CandidateEffect::bivariate(
                vec![c1, c2, Condition::new(other, cmp, s3.threshold)],
                TreeDepth::ThreeLayer,
            )?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnivariateScan {
    pub feature: usize,
    pub candidate: Option<CandidateEffect>,
}

/// All trees grown for one cross-category pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairScan {
    pub first: usize,
    pub second: usize,
    pub candidates: Vec<CandidateEffect>,
}

/// Result of scanning every continuous predictor and every
/// (demographic or geographic) x resource pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionLedger {
    pub min_leaf: usize,
    pub univariate: Vec<UnivariateScan>,
    pub pairs: Vec<PairScan>,
}

impl DetectionLedger {
    /// Flattened candidate list in scan order with exact duplicates removed.
    pub fn candidates(&self) -> Vec<CandidateEffect> {
        let mut out: Vec<CandidateEffect> = Vec::new();
        let all = self
            .univariate
            .iter()
            .filter_map(|s| s.candidate.as_ref())
            .chain(self.pairs.iter().flat_map(|p| p.candidates.iter()));
        for c in all {
            if !out.iter().any(|o| o.same_term(c)) {
                out.push(c.clone());
            }
        }
        out
    }
}

/// Feature pairs scanned for bivariate effects, in schema order.
pub fn cross_category_pairs(schema: &Schema) -> Vec<(usize, usize)> {
    let resources = schema.indices_in(Category::Resource);
    let mut pairs = Vec::new();
    for a in 0..schema.len() {
        let cat = schema.variables()[a].category;
        if cat == Category::Demographic || cat == Category::Geographic {
            pairs.extend(resources.iter().map(|&r| (a, r)));
        }
    }
    pairs
}

fn scan_pair(data: &DataMatrix, a: usize, b: usize, min_leaf: usize) -> Result<Vec<CandidateEffect>> {
    let schema = data.schema();
    let continuous = |f: usize| schema.variables()[f].kind == Kind::Continuous;
    let mut found = Vec::new();
    if continuous(a) {
        found.extend(fit_two_layer(data, a, b, min_leaf)?);
    }
    if continuous(b) {
        found.extend(fit_two_layer(data, b, a, min_leaf)?);
    }
    if continuous(a) {
        found.extend(fit_three_layer(data, a, b, min_leaf)?);
    }
    if continuous(b) {
        found.extend(fit_three_layer(data, b, a, min_leaf)?);
    }
    let mut unique: Vec<CandidateEffect> = Vec::with_capacity(found.len());
    for c in found {
        if !unique.iter().any(|u| u.same_term(&c)) {
            unique.push(c);
        }
    }
    Ok(unique)
}

/// Runs every detection tree over an imputed (training) matrix.
pub fn scan(data: &DataMatrix, min_leaf: usize) -> Result<DetectionLedger> {
    require_complete(data)?;
    let schema = data.schema();
    let univariate = (0..schema.len())
        .filter(|&j| schema.is_continuous_predictor(j))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|f| fit_one_layer(data, f, min_leaf).map(|candidate| UnivariateScan { feature: f, candidate }))
        .collect::<Result<Vec<_>>>()?;
    let pairs = cross_category_pairs(schema)
        .into_par_iter()
        .map(|(a, b)| {
            scan_pair(data, a, b, min_leaf).map(|candidates| PairScan {
                first: a,
                second: b,
                candidates,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DetectionLedger {
        min_leaf,
        univariate,
        pairs,
    })
}

/// Univariate candidates for every continuous predictor followed by
/// bivariate candidates for every cross-category pair.
pub fn enumerate_candidates(data: &DataMatrix, min_leaf: usize) -> Result<Vec<CandidateEffect>> {
    Ok(scan(data, min_leaf)?.candidates())
}
