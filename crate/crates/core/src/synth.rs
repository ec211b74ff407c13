//! Synthetic data with planted threshold effects.
//!
//! The log-odds of each row are
//! `intercept + sum b_k x_k + sum phi_u x_u I(x_u > a_u) + sum phi_b x_i x_j I(region_b)`
//! and the response is a Bernoulli draw from the resulting probability.
//! Predictors are drawn row by row from one ChaCha stream; missingness comes
//! from an independent stream so turning it on never changes the data.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, LogNormal, Normal};
use serde::{Deserialize, Serialize};

use crate::cart::{Comparator, NamedCondition};
use crate::dataset::{Category, DataMatrix, Kind, Schema, VariableSpec};
use crate::error::{Error, Result};
use crate::logit::sigmoid;

const MISSING_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Distribution {
    Uniform {
        low: f64,
        high: f64,
    },
    Normal {
        mean: f64,
        sd: f64,
    },
    LogNormal {
        mu: f64,
        sigma: f64,
    },
    Bernoulli {
        p: f64,
    },
    /// Integers `low..=high`, equally likely.
    IntegerUniform {
        low: i64,
        high: i64,
    },
}

impl Distribution {
    fn validate(&self, name: &str) -> Result<()> {
        let ok = match *self {
            Distribution::Uniform { low, high } => low.is_finite() && high.is_finite() && low < high,
            Distribution::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && sd > 0.0,
            Distribution::LogNormal { mu, sigma } => mu.is_finite() && sigma.is_finite() && sigma > 0.0,
            Distribution::Bernoulli { p } => (0.0..=1.0).contains(&p),
            Distribution::IntegerUniform { low, high } => low <= high,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "invalid distribution parameters for {name}: {self:?}"
            )))
        }
    }

    pub fn kind(&self) -> Kind {
        match self {
            Distribution::Bernoulli { .. } => Kind::Binary,
            _ => Kind::Continuous,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Distribution::Uniform { low, high } => rng.random_range(low..high),
            Distribution::Normal { mean, sd } => Normal::new(mean, sd).expect("validated").sample(rng),
            Distribution::LogNormal { mu, sigma } => LogNormal::new(mu, sigma).expect("validated").sample(rng),
            Distribution::Bernoulli { p } => f64::from(u8::from(rng.random::<f64>() < p)),
            Distribution::IntegerUniform { low, high } => rng.random_range(low..=high) as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorSpec {
    pub name: String,
    pub category: Category,
    pub distribution: Distribution,
    #[serde(default)]
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedUnivariate {
    pub feature: String,
    pub threshold: f64,
    pub phi: f64,
}

/// `phi * x_i * x_j` inside the region, where `x_i, x_j` are the two
/// features named by the conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedBivariate {
    pub conditions: Vec<NamedCondition>,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n: usize,
    pub seed: u64,
    #[serde(default = "default_response")]
    pub response: String,
    pub intercept: f64,
    pub predictors: Vec<PredictorSpec>,
    #[serde(default)]
    pub univariate_effects: Vec<PlantedUnivariate>,
    #[serde(default)]
    pub bivariate_effects: Vec<PlantedBivariate>,
    #[serde(default)]
    pub missing_rate: f64,
}

fn default_response() -> String {
    "y".to_string()
}

pub struct SynthOutput {
    pub data: DataMatrix,
    /// True `P(y = 1)` per row under the planted parameters.
    pub probabilities: Vec<f64>,
}

/// Resolved form of the planted terms, indexed by predictor position.
struct Planted {
    univariate: Vec<(usize, f64, f64)>,
    bivariate: Vec<(Vec<crate::cart::Condition>, [usize; 2], f64)>,
}

impl SynthConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Predictors in declaration order followed by the response.
    pub fn schema(&self) -> Result<Schema> {
        let mut vars: Vec<VariableSpec> = self
            .predictors
            .iter()
            .map(|p| VariableSpec::new(&p.name, p.distribution.kind(), p.category))
            .collect();
        vars.push(VariableSpec::new(&self.response, Kind::Binary, Category::Response));
        Schema::new(vars)
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.predictors
            .iter()
            .position(|p| p.name == name)
            .ok_or_else(|| Error::UnknownFeatureName(name.to_string()))
    }

    fn resolve(&self) -> Result<Planted> {
        let schema = self.schema()?;
        if self.n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        if !(0.0..=0.5).contains(&self.missing_rate) {
            return Err(Error::InvalidArgument(format!(
                "missing_rate {} not in [0, 0.5]",
                self.missing_rate
            )));
        }
        for p in &self.predictors {
            p.distribution.validate(&p.name)?;
            if p.category == Category::Response {
                return Err(Error::InvalidArgument(format!(
                    "predictor {} has response category",
                    p.name
                )));
            }
        }
        let univariate = self
            .univariate_effects
            .iter()
            .map(|u| Ok((self.index(&u.feature)?, u.threshold, u.phi)))
            .collect::<Result<Vec<_>>>()?;
        let bivariate = self
            .bivariate_effects
            .iter()
            .map(|b| {
                let conds = b
                    .conditions
                    .iter()
                    .map(|c| c.resolve(&schema))
                    .collect::<Result<Vec<_>>>()?;
                let mut features: Vec<usize> = Vec::new();
                for c in &conds {
                    if !features.contains(&c.feature) {
                        features.push(c.feature);
                    }
                }
                if features.len() != 2 {
                    return Err(Error::InvalidArgument(
                        "planted bivariate effect must involve exactly two predictors".into(),
                    ));
                }
                Ok((conds, [features[0], features[1]], b.phi))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Planted { univariate, bivariate })
    }

    /// Log-odds of one row of predictor values.
    fn log_odds(&self, planted: &Planted, x: &[f64]) -> f64 {
        let mut eta = self.intercept;
        for (p, v) in self.predictors.iter().zip(x) {
            eta += p.coefficient * v;
        }
        for &(f, a, phi) in &planted.univariate {
            if x[f] > a {
                eta += phi * x[f];
            }
        }
        for (conds, [i, j], phi) in &planted.bivariate {
            if conds.iter().all(|c| c.holds(x)) {
                eta += phi * x[*i] * x[*j];
            }
        }
        eta
    }
}

pub fn generate(config: &SynthConfig) -> Result<SynthOutput> {
    let planted = config.resolve()?;
    let schema = config.schema()?;
    let p = config.predictors.len();
    let m = p + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut values = Vec::with_capacity(config.n * m);
    let mut probabilities = Vec::with_capacity(config.n);
    let mut x = vec![0.0; p];
    for _ in 0..config.n {
        for (xi, spec) in x.iter_mut().zip(&config.predictors) {
            *xi = spec.distribution.sample(&mut rng);
        }
        let prob = sigmoid(config.log_odds(&planted, &x));
        let y = rng.random::<f64>() < prob;
        values.extend_from_slice(&x);
        values.push(f64::from(u8::from(y)));
        probabilities.push(prob);
    }
    let mut missing = vec![false; values.len()];
    if config.missing_rate > 0.0 {
        let mut mrng = ChaCha8Rng::seed_from_u64(config.seed ^ MISSING_STREAM);
        for i in 0..config.n {
            for j in 0..p {
                if mrng.random::<f64>() < config.missing_rate {
                    missing[i * m + j] = true;
                    values[i * m + j] = f64::NAN;
                }
            }
        }
    }
    Ok(SynthOutput {
        data: DataMatrix::from_parts(schema, values, missing)?,
        probabilities,
    })
}

/// One continuous demographic predictor `x ~ U(0, 4)` with log-odds
/// `intercept + beta x + phi x I(x > threshold)`.
pub fn univariate_config(n: usize, seed: u64, intercept: f64, beta: f64, threshold: f64, phi: f64) -> SynthConfig {
    SynthConfig {
        n,
        seed,
        response: default_response(),
        intercept,
        predictors: vec![PredictorSpec {
            name: "x".into(),
            category: Category::Demographic,
            distribution: Distribution::Uniform { low: 0.0, high: 4.0 },
            coefficient: beta,
        }],
        univariate_effects: vec![PlantedUnivariate {
            feature: "x".into(),
            threshold,
            phi,
        }],
        bivariate_effects: Vec::new(),
        missing_rate: 0.0,
    }
}

/// A demographic `xi ~ U(0, 4)` and a resource `xj ~ U(0, 2)` with the
/// interaction `phi xi xj` active where `xi <= bi` and `xj > bj`.
///
/// Inside this region the product grows from zero, so the response is not
/// saturated even for large `phi` and the interaction has a finite estimate.
pub fn bivariate_config(n: usize, seed: u64, bi: f64, bj: f64, phi: f64) -> SynthConfig {
    SynthConfig {
        n,
        seed,
        response: default_response(),
        intercept: -1.0,
        predictors: vec![
            PredictorSpec {
                name: "xi".into(),
                category: Category::Demographic,
                distribution: Distribution::Uniform { low: 0.0, high: 4.0 },
                coefficient: 0.25,
            },
            PredictorSpec {
                name: "xj".into(),
                category: Category::Resource,
                distribution: Distribution::Uniform { low: 0.0, high: 2.0 },
                coefficient: 0.25,
            },
        ],
        univariate_effects: Vec::new(),
        bivariate_effects: vec![PlantedBivariate {
            conditions: vec![
                NamedCondition {
                    feature: "xi".into(),
                    comparator: Comparator::Le,
                    threshold: bi,
                },
                NamedCondition {
                    feature: "xj".into(),
                    comparator: Comparator::Gt,
                    threshold: bj,
                },
            ],
            phi,
        }],
        missing_rate: 0.0,
    }
}

fn pred(name: &str, category: Category, distribution: Distribution, coefficient: f64) -> PredictorSpec {
    PredictorSpec {
        name: name.into(),
        category,
        distribution,
        coefficient,
    }
}

/// Household-evacuation shaped fixture: four binary and four continuous
/// demographics, one geographic risk area on 0..=4 and four resource
/// variables, with two univariate and two bivariate planted effects.
pub fn table1_like(n: usize, seed: u64) -> SynthConfig {
    use Category::*;
    use Distribution::*;
    let cond = |feature: &str, comparator, threshold| NamedCondition {
        feature: feature.into(),
        comparator,
        threshold,
    };
    SynthConfig {
        n,
        seed,
        response: "EvaDec".into(),
        intercept: 0.0,
        predictors: vec![
            pred("Female", Demographic, Bernoulli { p: 0.51 }, 0.5),
            pred("White", Demographic, Bernoulli { p: 0.78 }, -0.1),
            pred("Married", Demographic, Bernoulli { p: 0.69 }, 0.4),
            pred("HmOwn", Demographic, Bernoulli { p: 0.87 }, -0.1),
            pred("Age", Demographic, Uniform { low: 20.0, high: 90.0 }, -0.08),
            pred("HHSize", Demographic, IntegerUniform { low: 1, high: 6 }, -0.2),
            pred("Edu", Demographic, IntegerUniform { low: 9, high: 18 }, 0.02),
            pred(
                "Income",
                Demographic,
                Uniform {
                    low: 15000.0,
                    high: 55000.0,
                },
                1.5e-4,
            ),
            pred("RiskArea", Geographic, IntegerUniform { low: 0, high: 4 }, -0.2),
            pred("RegVeh", Resource, IntegerUniform { low: 0, high: 4 }, 0.2),
            pred("EvaVeh", Resource, IntegerUniform { low: 0, high: 3 }, 0.6),
            pred("EvaTrail", Resource, IntegerUniform { low: 0, high: 2 }, 0.1),
            pred("EvaCost", Resource, LogNormal { mu: 6.5, sigma: 0.9 }, 0.0005),
        ],
        univariate_effects: vec![
            PlantedUnivariate {
                feature: "Age".into(),
                threshold: 60.0,
                phi: 0.05,
            },
            PlantedUnivariate {
                feature: "Income".into(),
                threshold: 35000.0,
                phi: -1.2e-4,
            },
        ],
        bivariate_effects: vec![
            PlantedBivariate {
                conditions: vec![
                    cond("RiskArea", Comparator::Gt, 2.5),
                    cond("EvaVeh", Comparator::Gt, 0.5),
                ],
                phi: 0.6,
            },
            PlantedBivariate {
                conditions: vec![cond("HHSize", Comparator::Le, 3.5), cond("RegVeh", Comparator::Gt, 1.5)],
                phi: 0.5,
            },
        ],
        missing_rate: 0.05,
    }
}
