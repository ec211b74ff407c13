use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cart::default_min_leaf;
use crate::error::{Error, Result};
use crate::selection::SIGNIFICANCE_LEVEL;

/// How the minimum leaf size of detection trees is chosen.
///
/// Written as `auto`, a positive integer, or a fraction in `(0, 1)` of the
/// training rows (rounded up).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MinLeafRule {
    /// `max(5, ceil(0.05 n_train))`.
    #[default]
    Auto,
    Count(usize),
    Fraction(f64),
}

impl MinLeafRule {
    pub fn resolve(self, n_train: usize) -> Result<usize> {
        match self {
            MinLeafRule::Auto => Ok(default_min_leaf(n_train)),
            MinLeafRule::Count(0) => Err(Error::Config("min_leaf must be positive".into())),
            MinLeafRule::Count(k) => Ok(k),
            MinLeafRule::Fraction(f) => Ok(((f * n_train as f64).ceil() as usize).max(1)),
        }
    }
}

impl FromStr for MinLeafRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(MinLeafRule::Auto);
        }
        if let Ok(k) = s.parse::<usize>() {
            return if k == 0 {
                Err(Error::Config("min_leaf must be positive".into()))
            } else {
                Ok(MinLeafRule::Count(k))
            };
        }
        match s.parse::<f64>() {
            Ok(f) if f > 0.0 && f < 1.0 => Ok(MinLeafRule::Fraction(f)),
            _ => Err(Error::Config(format!(
                "min_leaf {s:?} is not 'auto', a positive integer or a fraction in (0, 1)"
            ))),
        }
    }
}

impl TryFrom<String> for MinLeafRule {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl fmt::Display for MinLeafRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinLeafRule::Auto => f.write_str("auto"),
            MinLeafRule::Count(k) => write!(f, "{k}"),
            MinLeafRule::Fraction(x) => write!(f, "{x}"),
        }
    }
}

impl From<MinLeafRule> for String {
    fn from(r: MinLeafRule) -> String {
        r.to_string()
    }
}

/// Settings for one pipeline run. Also readable from a JSON file in which
/// every field except `data` and `out` may be omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: PathBuf,
    /// Schema file; the built-in household-evacuation schema when absent.
    #[serde(default)]
    pub schema: Option<PathBuf>,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub min_leaf: MinLeafRule,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_pi")]
    pub pi: f64,
    pub out: PathBuf,
}

fn default_ratio() -> f64 {
    0.9
}

fn default_alpha() -> f64 {
    SIGNIFICANCE_LEVEL
}

fn default_pi() -> f64 {
    0.5
}

impl RunConfig {
    pub fn new(data: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        Self {
            data: data.into(),
            schema: None,
            ratio: default_ratio(),
            seed: 0,
            min_leaf: MinLeafRule::Auto,
            alpha: default_alpha(),
            pi: default_pi(),
            out: out.into(),
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Checks numeric settings only.
    pub fn validate_parameters(&self) -> Result<()> {
        let open_unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be in (0, 1), got {v}")))
            }
        };
        open_unit("ratio", self.ratio)?;
        open_unit("alpha", self.alpha)?;
        open_unit("pi", self.pi)?;
        if let MinLeafRule::Fraction(f) = self.min_leaf {
            open_unit("min_leaf fraction", f)?;
        }
        if self.min_leaf == MinLeafRule::Count(0) {
            return Err(Error::Config("min_leaf must be positive".into()));
        }
        Ok(())
    }

    /// Checks numeric settings and that every input path exists.
    pub fn validate(&self) -> Result<()> {
        self.validate_parameters()?;
        if !self.data.exists() {
            return Err(Error::MissingFile(self.data.clone()));
        }
        if let Some(s) = &self.schema {
            if !s.exists() {
                return Err(Error::MissingFile(s.clone()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_leaf_rules_parse_and_resolve() {
        assert_eq!("auto".parse::<MinLeafRule>().unwrap().resolve(1149).unwrap(), 58);
        assert_eq!("auto".parse::<MinLeafRule>().unwrap().resolve(40).unwrap(), 5);
        assert_eq!("12".parse::<MinLeafRule>().unwrap().resolve(1000).unwrap(), 12);
        assert_eq!("0.02".parse::<MinLeafRule>().unwrap().resolve(1000).unwrap(), 20);
        assert!("0".parse::<MinLeafRule>().is_err());
        assert!("1.5".parse::<MinLeafRule>().is_err());
        assert!("many".parse::<MinLeafRule>().is_err());
    }

    #[test]
    fn out_of_range_settings_are_config_errors() {
        let mut c = RunConfig::new("d.csv", "out");
        c.ratio = 1.2;
        assert!(matches!(c.validate_parameters(), Err(Error::Config(_))));
        let mut c = RunConfig::new("d.csv", "out");
        c.alpha = 0.0;
        assert!(matches!(c.validate_parameters(), Err(Error::Config(_))));
        let mut c = RunConfig::new("d.csv", "out");
        c.pi = 1.0;
        assert!(matches!(c.validate_parameters(), Err(Error::Config(_))));
    }

    #[test]
    fn json_defaults_fill_in() {
        let c: RunConfig = serde_json::from_str(r#"{"data": "a.csv", "out": "o", "min_leaf": "0.1"}"#).unwrap();
        assert_eq!(c.ratio, 0.9);
        assert_eq!(c.alpha, 0.01);
        assert_eq!(c.pi, 0.5);
        assert_eq!(c.min_leaf, MinLeafRule::Fraction(0.1));
        assert!(serde_json::from_str::<RunConfig>(r#"{"data": "a", "out": "o", "bogus": 1}"#).is_err());
    }
}
