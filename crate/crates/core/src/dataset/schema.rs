use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Binary,
    Continuous,
}

/// Column role. Psychological predictors only enter the comparison
/// baseline; they are never scanned for threshold effects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Demographic,
    Geographic,
    #[serde(alias = "resource-related", alias = "resource_related")]
    Resource,
    Psychological,
    Response,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Category::Demographic => "demographic",
            Category::Geographic => "geographic",
            Category::Resource => "resource",
            Category::Psychological => "psychological",
            Category::Response => "response",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub kind: Kind,
    pub category: Category,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
}

impl VariableSpec {
    pub fn new(name: &str, kind: Kind, category: Category) -> Self {
        Self {
            name: name.to_string(),
            kind,
            category,
            description: String::new(),
        }
    }

    pub fn with_description(mut self, description: &str) -> Self {
        self.description = description.to_string();
        self
    }

    pub fn is_predictor(&self) -> bool {
        matches!(
            self.category,
            Category::Demographic | Category::Geographic | Category::Resource
        )
    }
}

/// An ordered, validated list of column specifications.
///
/// Serialized as a bare JSON array of `{name, kind, category[, description]}`
/// objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<VariableSpec>", into = "Vec<VariableSpec>")]
pub struct Schema {
    variables: Vec<VariableSpec>,
}

impl TryFrom<Vec<VariableSpec>> for Schema {
    type Error = Error;

    fn try_from(variables: Vec<VariableSpec>) -> Result<Self> {
        Schema::new(variables)
    }
}

impl From<Schema> for Vec<VariableSpec> {
    fn from(schema: Schema) -> Self {
        schema.variables
    }
}

impl Schema {
    pub fn new(variables: Vec<VariableSpec>) -> Result<Self> {
        let mut seen = HashSet::new();
        for v in &variables {
            if v.name.trim().is_empty() {
                return Err(Error::Schema("variable names must be nonempty".into()));
            }
            if !seen.insert(v.name.as_str()) {
                return Err(Error::Schema(format!("duplicate variable name {:?}", v.name)));
            }
        }
        let responses: Vec<&VariableSpec> = variables.iter().filter(|v| v.category == Category::Response).collect();
        match responses.as_slice() {
            [r] if r.kind == Kind::Binary => {}
            [r] => return Err(Error::Schema(format!("response variable {:?} must be binary", r.name))),
            [] => return Err(Error::Schema("no response variable".into())),
            _ => return Err(Error::Schema("more than one response variable".into())),
        }
        Ok(Self { variables })
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// The thirteen-predictor household evacuation schema with `EvaDec`
    /// as the response.
    pub fn table1() -> Self {
        use Category::*;
        use Kind::*;
        let vars = vec![
            VariableSpec::new("Female", Binary, Demographic).with_description("Gender"),
            VariableSpec::new("White", Binary, Demographic).with_description("Race"),
            VariableSpec::new("Married", Binary, Demographic).with_description("Marital status"),
            VariableSpec::new("HmOwn", Binary, Demographic).with_description("House ownership"),
            VariableSpec::new("Age", Continuous, Demographic).with_description("Age"),
            VariableSpec::new("HHSize", Continuous, Demographic).with_description("Household size"),
            VariableSpec::new("Edu", Continuous, Demographic).with_description("Education years"),
            VariableSpec::new("Income", Continuous, Demographic).with_description("Annual income"),
            VariableSpec::new("RiskArea", Continuous, Geographic)
                .with_description("Risk area, 0 (barrier island) to 4 (inland)"),
            VariableSpec::new("RegVeh", Continuous, Resource).with_description("Registered vehicle number"),
            VariableSpec::new("EvaVeh", Continuous, Resource).with_description("Vehicles to take in the evacuation"),
            VariableSpec::new("EvaTrail", Continuous, Resource).with_description("Trailers to take in the evacuation"),
            VariableSpec::new("EvaCost", Continuous, Resource).with_description("Estimated evacuation cost"),
            VariableSpec::new("EvaDec", Binary, Response).with_description("Evacuation decision"),
        ];
        Schema::new(vars).expect("built-in schema is valid")
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&VariableSpec> {
        self.variables.get(index)
    }

    pub fn name(&self, index: usize) -> &str {
        &self.variables[index].name
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn response_index(&self) -> usize {
        self.variables
            .iter()
            .position(|v| v.category == Category::Response)
            .expect("validated schema has a response")
    }

    /// Demographic, geographic and resource columns in schema order.
    pub fn predictor_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.variables[j].is_predictor()).collect()
    }

    pub fn psychological_indices(&self) -> Vec<usize> {
        self.indices_in(Category::Psychological)
    }

    pub fn indices_in(&self, category: Category) -> Vec<usize> {
        (0..self.len())
            .filter(|&j| self.variables[j].category == category)
            .collect()
    }

    pub fn is_continuous_predictor(&self, index: usize) -> bool {
        self.variables
            .get(index)
            .is_some_and(|v| v.is_predictor() && v.kind == Kind::Continuous)
    }

    pub fn names(&self) -> Vec<&str> {
        self.variables.iter().map(|v| v.name.as_str()).collect()
    }

    /// Hex SHA-256 over the `name,kind,category` triples, one per line.
    /// Descriptions do not affect the digest.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for v in &self.variables {
            let kind = match v.kind {
                Kind::Binary => "binary",
                Kind::Continuous => "continuous",
            };
            hasher.update(format!("{},{},{}\n", v.name, kind, v.category).as_bytes());
        }
        hex::encode(hasher.finalize())
    }
}
