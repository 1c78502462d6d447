//! Experiment configuration, read from TOML and overridable from the
//! command line.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::measures::Measure;
use serde::{Deserialize, Deserializer, Serialize};

use super::aux_spec::AuxSpec;

/// Parses a grid: a comma-separated list (`1,2,0.5`, `2^-3`) or a base-2
/// exponent range `2^lo:2^hi`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if let Some((lo, hi)) = text.split_once(':') {
        let exp = |s: &str| -> Result<i32> {
            s.trim()
                .strip_prefix("2^")
                .and_then(|e| e.parse().ok())
                .ok_or_else(|| Error::Config(format!("grid range bound `{s}` must look like 2^k")))
        };
        let (lo, hi) = (exp(lo)?, exp(hi)?);
        if lo > hi {
            return Err(Error::Config(format!("empty grid range 2^{lo}:2^{hi}")));
        }
        return Ok((lo..=hi).map(|k| 2f64.powi(k)).collect());
    }
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let value = match s.strip_prefix("2^") {
                Some(e) => e.parse::<i32>().ok().map(|k| 2f64.powi(k)),
                None => s.parse::<f64>().ok(),
            };
            value.ok_or_else(|| Error::Config(format!("grid value `{s}` is not a number")))
        })
        .collect()
}

fn grid<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Text(String),
        One(f64),
        List(Vec<f64>),
    }
    match Raw::deserialize(d)? {
        Raw::Text(s) => parse_grid(&s).map_err(serde::de::Error::custom),
        Raw::One(v) => Ok(vec![v]),
        Raw::List(v) => Ok(v),
    }
}

fn default_measure() -> Measure {
    Measure::ErrorRate
}
fn default_c() -> Vec<f64> {
    (-7..=7).map(|k| 2f64.powi(k)).collect()
}
fn default_b() -> Vec<f64> {
    vec![1.0]
}
fn default_epsilon() -> f64 {
    0.1
}
fn default_max_iterations() -> usize {
    5000
}
fn default_folds() -> usize {
    5
}
fn default_bias() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: PathBuf,
    #[serde(default)]
    pub test: Option<PathBuf>,
    #[serde(default = "default_measure")]
    pub measure: Measure,
    /// C values; cross-validated when there is more than one.
    #[serde(default = "default_c", deserialize_with = "grid")]
    pub c: Vec<f64>,
    /// B values. Only `sweep` uses more than the first.
    #[serde(default = "default_b", deserialize_with = "grid")]
    pub b: Vec<f64>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default)]
    pub aux: Vec<AuxSpec>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default)]
    pub seed: u64,
    /// Value of the constant feature appended to every example; 0 disables it.
    #[serde(default = "default_bias")]
    pub bias: f64,
    /// Per-feature max-abs scaling fitted on the training file.
    #[serde(default)]
    pub scale: bool,
    #[serde(default)]
    pub strict: bool,
}

impl ExperimentConfig {
    /// Defaults for everything but the training file.
    pub fn new(data: impl Into<PathBuf>) -> Self {
        Self {
            data: data.into(),
            test: None,
            measure: default_measure(),
            c: default_c(),
            b: default_b(),
            epsilon: default_epsilon(),
            max_iterations: default_max_iterations(),
            aux: Vec::new(),
            folds: default_folds(),
            seed: 0,
            bias: default_bias(),
            scale: false,
            strict: false,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a TOML file. Relative paths inside it are taken relative to the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(base) = path.parent() {
            let rebase = |p: &mut PathBuf| {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            };
            rebase(&mut cfg.data);
            if let Some(t) = cfg.test.as_mut() {
                rebase(t);
            }
            for spec in &mut cfg.aux {
                if let AuxSpec::Pred { train, test } = spec {
                    rebase(train);
                    if let Some(t) = test.as_mut() {
                        rebase(t);
                    }
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if self.c.is_empty() || self.b.is_empty() {
            return Err(Error::Config("C and B grids must be non-empty".into()));
        }
        if let Some(v) = self.c.iter().chain(&self.b).find(|&&v| !positive(v)) {
            return Err(Error::Config(format!("grid value {v} is not positive")));
        }
        if !positive(self.epsilon) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config(format!("folds must be at least 2, got {}", self.folds)));
        }
        if !self.bias.is_finite() {
            return Err(Error::Config("bias must be finite".into()));
        }
        Ok(())
    }

    /// First B value, the one used by `adapt` and `bench`.
    pub fn trade_off(&self) -> f64 {
        self.b[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1,2, 0.5").unwrap(), vec![1.0, 2.0, 0.5]);
        assert_eq!(parse_grid("2^-1:2^1").unwrap(), vec![0.5, 1.0, 2.0]);
        assert_eq!(parse_grid("2^-7:2^7").unwrap().len(), 15);
        assert_eq!(parse_grid("2^3").unwrap(), vec![8.0]);
        assert!(parse_grid("2^2:2^1").is_err());
        assert!(parse_grid("a,b").is_err());
        assert!(parse_grid("").unwrap().is_empty());
    }

    #[test]
    fn toml_with_defaults() {
        let cfg = ExperimentConfig::from_toml(
            r#"
            data = "train.svm"
            measure = "auc"
            c = "2^-2:2^2"
            aux = ["tree:depth=4", "pred:p.txt"]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.measure, Measure::Auc);
        assert_eq!(cfg.c.len(), 5);
        assert_eq!(cfg.b, vec![1.0]);
        assert_eq!(cfg.folds, 5);
        assert_eq!(cfg.bias, 1.0);
        assert_eq!(cfg.aux.len(), 2);
        cfg.validate().unwrap();
    }

    #[test]
    fn grid_as_list_or_number() {
        let cfg = ExperimentConfig::from_toml("data = \"x\"\nc = [1.0, 4.0]\nb = 2.0").unwrap();
        assert_eq!(cfg.c, vec![1.0, 4.0]);
        assert_eq!(cfg.b, vec![2.0]);
    }

    #[test]
    fn invalid_configs() {
        assert!(ExperimentConfig::from_toml("data = \"x\"\nbogus = 1").is_err());
        assert!(ExperimentConfig::from_toml("data = \"x\"\nmeasure = \"nope\"").is_err());
        let mut cfg = ExperimentConfig::new("x");
        cfg.c.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::new("x");
        cfg.folds = 1;
        assert!(cfg.validate().is_err());
    }
}
