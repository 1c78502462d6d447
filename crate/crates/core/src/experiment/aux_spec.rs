//! Textual auxiliary specifications: `tree:depth=12,min_leaf=5`,
//! `sgd:lambda=1e-4,epochs=20`, `pred:<path>` and
//! `pred:train=<path>,test=<path>`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::auxiliary::{SgdParams, TreeParams};
use crate::error::Error;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum AuxSpec {
    Tree(TreeParams),
    Sgd(SgdParams),
    /// Predictions computed elsewhere. `train` is aligned with the training
    /// file; `test`, when given, with the test file.
    Pred {
        train: PathBuf,
        test: Option<PathBuf>,
    },
}

impl AuxSpec {
    pub fn is_external(&self) -> bool {
        matches!(self, AuxSpec::Pred { .. })
    }
}

fn bad(spec: &str, why: impl fmt::Display) -> Error {
    Error::Config(format!("auxiliary `{spec}`: {why}"))
}

fn options<'a>(spec: &'a str, body: &'a str) -> Result<Vec<(&'a str, &'a str)>, Error> {
    body.split(',')
        .filter(|s| !s.is_empty())
        .map(|kv| {
            kv.split_once('=')
                .ok_or_else(|| bad(spec, format!("expected key=value, got `{kv}`")))
        })
        .collect()
}

fn number<T: FromStr>(spec: &str, key: &str, value: &str) -> Result<T, Error> {
    value
        .parse()
        .map_err(|_| bad(spec, format!("`{key}` has invalid value `{value}`")))
}

impl FromStr for AuxSpec {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self, Error> {
        let (kind, body) = spec.split_once(':').unwrap_or((spec, ""));
        match kind.to_ascii_lowercase().as_str() {
            "tree" => {
                let mut p = TreeParams::default();
                for (k, v) in options(spec, body)? {
                    match k {
                        "depth" | "max_depth" => p.max_depth = number(spec, k, v)?,
                        "min_leaf" | "min_leaf_size" => p.min_leaf_size = number(spec, k, v)?,
                        "seed" => p.seed = number(spec, k, v)?,
                        _ => return Err(bad(spec, format!("unknown option `{k}`"))),
                    }
                }
                if p.max_depth == 0 || p.min_leaf_size == 0 {
                    return Err(bad(spec, "depth and min_leaf must be at least 1"));
                }
                Ok(AuxSpec::Tree(p))
            }
            "sgd" => {
                let mut p = SgdParams::default();
                for (k, v) in options(spec, body)? {
                    match k {
                        "lambda" => p.lambda = number(spec, k, v)?,
                        "epochs" => p.epochs = number(spec, k, v)?,
                        "seed" => p.seed = number(spec, k, v)?,
                        _ => return Err(bad(spec, format!("unknown option `{k}`"))),
                    }
                }
                if !(p.lambda > 0.0 && p.lambda.is_finite()) || p.epochs == 0 {
                    return Err(bad(spec, "lambda must be positive and epochs at least 1"));
                }
                Ok(AuxSpec::Sgd(p))
            }
            "pred" if body.is_empty() => Err(bad(spec, "missing predictions path")),
            "pred" if body.starts_with("train=") => {
                let (mut train, mut test) = (None, None);
                for (k, v) in options(spec, body)? {
                    match k {
                        "train" => train = Some(PathBuf::from(v)),
                        "test" => test = Some(PathBuf::from(v)),
                        _ => return Err(bad(spec, format!("unknown option `{k}`"))),
                    }
                }
                Ok(AuxSpec::Pred {
                    train: train.expect("body starts with train="),
                    test,
                })
            }
            "pred" => Ok(AuxSpec::Pred {
                train: PathBuf::from(body),
                test: None,
            }),
            _ => Err(bad(spec, "kind must be tree, sgd or pred")),
        }
    }
}

impl fmt::Display for AuxSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuxSpec::Tree(p) => write!(
                f,
                "tree:depth={},min_leaf={},seed={}",
                p.max_depth, p.min_leaf_size, p.seed
            ),
            AuxSpec::Sgd(p) => write!(f, "sgd:lambda={:e},epochs={},seed={}", p.lambda, p.epochs, p.seed),
            AuxSpec::Pred { train, test: None } => write!(f, "pred:{}", train.display()),
            AuxSpec::Pred {
                train,
                test: Some(test),
            } => {
                write!(f, "pred:train={},test={}", train.display(), test.display())
            }
        }
    }
}

impl TryFrom<String> for AuxSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl From<AuxSpec> for String {
    fn from(spec: AuxSpec) -> String {
        spec.to_string()
    }
}
