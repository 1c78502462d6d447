use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::error::{Error, Result};

/// Predictions produced outside this crate, aligned to a dataset by
/// position. Only the source path is serialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalPredictions {
    pub source: PathBuf,
    #[serde(skip)]
    pub labels: Vec<Label>,
}

/// Reads one signed numeric token per example (any whitespace separates
/// tokens); the sign of each value is the prediction.
pub fn load_external_predictions(path: impl AsRef<Path>, expected_n: usize) -> Result<ExternalPredictions> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let labels = parse_predictions(&text)?;
    if labels.len() != expected_n {
        return Err(Error::Alignment {
            path: path.to_path_buf(),
            expected: expected_n,
            found: labels.len(),
        });
    }
    Ok(ExternalPredictions {
        source: path.to_path_buf(),
        labels,
    })
}

pub fn parse_predictions(text: &str) -> Result<Vec<Label>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        for tok in line.split_whitespace() {
            let value: f64 = tok.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                message: format!("prediction `{tok}` is not a number"),
            })?;
            if value == 0.0 || !value.is_finite() {
                return Err(Error::Label {
                    line: lineno + 1,
                    token: tok.to_string(),
                });
            }
            out.push(Label::from_score(value));
        }
    }
    Ok(out)
}
