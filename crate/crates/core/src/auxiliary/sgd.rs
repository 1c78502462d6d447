//! Linear classifier trained by stochastic subgradient descent on the
//! L2-regularized hinge loss (step size `1/(λt)`).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::sparse::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdParams {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SgdParams {
    fn default() -> Self {
        Self {
            lambda: 1e-4,
            epochs: 20,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSgdModel {
    pub params: SgdParams,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearSgdModel {
    pub fn decision(&self, x: &SparseVector) -> f64 {
        x.dot_dense(&self.weights) + self.bias
    }

    pub fn predict(&self, x: &SparseVector) -> Label {
        Label::from_score(self.decision(x))
    }
}

/// The bias is treated as the weight of a constant feature and regularized
/// with the rest, which keeps early steps (where `1/(λt)` is large) from
/// blowing it up.
pub fn train_linear_sgd(data: &Dataset, params: SgdParams) -> Result<LinearSgdModel> {
    if !(params.lambda > 0.0 && params.lambda.is_finite()) {
        return Err(Error::Parameter(format!(
            "lambda must be positive, got {}",
            params.lambda
        )));
    }
    if params.epochs == 0 {
        return Err(Error::Parameter("epochs must be at least 1".into()));
    }
    if data.len() < 2 || data.positives() == 0 || data.negatives() == 0 {
        return Err(Error::Training("SGD needs at least one example of each class".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    // w = scale · v keeps the shrink step O(1)
    let mut v = vec![0.0; data.dimension()];
    let mut scale = 1.0;
    let mut bias = 0.0;
    let mut t = 0usize;
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let ex = &data.examples()[i];
            let y = ex.label.value();
            let margin = y * (scale * ex.features.dot_dense(&v) + bias);
            let eta = 1.0 / (params.lambda * t as f64);
            let shrink = 1.0 - 1.0 / t as f64;
            if shrink == 0.0 {
                v.iter_mut().for_each(|x| *x = 0.0);
                scale = 1.0;
            } else {
                scale *= shrink;
            }
            bias *= shrink;
            if margin < 1.0 {
                ex.features.add_scaled_to(&mut v, eta * y / scale);
                bias += eta * y;
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|x| *x *= scale);
                scale = 1.0;
            }
        }
    }
    let weights: Vec<f64> = v.iter().map(|x| x * scale).collect();
    if weights.iter().any(|w| !w.is_finite()) || !bias.is_finite() {
        return Err(Error::Training("SGD diverged".into()));
    }
    Ok(LinearSgdModel { params, weights, bias })
}
