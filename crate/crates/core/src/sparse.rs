use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sparse real vector stored as parallel index/value arrays with strictly
/// increasing 0-based indices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn new(entries: Vec<(u32, f64)>) -> Result<Self> {
        let mut indices = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        for (idx, val) in entries {
            if !val.is_finite() {
                return Err(Error::Parameter(format!("non-finite value at index {idx}")));
            }
            if indices.last().is_some_and(|&last| idx <= last) {
                return Err(Error::Parameter(format!(
                    "indices must be strictly increasing (index {idx} after {})",
                    indices.last().unwrap()
                )));
            }
            indices.push(idx);
            values.push(val);
        }
        Ok(Self { indices, values })
    }

    /// Keeps only the nonzero entries of `dense`.
    pub fn from_dense(dense: &[f64]) -> Self {
        let (indices, values) = dense
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i as u32, *v))
            .unzip();
        Self { indices, values }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().zip(&self.values).map(|(&i, &v)| (i as usize, v))
    }

    pub fn max_index(&self) -> Option<usize> {
        self.indices.last().map(|&i| i as usize)
    }

    /// Value at `index`, zero when absent.
    pub fn get(&self, index: usize) -> f64 {
        match self.indices.binary_search(&(index as u32)) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }

    /// Dot product with a dense vector; entries past the end of `dense` count
    /// as zero.
    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.iter()
            .take_while(|(i, _)| *i < dense.len())
            .map(|(i, v)| v * dense[i])
            .sum()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut a, mut b) = (0, 0);
        let mut sum = 0.0;
        while a < self.indices.len() && b < other.indices.len() {
            match self.indices[a].cmp(&other.indices[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    sum += self.values[a] * other.values[b];
                    a += 1;
                    b += 1;
                }
            }
        }
        sum
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// `dense += scale * self`. `dense` must cover every stored index.
    pub fn add_scaled_to(&self, dense: &mut [f64], scale: f64) {
        for (i, v) in self.iter() {
            dense[i] += scale * v;
        }
    }

    pub fn to_dense(&self, dimension: usize) -> Vec<f64> {
        let mut out = vec![0.0; dimension.max(self.max_index().map_or(0, |m| m + 1))];
        self.add_scaled_to(&mut out, 1.0);
        out
    }

    /// Prepends `prefix` (placed at indices `0..prefix.len()`) and shifts
    /// the existing entries up by the prefix length. Zeros in the prefix are
    /// kept so the layout stays fixed.
    pub fn with_prefix(&self, prefix: &[f64]) -> Self {
        let shift = prefix.len() as u32;
        let mut indices = Vec::with_capacity(prefix.len() + self.nnz());
        let mut values = Vec::with_capacity(prefix.len() + self.nnz());
        indices.extend(0..shift);
        values.extend_from_slice(prefix);
        indices.extend(self.indices.iter().map(|i| i + shift));
        values.extend_from_slice(&self.values);
        Self { indices, values }
    }

    /// Entries with index `>= from`, re-based so `from` becomes 0.
    pub fn suffix(&self, from: usize) -> Self {
        let start = self.indices.partition_point(|&i| (i as usize) < from);
        Self {
            indices: self.indices[start..].iter().map(|&i| i - from as u32).collect(),
            values: self.values[start..].to_vec(),
        }
    }

    /// Entries with index `< end`.
    pub fn prefix(&self, end: usize) -> Self {
        let stop = self.indices.partition_point(|&i| (i as usize) < end);
        Self {
            indices: self.indices[..stop].to_vec(),
            values: self.values[..stop].to_vec(),
        }
    }

    /// Multiplies each stored value by `factors[index]`.
    pub fn scale_by(&self, factors: &[f64]) -> Self {
        Self {
            indices: self.indices.clone(),
            values: self
                .iter()
                .map(|(i, v)| v * factors.get(i).copied().unwrap_or(1.0))
                .collect(),
        }
    }
}
