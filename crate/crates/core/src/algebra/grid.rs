use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebra::{BasePoint, StateVector};
use crate::error::{LabError, Result};

/// Finite sample set on which inequalities are evaluated.
///
/// Admissible tuples are all `(t, s, t0)` drawn from `times` with `t >= s >= t0`, crossed
/// with `base_points x vectors`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    times: Vec<f64>,
    base_points: Vec<BasePoint>,
    vectors: Vec<StateVector>,
}

impl SampleGrid {
    pub fn new(times: Vec<f64>, base_points: Vec<BasePoint>, vectors: Vec<StateVector>) -> Result<Self> {
        if times.is_empty() {
            return Err(LabError::EmptyGrid("times"));
        }
        if base_points.is_empty() {
            return Err(LabError::EmptyGrid("base_points"));
        }
        if vectors.is_empty() {
            return Err(LabError::EmptyGrid("vectors"));
        }
        if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return Err(LabError::InvalidGrid("times must be finite and nonnegative".into()));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LabError::InvalidGrid("times must be strictly increasing".into()));
        }
        for x in &base_points {
            x.validate()?;
        }
        if vectors.iter().any(StateVector::is_zero) {
            return Err(LabError::ZeroVector);
        }
        let p = vectors[0].dimension();
        if let Some(bad) = vectors.iter().find(|v| v.dimension() != p) {
            return Err(LabError::DimensionMismatch { expected: p, found: bad.dimension() });
        }
        Ok(Self { times, base_points, vectors })
    }

    /// `count` equally spaced times from `min` to `max` inclusive.
    pub fn linspace(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
        if count == 0 {
            return Err(LabError::EmptyGrid("times"));
        }
        if count == 1 {
            return Ok(vec![min]);
        }
        if !(max > min) {
            return Err(LabError::InvalidGrid(format!("time range [{min}, {max}] is empty")));
        }
        let step = (max - min) / (count - 1) as f64;
        Ok((0..count).map(|i| if i + 1 == count { max } else { min + step * i as f64 }).collect())
    }

    /// `{+-e_k} U {+-(1,...,1)}` without duplicates.
    pub fn canonical_vectors(p: usize) -> Vec<StateVector> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for k in 0..p {
            for sign in [1.0, -1.0] {
                let mut e = vec![0.0; p];
                e[k] = sign;
                out.push(e);
            }
        }
        for sign in [1.0, -1.0] {
            let ones = vec![sign; p];
            if !out.contains(&ones) {
                out.push(ones);
            }
        }
        out.into_iter().map(|c| StateVector::new(c).expect("nonempty")).collect()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn base_points(&self) -> &[BasePoint] {
        &self.base_points
    }

    pub fn vectors(&self) -> &[StateVector] {
        &self.vectors
    }

    pub fn dimension(&self) -> usize {
        self.vectors[0].dimension()
    }

    /// Restricts the time axis, keeping base points and vectors.
    pub fn with_times(&self, times: Vec<f64>) -> Result<Self> {
        Self::new(times, self.base_points.clone(), self.vectors.clone())
    }

    pub fn with_vectors(&self, vectors: Vec<StateVector>) -> Result<Self> {
        Self::new(self.times.clone(), self.base_points.clone(), vectors)
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("grid serializes");
        hex::encode(Sha256::digest(bytes))
    }

    /// Index of `t` in `times`, if present exactly.
    pub fn time_index(&self, t: f64) -> Option<usize> {
        self.times.binary_search_by(|a| a.total_cmp(&t)).ok()
    }

    /// All `(t, s, t0)` with `t >= s >= t0`, ordered by `t0`, then `s`, then `t`.
    pub fn time_triples(&self) -> Vec<(f64, f64, f64)> {
        let times = &self.times;
        let mut out = Vec::new();
        for (k, &t0) in times.iter().enumerate() {
            for (j, &s) in times.iter().enumerate().skip(k) {
                for &t in &times[j..] {
                    out.push((t, s, t0));
                }
            }
        }
        out
    }

    /// `(x index, v index)` for every base point and vector.
    pub fn point_vector_indices(&self) -> Vec<(usize, usize)> {
        (0..self.base_points.len()).flat_map(|i| (0..self.vectors.len()).map(move |j| (i, j))).collect()
    }
}
