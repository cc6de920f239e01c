use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Norm placed on `V = R^p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormChoice {
    /// `|v_1| + ... + |v_p|`
    #[default]
    SumAbs,
    Euclid,
    MaxAbs,
}

/// An element of `R^p`, `p >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(LabError::DimensionMismatch { expected: 1, found: 0 });
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(LabError::InvalidGrid("vector with non-finite components".into()));
        }
        Ok(Self(components))
    }

    /// Skips validation; used for operator outputs, which may overflow.
    pub(crate) fn from_raw(components: Vec<f64>) -> Self {
        Self(components)
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| *c == 0.0)
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self(self.0.iter().map(|c| lambda * c).collect())
    }

    pub fn norm(&self, norm: NormChoice) -> f64 {
        match norm {
            NormChoice::SumAbs => self.0.iter().map(|c| c.abs()).sum(),
            NormChoice::Euclid => self.0.iter().map(|c| c * c).sum::<f64>().sqrt(),
            NormChoice::MaxAbs => self.0.iter().fold(0.0, |m, c| m.max(c.abs())),
        }
    }

    /// `ln ||v||` computed from `ln |v_k|`, so it agrees bit-for-bit with
    /// [`log_norm_diagonal`] applied with zero multipliers.
    pub fn log_norm(&self, norm: NormChoice) -> f64 {
        log_norm_of_terms(norm, self.0.iter().map(|c| c.abs().ln()))
    }

    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

/// `ln || diag(e^{m_k}) v ||` evaluated without leaving log-space.
pub fn log_norm_diagonal(norm: NormChoice, log_multipliers: &[f64], v: &StateVector) -> f64 {
    log_norm_of_terms(norm, log_multipliers.iter().zip(v.components()).map(|(m, c)| m + c.abs().ln()))
}

/// Combines per-component log-magnitudes `a_k = ln |w_k|` into `ln ||w||`.
/// Zero components contribute `a_k = -inf` and drop out.
fn log_norm_of_terms(norm: NormChoice, terms: impl Iterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.filter(|a| *a > f64::NEG_INFINITY).collect();
    if terms.is_empty() {
        return f64::NEG_INFINITY;
    }
    let peak = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    match norm {
        NormChoice::MaxAbs => peak,
        NormChoice::SumAbs => {
            if terms.len() == 1 {
                return peak;
            }
            peak + terms.iter().map(|a| (a - peak).exp()).sum::<f64>().ln()
        }
        NormChoice::Euclid => {
            if terms.len() == 1 {
                return peak;
            }
            peak + 0.5 * terms.iter().map(|a| (2.0 * (a - peak)).exp()).sum::<f64>().ln()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms() {
        let v = StateVector::new(vec![3.0, -4.0]).unwrap();
        assert_eq!(v.norm(NormChoice::SumAbs), 7.0);
        assert_eq!(v.norm(NormChoice::Euclid), 5.0);
        assert_eq!(v.norm(NormChoice::MaxAbs), 4.0);
        for n in [NormChoice::SumAbs, NormChoice::Euclid, NormChoice::MaxAbs] {
            assert!((v.log_norm(n) - v.norm(n).ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_vector_has_log_norm_minus_infinity() {
        let z = StateVector::new(vec![0.0, 0.0]).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.log_norm(NormChoice::SumAbs), f64::NEG_INFINITY);
    }

    #[test]
    fn empty_vector_rejected() {
        assert!(StateVector::new(vec![]).is_err());
    }

    #[test]
    fn diagonal_log_norm_matches_linear() {
        let v = StateVector::new(vec![2.0, -3.0, 0.5]).unwrap();
        let m = [0.3_f64, -1.2, 2.0];
        let w: Vec<f64> = m.iter().zip(v.components()).map(|(a, c)| a.exp() * c).collect();
        let w = StateVector::new(w).unwrap();
        for n in [NormChoice::SumAbs, NormChoice::Euclid, NormChoice::MaxAbs] {
            let lhs = log_norm_diagonal(n, &m, &v);
            assert!((lhs - w.norm(n).ln()).abs() < 1e-14, "{n:?}");
        }
    }

    #[test]
    fn log_norm_survives_huge_exponents() {
        let v = StateVector::new(vec![1.0, 1.0]).unwrap();
        let l = log_norm_diagonal(NormChoice::SumAbs, &[1000.0, 1000.0], &v);
        assert!((l - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }
}
