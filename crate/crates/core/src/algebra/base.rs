use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// A point of the metric base space.
///
/// `ShiftedGenerator { n, sigma }` stands for the function `x_n^sigma(t) = x_n(t + sigma)`.
/// Only generators are represented; limit points of their closure never arise along the
/// built-in semiflows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasePoint {
    Trivial { value: f64 },
    ShiftedGenerator { n: u32, sigma: f64 },
}

impl BasePoint {
    pub fn trivial(value: f64) -> Self {
        BasePoint::Trivial { value }
    }

    pub fn generator(n: u32, sigma: f64) -> Self {
        BasePoint::ShiftedGenerator { n, sigma }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            BasePoint::Trivial { value } if !(value >= 0.0) || !value.is_finite() => {
                Err(LabError::InvalidBasePoint(format!("trivial coordinate {value} is not in R+")))
            }
            BasePoint::ShiftedGenerator { n: 0, .. } => {
                Err(LabError::InvalidBasePoint("generator index must be >= 1".into()))
            }
            BasePoint::ShiftedGenerator { sigma, .. } if !(sigma >= 0.0) || !sigma.is_finite() => {
                Err(LabError::InvalidBasePoint(format!("shift {sigma} must be >= 0")))
            }
            _ => Ok(()),
        }
    }

    /// Total order used to canonicalize counterexample lists.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (BasePoint::Trivial { value: a }, BasePoint::Trivial { value: b }) => a.total_cmp(b),
            (BasePoint::Trivial { .. }, _) => Ordering::Less,
            (_, BasePoint::Trivial { .. }) => Ordering::Greater,
            (
                BasePoint::ShiftedGenerator { n: n1, sigma: s1 },
                BasePoint::ShiftedGenerator { n: n2, sigma: s2 },
            ) => n1.cmp(n2).then(s1.total_cmp(s2)),
        }
    }
}

impl fmt::Display for BasePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasePoint::Trivial { value } => write!(f, "trivial({value})"),
            BasePoint::ShiftedGenerator { n, sigma } => write!(f, "x_{n}^{sigma}"),
        }
    }
}
