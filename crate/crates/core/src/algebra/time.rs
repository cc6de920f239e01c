use crate::error::{LabError, Result};

/// A pair `(t, s)` in the triangle domain `t >= s >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimePair {
    t: f64,
    s: f64,
}

impl TimePair {
    pub fn new(t: f64, s: f64) -> Result<Self> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(LabError::NegativeTime(s));
        }
        if !t.is_finite() {
            return Err(LabError::NegativeTime(t));
        }
        if t < s {
            return Err(LabError::Domain { t, s });
        }
        Ok(Self { t, s })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Elapsed time `t - s`, always nonnegative.
    pub fn elapsed(&self) -> f64 {
        self.t - self.s
    }

    pub fn is_diagonal(&self) -> bool {
        self.t == self.s
    }
}
