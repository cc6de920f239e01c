use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// A function tabulated at sorted times and extended by steps: the value at `t` is the
/// value at the nearest tabulated time `>= t`. Times past the last entry are uncovered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl Table {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let table = Self { times, values };
        table.validate_shape()?;
        Ok(table)
    }

    pub fn validate_shape(&self) -> Result<()> {
        if self.times.is_empty() {
            return Err(LabError::InvalidCertificate("empty table".into()));
        }
        if self.times.len() != self.values.len() {
            return Err(LabError::InvalidCertificate(format!(
                "table has {} times but {} values",
                self.times.len(),
                self.values.len()
            )));
        }
        if self.times.iter().any(|t| !(*t >= 0.0) || !t.is_finite())
            || self.times.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(LabError::InvalidCertificate(
                "table times must be nonnegative and strictly increasing".into(),
            ));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(LabError::InvalidCertificate("table values must be finite".into()));
        }
        Ok(())
    }

    pub fn lookup(&self, t: f64) -> Option<f64> {
        let i = self.times.partition_point(|&a| a < t);
        self.values.get(i).copied()
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().expect("validated table is nonempty")
    }
}

/// A nonuniform witness `[0, inf) -> [1, inf)` such as `N(t)` or `M(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Witness {
    /// `scale * e^{rate t}`
    Parametric {
        scale: f64,
        rate: f64,
    },
    Tabulated(Table),
}

impl Witness {
    pub fn constant(value: f64) -> Self {
        Witness::Parametric { scale: value, rate: 0.0 }
    }

    pub fn exponential(scale: f64, rate: f64) -> Self {
        Witness::Parametric { scale, rate }
    }

    pub fn form(&self) -> &'static str {
        match self {
            Witness::Parametric { .. } => "parametric",
            Witness::Tabulated(_) => "tabulated",
        }
    }

    /// `ln W(t)`, or `None` when `t` lies past the table.
    pub fn ln_at(&self, t: f64) -> Option<f64> {
        match self {
            Witness::Parametric { scale, rate } => Some(scale.ln() + rate * t),
            Witness::Tabulated(table) => table.lookup(t).map(f64::ln),
        }
    }

    pub fn value_at(&self, t: f64) -> Option<f64> {
        match self {
            Witness::Parametric { scale, rate } => Some(scale * (rate * t).exp()),
            Witness::Tabulated(table) => table.lookup(t),
        }
    }

    /// Checks the codomain: tabulated values `> floor` (or `>= floor` when not strict);
    /// parametric forms need `scale >= floor`, `rate >= 0`, and when strict not both equalities.
    pub fn validate(&self, name: &str, floor: f64, strict: bool) -> Result<()> {
        match self {
            Witness::Parametric { scale, rate } => {
                // `scale = floor` is admitted only when growth lifts W above it for t > 0
                let flat_at_floor = strict && *scale == floor && *rate == 0.0;
                if !scale.is_finite() || !rate.is_finite() || *scale < floor || *rate < 0.0 || flat_at_floor {
                    return Err(LabError::InvalidCertificate(format!(
                        "{name}(t) = {scale} e^{{{rate} t}} leaves [{floor}, inf)"
                    )));
                }
            }
            Witness::Tabulated(table) => {
                table.validate_shape()?;
                let bad =
                    table.values.iter().position(|&v| if strict { !(v > floor) } else { !(v >= floor) });
                if let Some(i) = bad {
                    return Err(LabError::InvalidCertificate(format!(
                        "{name}({}) = {} is outside the codomain",
                        table.times[i], table.values[i]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Evaluates at each time, producing a table.
    pub fn tabulate(&self, times: &[f64]) -> Option<Table> {
        let values = times.iter().map(|&t| self.value_at(t)).collect::<Option<Vec<_>>>()?;
        Some(Table { times: times.to_vec(), values })
    }
}
