use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::algebra::{BasePoint, SampleGrid, StateVector};
use crate::numeric::extended_f64;

/// A sample identified by its times and by indices into the grid's base points and vectors.
/// `s` is absent for inequalities that involve only `(t, t0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleIndex {
    pub t: f64,
    pub s: Option<f64>,
    pub t0: f64,
    pub x: usize,
    pub v: usize,
}

/// One evaluated inequality: its log-margin, or `None` when the sample was skipped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMargin {
    pub sample: SampleIndex,
    pub margin: Option<f64>,
}

impl SampleMargin {
    pub fn new(sample: SampleIndex, margin: f64) -> Self {
        Self { sample, margin: Some(margin) }
    }

    pub fn skipped(sample: SampleIndex) -> Self {
        Self { sample, margin: None }
    }
}

/// Fully resolved sample tuple, as written into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleTuple {
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    pub t0: f64,
    pub x: BasePoint,
    pub v: StateVector,
}

impl SampleTuple {
    pub fn resolve(grid: &SampleGrid, idx: &SampleIndex) -> Self {
        Self {
            t: idx.t,
            s: idx.s,
            t0: idx.t0,
            x: grid.base_points()[idx.x],
            v: grid.vectors()[idx.v].clone(),
        }
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.t
            .total_cmp(&other.t)
            .then_with(|| match (self.s, other.s) {
                (Some(a), Some(b)) => a.total_cmp(&b),
                (a, b) => a.is_some().cmp(&b.is_some()),
            })
            .then(self.t0.total_cmp(&other.t0))
            .then_with(|| self.x.canonical_cmp(&other.x))
            .then_with(|| self.v.canonical_cmp(&other.v))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub sample: SampleTuple,
    #[serde(with = "extended_f64")]
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Outcome of evaluating one inequality over a grid. A `Pass` means no counterexample on
/// this grid, never more.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub grid_hash: String,
    pub tol: f64,
    pub samples_checked: usize,
    #[serde(default)]
    pub samples_skipped: usize,
    #[serde(with = "extended_f64")]
    pub worst_margin: f64,
    pub counterexamples: Vec<Counterexample>,
    pub verdict: Verdict,
}

impl CheckReport {
    /// Reduces per-sample margins: minimum margin, counterexamples with `margin < -tol`
    /// sorted lexicographically by tuple.
    pub fn from_margins(
        check: impl Into<String>,
        grid: &SampleGrid,
        tol: f64,
        margins: &[SampleMargin],
    ) -> Self {
        let mut worst = f64::INFINITY;
        let mut checked = 0;
        let mut skipped = 0;
        let mut counterexamples = Vec::new();
        for m in margins {
            match m.margin {
                None => skipped += 1,
                Some(margin) => {
                    checked += 1;
                    // NaN margins count as violations
                    if !(margin >= worst) {
                        worst = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
                    }
                    if !(margin >= -tol) {
                        counterexamples.push(Counterexample {
                            sample: SampleTuple::resolve(grid, &m.sample),
                            margin: if margin.is_nan() { f64::NEG_INFINITY } else { margin },
                        });
                    }
                }
            }
        }
        counterexamples.sort_by(|a, b| a.sample.canonical_cmp(&b.sample));
        let verdict = if counterexamples.is_empty() { Verdict::Pass } else { Verdict::Fail };
        Self {
            check: check.into(),
            grid_hash: grid.hash(),
            tol,
            samples_checked: checked,
            samples_skipped: skipped,
            worst_margin: worst,
            counterexamples,
            verdict,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}
