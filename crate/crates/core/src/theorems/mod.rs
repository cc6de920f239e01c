//! Constructive certificate transformations from the propositions and theorems, each
//! re-checked on the grid.

pub mod formulas;
mod runs;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::{CheckReport, SampleGrid};
use crate::certificates::{Certificate, Table, Witness};
use crate::error::{LabError, Result};
use crate::quadrature::QuadratureConfig;

pub use runs::{
    corollary_equivalence, prop_integral_decay_to_instability, prop_shift_necessity, prop_shift_sufficiency,
    remark_obs2, thm1_necessity, thm1_sufficiency, thm2_validate,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremId {
    RemarkObs2,
    PropIntegralDecay,
    PropShiftNecessity,
    PropShiftSufficiency,
    Thm1Necessity,
    Thm1Sufficiency,
    Thm2,
    Corollary,
}

impl TheoremId {
    pub const ALL: [TheoremId; 8] = [
        TheoremId::RemarkObs2,
        TheoremId::PropIntegralDecay,
        TheoremId::PropShiftNecessity,
        TheoremId::PropShiftSufficiency,
        TheoremId::Thm1Necessity,
        TheoremId::Thm1Sufficiency,
        TheoremId::Thm2,
        TheoremId::Corollary,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::RemarkObs2 => "remark-obs2",
            TheoremId::PropIntegralDecay => "prop-integral-decay",
            TheoremId::PropShiftNecessity => "prop-shift-necessity",
            TheoremId::PropShiftSufficiency => "prop-shift-sufficiency",
            TheoremId::Thm1Necessity => "thm1-necessity",
            TheoremId::Thm1Sufficiency => "thm1-sufficiency",
            TheoremId::Thm2 => "thm2",
            TheoremId::Corollary => "corollary",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| LabError::Precondition(format!("unknown theorem `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunVerdict {
    Pass,
    Fail,
    NoCertificate,
    InputInvalid,
}

/// A certificate or auxiliary function built by a construction formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub name: String,
    pub formula: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    /// Auxiliary functions that are not certificates, tabulated at the grid times.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<Table>,
    /// The formula fell below the codomain somewhere and was clamped.
    pub clamped: bool,
}

/// Record of one theorem validation. `reports` decide the verdict; `diagnostics` are
/// informational.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremRun {
    pub theorem: TheoremId,
    pub grid_hash: String,
    pub inputs: Vec<Certificate>,
    pub input_checks: Vec<CheckReport>,
    pub derived: Vec<Derived>,
    pub reports: Vec<CheckReport>,
    pub diagnostics: Vec<CheckReport>,
    pub quantities: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub properties: BTreeMap<String, String>,
    pub notes: Vec<String>,
    pub verdict: RunVerdict,
}

impl TheoremRun {
    fn new(theorem: TheoremId, grid: &SampleGrid, inputs: Vec<Certificate>) -> Self {
        Self {
            theorem,
            grid_hash: grid.hash(),
            inputs,
            input_checks: Vec::new(),
            derived: Vec::new(),
            reports: Vec::new(),
            diagnostics: Vec::new(),
            quantities: BTreeMap::new(),
            properties: BTreeMap::new(),
            notes: Vec::new(),
            verdict: RunVerdict::Pass,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == RunVerdict::Pass
    }

    pub fn derived(&self, name: &str) -> Option<&Derived> {
        self.derived.iter().find(|d| d.name == name)
    }

    pub fn report(&self, check: &str) -> Option<&CheckReport> {
        self.reports.iter().find(|r| r.check == check)
    }

    /// Smallest worst margin over the deciding reports.
    pub fn worst_margin(&self) -> f64 {
        self.reports.iter().map(|r| r.worst_margin).fold(f64::INFINITY, f64::min)
    }
}

/// Numerical settings shared by all runs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub quad: QuadratureConfig,
    pub margin_tol: f64,
    pub headroom: f64,
    pub growth_cap: f64,
    pub nu_candidates: Vec<f64>,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            quad: QuadratureConfig::default(),
            margin_tol: 1e-9,
            headroom: 0.01,
            growth_cap: 8.0,
            nu_candidates: (1..=16).map(|k| 0.25 * k as f64).collect(),
        }
    }
}

/// `max(floor, offset + factor * W(t))`, kept parametric when the shape allows. Returns the
/// witness and whether the floor fired.
pub(crate) fn affine_witness(
    w: &Witness,
    offset: f64,
    factor: f64,
    floor: f64,
    times: &[f64],
) -> Result<(Witness, bool)> {
    if let Witness::Parametric { scale, rate } = *w {
        if rate == 0.0 {
            let raw = offset + factor * scale;
            return Ok((Witness::constant(raw.max(floor)), raw < floor));
        }
        if offset == 0.0 && factor * scale >= floor {
            return Ok((Witness::exponential(factor * scale, rate), false));
        }
    }
    let mut clamped = false;
    let table = tabulate(times, |t| {
        w.value_at(t).map(|v| {
            let raw = offset + factor * v;
            clamped |= raw < floor;
            raw.max(floor)
        })
    })?;
    Ok((Witness::Tabulated(table), clamped))
}

/// Tabulates `g` at `times`, stopping at the first time where it is undefined or not finite.
pub(crate) fn tabulate(times: &[f64], mut g: impl FnMut(f64) -> Option<f64>) -> Result<Table> {
    let mut out_t = Vec::new();
    let mut out_v = Vec::new();
    for &t in times {
        match g(t) {
            Some(v) if v.is_finite() => {
                out_t.push(t);
                out_v.push(v);
            }
            _ => break,
        }
    }
    if out_t.is_empty() {
        return Err(LabError::Precondition("derived function is undefined at the first grid time".into()));
    }
    Table::new(out_t, out_v)
}

#[cfg(test)]
mod tests;
