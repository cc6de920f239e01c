use crate::algebra::{CheckReport, SampleGrid, SampleMargin, SkewEvolutionSemiflow};
use crate::certificates::trajectory::{trajectory_rows, TrajectoryRow};
use crate::certificates::{upper_witness, Clamp, Witness};
use crate::error::{LabError, Result};

/// Witness `N` for `N(t) ||Phi(t, t0, x) v|| >= ||v||`.
#[derive(Debug, Clone, PartialEq)]
pub struct InstabilityCertificate {
    pub n: Witness,
}

impl InstabilityCertificate {
    pub fn new(n: Witness) -> Result<Self> {
        let cert = Self { n };
        cert.validate()?;
        Ok(cert)
    }

    pub fn validate(&self) -> Result<()> {
        self.n.validate("N", 1.0, true)
    }
}

/// `ln ||v|| - ln ||Phi(t, t0, x) v||`, the log of the smallest admissible `N(t)`.
fn requirement(row: &TrajectoryRow, k: usize) -> Result<f64> {
    let l = row.log_norms[k];
    if l == f64::NEG_INFINITY {
        return Err(LabError::ModelDegeneracy("trajectory norm vanished".into()));
    }
    Ok(row.log_v - l)
}

/// `N(t) = max(1 + h, (1 + h) max ||v|| / ||Phi(t, t0, x) v||)` over grid samples with `t0 <= t`.
pub fn estimate_instability(
    xi: &SkewEvolutionSemiflow,
    grid: &SampleGrid,
    headroom: f64,
) -> Result<InstabilityCertificate> {
    if !(headroom >= 0.0) || !headroom.is_finite() {
        return Err(LabError::Precondition(format!("headroom {headroom} must be >= 0")));
    }
    let times = grid.times();
    let mut req = vec![f64::NEG_INFINITY; times.len()];
    for row in trajectory_rows(xi, grid)? {
        for k in 0..row.log_norms.len() {
            let i = row.t0_idx + k;
            req[i] = req[i].max(requirement(&row, k)?);
        }
    }
    InstabilityCertificate::new(upper_witness(times, &req, headroom, Clamp::AboveOne)?)
}

/// Margin `ln N(t) + ln ||Phi(t, t0, x) v|| - ln ||v||` for every grid sample.
pub fn instability_margins(
    xi: &SkewEvolutionSemiflow,
    cert: &InstabilityCertificate,
    grid: &SampleGrid,
) -> Result<Vec<SampleMargin>> {
    cert.validate()?;
    let times = grid.times();
    let mut out = Vec::new();
    for row in trajectory_rows(xi, grid)? {
        for k in 0..row.log_norms.len() {
            let i = row.t0_idx + k;
            let margin = match cert.n.ln_at(times[i]) {
                Some(ln_n) => ln_n - (row.log_v - row.log_norms[k]),
                None => f64::NEG_INFINITY,
            };
            out.push(SampleMargin::new(row.sample(grid, i, None), margin));
        }
    }
    Ok(out)
}

pub fn check_instability(
    xi: &SkewEvolutionSemiflow,
    cert: &InstabilityCertificate,
    grid: &SampleGrid,
    tol: f64,
) -> Result<CheckReport> {
    let margins = instability_margins(xi, cert, grid)?;
    Ok(CheckReport::from_margins("instability", grid, tol, &margins))
}
