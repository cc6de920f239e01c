use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{CheckReport, SampleGrid, SampleMargin, SkewEvolutionSemiflow};
use crate::certificates::trajectory::{trajectory_rows, TrajectoryRow};
use crate::certificates::{upper_witness, Clamp, Witness};
use crate::error::{LabError, Result};
use crate::numeric::least_squares;

/// Witness `(N, nu)` for `N(t) e^{-nu (t - s)} ||Phi(t, t0, x) v|| >= ||Phi(s, t0, x) v||`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpInstabilityCertificate {
    pub n: Witness,
    pub nu: f64,
    /// Present when `nu` was chosen by the growth-capped selection rule.
    pub selection: Option<Selection>,
}

impl ExpInstabilityCertificate {
    pub fn new(n: Witness, nu: f64) -> Result<Self> {
        let cert = Self { n, nu, selection: None };
        cert.validate()?;
        Ok(cert)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            return Err(LabError::InvalidCertificate(format!("nu = {} must be positive", self.nu)));
        }
        self.n.validate("N", 1.0, true)
    }
}

/// Least-squares envelope `ln N_nu(t) ~ intercept + slope t` of one candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuFit {
    pub nu: f64,
    pub intercept: f64,
    pub slope: f64,
    /// `nu - slope`: the exponential rate left after the witness absorbs its own growth.
    pub net_rate: f64,
    pub admissible: bool,
}

/// Audit record of the selection that produced a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub rule: String,
    pub growth_cap: f64,
    pub intercept: f64,
    pub slope: f64,
    pub net_rate: f64,
}

pub const SELECTION_RULE: &str =
    "max net_rate = nu - slope over candidates with slope <= growth_cap and net_rate > 0";

#[derive(Debug, Clone, PartialEq)]
pub enum ExpEstimate {
    Certified {
        cert: ExpInstabilityCertificate,
        fits: Vec<NuFit>,
    },
    /// No candidate is witnessed on this grid.
    NoCertificate {
        fits: Vec<NuFit>,
    },
}

impl ExpEstimate {
    pub fn certificate(&self) -> Option<&ExpInstabilityCertificate> {
        match self {
            ExpEstimate::Certified { cert, .. } => Some(cert),
            ExpEstimate::NoCertificate { .. } => None,
        }
    }

    pub fn fits(&self) -> &[NuFit] {
        match self {
            ExpEstimate::Certified { fits, .. } | ExpEstimate::NoCertificate { fits } => fits,
        }
    }
}

/// Which `s` values enter the check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleScope {
    All,
    /// Only `s = t0`.
    InitialTime,
}

#[inline]
fn requirement(nu: f64, t: f64, s: f64, l_s: f64, l_t: f64) -> f64 {
    nu * (t - s) + l_s - l_t
}

/// `ln N_nu(t_i)`: the largest requirement over all `s, t0, x, v` for each grid time.
fn required_log_witness(grid: &SampleGrid, rows: &[TrajectoryRow], nu: f64) -> Result<Vec<f64>> {
    let times = grid.times();
    let mut req = vec![f64::NEG_INFINITY; times.len()];
    for row in rows {
        if row.log_norms.contains(&f64::NEG_INFINITY) {
            return Err(LabError::ModelDegeneracy("trajectory norm vanished".into()));
        }
        for kt in 0..row.log_norms.len() {
            let t = times[row.t0_idx + kt];
            let l_t = row.log_norms[kt];
            let worst = (0..=kt)
                .map(|ks| requirement(nu, t, times[row.t0_idx + ks], row.log_norms[ks], l_t))
                .fold(f64::NEG_INFINITY, f64::max);
            let i = row.t0_idx + kt;
            req[i] = req[i].max(worst);
        }
    }
    Ok(req)
}

fn better(a: &NuFit, b: &NuFit) -> bool {
    let scale = 1e-9 * a.net_rate.abs().max(b.net_rate.abs()).max(1.0);
    if (a.net_rate - b.net_rate).abs() > scale {
        return a.net_rate > b.net_rate;
    }
    if a.slope != b.slope {
        return a.slope < b.slope;
    }
    a.nu < b.nu
}

/// Fits `(N, nu)` over the candidates. For each `nu` the required witness
/// `N_nu(t) = max e^{nu (t - s)} ||Phi(s, t0, x) v|| / ||Phi(t, t0, x) v||` gets a least-squares
/// envelope `a + b t` in log scale. A candidate is admissible when `b <= growth_cap` and
/// `nu - b > 0`; the one with the largest `nu - b` wins, ties going to the flatter witness.
/// `N = (1 + headroom) N_nu` is tabulated at the grid times.
pub fn estimate_exp_instability(
    xi: &SkewEvolutionSemiflow,
    grid: &SampleGrid,
    nu_candidates: &[f64],
    growth_cap: f64,
    headroom: f64,
) -> Result<ExpEstimate> {
    if nu_candidates.is_empty() {
        return Err(LabError::Precondition("nu_candidates must be nonempty".into()));
    }
    if nu_candidates.iter().any(|nu| !(*nu > 0.0) || !nu.is_finite()) {
        return Err(LabError::Precondition("nu candidates must be positive".into()));
    }
    if !(headroom >= 0.0) || !headroom.is_finite() {
        return Err(LabError::Precondition(format!("headroom {headroom} must be >= 0")));
    }
    if growth_cap.is_nan() {
        return Err(LabError::Precondition("growth_cap is NaN".into()));
    }
    let rows = trajectory_rows(xi, grid)?;
    let times = grid.times();
    let fitted: Vec<(NuFit, Vec<f64>)> = nu_candidates
        .par_iter()
        .map(|&nu| {
            let req = required_log_witness(grid, &rows, nu)?;
            let (intercept, slope) = least_squares(times, &req);
            let net_rate = nu - slope;
            let admissible = slope <= growth_cap && net_rate > 0.0 && net_rate.is_finite();
            Ok((NuFit { nu, intercept, slope, net_rate, admissible }, req))
        })
        .collect::<Result<_>>()?;
    let fits: Vec<NuFit> = fitted.iter().map(|(f, _)| *f).collect();
    let best =
        fitted.iter().filter(|(f, _)| f.admissible).fold(None::<&(NuFit, Vec<f64>)>, |acc, cand| match acc {
            Some(cur) if !better(&cand.0, &cur.0) => Some(cur),
            _ => Some(cand),
        });
    let Some((fit, req)) = best else {
        return Ok(ExpEstimate::NoCertificate { fits });
    };
    let n = upper_witness(times, req, headroom, Clamp::AboveOne)?;
    let mut cert = ExpInstabilityCertificate::new(n, fit.nu)?;
    cert.selection = Some(Selection {
        rule: SELECTION_RULE.to_string(),
        growth_cap,
        intercept: fit.intercept,
        slope: fit.slope,
        net_rate: fit.net_rate,
    });
    Ok(ExpEstimate::Certified { cert, fits })
}

/// Margin `ln N(t) - nu (t - s) + ln ||Phi(t, t0, x) v|| - ln ||Phi(s, t0, x) v||`.
pub fn exp_instability_margins(
    xi: &SkewEvolutionSemiflow,
    cert: &ExpInstabilityCertificate,
    grid: &SampleGrid,
    scope: SampleScope,
) -> Result<Vec<SampleMargin>> {
    cert.validate()?;
    let times = grid.times();
    let rows = trajectory_rows(xi, grid)?;
    let chunks: Vec<Vec<SampleMargin>> = rows
        .par_iter()
        .map(|row| {
            let mut out = Vec::new();
            for kt in 0..row.log_norms.len() {
                let i = row.t0_idx + kt;
                let t = times[i];
                let ln_n = cert.n.ln_at(t);
                let last_s = match scope {
                    SampleScope::All => kt,
                    SampleScope::InitialTime => 0,
                };
                for ks in 0..=last_s {
                    let j = row.t0_idx + ks;
                    let margin = match ln_n {
                        Some(ln_n) => {
                            ln_n - requirement(cert.nu, t, times[j], row.log_norms[ks], row.log_norms[kt])
                        }
                        None => f64::NEG_INFINITY,
                    };
                    out.push(SampleMargin::new(row.sample(grid, i, Some(j)), margin));
                }
            }
            out
        })
        .collect();
    Ok(chunks.into_iter().flatten().collect())
}

pub fn check_exp_instability(
    xi: &SkewEvolutionSemiflow,
    cert: &ExpInstabilityCertificate,
    grid: &SampleGrid,
    tol: f64,
) -> Result<CheckReport> {
    check_exp_instability_scoped(xi, cert, grid, tol, SampleScope::All)
}

pub fn check_exp_instability_scoped(
    xi: &SkewEvolutionSemiflow,
    cert: &ExpInstabilityCertificate,
    grid: &SampleGrid,
    tol: f64,
    scope: SampleScope,
) -> Result<CheckReport> {
    let margins = exp_instability_margins(xi, cert, grid, scope)?;
    let name = match scope {
        SampleScope::All => "exp_instability",
        SampleScope::InitialTime => "exp_instability[s=t0]",
    };
    Ok(CheckReport::from_margins(name, grid, tol, &margins))
}
