use rayon::prelude::*;

use crate::algebra::{CheckReport, SampleGrid, SampleIndex, SampleMargin, SkewEvolutionSemiflow};
use crate::certificates::{upper_witness, Clamp, Witness};
use crate::error::{LabError, Result};
use crate::quadrature::{datko_log_ratios, QuadratureConfig};

/// Witness `M` for `int_{t0}^{t} ||Phi(tau, t0, x) v|| dtau <= M(t) ||Phi(t, t0, x) v||`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralInstabilityCertificate {
    pub m: Witness,
    /// Quadrature settings used when the certificate was fitted.
    pub quad: Option<QuadratureConfig>,
}

impl IntegralInstabilityCertificate {
    pub fn new(m: Witness) -> Result<Self> {
        let cert = Self { m, quad: None };
        cert.validate()?;
        Ok(cert)
    }

    pub fn validate(&self) -> Result<()> {
        self.m.validate("M", 1.0, false)
    }
}

struct DatkoRow {
    x: usize,
    v: usize,
    t0_idx: usize,
    /// `ln D` at `times[t0_idx + k]`; `-inf` at `k = 0`.
    log_ratios: Vec<f64>,
}

fn datko_rows(
    xi: &SkewEvolutionSemiflow,
    grid: &SampleGrid,
    cfg: &QuadratureConfig,
) -> Result<Vec<DatkoRow>> {
    cfg.validate()?;
    let times = grid.times();
    let jobs: Vec<(usize, usize, usize)> = grid
        .point_vector_indices()
        .into_iter()
        .flat_map(|(x, v)| (0..times.len()).map(move |k| (x, v, k)))
        .collect();
    jobs.par_iter()
        .map(|&(x_idx, v_idx, t0_idx)| {
            let x = &grid.base_points()[x_idx];
            let v = &grid.vectors()[v_idx];
            let log_ratios = datko_log_ratios(xi, &times[t0_idx..], x, v, cfg).map_err(|e| match e {
                LabError::DepthExhausted { .. } => LabError::AtSample {
                    sample: format!("t0 = {}, x = {x}, v = {:?}", times[t0_idx], v.components()),
                    source: Box::new(e),
                },
                other => other,
            })?;
            Ok(DatkoRow { x: x_idx, v: v_idx, t0_idx, log_ratios })
        })
        .collect()
}

/// `M(t) = max(1, (1 + h) max D(t, t0, x, v))` over grid samples with `t0 <= t`, where `D` is the
/// Datko ratio.
pub fn estimate_integral_instability(
    xi: &SkewEvolutionSemiflow,
    grid: &SampleGrid,
    cfg: &QuadratureConfig,
    headroom: f64,
) -> Result<IntegralInstabilityCertificate> {
    if !xi.strongly_measurable() {
        return Err(LabError::Precondition(
            "integral instability needs a strongly measurable cocycle".into(),
        ));
    }
    if !(headroom >= 0.0) || !headroom.is_finite() {
        return Err(LabError::Precondition(format!("headroom {headroom} must be >= 0")));
    }
    let times = grid.times();
    let mut req = vec![f64::NEG_INFINITY; times.len()];
    for row in datko_rows(xi, grid, cfg)? {
        for (k, &l) in row.log_ratios.iter().enumerate() {
            let i = row.t0_idx + k;
            req[i] = req[i].max(l);
        }
    }
    let mut cert =
        IntegralInstabilityCertificate::new(upper_witness(times, &req, headroom, Clamp::AtLeastOne)?)?;
    cert.quad = Some(*cfg);
    Ok(cert)
}

/// Margin `ln M(t) - ln D(t, t0, x, v)`; `+inf` where the integral vanishes.
pub fn integral_instability_margins(
    xi: &SkewEvolutionSemiflow,
    cert: &IntegralInstabilityCertificate,
    grid: &SampleGrid,
    cfg: &QuadratureConfig,
) -> Result<Vec<SampleMargin>> {
    cert.validate()?;
    let times = grid.times();
    let mut out = Vec::new();
    for row in datko_rows(xi, grid, cfg)? {
        for (k, &l) in row.log_ratios.iter().enumerate() {
            let i = row.t0_idx + k;
            let margin = match cert.m.ln_at(times[i]) {
                Some(ln_m) => ln_m - l,
                None => f64::NEG_INFINITY,
            };
            let sample = SampleIndex { t: times[i], s: None, t0: times[row.t0_idx], x: row.x, v: row.v };
            out.push(SampleMargin::new(sample, margin));
        }
    }
    Ok(out)
}

pub fn check_integral_instability(
    xi: &SkewEvolutionSemiflow,
    cert: &IntegralInstabilityCertificate,
    grid: &SampleGrid,
    cfg: &QuadratureConfig,
    tol: f64,
) -> Result<CheckReport> {
    let margins = integral_instability_margins(xi, cert, grid, cfg)?;
    Ok(CheckReport::from_margins("integral_instability", grid, tol, &margins))
}
