use crate::algebra::{CheckReport, SampleGrid, SampleIndex, SampleMargin, SkewEvolutionSemiflow};
use crate::certificates::witness::Table;
use crate::error::{LabError, Result};
use crate::numeric::exp_floor;
use crate::quadrature::{Kernel, KernelPiece};
use rayon::prelude::*;

/// Witness `f` for `||Phi(t + t0, t0, x) v|| >= f(t) ||v||`.
#[derive(Debug, Clone, PartialEq)]
pub enum DecayCertificate {
    /// `f(t) = e^{-omega t} / n_tilde`
    Parametric {
        n_tilde: f64,
        omega: f64,
    },
    Tabulated {
        table: Table,
    },
    /// Constant `f`. Admissible as a kernel, but not in the decreasing-to-zero class.
    Constant {
        value: f64,
    },
}

impl DecayCertificate {
    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let cert = DecayCertificate::Tabulated { table: Table::new(times, values)? };
        cert.validate()?;
        Ok(cert)
    }

    pub fn form(&self) -> &'static str {
        match self {
            DecayCertificate::Parametric { .. } => "parametric",
            DecayCertificate::Tabulated { .. } => "tabulated",
            DecayCertificate::Constant { .. } => "constant",
        }
    }

    /// Shape checks: positive values, nonincreasing tables, `n_tilde >= 1`, `omega > 0`.
    pub fn validate(&self) -> Result<()> {
        match self {
            DecayCertificate::Parametric { n_tilde, omega } => {
                if !(*n_tilde >= 1.0) || !n_tilde.is_finite() || !(*omega > 0.0) || !omega.is_finite() {
                    return Err(LabError::InvalidCertificate(format!(
                        "parametric decay needs n_tilde >= 1 and omega > 0 (got {n_tilde}, {omega})"
                    )));
                }
            }
            DecayCertificate::Tabulated { table } => {
                table.validate_shape()?;
                if table.values.iter().any(|v| !(*v > 0.0)) {
                    return Err(LabError::InvalidCertificate("decay values must be positive".into()));
                }
                if table.values.windows(2).any(|w| w[1] > w[0]) {
                    return Err(LabError::InvalidCertificate("decay table must be nonincreasing".into()));
                }
            }
            DecayCertificate::Constant { value } => {
                if !(*value > 0.0) || !value.is_finite() {
                    return Err(LabError::InvalidCertificate("constant decay must be positive".into()));
                }
            }
        }
        Ok(())
    }

    /// Membership in the class of decreasing functions with limit 0. Tables cannot show the
    /// limit and are accepted; constants are rejected.
    pub fn check_class(&self) -> Result<()> {
        self.validate()?;
        match self {
            DecayCertificate::Constant { value } => {
                Err(LabError::InvalidCertificate(format!("f = {value} is constant, so lim f(t) = 0 fails")))
            }
            _ => Ok(()),
        }
    }

    pub fn ln_at(&self, u: f64) -> Option<f64> {
        match self {
            DecayCertificate::Parametric { n_tilde, omega } => Some(-omega * u - n_tilde.ln()),
            DecayCertificate::Tabulated { table } => table.lookup(u).map(f64::ln),
            DecayCertificate::Constant { value } => Some(value.ln()),
        }
    }

    pub fn value_at(&self, u: f64) -> Option<f64> {
        match self {
            DecayCertificate::Parametric { n_tilde, omega } => Some((-omega * u).exp() / n_tilde),
            DecayCertificate::Tabulated { table } => table.lookup(u),
            DecayCertificate::Constant { value } => Some(*value),
        }
    }
}

impl Kernel for DecayCertificate {
    fn pieces(&self, length: f64) -> Result<Vec<KernelPiece>> {
        match self {
            DecayCertificate::Parametric { n_tilde, omega } => {
                Ok(vec![KernelPiece { start: 0.0, end: length, scale: 1.0 / n_tilde, rate: *omega }])
            }
            DecayCertificate::Constant { value } => {
                Ok(vec![KernelPiece { start: 0.0, end: length, scale: *value, rate: 0.0 }])
            }
            DecayCertificate::Tabulated { table } => {
                if table.last_time() < length {
                    return Err(LabError::Precondition(format!(
                        "tabulated decay ends at {} < {length}",
                        table.last_time()
                    )));
                }
                let mut out = Vec::new();
                let mut start = 0.0;
                for (&t, &value) in table.times.iter().zip(&table.values) {
                    if t <= start && !(out.is_empty() && t == 0.0) {
                        continue;
                    }
                    let end = t.min(length);
                    if end > start {
                        out.push(KernelPiece { start, end, scale: value, rate: 0.0 });
                    }
                    start = end;
                    if start >= length {
                        break;
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Log growth ratios `ln(||Phi(u + t0, t0, x) v|| / ||v||)` for all `u, t0` in the grid times,
/// tagged with the index of `u`.
fn decay_ratios(xi: &SkewEvolutionSemiflow, grid: &SampleGrid) -> Result<Vec<(SampleIndex, usize, f64)>> {
    let times = grid.times();
    let jobs: Vec<(usize, usize, usize)> = grid
        .point_vector_indices()
        .into_iter()
        .flat_map(|(x, v)| (0..times.len()).map(move |k| (x, v, k)))
        .collect();
    let rows: Vec<Vec<(SampleIndex, usize, f64)>> = jobs
        .par_iter()
        .map(|&(x_idx, v_idx, t0_idx)| -> Result<Vec<_>> {
            let x = &grid.base_points()[x_idx];
            let v = &grid.vectors()[v_idx];
            xi.check_inputs(x, Some(v))?;
            let t0 = times[t0_idx];
            let log_v = v.log_norm(xi.norm());
            times
                .iter()
                .enumerate()
                .map(|(u_idx, &u)| {
                    let t = u + t0;
                    let ratio = xi.log_norm(t, t0, x, v)? - log_v;
                    Ok((SampleIndex { t, s: None, t0, x: x_idx, v: v_idx }, u_idx, ratio))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// `ln f(u)` at each grid time: the smallest log growth ratio over `(t0, x, v)`, followed by
/// a running minimum in `u`.
pub(crate) fn log_decay_profile(xi: &SkewEvolutionSemiflow, grid: &SampleGrid) -> Result<Vec<f64>> {
    let mut lowest = vec![f64::INFINITY; grid.times().len()];
    for (_, u_idx, ratio) in decay_ratios(xi, grid)? {
        lowest[u_idx] = lowest[u_idx].min(ratio);
    }
    let mut running = f64::INFINITY;
    for l in &mut lowest {
        running = running.min(*l);
        *l = running;
    }
    Ok(lowest)
}

/// Fits `f(u) = min ||Phi(u + t0, t0, x) v|| / ||v||` over the grid, then takes the running
/// minimum in `u` so the table is nonincreasing.
pub fn estimate_decay(xi: &SkewEvolutionSemiflow, grid: &SampleGrid) -> Result<DecayCertificate> {
    let mut values: Vec<f64> = Vec::with_capacity(grid.times().len());
    for l in log_decay_profile(xi, grid)? {
        let mut value = exp_floor(l);
        if let Some(&prev) = values.last() {
            value = value.min(prev);
        }
        if !(value > 0.0) {
            return Err(LabError::ModelDegeneracy(format!("decay witness underflows (ln f = {l})")));
        }
        values.push(value);
    }
    DecayCertificate::tabulated(grid.times().to_vec(), values)
}

/// Turns a decay witness into the exponential form `N~ = 1/f(mu)`, `omega = -ln f(mu) / mu`.
pub fn decay_to_exponential(f: &DecayCertificate, mu: f64) -> Result<DecayCertificate> {
    f.validate()?;
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(LabError::Precondition(format!("mu = {mu} must be positive")));
    }
    let f_mu =
        f.value_at(mu).ok_or_else(|| LabError::Precondition(format!("f is not defined at mu = {mu}")))?;
    if !(f_mu < 1.0) {
        return Err(LabError::Precondition(format!("f(mu) = {f_mu} is not < 1")));
    }
    Ok(DecayCertificate::Parametric { n_tilde: 1.0 / f_mu, omega: -f_mu.ln() / mu })
}

/// Margin `ln ||Phi(u + t0, t0, x) v|| - ln ||v|| - ln f(u)` at every `(u, t0, x, v)`.
pub fn decay_margins(
    xi: &SkewEvolutionSemiflow,
    cert: &DecayCertificate,
    grid: &SampleGrid,
) -> Result<Vec<SampleMargin>> {
    cert.validate()?;
    let times = grid.times();
    Ok(decay_ratios(xi, grid)?
        .into_iter()
        .map(|(sample, u_idx, ratio)| {
            let margin = match cert.ln_at(times[u_idx]) {
                Some(lf) => ratio - lf,
                None => f64::NEG_INFINITY,
            };
            SampleMargin::new(sample, margin)
        })
        .collect())
}

pub fn check_decay(
    xi: &SkewEvolutionSemiflow,
    cert: &DecayCertificate,
    grid: &SampleGrid,
    tol: f64,
) -> Result<CheckReport> {
    let margins = decay_margins(xi, cert, grid)?;
    Ok(CheckReport::from_margins("decay", grid, tol, &margins))
}
