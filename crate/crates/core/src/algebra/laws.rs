use rayon::prelude::*;

use crate::algebra::{
    metric_distance, BasePoint, CheckReport, SampleGrid, SampleIndex, SampleMargin, SkewEvolutionSemiflow,
    StateVector,
};
use crate::error::Result;

/// Floor for the composition residual denominator.
pub const RESIDUAL_FLOOR: f64 = 1e-300;

/// Base-space discrepancy: exact coordinate distance between points on the same generator
/// (or between trivial points), the truncated metric between distinct generators.
pub fn base_discrepancy(a: &BasePoint, b: &BasePoint) -> f64 {
    match (a, b) {
        (BasePoint::Trivial { value: p }, BasePoint::Trivial { value: q }) => (p - q).abs(),
        (
            BasePoint::ShiftedGenerator { n: n1, sigma: s1 },
            BasePoint::ShiftedGenerator { n: n2, sigma: s2 },
        ) if n1 == n2 => (s1 - s2).abs(),
        (BasePoint::ShiftedGenerator { .. }, BasePoint::ShiftedGenerator { .. }) => {
            metric_distance(a, b, 20, 100).unwrap_or(f64::INFINITY)
        }
        _ => f64::INFINITY,
    }
}

/// Checks `phi(t,t,x) = x` and `phi(t,s,phi(s,t0,x)) = phi(t,t0,x)` on every admissible
/// grid tuple. Margins are negated discrepancies.
pub fn check_semiflow_laws(xi: &SkewEvolutionSemiflow, grid: &SampleGrid, tol: f64) -> Result<CheckReport> {
    let times = grid.times();
    let jobs: Vec<(usize, f64)> =
        (0..grid.base_points().len()).flat_map(|x| times.iter().map(move |&t0| (x, t0))).collect();
    let rows: Vec<Vec<SampleMargin>> = jobs
        .par_iter()
        .map(|&(xi_idx, t0)| -> Result<Vec<SampleMargin>> {
            let x = &grid.base_points()[xi_idx];
            let mut out = Vec::new();
            let identity = xi.eval_semiflow(t0, t0, x)?;
            // `0.0 - d` rather than `-d`: an exact law reports +0, not -0
            out.push(SampleMargin::new(
                SampleIndex { t: t0, s: None, t0, x: xi_idx, v: 0 },
                0.0 - base_discrepancy(&identity, x),
            ));
            for &s in times.iter().filter(|&&s| s >= t0) {
                let mid = xi.eval_semiflow(s, t0, x)?;
                for &t in times.iter().filter(|&&t| t >= s) {
                    let composed = xi.eval_semiflow(t, s, &mid)?;
                    let direct = xi.eval_semiflow(t, t0, x)?;
                    out.push(SampleMargin::new(
                        SampleIndex { t, s: Some(s), t0, x: xi_idx, v: 0 },
                        0.0 - base_discrepancy(&composed, &direct),
                    ));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let margins: Vec<SampleMargin> = rows.into_iter().flatten().collect();
    Ok(CheckReport::from_margins("semiflow_laws", grid, tol, &margins))
}

fn relative_error(a: &StateVector, b: &StateVector, xi: &SkewEvolutionSemiflow) -> f64 {
    let diff: Vec<f64> = a.components().iter().zip(b.components()).map(|(p, q)| p - q).collect();
    let diff = StateVector::from_raw(diff);
    let err = diff.norm(xi.norm()) / b.norm(xi.norm()).max(RESIDUAL_FLOOR);
    if err.is_nan() {
        f64::INFINITY
    } else {
        err
    }
}

/// Checks `Phi(t,t,x) = I` and `Phi(t,t0,x) = Phi(t,s,phi(s,t0,x)) Phi(s,t0,x)` with the
/// residual normalized by `max(||Phi(t,t0,x)v||, 1e-300)`.
pub fn check_cocycle_laws(xi: &SkewEvolutionSemiflow, grid: &SampleGrid, tol: f64) -> Result<CheckReport> {
    let times = grid.times();
    let jobs: Vec<(usize, usize, f64)> = grid
        .point_vector_indices()
        .into_iter()
        .flat_map(|(x, v)| times.iter().map(move |&t0| (x, v, t0)))
        .collect();
    let rows: Vec<Vec<SampleMargin>> = jobs
        .par_iter()
        .map(|&(xi_idx, v_idx, t0)| -> Result<Vec<SampleMargin>> {
            let x = &grid.base_points()[xi_idx];
            let v = &grid.vectors()[v_idx];
            let mut out = Vec::new();
            let identity = xi.eval_cocycle(t0, t0, x, v)?;
            out.push(SampleMargin::new(
                SampleIndex { t: t0, s: None, t0, x: xi_idx, v: v_idx },
                0.0 - relative_error(&identity, v, xi),
            ));
            for &s in times.iter().filter(|&&s| s >= t0) {
                let mid_x = xi.eval_semiflow(s, t0, x)?;
                let mid_v = xi.eval_cocycle(s, t0, x, v)?;
                for &t in times.iter().filter(|&&t| t >= s) {
                    let composed = xi.eval_cocycle(t, s, &mid_x, &mid_v)?;
                    let direct = xi.eval_cocycle(t, t0, x, v)?;
                    out.push(SampleMargin::new(
                        SampleIndex { t, s: Some(s), t0, x: xi_idx, v: v_idx },
                        0.0 - relative_error(&composed, &direct, xi),
                    ));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let margins: Vec<SampleMargin> = rows.into_iter().flatten().collect();
    Ok(CheckReport::from_margins("cocycle_laws", grid, tol, &margins))
}
