use rayon::prelude::*;

use crate::algebra::{SampleGrid, SampleIndex, SkewEvolutionSemiflow};
use crate::error::Result;

/// `ln ||Phi(t, t0, x) v||` for one `(x, v, t0)` and every grid time `t >= t0`.
#[derive(Debug, Clone)]
pub(crate) struct TrajectoryRow {
    pub x: usize,
    pub v: usize,
    pub t0_idx: usize,
    pub log_v: f64,
    /// `log_norms[k]` belongs to `times[t0_idx + k]`.
    pub log_norms: Vec<f64>,
}

impl TrajectoryRow {
    pub fn sample(&self, grid: &SampleGrid, t_idx: usize, s_idx: Option<usize>) -> SampleIndex {
        let times = grid.times();
        SampleIndex {
            t: times[t_idx],
            s: s_idx.map(|i| times[i]),
            t0: times[self.t0_idx],
            x: self.x,
            v: self.v,
        }
    }
}

/// Log-norm trajectories for every `(x, v, t0)` on the grid, evaluated in parallel.
pub(crate) fn trajectory_rows(xi: &SkewEvolutionSemiflow, grid: &SampleGrid) -> Result<Vec<TrajectoryRow>> {
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
            xi.check_inputs(x, Some(v))?;
            let t0 = times[t0_idx];
            let log_norms =
                times[t0_idx..].iter().map(|&t| xi.log_norm(t, t0, x, v)).collect::<Result<Vec<_>>>()?;
            Ok(TrajectoryRow { x: x_idx, v: v_idx, t0_idx, log_v: v.log_norm(xi.norm()), log_norms })
        })
        .collect()
}
