use crate::algebra::BasePoint;
use crate::error::{LabError, Result};
use crate::models::generator_value;

/// Truncated function-space distance
///
/// ```text
/// d(x, y) ~ sum_{n=1}^{n_max} 2^{-n} d_n / (1 + d_n),   d_n = max_{t in [0,n]} |x(t) - y(t)|
/// ```
///
/// with each sup replaced by a max over `n * samples_per_unit + 1` uniform points; the
/// dropped tail is at most `2^{-n_max}`.
pub fn metric_distance(x: &BasePoint, y: &BasePoint, n_max: u32, samples_per_unit: u32) -> Result<f64> {
    let (BasePoint::ShiftedGenerator { n: nx, sigma: sx }, BasePoint::ShiftedGenerator { n: ny, sigma: sy }) =
        (*x, *y)
    else {
        return Err(LabError::Precondition("metric_distance is defined on shifted generators only".into()));
    };
    if n_max == 0 || samples_per_unit == 0 {
        return Err(LabError::Precondition("n_max and samples_per_unit must be >= 1".into()));
    }
    x.validate()?;
    y.validate()?;

    let h = 1.0 / samples_per_unit as f64;
    let mut running_sup = 0.0_f64;
    let mut next_sample = 0u64;
    let mut total = 0.0;
    for n in 1..=n_max {
        // d_n is nondecreasing in n, so extend the running max over [n-1, n].
        let last = n as u64 * samples_per_unit as u64;
        while next_sample <= last {
            let t = next_sample as f64 * h;
            let diff = (generator_value(nx, sx, t)? - generator_value(ny, sy, t)?).abs();
            running_sup = running_sup.max(diff);
            next_sample += 1;
        }
        total += running_sup / (1.0 + running_sup) * 0.5f64.powi(n as i32);
    }
    Ok(total)
}
