//! Adaptive Simpson quadrature for norm trajectories and certificate kernels.

use serde::{Deserialize, Serialize};

use crate::algebra::{BasePoint, SkewEvolutionSemiflow, StateVector};
use crate::error::{LabError, Result};

/// Lower limit of the Datko integral. Only `t0` is supported: the cocycle is undefined
/// below the initial time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LowerLimit {
    #[default]
    #[serde(rename = "t0")]
    InitialTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
    pub datko_lower_limit: LowerLimit,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-30, max_depth: 50, datko_lower_limit: LowerLimit::InitialTime }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol >= 1e-13) || !self.rel_tol.is_finite() {
            return Err(LabError::InvalidQuadrature(format!("rel_tol = {} must be >= 1e-13", self.rel_tol)));
        }
        if !(self.abs_tol > 0.0) || !self.abs_tol.is_finite() {
            return Err(LabError::InvalidQuadrature("abs_tol must be positive".into()));
        }
        if self.max_depth == 0 || self.max_depth > 60 {
            return Err(LabError::InvalidQuadrature(format!(
                "max_depth = {} must lie in 1..=60",
                self.max_depth
            )));
        }
        Ok(())
    }
}

/// Integral value with its accumulated Richardson error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

const INITIAL_PANELS: usize = 4;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

struct Accumulator {
    value: f64,
    error: f64,
    exhausted: Option<(f64, f64)>,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) * (fa + 4.0 * fm + fb) / 6.0
}

fn refine<F: Fn(f64) -> f64>(f: &F, p: Panel, eps: f64, depth: u32, acc: &mut Accumulator) {
    let m = 0.5 * (p.a + p.b);
    let lm = 0.5 * (p.a + m);
    let rm = 0.5 * (m + p.b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(p.a, m, p.fa, flm, p.fm);
    let right = simpson(m, p.b, p.fm, frm, p.fb);
    let delta = left + right - p.whole;
    let converged = delta.abs() <= 15.0 * eps;
    let unresolvable = !(lm > p.a && rm < p.b);
    if converged || depth == 0 || unresolvable {
        if !converged && acc.exhausted.is_none() {
            acc.exhausted = Some((p.a, p.b));
        }
        acc.value += left + right + delta / 15.0;
        acc.error += delta.abs() / 15.0;
        return;
    }
    refine(f, Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left }, 0.5 * eps, depth - 1, acc);
    refine(f, Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right }, 0.5 * eps, depth - 1, acc);
}

/// Adaptive Simpson on `[a, b]` with target error `max(abs_tol, rel_tol * |I|)`, where `|I|`
/// is taken from the initial coarse pass. Reaching `max_depth` without meeting the target is
/// an error carrying the partial estimate.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    cfg.validate()?;
    if !(b >= a) {
        return Err(LabError::Precondition(format!("integration interval [{a}, {b}] is reversed")));
    }
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let h = (b - a) / INITIAL_PANELS as f64;
    let nodes: Vec<f64> = (0..=2 * INITIAL_PANELS)
        .map(|i| if i == 2 * INITIAL_PANELS { b } else { a + 0.5 * h * i as f64 })
        .collect();
    let values: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
    let panels: Vec<Panel> = (0..INITIAL_PANELS)
        .map(|k| {
            let (i, j, l) = (2 * k, 2 * k + 1, 2 * k + 2);
            Panel {
                a: nodes[i],
                b: nodes[l],
                fa: values[i],
                fm: values[j],
                fb: values[l],
                whole: simpson(nodes[i], nodes[l], values[i], values[j], values[l]),
            }
        })
        .collect();
    let coarse: f64 = panels.iter().map(|p| p.whole).sum();
    let eps = cfg.abs_tol.max(cfg.rel_tol * coarse.abs()) / INITIAL_PANELS as f64;
    let mut acc = Accumulator { value: 0.0, error: 0.0, exhausted: None };
    for p in panels {
        refine(&f, p, eps, cfg.max_depth, &mut acc);
    }
    if !acc.value.is_finite() {
        return Err(LabError::Precondition(format!(
            "integrand is not finite on [{a}, {b}] (estimate {})",
            acc.value
        )));
    }
    if let Some((pa, pb)) = acc.exhausted {
        return Err(LabError::DepthExhausted { a: pa, b: pb, partial: acc.value });
    }
    Ok(Estimate { value: acc.value, error: acc.error })
}

fn check_trajectory_inputs(
    xi: &SkewEvolutionSemiflow,
    t0: f64,
    x: &BasePoint,
    v: &StateVector,
    t: f64,
) -> Result<()> {
    crate::algebra::TimePair::new(t, t0)?;
    xi.check_inputs(x, Some(v))?;
    if v.is_zero() {
        return Err(LabError::ZeroVector);
    }
    Ok(())
}

/// `int_{t0}^{t} ||Phi(tau, t0, x) v|| dtau`.
pub fn integrate_norm_trajectory(
    xi: &SkewEvolutionSemiflow,
    t0: f64,
    x: &BasePoint,
    v: &StateVector,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_trajectory_inputs(xi, t0, x, v, t)?;
    let scale = v.log_norm(xi.norm());
    let est = adaptive_simpson(
        |tau| xi.log_norm(tau.max(t0), t0, x, v).map(|l| (l - scale).exp()).unwrap_or(f64::NAN),
        t0,
        t,
        cfg,
    )?;
    Ok(est.value * scale.exp())
}

/// `ln D(t_i)` for every `t_i` in `times`, where
/// `D(t) = int_{t0}^{t} ||Phi(tau,t0,x)v|| dtau / ||Phi(t,t0,x)v||` and `t0 = times[0]`.
///
/// The integral is accumulated segment by segment between consecutive times; each segment
/// meets the relative tolerance on its own, so the cumulative sum does too.
pub fn datko_log_ratios(
    xi: &SkewEvolutionSemiflow,
    times: &[f64],
    x: &BasePoint,
    v: &StateVector,
    cfg: &QuadratureConfig,
) -> Result<Vec<f64>> {
    let Some(&t0) = times.first() else {
        return Ok(Vec::new());
    };
    check_trajectory_inputs(xi, t0, x, v, *times.last().unwrap())?;
    let scale = v.log_norm(xi.norm());
    let integrand =
        |tau: f64| xi.log_norm(tau.max(t0), t0, x, v).map(|l| (l - scale).exp()).unwrap_or(f64::NAN);
    let mut out = Vec::with_capacity(times.len());
    let mut cumulative = 0.0;
    for (i, &t) in times.iter().enumerate() {
        if i > 0 {
            cumulative += adaptive_simpson(integrand, times[i - 1], t, cfg)?.value;
        }
        let end = xi.log_norm(t, t0, x, v)?;
        // ln(0) = -inf at t = t0
        out.push(cumulative.ln() + scale - end);
    }
    Ok(out)
}

/// One smooth piece `g(u) = scale * e^{-rate u}` of a kernel on `(start, end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPiece {
    pub start: f64,
    pub end: f64,
    pub scale: f64,
    pub rate: f64,
}

/// A function on `[0, length]` presented as smooth pieces, so step functions integrate
/// without spurious jumps at Simpson nodes.
pub trait Kernel {
    fn pieces(&self, length: f64) -> Result<Vec<KernelPiece>>;
}

/// `int_0^length e^{-alpha u} f(u) du`.
pub fn integrate_kernel(f: &dyn Kernel, alpha: f64, length: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(LabError::Precondition(format!("kernel length {length} must be positive")));
    }
    if !alpha.is_finite() {
        return Err(LabError::Precondition("alpha must be finite".into()));
    }
    let mut total = 0.0;
    for piece in f.pieces(length)? {
        if !(piece.scale > 0.0) {
            return Err(LabError::NonPositiveKernel(piece.end));
        }
        let est = adaptive_simpson(
            |u| piece.scale * (-(alpha + piece.rate) * u).exp(),
            piece.start,
            piece.end,
            cfg,
        )?;
        total += est.value;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_model, ModelDescriptor};

    #[test]
    fn config_validation() {
        let mut c = QuadratureConfig::default();
        assert!(c.validate().is_ok());
        c.rel_tol = 1e-14;
        assert!(c.validate().is_err());
        c = QuadratureConfig { max_depth: 61, ..Default::default() };
        assert!(c.validate().is_err());
        let json = serde_json::to_string(&QuadratureConfig::default()).unwrap();
        assert!(json.contains(r#""datko_lower_limit":"t0""#));
    }

    #[test]
    fn polynomials_are_exact() {
        let cfg = QuadratureConfig::default();
        let e = adaptive_simpson(|x| x * x * x - 2.0 * x, 0.0, 3.0, &cfg).unwrap();
        assert!((e.value - (81.0 / 4.0 - 9.0)).abs() < 1e-12);
    }

    #[test]
    fn depth_exhaustion_is_reported() {
        let cfg = QuadratureConfig { max_depth: 2, rel_tol: 1e-13, ..Default::default() };
        match adaptive_simpson(|x: f64| x.sqrt(), 0.0, 1.0, &cfg) {
            Err(LabError::DepthExhausted { partial, .. }) => assert!((partial - 2.0 / 3.0).abs() < 1e-2),
            other => panic!("expected depth exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn pure_exponential_trajectory() {
        let xi = build_model(&ModelDescriptor::pure_exponential(3.0)).unwrap();
        let x = BasePoint::trivial(0.0);
        let v = StateVector::new(vec![1.0]).unwrap();
        let cfg = QuadratureConfig::default();
        let i = integrate_norm_trajectory(&xi, 0.0, &x, &v, 2.0, &cfg).unwrap();
        let exact = (6f64.exp() - 1.0) / 3.0;
        assert!((i / exact - 1.0).abs() < 1e-9);
        assert!((exact - 134.143).abs() < 1e-3);
        assert_eq!(integrate_norm_trajectory(&xi, 1.0, &x, &v, 1.0, &cfg).unwrap(), 0.0);
        assert!(integrate_norm_trajectory(&xi, 2.0, &x, &v, 1.0, &cfg).is_err());
        let zero = StateVector::new(vec![0.0]).unwrap();
        assert_eq!(integrate_norm_trajectory(&xi, 0.0, &x, &zero, 1.0, &cfg), Err(LabError::ZeroVector));
    }

    #[test]
    fn datko_ratios_for_pure_exponential() {
        let xi = build_model(&ModelDescriptor::pure_exponential(3.0)).unwrap();
        let x = BasePoint::trivial(0.0);
        let v = StateVector::new(vec![-2.0]).unwrap();
        let times = [1.0, 1.5, 2.0, 4.0];
        let r = datko_log_ratios(&xi, &times, &x, &v, &QuadratureConfig::default()).unwrap();
        assert_eq!(r[0], f64::NEG_INFINITY);
        for (l, t) in r.iter().zip(times).skip(1) {
            let d = (1.0 - (-3.0 * (t - 1.0)).exp()) / 3.0;
            assert!((l - d.ln()).abs() < 1e-9);
        }
    }

    struct Exp(f64);

    impl Kernel for Exp {
        fn pieces(&self, length: f64) -> Result<Vec<KernelPiece>> {
            Ok(vec![KernelPiece { start: 0.0, end: length, scale: 1.0, rate: self.0 }])
        }
    }

    #[test]
    fn kernel_integrals() {
        let cfg = QuadratureConfig::default();
        let k = integrate_kernel(&Exp(1.0), 0.0, 1.0, &cfg).unwrap();
        assert!((k - (1.0 - (-1f64).exp())).abs() < 1e-12);
        let k = integrate_kernel(&Exp(1.0), 1.0, 1.0, &cfg).unwrap();
        assert!((k - (1.0 - (-2f64).exp()) / 2.0).abs() < 1e-12);
        let k = integrate_kernel(&Exp(0.0), 0.0, 1.0, &cfg).unwrap();
        assert!((k - 1.0).abs() < 1e-15);
        assert!(integrate_kernel(&Exp(1.0), 0.0, 0.0, &cfg).is_err());
    }
}
