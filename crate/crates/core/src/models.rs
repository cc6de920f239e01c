//! Built-in skew-evolution semiflows with closed-form exponents.
//!
//! * [`SinScalarModel`]: `Phi(t,s)v = v e^{E(t,s)}`, `E(t,s) = (t-s) - 2t sin(pi t/4) + 2s sin(pi s/4)`,
//!   on the base `R+` with the translation semiflow.
//! * [`DiagIntegralModel`]: diagonal cocycle `e^{alpha_k int_s^t x(tau - s) dtau}` over the
//!   shift semiflow on the generators `x_n^sigma`.
//! * [`PureExponentialModel`]: `e^{c(t-s)} v`, the calibration model.
//!
//! Two deliberately broken fixtures exist to exercise the law checkers.

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::algebra::{
    BasePoint, CocycleOperator, EvolutionModel, NormChoice, SkewEvolutionSemiflow, TimePair,
};
use crate::error::{LabError, Result};

/// `beta_n = 1/(2n(2n+1))`, the width of the interval `(1/(2n+1), 1/(2n))`.
pub fn generator_beta(n: u32) -> f64 {
    let n = n as f64;
    1.0 / (2.0 * n * (2.0 * n + 1.0))
}

fn generator_floor(n: u32) -> f64 {
    1.0 / (2.0 * n as f64 + 1.0)
}

fn check_generator_args(n: u32, sigma: f64, t: f64) -> Result<()> {
    if n == 0 {
        return Err(LabError::Precondition("generator index n must be >= 1".into()));
    }
    if !(sigma >= 0.0) || !(t >= 0.0) {
        return Err(LabError::Precondition(format!(
            "generator arguments must be nonnegative (sigma = {sigma}, t = {t})"
        )));
    }
    Ok(())
}

/// `x_n^sigma(t) = x_n(t + sigma)` with `x_n(u) = 1/(2n+1) + (beta_n/2) e^{-u}`.
pub fn generator_value(n: u32, sigma: f64, t: f64) -> Result<f64> {
    check_generator_args(n, sigma, t)?;
    Ok(generator_floor(n) + 0.5 * generator_beta(n) * (-(t + sigma)).exp())
}

/// `int_0^length x_n(u + sigma) du`, exact up to rounding.
pub fn integrate_generator(n: u32, sigma: f64, length: f64) -> Result<f64> {
    check_generator_args(n, sigma, length)?;
    Ok(length * generator_floor(n) + 0.5 * generator_beta(n) * (-sigma).exp() * (-(-length).exp_m1()))
}

fn translate(x: &BasePoint, elapsed: f64) -> BasePoint {
    match *x {
        BasePoint::Trivial { value } => BasePoint::Trivial { value: value + elapsed },
        BasePoint::ShiftedGenerator { n, sigma } => BasePoint::ShiftedGenerator { n, sigma: sigma + elapsed },
    }
}

/// `E(t,s) = (t - s) - 2t sin(pi t / 4) + 2s sin(pi s / 4)`.
pub fn sin_exponent(t: f64, s: f64) -> f64 {
    (t - s) - 2.0 * t * (FRAC_PI_4 * t).sin() + 2.0 * s * (FRAC_PI_4 * s).sin()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SinScalarModel;

impl EvolutionModel for SinScalarModel {
    fn name(&self) -> &str {
        "sin_scalar"
    }

    fn dimension(&self) -> usize {
        1
    }

    fn check_base(&self, x: &BasePoint) -> Result<()> {
        match x {
            BasePoint::Trivial { .. } => Ok(()),
            _ => Err(LabError::BaseVariant { model: self.name().into(), expected: "trivial" }),
        }
    }

    fn semiflow(&self, pair: TimePair, x: &BasePoint) -> BasePoint {
        translate(x, pair.elapsed())
    }

    fn operator(&self, pair: TimePair, _x: &BasePoint) -> CocycleOperator {
        CocycleOperator::Diagonal(vec![sin_exponent(pair.t(), pair.s())])
    }

    fn default_base_points(&self) -> Vec<BasePoint> {
        vec![BasePoint::trivial(0.0)]
    }
}

#[derive(Debug, Clone)]
pub struct DiagIntegralModel {
    alphas: Vec<f64>,
}

impl DiagIntegralModel {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(LabError::InvalidModel("diag_integral needs at least one alpha".into()));
        }
        if alphas.iter().any(|a| !a.is_finite()) {
            return Err(LabError::InvalidModel("alphas must be finite".into()));
        }
        Ok(Self { alphas })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }
}

impl EvolutionModel for DiagIntegralModel {
    fn name(&self) -> &str {
        "diag_integral"
    }

    fn dimension(&self) -> usize {
        self.alphas.len()
    }

    fn check_base(&self, x: &BasePoint) -> Result<()> {
        match x {
            BasePoint::ShiftedGenerator { .. } => Ok(()),
            _ => Err(LabError::BaseVariant { model: self.name().into(), expected: "shifted_generator" }),
        }
    }

    fn semiflow(&self, pair: TimePair, x: &BasePoint) -> BasePoint {
        translate(x, pair.elapsed())
    }

    fn operator(&self, pair: TimePair, x: &BasePoint) -> CocycleOperator {
        let BasePoint::ShiftedGenerator { n, sigma } = *x else {
            unreachable!("base variant checked by the caller")
        };
        // int_s^t x(tau - s) dtau = int_0^{t-s} x_n(u + sigma) du
        let integral = integrate_generator(n, sigma, pair.elapsed()).expect("validated generator arguments");
        CocycleOperator::Diagonal(self.alphas.iter().map(|a| a * integral).collect())
    }

    fn default_base_points(&self) -> Vec<BasePoint> {
        vec![BasePoint::generator(1, 0.0), BasePoint::generator(2, 0.0), BasePoint::generator(1, 1.0)]
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PureExponentialModel {
    rate: f64,
    dimension: usize,
}

impl PureExponentialModel {
    pub fn new(rate: f64, dimension: usize) -> Result<Self> {
        if !rate.is_finite() {
            return Err(LabError::InvalidModel("rate must be finite".into()));
        }
        if dimension == 0 {
            return Err(LabError::InvalidModel("dimension must be >= 1".into()));
        }
        Ok(Self { rate, dimension })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

impl EvolutionModel for PureExponentialModel {
    fn name(&self) -> &str {
        "pure_exponential"
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn check_base(&self, _x: &BasePoint) -> Result<()> {
        Ok(())
    }

    fn semiflow(&self, pair: TimePair, x: &BasePoint) -> BasePoint {
        translate(x, pair.elapsed())
    }

    fn operator(&self, pair: TimePair, _x: &BasePoint) -> CocycleOperator {
        CocycleOperator::Diagonal(vec![self.rate * pair.elapsed(); self.dimension])
    }

    fn default_base_points(&self) -> Vec<BasePoint> {
        vec![BasePoint::trivial(0.0)]
    }
}

/// Test fixture: `phi(t,s,x) = x_{t+s}`, identity cocycle. Violates both semiflow laws.
#[derive(Debug, Clone, Copy, Default)]
pub struct BrokenSemiflowModel;

impl EvolutionModel for BrokenSemiflowModel {
    fn name(&self) -> &str {
        "broken_semiflow"
    }

    fn dimension(&self) -> usize {
        1
    }

    fn check_base(&self, _x: &BasePoint) -> Result<()> {
        Ok(())
    }

    fn semiflow(&self, pair: TimePair, x: &BasePoint) -> BasePoint {
        translate(x, pair.t() + pair.s())
    }

    fn operator(&self, _pair: TimePair, _x: &BasePoint) -> CocycleOperator {
        CocycleOperator::Diagonal(vec![0.0])
    }

    fn default_base_points(&self) -> Vec<BasePoint> {
        vec![BasePoint::generator(1, 0.0)]
    }
}

/// Test fixture: `Phi(t,s,x)v = (1 + t - s) v`, not multiplicative under composition.
#[derive(Debug, Clone, Copy, Default)]
pub struct BrokenCocycleModel;

impl EvolutionModel for BrokenCocycleModel {
    fn name(&self) -> &str {
        "broken_cocycle"
    }

    fn dimension(&self) -> usize {
        1
    }

    fn check_base(&self, _x: &BasePoint) -> Result<()> {
        Ok(())
    }

    fn semiflow(&self, pair: TimePair, x: &BasePoint) -> BasePoint {
        translate(x, pair.elapsed())
    }

    fn operator(&self, pair: TimePair, _x: &BasePoint) -> CocycleOperator {
        CocycleOperator::Diagonal(vec![pair.elapsed().ln_1p()])
    }

    fn default_base_points(&self) -> Vec<BasePoint> {
        vec![BasePoint::trivial(0.0)]
    }
}

fn default_dimension() -> usize {
    1
}

/// Model kinds accepted in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    SinScalar,
    DiagIntegral {
        alphas: Vec<f64>,
    },
    PureExponential {
        rate: f64,
        #[serde(default = "default_dimension")]
        dimension: usize,
    },
    BrokenSemiflow,
    BrokenCocycle,
}

/// The `model` stanza of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    #[serde(flatten)]
    pub kind: ModelKind,
    #[serde(default)]
    pub norm: NormChoice,
}

impl ModelDescriptor {
    pub fn new(kind: ModelKind) -> Self {
        Self { kind, norm: NormChoice::default() }
    }

    pub fn sin_scalar() -> Self {
        Self::new(ModelKind::SinScalar)
    }

    pub fn diag_integral(alphas: Vec<f64>) -> Self {
        Self::new(ModelKind::DiagIntegral { alphas })
    }

    pub fn pure_exponential(rate: f64) -> Self {
        Self::new(ModelKind::PureExponential { rate, dimension: 1 })
    }
}

/// Builds the evaluator for a descriptor. All built-ins are continuous, hence declared
/// strongly measurable.
pub fn build_model(desc: &ModelDescriptor) -> Result<SkewEvolutionSemiflow> {
    let norm = desc.norm;
    Ok(match &desc.kind {
        ModelKind::SinScalar => SkewEvolutionSemiflow::new(SinScalarModel, norm),
        ModelKind::DiagIntegral { alphas } => {
            SkewEvolutionSemiflow::new(DiagIntegralModel::new(alphas.clone())?, norm)
        }
        ModelKind::PureExponential { rate, dimension } => {
            SkewEvolutionSemiflow::new(PureExponentialModel::new(*rate, *dimension)?, norm)
        }
        ModelKind::BrokenSemiflow => SkewEvolutionSemiflow::new(BrokenSemiflowModel, norm),
        ModelKind::BrokenCocycle => SkewEvolutionSemiflow::new(BrokenCocycleModel, norm),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::StateVector;

    fn v(c: &[f64]) -> StateVector {
        StateVector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn generator_values() {
        assert!((generator_value(1, 0.0, 0.0).unwrap() - 5.0 / 12.0).abs() < 1e-15);
        assert!((generator_value(1, 0.0, 800.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(generator_value(2, 1.0, 0.0).unwrap(), generator_value(2, 0.0, 1.0).unwrap());
        assert!(generator_value(0, 0.0, 0.0).is_err());
        assert!(generator_value(1, -1.0, 0.0).is_err());
    }

    #[test]
    fn generator_stays_in_open_interval_and_decreases() {
        for n in 1..6 {
            let lo = 1.0 / (2.0 * n as f64 + 1.0);
            let hi = 1.0 / (2.0 * n as f64);
            let mut prev = f64::INFINITY;
            for i in 0..200 {
                let x = generator_value(n, 0.0, 0.1 * i as f64).unwrap();
                assert!(x > lo && x < hi);
                assert!(x < prev);
                prev = x;
            }
        }
    }

    #[test]
    fn generator_integrals() {
        let i1 = integrate_generator(1, 0.0, 1.0).unwrap();
        assert!((i1 - (1.0 / 3.0 + (1.0 - (-1f64).exp()) / 12.0)).abs() < 1e-15);
        assert!((i1 - 0.386010).abs() < 1e-6);
        assert_eq!(integrate_generator(3, 2.0, 0.0).unwrap(), 0.0);
        let chasles = integrate_generator(1, 0.0, 1.0).unwrap() + integrate_generator(1, 1.0, 1.0).unwrap();
        assert!((integrate_generator(1, 0.0, 2.0).unwrap() - chasles).abs() < 1e-15);
    }

    #[test]
    fn sin_exponent_values() {
        assert!((sin_exponent(2.0, 0.0) + 2.0).abs() < 1e-14);
        assert!((sin_exponent(4.0, 0.0) - 4.0).abs() < 1e-14);
        assert!((sin_exponent(4.0, 2.0) - 6.0).abs() < 1e-14);
        assert_eq!(sin_exponent(7.3, 7.3), 0.0);
    }

    #[test]
    fn build_each_kind() {
        let s = build_model(&ModelDescriptor::sin_scalar()).unwrap();
        assert_eq!(s.dimension(), 1);
        assert!(s.strongly_measurable());
        let d = build_model(&ModelDescriptor::diag_integral(vec![1.0, -1.0])).unwrap();
        assert_eq!(d.dimension(), 2);
        assert!(build_model(&ModelDescriptor::diag_integral(vec![])).is_err());
        let p = build_model(&ModelDescriptor::pure_exponential(3.0)).unwrap();
        let x = BasePoint::trivial(0.0);
        let l = p.log_norm(2.5, 0.5, &x, &v(&[1.0])).unwrap();
        assert_eq!(l, 6.0);
    }

    #[test]
    fn diag_components_multiply_as_exponentials() {
        let d = build_model(&ModelDescriptor::diag_integral(vec![1.0, -1.0])).unwrap();
        let x = BasePoint::generator(1, 0.0);
        let w = d.eval_cocycle(1.0, 0.0, &x, &v(&[1.0, 1.0])).unwrap();
        let i = integrate_generator(1, 0.0, 1.0).unwrap();
        assert!((w.components()[0] - i.exp()).abs() < 1e-15);
        assert!((w.components()[1] - (-i).exp()).abs() < 1e-15);
        assert!((w.components()[0] * w.components()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn descriptor_json() {
        let d: ModelDescriptor =
            serde_json::from_str(r#"{"kind":"diag_integral","alphas":[1,-1],"norm":"euclid"}"#).unwrap();
        assert_eq!(d.norm, NormChoice::Euclid);
        assert_eq!(d.kind, ModelKind::DiagIntegral { alphas: vec![1.0, -1.0] });
        let p: ModelDescriptor = serde_json::from_str(r#"{"kind":"pure_exponential","rate":3}"#).unwrap();
        assert_eq!(p, ModelDescriptor::pure_exponential(3.0));
        assert!(serde_json::from_str::<ModelDescriptor>(r#"{"kind":"stability"}"#).is_err());
    }
}
