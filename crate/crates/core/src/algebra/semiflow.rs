use std::fmt;
use std::sync::Arc;

use crate::algebra::{BasePoint, NormChoice, StateVector, TimePair};
use crate::error::{LabError, Result};

/// The linear map `Phi(t, s, x)` acting on `R^p`.
#[derive(Debug, Clone, PartialEq)]
pub enum CocycleOperator {
    /// `diag(e^{m_1}, ..., e^{m_p})`, stored as the log-multipliers `m_k`.
    Diagonal(Vec<f64>),
    /// Row-major `p x p` matrix.
    Dense(Vec<Vec<f64>>),
}

impl CocycleOperator {
    fn shifted(self, log_scale: f64) -> Self {
        if log_scale == 0.0 {
            return self;
        }
        match self {
            CocycleOperator::Diagonal(m) => {
                CocycleOperator::Diagonal(m.into_iter().map(|a| a + log_scale).collect())
            }
            CocycleOperator::Dense(rows) => {
                let k = log_scale.exp();
                CocycleOperator::Dense(
                    rows.into_iter().map(|r| r.into_iter().map(|a| a * k).collect()).collect(),
                )
            }
        }
    }

    fn apply(&self, v: &StateVector) -> StateVector {
        let out = match self {
            CocycleOperator::Diagonal(m) => m.iter().zip(v.components()).map(|(a, c)| a.exp() * c).collect(),
            CocycleOperator::Dense(rows) => {
                rows.iter().map(|r| r.iter().zip(v.components()).map(|(a, c)| a * c).sum()).collect()
            }
        };
        StateVector::from_raw(out)
    }
}

/// A skew-evolution semiflow model: an evolution semiflow on the base space together with
/// its evolution cocycle map. Implementations may assume `pair` lies in the triangle domain
/// and that `v` has the right dimension; [`SkewEvolutionSemiflow`] checks both.
pub trait EvolutionModel: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;

    fn dimension(&self) -> usize;

    /// Rejects base points of the wrong variant.
    fn check_base(&self, x: &BasePoint) -> Result<()>;

    fn semiflow(&self, pair: TimePair, x: &BasePoint) -> BasePoint;

    fn operator(&self, pair: TimePair, x: &BasePoint) -> CocycleOperator;

    /// Base points used when a scenario does not list any.
    fn default_base_points(&self) -> Vec<BasePoint>;
}

/// The pair `xi = (phi, Phi)` with norm, shift, and measurability metadata.
#[derive(Clone)]
pub struct SkewEvolutionSemiflow {
    model: Arc<dyn EvolutionModel>,
    norm: NormChoice,
    shift: f64,
    strongly_measurable: bool,
}

impl fmt::Debug for SkewEvolutionSemiflow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SkewEvolutionSemiflow")
            .field("model", &self.model.name())
            .field("norm", &self.norm)
            .field("shift", &self.shift)
            .field("strongly_measurable", &self.strongly_measurable)
            .finish()
    }
}

impl SkewEvolutionSemiflow {
    pub fn new(model: impl EvolutionModel + 'static, norm: NormChoice) -> Self {
        Self { model: Arc::new(model), norm, shift: 0.0, strongly_measurable: true }
    }

    /// Overrides the declared measurability capability.
    pub fn with_measurability(mut self, strongly_measurable: bool) -> Self {
        self.strongly_measurable = strongly_measurable;
        self
    }

    pub fn model(&self) -> &dyn EvolutionModel {
        self.model.as_ref()
    }

    pub fn name(&self) -> &str {
        self.model.name()
    }

    pub fn dimension(&self) -> usize {
        self.model.dimension()
    }

    pub fn norm(&self) -> NormChoice {
        self.norm
    }

    /// Accumulated shift `gamma` so that this object evaluates `e^{-gamma(t-s)} Phi(t,s,x)`.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn strongly_measurable(&self) -> bool {
        self.strongly_measurable
    }

    pub fn default_base_points(&self) -> Vec<BasePoint> {
        self.model.default_base_points()
    }

    /// The shift cocycle `xi_gamma`: same semiflow, cocycle `e^{-gamma(t-s)} Phi(t,s,x)`.
    pub fn shifted(&self, gamma: f64) -> Self {
        let mut out = self.clone();
        out.shift += gamma;
        out
    }

    pub fn check_inputs(&self, x: &BasePoint, v: Option<&StateVector>) -> Result<()> {
        x.validate()?;
        self.model.check_base(x)?;
        if let Some(v) = v {
            if v.dimension() != self.dimension() {
                return Err(LabError::DimensionMismatch { expected: self.dimension(), found: v.dimension() });
            }
        }
        Ok(())
    }

    pub fn eval_semiflow(&self, t: f64, s: f64, x: &BasePoint) -> Result<BasePoint> {
        let pair = TimePair::new(t, s)?;
        self.check_inputs(x, None)?;
        Ok(self.model.semiflow(pair, x))
    }

    pub fn operator(&self, t: f64, s: f64, x: &BasePoint) -> Result<CocycleOperator> {
        let pair = TimePair::new(t, s)?;
        self.check_inputs(x, None)?;
        Ok(self.model.operator(pair, x).shifted(-self.shift * pair.elapsed()))
    }

    pub fn eval_cocycle(&self, t: f64, s: f64, x: &BasePoint, v: &StateVector) -> Result<StateVector> {
        self.check_inputs(x, Some(v))?;
        Ok(self.operator(t, s, x)?.apply(v))
    }

    pub fn eval_skew(
        &self,
        t: f64,
        s: f64,
        x: &BasePoint,
        v: &StateVector,
    ) -> Result<(BasePoint, StateVector)> {
        Ok((self.eval_semiflow(t, s, x)?, self.eval_cocycle(t, s, x, v)?))
    }

    /// `ln ||Phi(t,s,x) v||`, computed in log-space for diagonal operators.
    pub fn log_norm(&self, t: f64, s: f64, x: &BasePoint, v: &StateVector) -> Result<f64> {
        self.check_inputs(x, Some(v))?;
        match self.operator(t, s, x)? {
            CocycleOperator::Diagonal(m) => Ok(crate::algebra::vector::log_norm_diagonal(self.norm, &m, v)),
            op @ CocycleOperator::Dense(_) => Ok(op.apply(v).log_norm(self.norm)),
        }
    }
}

/// Free-function form of [`SkewEvolutionSemiflow::shifted`].
pub fn shift_cocycle(xi: &SkewEvolutionSemiflow, gamma: f64) -> SkewEvolutionSemiflow {
    xi.shifted(gamma)
}
