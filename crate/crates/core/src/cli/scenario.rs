use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{shift_cocycle, BasePoint, SampleGrid, SkewEvolutionSemiflow, StateVector};
use crate::error::{LabError, Result};
use crate::models::{build_model, ModelDescriptor};
use crate::quadrature::QuadratureConfig;
use crate::theorems::RunSettings;

/// Grid times: an explicit list or `count` evenly spaced points on `[min, max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimesSpec {
    List(Vec<f64>),
    Range { min: f64, max: f64, count: usize },
}

impl Default for TimesSpec {
    fn default() -> Self {
        TimesSpec::Range { min: 0.0, max: 16.0, count: 65 }
    }
}

impl TimesSpec {
    pub fn expand(&self) -> Result<Vec<f64>> {
        match self {
            TimesSpec::List(times) => Ok(times.clone()),
            TimesSpec::Range { min, max, count } => SampleGrid::linspace(*min, *max, *count),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub times: TimesSpec,
    /// Defaults to the model's base points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_points: Option<Vec<BasePoint>>,
    /// Defaults to `{+-e_k} u {+-(1, ..., 1)}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<Vec<f64>>>,
    /// Extra vectors with components uniform in `[-1, 1]`, drawn from `seed`.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub random_vectors: usize,
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub quad: QuadratureConfig,
    pub margin_tol: f64,
    pub headroom: f64,
    pub growth_cap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let s = RunSettings::default();
        Self { quad: s.quad, margin_tol: s.margin_tol, headroom: s.headroom, growth_cap: s.growth_cap }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub model: ModelDescriptor,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_candidates: Option<Vec<f64>>,
    /// Pre-shift applied to the model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Shift used by the shift-sufficiency run when the certificate does not determine it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

/// A scenario expanded into evaluable objects.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub xi: SkewEvolutionSemiflow,
    pub grid: SampleGrid,
    pub settings: RunSettings,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let scenario: Scenario =
            serde_json::from_str(text).map_err(|e| LabError::InvalidScenario(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        t.quad.validate()?;
        if !(t.margin_tol > 0.0) || !t.margin_tol.is_finite() {
            return Err(LabError::Precondition(format!("margin_tol = {} must be positive", t.margin_tol)));
        }
        if !(t.headroom >= 0.0) || !t.headroom.is_finite() {
            return Err(LabError::Precondition(format!("headroom = {} must be >= 0", t.headroom)));
        }
        if t.growth_cap.is_nan() {
            return Err(LabError::Precondition("growth_cap is NaN".into()));
        }
        if let Some(c) = &self.nu_candidates {
            if c.is_empty() || c.iter().any(|nu| !(*nu > 0.0) || !nu.is_finite()) {
                return Err(LabError::Precondition("nu_candidates must be nonempty and positive".into()));
            }
        }
        for (name, value) in [("gamma", self.gamma), ("alpha", self.alpha)] {
            if value.is_some_and(|v| !v.is_finite()) {
                return Err(LabError::Precondition(format!("{name} must be finite")));
            }
        }
        if self.grid.random_vectors > 0 && self.seed.is_none() {
            return Err(LabError::Precondition("random_vectors needs a seed".into()));
        }
        Ok(())
    }

    pub fn settings(&self) -> RunSettings {
        let t = &self.tolerances;
        let mut s = RunSettings {
            quad: t.quad,
            margin_tol: t.margin_tol,
            headroom: t.headroom,
            growth_cap: t.growth_cap,
            ..RunSettings::default()
        };
        if let Some(c) = &self.nu_candidates {
            s.nu_candidates = c.clone();
        }
        s
    }

    pub fn prepare(&self) -> Result<Prepared> {
        self.validate()?;
        let mut xi = build_model(&self.model)?;
        if let Some(gamma) = self.gamma {
            xi = shift_cocycle(&xi, gamma);
        }
        let base_points = match &self.grid.base_points {
            Some(points) => points.clone(),
            None => xi.default_base_points(),
        };
        for x in &base_points {
            xi.check_inputs(x, None)?;
        }
        let mut vectors = match &self.grid.vectors {
            Some(vs) => vs.iter().map(|c| StateVector::new(c.clone())).collect::<Result<Vec<_>>>()?,
            None => SampleGrid::canonical_vectors(xi.dimension()),
        };
        if let Some(seed) = self.seed {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let target = vectors.len() + self.grid.random_vectors;
            while vectors.len() < target {
                let c: Vec<f64> = (0..xi.dimension()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let v = StateVector::new(c)?;
                if !v.is_zero() {
                    vectors.push(v);
                }
            }
        }
        let grid = SampleGrid::new(self.grid.times.expand()?, base_points, vectors)?;
        Ok(Prepared { xi, grid, settings: self.settings() })
    }
}
