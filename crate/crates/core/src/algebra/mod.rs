//! Time domain, base points, state vectors, the skew-evolution pairing and its defining laws.

mod base;
mod grid;
mod laws;
mod metric;
mod report;
mod semiflow;
mod time;
pub(crate) mod vector;

pub use base::BasePoint;
pub use grid::SampleGrid;
pub use laws::{base_discrepancy, check_cocycle_laws, check_semiflow_laws, RESIDUAL_FLOOR};
pub use metric::metric_distance;
pub use report::{CheckReport, Counterexample, SampleIndex, SampleMargin, SampleTuple, Verdict};
pub use semiflow::{shift_cocycle, CocycleOperator, EvolutionModel, SkewEvolutionSemiflow};
pub use time::TimePair;
pub use vector::{log_norm_diagonal, NormChoice, StateVector};
