//! Time stepper for the regularized controlled equation and the verifiers
//! applied to its trajectories.

mod config;
mod model;
mod stepper;
mod verify;

pub use config::{ConfigSpec, SimulationConfig, MAX_CONTRACTION};
pub use model::{Diffusivity, InitialDatum, KappaKind, NamedKappa, SourceTerm};
pub use stepper::{simulate, simulate_observed, step, Sample, StepOutcome, StepView, TrajectoryRecord};
pub use verify::{
    detect_hitting, energy_diagnostic, hitting_index, least_squares_slope, max_descent_increase,
    max_distance_after, verify_differential_inequality, HittingReport, InequalityCheck,
};
