//! Particle swarm optimizers with globally coupled social learning, coupled
//! map lattices, benchmark objectives and a seeded multi-trial harness.
//!
//! ```
//! use gcpso_core::{run, Algorithm, Objective, OptimizerConfig};
//!
//! let objective = Objective::by_name("sphere", 2).unwrap();
//! let config = OptimizerConfig::new(Algorithm::Gcpso, 20, 2, 200).with_seed(1);
//! let report = run(&config, &objective).unwrap();
//! assert!(report.final_best_value < 1e-3);
//! ```

pub mod cml;
pub mod config;
pub mod error;
pub mod harness;
pub mod objectives;
pub mod optimizers;
pub mod rng;
pub mod swarm;

pub use cml::{orbit, LatticeState, LocalMap, Topology};
pub use config::{AlgorithmSpec, Budget, ExperimentConfig, ObjectiveSpec};
pub use error::{Error, Result};
pub use harness::{
    compare, run_experiment, sweep_epsilon, ComparisonTable, ExperimentOutcome, ExperimentSummary,
    TrialReport,
};
pub use objectives::{make_shift_rotate, BaseFunction, Objective, ShiftRotate};
pub use optimizers::{
    coupled_social_term, run, run_with_stride, Algorithm, InertiaSchedule, Neighborhood, Optimizer,
    OptimizerConfig, Perturbation, VelocityTerms,
};
pub use rng::{FixedUniform, RngStream, UniformSource};
pub use swarm::{apply_bounds, clamp_velocity, init_swarm, Bounds, PointVec, SwarmState};
