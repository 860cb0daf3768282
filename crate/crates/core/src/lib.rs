//! Random-splitting Markov chains built from exactly integrable vector
//! fields, with the Lorenz '96 and Galerkin-truncated 2D Euler splittings
//! and the Monte Carlo diagnostics used to study their stability.

pub mod analysis;
pub mod elliptic;
pub mod error;
pub mod euler;
pub mod lorenz96;
pub mod numerics;
pub mod rng;
pub mod splitting;
pub mod stats;

pub use error::{Result, SplitError};
pub use rng::{ChainRng, StreamSeed};
pub use splitting::{
    compose_cycle, entrance_event, estimate_entrance_probability, run_chain, sample_cycle, step, CycleProgram,
    FlowMapId, RegionSpec, Splitting, StateVector, StepTrace, Trajectory,
};
