//! Monte Carlo diagnostics for the splitting chains: drift estimates,
//! return-time tails and their rate functions, time averages, triad
//! thermalization and entrance-probability scaling.

pub mod drift;
pub mod entrance;
pub mod measure;
pub mod rate;
pub mod return_time;
pub mod thermalization;

pub use drift::{estimate_drift, fit_drift, DriftFit, DriftReport};
pub use entrance::{entrance_scaling, EntrancePoint, EntranceScaling};
pub use measure::{empirical_measure, EmpiricalMeasure, Tightness};
pub use rate::{RateFunctions, RateKind};
pub use return_time::{return_time_samples, ReturnTimes};
pub use thermalization::{check_margins, state_with_gap, thermalization_scan, AssumptionMargins, ThermalizationPoint, ThermalizationScan};
