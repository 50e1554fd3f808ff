//! Adaptive hierarchical channel estimation.

mod baseline;
mod exhaustive;
mod measure;
mod multi;
mod power;
mod single;
mod steps;
mod trace;

pub use baseline::{analog_only_baseline, targets_from_estimate, targets_from_paths, SteeringTarget};
pub use exhaustive::exhaustive_estimate;
pub use measure::{measure, measure_matrix, Interference, MeasurementContext};
pub use multi::{estimate_multi_path, path_signature, MultiPathEstimate};
pub use power::{
    allocate_power_corollary1, allocate_power_corollary2, theorem1_bound, theorem1_terms, BudgetAllocation,
    TargetAllocation,
};
pub use single::{estimate_single_path, Estimation, EstimationOptions, SinglePathEstimate};
pub use steps::{exhaustive_slots, feedback_bits, multi_path_slots, single_path_slots, StepCount};
pub use trace::{write_trace_csv, StageRecord, TRACE_SCHEMA};
