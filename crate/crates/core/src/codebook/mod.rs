//! Hierarchical multi-resolution beam codebooks.

mod candidates;
mod design;
mod gains;
mod hierarchy;
mod mask;
mod serialize;

pub use candidates::{
    make_candidates_beamsteering, make_candidates_dft, make_candidates_quantized, CandidateDescriptor, CandidateSet,
};
pub use design::{ideal_precoder, omp_hybrid_design, BeamVector, IdealSolver, CONDITION_THRESHOLD, DEFAULT_LOADING, HYBRID_LOADING};
pub use gains::{
    combined_error, gain_analysis, level_gains, subset_pair_gains, DirectionGain, GainAnalysis, LevelGains,
    SubsetPairGains,
};
pub use hierarchy::{build_codebook, nominal_link_gains, BeamConstraint, HierarchicalCodebook};
pub use mask::{subset_mask, CodebookLayout, SubsetMask};
pub use serialize::{BeamEntry, CodebookDump};
