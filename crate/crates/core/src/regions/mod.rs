//! Achievable-rate evaluation for the two-encoder setting: auxiliary-channel
//! assignments, single-letter bound evaluation, covering/packing feasibility
//! thresholds, frontier geometry, and a randomized assignment search.

pub mod assignment;
pub mod eval;
pub mod hull;
pub mod search;
pub mod thresholds;

pub use assignment::{
    builtin_assignment, load_assignment, Assignment, CombinedAssignment, GpAssignment,
    QgcAssignment,
};
pub use eval::{
    combined_rates, gp_rates, group_code_sum_rate, qgc_sum_rate, CombinedRates, GammaReport,
    GpRates, GroupCodeReport, QgcSumRate,
};
pub use hull::{region_hull, RateRegion};
pub use search::{search_gp_region, SearchConfig, SearchOutcome};
pub use thresholds::{covering_threshold, packing_threshold, CondLaw, ThresholdReport};
