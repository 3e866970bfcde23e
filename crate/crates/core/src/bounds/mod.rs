//! Converse-side verification machinery: the brute-forced entropy-gap table,
//! the shift-set classification with its anchor-law decompositions, and the
//! exhaustive-plus-stochastic search over the relaxed sum-rate objective.

mod decompose;
mod outer;
mod ptp;

pub use decompose::{
    classify_rules, mix_noise, shift_set, solve_pair_weights, solve_triple_weights,
    verify_decompositions, MixtureCase, MixtureSweepReport, NoiseMixture, RuleClassification,
    ADJACENT_ANCHORS, SPACED_ANCHORS, TRIPLE_ANCHORS,
};
pub use outer::{
    gp_outer_max, relaxed_cell_objective, OuterCandidate, OuterReport, OuterSearchConfig,
    CEILING_SLACK, SUM_RATE_CEILING,
};
pub use ptp::{
    enumerate_rules, noise_rows, ptp_objective, verify_ptp_table, InputRule, NoiseRow,
    PtpTableReport, PtpVerifyConfig, RowOutcome, GAP_TOL,
};
