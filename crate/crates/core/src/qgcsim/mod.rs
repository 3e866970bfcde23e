//! Monte-Carlo harness for the nested-code scheme on the modulo-4 example:
//! seeded codebook construction with a shared shift layer, typicality-covering
//! encoders, the exhaustive sum-codebook decoder, and error-event tallies.

mod code;
mod experiment;

pub use code::{
    bin_of, build_nested_qgc, candidate_sum, channel_input, decode, encode, pair_for_mac,
    CoverOutcome, DecodeOutcome, DecodedPair, InputLaw, NestedQgc, MAX_BLOCK_LEN, MAX_CANDIDATES,
};
pub use experiment::{
    example1_sum_law, example1_target1, example1_target2, run_example1, stats_to_csv,
    stats_to_json, Example1Row, LChoice, SimConfig, TrialCounts, TrialStats,
};
