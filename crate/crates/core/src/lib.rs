//! Numerical toolkit for two-user additive multiple-access channels where each
//! transmitter non-causally knows its own additive interference.
//!
//! The crate evaluates achievable rate regions for random-binning and nested
//! quasi-group-code strategies, brute-force-verifies the point-to-point
//! entropy bounds that underpin the converse side, and Monte-Carlo-simulates
//! the nested-code scheme on the quaternary doubly-dirty channel where the
//! structured strategy beats binning by a wide sum-rate margin.

pub mod bounds;
pub mod channels;
pub mod error;
pub mod modrings;
pub mod probinfo;
pub mod qgcsim;
pub mod regions;

pub use error::{Error, Result};
