//! Exact probability and information measures over small finite alphabets:
//! pmfs, dense named-axis joints, entropy/conditional entropy/mutual
//! information in bits, robust typical sets and their enumeration.

mod joint;
mod pmf;
pub(crate) mod typical;

pub use joint::{decode_index, JointPmf};
pub use pmf::{entropy_bits, Pmf, MASS_TOL};
pub use typical::{
    enumerate_product_typical, is_jointly_typical, is_typical, product_typical_cardinality,
    product_typical_log2_cardinality, TypicalComponent, TypicalSetSpec, UQPair,
};
