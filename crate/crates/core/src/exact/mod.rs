//! Exact size laws, the admissible-size lattice, exhaustive enumeration of
//! small trees and exact distributions of empirical statistics.

mod admissible;
mod distribution;
mod enumerate;
mod sizelaw;

pub use admissible::{admissible_set, AdmissibleSet};
pub use distribution::{
    conditioned_event_probability, exact_statistic_distribution, statistic_key, Backend, ExactDistribution,
    StatKey, StatKind,
};
pub use enumerate::{enumerate_trees, estimate_tree_count, TreeEnumerator, ENUMERATION_LIMIT};
pub use sizelaw::{size_law, SizeLawTable};
