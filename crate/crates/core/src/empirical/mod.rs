//! Empirical measures of a typed tree and the maps between them.
//!
//! Counts are kept as integers so the exact combinatorial identities (pair
//! measure as a contraction of the offspring measure, the root-only shift
//! defect) can be checked without rounding.

mod kgen;
mod offspring;
mod pair;

pub use kgen::{is_shift_invariant_k, kgen_counts, kgen_measure, shift_defect_k, GenMeasureK, Pattern};
pub use offspring::{
    contraction_f, is_shift_invariant, offspring_counts, offspring_measure, shift_defect,
    OffspringCounts, OffspringMeasure,
};
pub use pair::{pair_counts, pair_measure, PairCounts, PairMeasure};
