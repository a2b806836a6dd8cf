//! Multitype Galton–Watson trees conditioned on their total size, the
//! empirical pair, offspring and k-generation measures of such trees, and
//! explicit large-deviation rate functions for those measures.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: types, offspring laws and kernels, the mean matrix and its
//!   Perron–Frobenius data, exponential tilting and the typed tree itself.
//! * [`exact`]: exact size laws, the admissible-size lattice, exhaustive
//!   enumeration and exact distributions of empirical statistics.
//! * [`sampler`]: reproducible unconditioned and size-conditioned samplers.
//! * [`empirical`]: the empirical measures and the maps between them.
//! * [`rates`]: Cramér transform, pair rate, offspring rate, k-generation
//!   rates, tilted kernels and constrained entropy minimisation.
//! * [`experiments`]: desk-scale numerical checks emitting CSV curves.
//! * [`verify`]: the acceptance criteria, runnable from tests and the CLI.

pub mod cli;
pub mod config;
pub mod empirical;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod model;
pub mod numeric;
pub mod rates;
pub mod sampler;
pub mod verify;

pub use error::{Error, Result};
pub use model::{
    analyze_model, find_critical_tilt, mean_matrix, multiplicity, product_kernel, GWSpec,
    MeanMatrix, OffspringConfig, OffspringKernel, OffspringLaw, PairKernel, SpectralData,
    TypeAlphabet, TypedTree,
};

/// Default tolerance for the shift-invariance gate.
pub const DEFAULT_SHIFT_TOL: f64 = 1e-9;

/// Default tolerance for `|rho - 1|` when deciding criticality.
pub const DEFAULT_CRITICALITY_TOL: f64 = 1e-9;
