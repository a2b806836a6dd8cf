//! Desk-scale numerical experiments. Each produces a [`CurveSeries`] (or a
//! small report) that can be written as CSV with a provenance header.

mod curve;
mod decay;
mod genetic;
mod jk;
mod ldp;
mod stats;
mod tilt;

pub use curve::{sha256_hex, spec_digest, CsvHeader, CurveRow, CurveSeries};
pub use decay::decay_curve;
pub use genetic::{genetic_scan, GeneticScan};
pub use jk::{is_nondecreasing, jk_monotonicity};
pub use ldp::{grid_infimum_pair, ldp_curve, GridInfimum, LdpMethod, MC_STREAMS};
pub use stats::{chi_square_gof, chi_square_two_sample, sampler_fit, ChiSquare, SamplerFit, MIN_EXPECTED};
pub use tilt::tilt_invariance_report;
