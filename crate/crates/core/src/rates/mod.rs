//! Rate functions: Cramér transform, pair rate, offspring rate, k-generation
//! rates, tilted kernels and constrained relative-entropy minimisation.

mod cramer;
mod dual;
mod genetic;
mod kgen;
mod offspring;
mod pair;
mod value;

pub use cramer::{cramer_kary_closed, cramer_poisson_closed, cramer_rate, cramer_rate_grid};
pub use dual::{
    constrained_entropy_min, contraction_infimum, solve_entropy_dual, DualBlock, DualSolution, DUAL_DIVERGENCE,
    DUAL_GRAD_TOL, DUAL_MAX_ITER,
};
pub use genetic::{critical_genetic_laws, genetic_fixed_point, genetic_rate, genetic_residual, genetic_rho};
pub use kgen::{kgen_rate_jk, stationary_kgen_measure, STATIONARY_PATTERN_LIMIT};
pub use offspring::{
    log_partition, offspring_rate_j, random_shift_invariant_measure, tilted_kernel_from_measure,
    variational_functional, zero_rate_measure, TiltCertificate, TiltedKernel,
};
pub use pair::{
    critical_law, marginals_compatible, markov_entropy, pair_rate, pair_rate_kary_closed, pair_rate_poisson_closed,
};
pub use value::{relative_entropy, relative_entropy_vec, RateValue, Reason};
