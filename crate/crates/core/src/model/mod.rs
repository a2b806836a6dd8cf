//! Model definition: alphabets, offspring laws and kernels, the mean matrix
//! with its spectral data, exponential tilting, and the typed tree.

mod alphabet;
mod kernel;
mod law;
mod spec;
mod spectral;
mod tree;

pub use alphabet::{multiplicity, OffspringConfig, TypeAlphabet};
pub use kernel::{mean_matrix, product_kernel, MeanMatrix, OffspringKernel, PairKernel};
pub use law::{find_critical_tilt, solve_tilted_mean, CriticalTilt, OffspringLaw};
pub use spec::GWSpec;
pub use spectral::{analyze_model, perron_vector, SpectralData};
pub use tree::{Node, TypedTree};
