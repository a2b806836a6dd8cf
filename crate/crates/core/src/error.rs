use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("not weakly irreducible: {0}")]
    NotWeaklyIrreducible(String),

    #[error("tilt undefined: {0}")]
    TiltUndefined(String),

    #[error("mean 1 unreachable: {0}")]
    MeanUnreachable(String),

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    EigenNoConvergence { iterations: usize, residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("refused: estimated {estimate:e} trees exceeds the guard of {limit:e}")]
    TooLarge { estimate: f64, limit: f64 },

    #[error("conditioning on null event: {0}")]
    NullConditioning(String),

    #[error("size {0} is not admissible")]
    NotAdmissible(usize),

    #[error("rejection budget exhausted after {attempts} attempts")]
    BudgetExhausted { attempts: u64 },

    #[error("no edges: the tree has a single vertex")]
    NoEdges,

    #[error("precondition failed ({reason}): {detail}")]
    Precondition { reason: &'static str, detail: String },

    #[error("dual solver did not converge after {iterations} iterations (residual {residual:e})")]
    DualNoConvergence { iterations: usize, residual: f64 },

    #[error("certificate check failed: {0}")]
    Certificate(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable reason code, printed by the CLI on exit 1.
    pub fn reason_code(&self) -> &'static str {
        match self {
            Error::InvalidModel(_) => "invalid_model",
            Error::NotWeaklyIrreducible(_) => "not_weakly_irreducible",
            Error::TiltUndefined(_) => "tilt_undefined",
            Error::MeanUnreachable(_) => "mean_unreachable",
            Error::EigenNoConvergence { .. } => "eigen_no_convergence",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::TooLarge { .. } => "too_large",
            Error::NullConditioning(_) => "null_conditioning",
            Error::NotAdmissible(_) => "not_admissible",
            Error::BudgetExhausted { .. } => "budget_exhausted",
            Error::NoEdges => "no_edges",
            Error::Precondition { reason, .. } => reason,
            Error::DualNoConvergence { .. } => "dual_no_convergence",
            Error::Certificate(_) => "certificate",
            Error::Config { .. } => "config",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
