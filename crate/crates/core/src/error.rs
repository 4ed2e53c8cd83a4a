use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("potential {potential} is not allowed on domain {domain}")]
    IncompatibleDomain { potential: String, domain: String },

    #[error("point does not belong to domain {domain}: {reason}")]
    InvalidPoint { domain: String, reason: String },

    #[error("need at least {required} points, got {got}")]
    TooFewPoints { required: usize, got: usize },

    #[error("retraction step of length {length} exceeds the limit {limit}")]
    StepTooLarge { length: f64, limit: f64 },

    #[error("points {0} and {1} coincide; gradient is undefined")]
    CoincidentPoints(usize, usize),

    #[error("energy for N={n} must be finite, got {energy}")]
    InvalidEnergy { n: usize, energy: f64 },

    #[error("energy table has no rows")]
    EmptyTable,

    #[error("no table entry for N={0}")]
    MissingEntry(usize),

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("invalid optimizer settings: {0}")]
    InvalidSettings(String),

    #[error("search budget too small: {restarts} restarts, at least {required} required")]
    BudgetTooSmall { restarts: usize, required: usize },

    #[error("N_max={0} is outside the supported range 2..=8")]
    NMaxOutOfRange(usize),

    #[error("asymptotic model coefficient `{0}` is not resolved")]
    UnresolvedCoefficient(&'static str),

    #[error("model family {model} does not match table metadata ({domain}, {potential})")]
    FamilyMismatch {
        model: String,
        domain: String,
        potential: String,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
