use num_complex::Complex64;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Lookup of a scheme name that is not registered.
    #[error("unknown scheme `{name}`; available schemes: {available}")]
    UnknownScheme { name: String, available: String },

    /// A tableau violates a structural invariant (dimensions, triangularity,
    /// finiteness).
    #[error("invalid tableau `{name}`: {reason}")]
    InvalidTableau { name: String, reason: String },

    /// A family parameter lies outside its admissible domain.
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    /// Requested order outside the supported range 2..=6.
    #[error("order must be between 2 and 6, got {0}")]
    OrderOutOfRange(u32),

    /// Evaluation at a singular point of a closed-form expression.
    #[error("singular evaluation: {0}")]
    Singularity(String),

    /// The stage system `I - z^2 A` is singular at `z`.
    #[error("stability function pole at stage {stage} (z = {z})")]
    StabilityPole { stage: usize, z: Complex64 },

    /// `R(i nu)` vanished, so its argument is undefined.
    #[error("amplification factor is zero at nu = {nu}")]
    ZeroAmplification { nu: f64 },

    /// Fixed-point stage iteration failed to meet the stopping criterion.
    /// For `y' = lambda y` this signals `h^2 lambda^2 |a_ii| >= 1`, i.e. a
    /// step size above the contraction threshold.
    #[error(
        "stage {stage} fixed-point iteration did not converge after {iterations} iterations \
         (last residual {residual:.3e})"
    )]
    NonConvergence {
        stage: usize,
        iterations: usize,
        residual: f64,
    },

    /// A step of an integration failed; wraps the stage error.
    #[error("step {step} (t = {t}) failed: {source}")]
    StepFailed {
        step: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    /// The log-log slope of a phase-error fit is not close to an integer,
    /// usually because the sampled range straddles two asymptotic regimes.
    #[error("indeterminate order: fitted slope {slope:.3} is not within {tol} of an integer")]
    IndeterminateOrder { slope: f64, tol: f64 },

    /// Invalid integration or grid configuration.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A cached PDE reference solution is required but absent.
    #[error("missing reference solution `{path}`; generate it with: {hint}")]
    MissingReference { path: String, hint: String },

    /// I/O failure, tagged with the path involved.
    #[error("i/o error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// A file exists but cannot be parsed.
    #[error("malformed file `{path}`: {reason}")]
    Malformed { path: String, reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
