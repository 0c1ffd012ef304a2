use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{func}: argument out of domain ({detail})")]
    Domain { func: &'static str, detail: String },

    #[error("{func}: result not representable for order {order}, argument {arg:e}")]
    Overflow {
        func: &'static str,
        order: u32,
        arg: f64,
    },

    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("invalid scene: {0}")]
    Scene(String),

    #[error("kernel evaluated at coincident points (distance {distance:e})")]
    Coincident { distance: f64 },

    #[error("hermitian eigensolver did not converge for {n}x{n} matrix (off-diagonal residual {residual:e})")]
    NoConvergence { n: usize, residual: f64 },

    #[error("singular matrix: pivot {pivot:e} in column {column} (threshold {threshold:e})")]
    Singular {
        column: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("ill-conditioned boundary system (reciprocal condition estimate {rcond:e}); kappa may be close to a clamped-plate eigenvalue of the obstacle")]
    IllConditioned { rcond: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{context}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    /// Wraps the error with a human-readable context line.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
