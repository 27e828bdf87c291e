use std::fmt;

/// Errors produced by graph construction, game evaluation, and the solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An edge references a vertex outside `1..=n` or joins a vertex to itself.
    InvalidEdge { edge: (usize, usize), reason: String },
    /// A vertex (1-based) has no incident edge.
    IsolatedVertex { vertex: usize },
    /// The operation requires a connected graph.
    Disconnected,
    /// A numeric parameter is outside its admissible range.
    InvalidParameter { name: String, message: String },
    /// A game definition is inconsistent (dimensions, signs, definiteness).
    InvalidGame(String),
    /// Gradient evaluation left the cost's domain: a link has (almost) no
    /// remaining capacity. Indices are 1-based.
    CapacityExhausted { link: usize, slack: f64 },
    /// A player's gradient evaluation failed inside a solver step.
    /// The player index is 1-based.
    PlayerGradient { player: usize, source: Box<Error> },
    /// An iterative solver hit its iteration budget before the tolerance.
    NonConvergence { iterations: u64, residual: f64 },
    /// A step failed; wraps the underlying error with the iteration index.
    StepFailed { iteration: u64, source: Box<Error> },
    /// A trace does not have the shape an analysis requires.
    UnsupportedTrace(String),
    /// A textual input (edge list, game description) failed to parse.
    Parse { line: usize, message: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidEdge { edge, reason } => {
                write!(f, "invalid edge ({}, {}): {}", edge.0, edge.1, reason)
            }
            Error::IsolatedVertex { vertex } => {
                write!(f, "vertex {} has no incident edge", vertex)
            }
            Error::Disconnected => write!(f, "graph is not connected"),
            Error::InvalidParameter { name, message } => {
                write!(f, "invalid parameter {}: {}", name, message)
            }
            Error::InvalidGame(msg) => write!(f, "invalid game: {}", msg),
            Error::CapacityExhausted { link, slack } => {
                write!(f, "link {} capacity exhausted (slack {:.3e})", link, slack)
            }
            Error::PlayerGradient { player, source } => {
                write!(f, "gradient of player {} failed: {}", player, source)
            }
            Error::NonConvergence { iterations, residual } => {
                write!(
                    f,
                    "no convergence after {} iterations (residual {:.3e})",
                    iterations, residual
                )
            }
            Error::StepFailed { iteration, source } => {
                write!(f, "step {} failed: {}", iteration, source)
            }
            Error::UnsupportedTrace(msg) => write!(f, "unsupported trace: {}", msg),
            Error::Parse { line, message } => write!(f, "parse error at line {}: {}", line, message),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: name.to_string(),
            message: format!("must be finite and > 0, got {}", value),
        })
    }
}
