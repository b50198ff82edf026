use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("cannot parse {input:?} as a rational: {reason}")]
    ParseRational { input: String, reason: &'static str },

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("Laurent row {requested} requested but the table holds rows 0..{built}")]
    RowOutOfOrder { requested: usize, built: usize },

    #[error("table is incomplete for order {0}")]
    IncompleteTable(usize),

    #[error("truncation order {requested} outside 1..={available}")]
    TruncationOutOfRange { requested: usize, available: usize },

    #[error("node polynomial system for n = {n} is inconsistent at equation m = {m}")]
    InconsistentSystem { n: u32, m: i64 },

    #[error("d-sequence has {have} terms, n = {n} needs {need}")]
    ShortDSequence { n: u32, have: usize, need: usize },

    #[error("Jacobi iteration did not converge within {0} sweeps")]
    NoConvergence(usize),

    #[error("invalid oracle problem: {0}")]
    InvalidProblem(String),

    #[error(
        "basis not converged: level {level} moved by {shift:e} between N = {small} and N = {large} (limit {limit:e})"
    )]
    BasisNotConverged {
        level: usize,
        shift: f64,
        small: usize,
        large: usize,
        limit: f64,
    },

    #[error("asymptotic breakdown at level {level}: {note}")]
    AsymptoticBreakdown { level: usize, note: String },

    #[error("malformed machine-format input: {0}")]
    Format(String),
}
