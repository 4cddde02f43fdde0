use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// More than the allowed probability sits in the top Fock levels.
    #[error("truncation overflow: tail weight {tail:.3e} in the top levels (n_max = {n_max}){}", fmt_time(*.time))]
    TruncationOverflow {
        tail: f64,
        n_max: usize,
        time: Option<f64>,
    },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("integrator step size underflow at t = {t:.6e} (h = {h:.3e}); problem looks stiff")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("trajectory never returns: min |alpha| in window {min_abs:.4} > half of max {max_abs:.4}")]
    NoReturn { min_abs: f64, max_abs: f64 },

    #[error("degenerate design matrix: {0}")]
    DegenerateDesign(String),

    #[error("root bracket failure on [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

fn fmt_time(t: Option<f64>) -> String {
    match t {
        Some(t) => format!(" at t = {:.3} us", t * 1e6),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
