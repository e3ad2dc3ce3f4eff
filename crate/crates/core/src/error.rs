use thiserror::Error;

/// Errors raised by model construction, scale-function evaluation and simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("root finding failed: {reason} (bracket [{lo}, {hi}], f(lo)={f_lo}, f(hi)={f_hi})")]
    RootBracket {
        reason: String,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("{what} did not converge ({detail})")]
    NonConvergence { what: &'static str, detail: String },

    #[error("x = {x} lies outside the cached grid [0, {x_max}]")]
    OutOfGrid { x: f64, x_max: f64 },

    #[error("unsupported model: {0}")]
    Unsupported(String),

    #[error("inadmissible dividend: lump {lump} with surplus {surplus} at t = {t}")]
    InadmissibleStrategy { lump: f64, surplus: f64, t: f64 },

    #[error("{censored} of {n_paths} paths reached the horizon {horizon} before stopping")]
    Censored {
        censored: usize,
        n_paths: usize,
        horizon: f64,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// True for errors caused by bad input rather than numerical trouble.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidModel(_) | Error::InvalidArgument(_) | Error::Domain(_) | Error::Unsupported(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
