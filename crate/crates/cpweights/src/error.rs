use std::path::PathBuf;

/// Errors raised by toolkit operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("infinite value: {0}")]
    Infinite(String),
    #[error("singular evaluation at x = {x}")]
    Singular { x: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

/// Outcome of a quotient whose denominator may vanish.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Ratio {
    Finite(f64),
    /// positive numerator over a zero denominator
    Infinite,
    /// zero over zero
    Undefined,
}

impl Ratio {
    pub fn of(num: f64, den: f64) -> Ratio {
        if den > 0.0 && den.is_finite() {
            Ratio::Finite(num / den)
        } else if den.is_infinite() {
            Ratio::Finite(0.0)
        } else if num > 0.0 {
            Ratio::Infinite
        } else {
            Ratio::Undefined
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Ratio::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Numeric view used by sweeps: infinite maps to `f64::INFINITY`, undefined to NaN.
    pub fn as_f64(self) -> f64 {
        match self {
            Ratio::Finite(v) => v,
            Ratio::Infinite => f64::INFINITY,
            Ratio::Undefined => f64::NAN,
        }
    }
}
