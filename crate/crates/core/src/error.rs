use thiserror::Error;

pub type Result<T, E = FtnError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum FtnError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The Gramian (or its symbol) is too close to singular for the requested
    /// operation. `min_eigenvalue` is the offending value.
    #[error("ill-conditioned Gramian: smallest eigenvalue {min_eigenvalue:.3e} is below threshold {threshold:.3e}{}", hint_suffix(.hint))]
    IllConditioned {
        min_eigenvalue: f64,
        threshold: f64,
        hint: Option<String>,
    },

    #[error("numeric failure in {what} (error estimate {error_estimate:.3e})")]
    NumericFailure { what: String, error_estimate: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn hint_suffix(hint: &Option<String>) -> String {
    match hint {
        Some(h) => format!(" ({h})"),
        None => String::new(),
    }
}

impl FtnError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        FtnError::InvalidArgument(msg.into())
    }

    pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
        if value.is_finite() {
            Ok(())
        } else {
            Err(FtnError::invalid(format!(
                "{name} must be finite, got {value}"
            )))
        }
    }

    /// Attaches a diagnostic hint to an ill-conditioning error; other variants
    /// pass through untouched.
    pub fn with_hint(self, text: impl Into<String>) -> Self {
        match self {
            FtnError::IllConditioned {
                min_eigenvalue,
                threshold,
                ..
            } => FtnError::IllConditioned {
                min_eigenvalue,
                threshold,
                hint: Some(text.into()),
            },
            other => other,
        }
    }
}
