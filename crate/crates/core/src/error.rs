use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FusionError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver diverged at iteration {iteration}: objective is not finite")]
    Divergence { iteration: usize },
}

impl FusionError {
    /// Short category tag, used by front ends to classify failures.
    pub fn category(&self) -> &'static str {
        match self {
            FusionError::Shape(_) => "shape",
            FusionError::Parameter(_) => "parameter",
            FusionError::Degenerate(_) => "degenerate",
            FusionError::Config(_) => "config",
            FusionError::Divergence { .. } => "divergence",
        }
    }
}

pub type Result<T> = core::result::Result<T, FusionError>;

macro_rules! shape_err {
    ($($arg:tt)*) => { $crate::error::FusionError::Shape(alloc::format!($($arg)*)) };
}
pub(crate) use shape_err;
