use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("no overlap window: switch functions never overlap")]
    NoOverlapWindow,

    #[error("integration did not converge: defect {defect:.3e} exceeds tolerance {tolerance:.3e}")]
    Convergence { defect: f64, tolerance: f64 },

    #[error("no oscillation: fitted amplitude {amplitude:.3e} below 1e-6")]
    NoOscillation { amplitude: f64 },

    #[error("insufficient samples: {got} given, at least {need} required")]
    InsufficientSamples { got: usize, need: usize },

    #[error("insufficient span: {span} us is too short for a fringe of period {period} us")]
    InsufficientSpan { span: f64, period: f64 },

    #[error("trace contains no data rows")]
    EmptyTrace,

    #[error("line {line}: {message}")]
    Trace { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
