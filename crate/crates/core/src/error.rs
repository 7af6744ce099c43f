use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("invalid discretization: {0}")]
    InvalidDiscretization(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point ({x}, {y}) lies outside the window")]
    OutsideWindow { x: f64, y: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    /// Accept-reject exceeded its proposal budget for one point.
    #[error(
        "simulation stalled at point {point_index} after {rejects} rejections \
         (theta = {theta}, coverage = {coverage:.4})"
    )]
    SimulationStall {
        point_index: usize,
        rejects: usize,
        theta: f64,
        coverage: f64,
    },

    #[error("replicate {index}: {source}")]
    Replicate {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-parsable code used on the command line.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidWindow(_) => "invalid_window",
            Error::InvalidDiscretization(_) => "invalid_discretization",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::OutsideWindow { .. } => "outside_window",
            Error::Degenerate(_) => "degenerate_input",
            Error::Estimation(_) => "estimation",
            Error::SimulationStall { .. } => "simulation_stall",
            Error::Replicate { source, .. } => source.code(),
            Error::Parse(_) => "parse",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    /// Process exit code: 2 parse/config, 3 numeric/estimation, 4 stall.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidWindow(_)
            | Error::InvalidDiscretization(_)
            | Error::InvalidParameter(_)
            | Error::Parse(_)
            | Error::Config(_)
            | Error::Io(_)
            | Error::Json(_) => 2,
            Error::OutsideWindow { .. } | Error::Degenerate(_) | Error::Estimation(_) => 3,
            Error::SimulationStall { .. } => 4,
            Error::Replicate { source, .. } => source.exit_code(),
        }
    }
}
