use thiserror::Error;

/// Errors raised anywhere in the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    #[error("degenerate spectrum: gap {gap:e} below tolerance")]
    DegenerateSpectrum { gap: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("config parse error in {path}: {message}")]
    ConfigParse { path: String, message: String },

    #[error("norm drift {drift:e} exceeded limit {limit:e} at t = {t}")]
    NormDriftExceeded { drift: f64, limit: f64, t: f64 },

    #[error("adaptive step rejected {rejections} times in a row at t = {t}")]
    StepRejectionExhausted { rejections: usize, t: f64 },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("consecutive waypoints {index} and {} are antipodal", index + 1)]
    AntipodalWaypoints { index: usize },

    #[error("a geodesic path needs at least two waypoints, got {0}")]
    TooFewWaypoints(usize),

    #[error("rotation regime: drive rate {capital_omega} is not below the gap {omega0}")]
    RotationRegime { omega0: f64, capital_omega: f64 },

    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),

    #[error("passage bound not applicable: endpoint overlap {overlap:e} is not orthogonal")]
    NotApplicable { overlap: f64 },

    #[error("oracle mismatch: projected and full-state trajectories differ by {distance:e} (limit {limit:e})")]
    OracleMismatch { distance: f64, limit: f64 },

    #[error("{failed} verification check(s) failed")]
    VerificationFailed { failed: usize },

    #[error("trajectory file missing: {0}")]
    MissingTrajectory(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line harness.
    ///
    /// 1 config, 2 numerical failure, 3 oracle mismatch, 4 verification failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_)
            | Error::ConfigParse { .. }
            | Error::AntipodalWaypoints { .. }
            | Error::TooFewWaypoints(_)
            | Error::RotationRegime { .. }
            | Error::MissingTrajectory(_)
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_) => 1,
            Error::DegenerateInput(_)
            | Error::DegenerateSpectrum { .. }
            | Error::NormDriftExceeded { .. }
            | Error::StepRejectionExhausted { .. }
            | Error::TooFewSamples { .. }
            | Error::NumericalInconsistency(_)
            | Error::NotApplicable { .. } => 2,
            Error::OracleMismatch { .. } => 3,
            Error::VerificationFailed { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
