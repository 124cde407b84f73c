//! Crate-wide error type and exit-code mapping.

/// Everything that can go wrong, grouped so the CLI can map failures onto
/// stable exit codes: configuration/validation problems exit with 2, numeric
/// failures (non-convergence, singular fits, clipped support) with 3.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("wavelength {lambda_nm} nm outside validity window [{lo} nm, {hi} nm] of Sellmeier set '{set}'")]
    WavelengthOutOfRange {
        lambda_nm: f64,
        lo: f64,
        hi: f64,
        set: String,
    },

    #[error("invalid {what}: {why}")]
    InvalidInput { what: &'static str, why: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error in {path}: {why}")]
    Parse { path: String, why: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("no phase-matching angle found: {0}")]
    NoPhaseMatch(String),

    #[error("root bracketing failed: {0}")]
    Bracket(String),

    #[error("spectral support clipped at {location}: edge intensity {edge:.3e} of peak exceeds {limit:.1e}; enlarge the span")]
    SupportClipped {
        location: &'static str,
        edge: f64,
        limit: f64,
    },

    #[error("gaussian fit is not positive definite ({invariant}): {details}")]
    FitInvariant {
        invariant: &'static str,
        details: String,
    },

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 for configuration/validation errors,
    /// 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::WavelengthOutOfRange { .. }
            | Error::InvalidInput { .. }
            | Error::Config(_)
            | Error::Parse { .. }
            | Error::Io { .. } => 2,
            Error::NoPhaseMatch(_)
            | Error::Bracket(_)
            | Error::SupportClipped { .. }
            | Error::FitInvariant { .. }
            | Error::Numeric(_) => 3,
        }
    }

    /// Stable machine-readable tag used in the CLI's JSON error line.
    pub fn code(&self) -> &'static str {
        match self {
            Error::WavelengthOutOfRange { .. } => "wavelength_out_of_range",
            Error::InvalidInput { .. } => "invalid_input",
            Error::Config(_) => "config",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
            Error::NoPhaseMatch(_) => "no_phase_match",
            Error::Bracket(_) => "bracket",
            Error::SupportClipped { .. } => "support_clipped",
            Error::FitInvariant { .. } => "fit_invariant",
            Error::Numeric(_) => "numeric",
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
