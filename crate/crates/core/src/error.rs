use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("wavelength {wavelength:e} m outside the validity window [{min:e}, {max:e}] m of index model `{model}`")]
    OutOfRange {
        model: String,
        wavelength: f64,
        min: f64,
        max: f64,
    },

    #[error("no phase matching possible: {0}")]
    NoPhaseMatching(String),

    #[error("paraxial guard violated: |q|/k = {ratio:.4} exceeds bound {bound}")]
    Paraxial { ratio: f64, bound: f64 },

    #[error("sampling guard violated: {reason} (minimum sample count at this spacing: {min_samples})")]
    Sampling { reason: String, min_samples: usize },

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("joint grid incompatible with pump spectrum: needs pump q-extent of at least {required_q_extent:e} rad/m")]
    GridIncompatible { required_q_extent: f64 },

    #[error("root finding failed: {0}")]
    Root(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Whether this error stems from the user's configuration rather than
    /// the physics or numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::InvalidInput(_) | Error::Io(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
