use thiserror::Error;

/// Errors raised by the simulator modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("channel index {index} out of range for a basis with {n_channels} channels")]
    IndexOutOfRange { index: usize, n_channels: usize },

    #[error("Hermite recurrence lost all significant digits for n = {n} at x = {x}")]
    Precision { n: usize, x: f64 },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical blow-up at t = {t}: max |f| = {max_abs}")]
    Blowup { t: f64, max_abs: f64 },

    #[error("wavepacket reached the grid boundary at t = {t} (edge probability {density:.3e})")]
    WrapAround { t: f64, density: f64 },

    #[error("ill-conditioned channel matching: {0}")]
    Conditioning(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    /// True for errors caused by invalid inputs rather than by numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::IndexOutOfRange { .. }
                | Error::Config(_)
                | Error::Capacity(_)
                | Error::Unsupported(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
