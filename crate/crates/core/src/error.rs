use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolarError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("layer index {layer} out of range for a network with {layers} layers")]
    LayerOutOfRange { layer: usize, layers: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("stale cascade cache: {0}")]
    StaleCache(String),

    #[error("degenerate instance: {0}")]
    Degenerate(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("unsupported activation set: {0}")]
    Unsupported(String),

    #[error("SNR is infinite: {0}")]
    InfiniteSnr(String),
}

pub type Result<T> = std::result::Result<T, PolarError>;
