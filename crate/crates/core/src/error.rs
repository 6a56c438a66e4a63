//! Crate-wide error type.

/// Errors surfaced by the detection pipeline and its providers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input text was empty after normalization.
    #[error("input text is empty after normalization")]
    EmptyInput,

    /// A text passed to an embedder was empty.
    #[error("cannot embed empty text")]
    EmptyText,

    /// Two vectors of different dimensionality were compared.
    #[error("embedding dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// A vector with zero norm cannot be normalized to unit length.
    #[error("zero-norm vector cannot be normalized")]
    ZeroVector,

    /// A network provider (search, embedding, LLM) failed.
    #[error("provider unavailable: {0}")]
    ProviderUnavailable(String),

    /// Fetching a URL failed.
    #[error("fetch failed for {url}: {reason}")]
    FetchFailed { url: String, reason: String },

    /// A fetched document contained no extractable text.
    #[error("no textual content extracted")]
    ExtractEmpty,

    /// The LLM returned an empty completion.
    #[error("model returned an empty completion")]
    EmptyCompletion,

    /// The fallback detector failed while a deferral was required.
    #[error("fallback detector unavailable: {0}")]
    FallbackUnavailable(String),

    /// A fallback adapter emitted a score outside [0, 1].
    #[error("fallback score {0} outside [0, 1]")]
    FallbackScoreOutOfRange(f64),

    /// A metric was asked to score an empty positive or negative class.
    #[error("metric requires at least one sample of each class")]
    EmptyClass,

    /// Degenerate statistical input (e.g. zero-variance differences).
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    /// Configuration file or override problem.
    #[error("config error: {0}")]
    Config(String),

    /// Dataset or corpus record could not be parsed.
    #[error("dataset error: {0}")]
    Dataset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
