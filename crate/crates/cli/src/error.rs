use appletgen_core::agents::BackendError;
use appletgen_core::embedding::{EmbedError, IndexError};
use appletgen_core::eval::EvalError;
use appletgen_core::pairing::PairingError;
use appletgen_core::{CatalogError, PipelineError};

/// Every failure the CLI reports, each with its own exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// A metric invariant or internal consistency check failed.
    #[error("internal error: {0}")]
    Internal(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("configuration: {0}")]
    Config(String),
    /// Malformed catalog, vector, gold, prediction or query input.
    #[error("invalid input: {0}")]
    Input(String),
    /// The embedding provider or the language-model backend failed.
    #[error("provider: {0}")]
    Provider(String),
    /// Every queued pair was tried without passing the verifier.
    #[error("no applet passed verification: {0}")]
    Exhausted(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Internal(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Input(_) => 4,
            CliError::Provider(_) => 5,
            CliError::Exhausted(_) => 6,
        }
    }

    pub fn input(context: impl std::fmt::Display, err: impl std::fmt::Display) -> Self {
        CliError::Input(format!("{context}: {err}"))
    }
}

impl From<CatalogError> for CliError {
    fn from(e: CatalogError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn embed_is_provider(e: &EmbedError) -> bool {
    matches!(
        e,
        EmbedError::Unavailable(_) | EmbedError::BadResponse(_) | EmbedError::DimMismatch { .. }
    )
}

impl From<IndexError> for CliError {
    fn from(e: IndexError) -> Self {
        let provider = match &e {
            IndexError::Provider { source, .. } | IndexError::Query(source) => embed_is_provider(source),
            IndexError::DimMismatch { .. } => true,
            _ => false,
        };
        if provider {
            CliError::Provider(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

impl From<BackendError> for CliError {
    fn from(e: BackendError) -> Self {
        match e {
            BackendError::Script(_) => CliError::Config(e.to_string()),
            _ => CliError::Provider(e.to_string()),
        }
    }
}

impl From<PairingError> for CliError {
    fn from(e: PairingError) -> Self {
        match e {
            PairingError::Synonyms(_) => CliError::Config(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::EmptyQuery => CliError::Input(e.to_string()),
            PipelineError::Config(_) => CliError::Config(e.to_string()),
            PipelineError::Index(e) => e.into(),
            PipelineError::Pairing(e) => e.into(),
            PipelineError::Catalog(e) => e.into(),
            PipelineError::Backend(e) => e.into(),
            PipelineError::State(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Invariant(_) => CliError::Internal(e.to_string()),
            EvalError::InvalidK => CliError::Usage(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}
