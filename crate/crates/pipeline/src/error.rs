use thiserror::Error;
use uisuggest_core::CoreError;
use uisuggest_providers::ProviderError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PromptError {
    #[error("user feedback is empty")]
    EmptyFeedback,
    #[error("prompt field {0} is empty")]
    EmptyField(&'static str),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("response is not valid JSON: {0}")]
    MalformedJson(String),
    #[error("response does not match the expected schema: {0}")]
    SchemaViolation(String),
    #[error("expected {expected} modifications, found {found}")]
    CountMismatch { found: usize, expected: usize },
}

/// Why a generation run produced no suggestions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerationError {
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
    #[error("session cannot be generated for: {0}")]
    InvalidSession(String),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Image(#[from] CoreError),
}
