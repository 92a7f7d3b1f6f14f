use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("outside validity window: {0}")]
    Window(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("potential infinite: {0}")]
    PotentialInfinite(String),
    #[error("divergent integral: {0}")]
    Divergent(String),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("tail law inconsistent with grid values: {0}")]
    TailMismatch(String),
    #[error("invalid bracket: {0}")]
    Bracket(String),
}

pub type Result<T> = std::result::Result<T, Error>;
