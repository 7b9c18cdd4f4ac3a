use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("resolution error: feature of size {feature} needs h <= {max_h}, got {h}")]
    Resolution { feature: f64, max_h: f64, h: f64 },
    #[error("resource error: {needed} exceeds budget {budget}")]
    Budget { needed: usize, budget: usize },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("no convergence after {iterations} iterations (best value {value}, residual {residual})")]
    Iteration {
        iterations: usize,
        value: f64,
        residual: f64,
    },
    #[error("empty result: {0}")]
    Empty(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
