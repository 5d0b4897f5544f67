use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Two strings agree on more bits than the configured depth cap allows.
    #[error("strings {first} and {second} share a prefix longer than the depth cap of {cap} bits")]
    DepthCapExceeded {
        first: usize,
        second: usize,
        cap: usize,
    },

    #[error("{0}")]
    Domain(String),

    #[error("n = {n} is outside the supported range 1..={max}")]
    Size { n: usize, max: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
