use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the simulator and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A reward fell outside the supported `[0, 1]` range.
    #[error("reward {0} outside [0,1]")]
    RewardOutOfRange(f64),

    /// A reward arrived for an arm with no pull in flight.
    #[error("reward observed without a pending pull")]
    NoPendingPull,

    /// A statistic was requested for an arm that has no observed rewards.
    #[error("arm has no observed rewards")]
    NoObservations,

    #[error("invalid policy configuration: {0}")]
    InvalidPolicy(String),

    #[error("invalid arm model: {0}")]
    InvalidArm(String),

    #[error("invalid episode: {0}")]
    InvalidEpisode(String),

    /// An arm mean sits exactly on the threshold, so its gap is zero and
    /// every complexity constant would be infinite.
    #[error("degenerate instance: arm {arm} has mean equal to threshold {b}")]
    DegenerateInstance { arm: usize, b: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),

    #[error("failed to read config {path}: {source}")]
    ConfigIo {
        path: String,
        source: std::io::Error,
    },

    #[error("failed to parse config {path}: {message}")]
    ConfigParse { path: String, message: String },

    #[error("failed to write {path}: {source}")]
    OutputIo {
        path: String,
        source: std::io::Error,
    },
}
