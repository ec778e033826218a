use core::fmt;

use crate::config::ConfigError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// The environment configuration violates an invariant.
    Config(ConfigError),
    /// `step` received the wrong number of actions.
    ActionCount { expected: usize, got: usize },
    /// A `ChooseTeam` slot outside `0..=numAgents`.
    InvalidSlot { agent: usize, slot: usize, max: usize },
    /// `step` was called after the last step of the episode.
    EpisodeFinished,
    /// Scenario setup was attempted after the episode started.
    AlreadyStarted,
    UnknownAgent(usize),
    /// A scenario edit targeted a cell of the wrong kind or off the grid.
    InvalidCell { row: u16, col: u16, reason: &'static str },
    /// A logged trajectory could not be reproduced from its seed.
    ReplayMismatch { step: u32 },
}

impl From<ConfigError> for Error {
    fn from(e: ConfigError) -> Self {
        Error::Config(e)
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(e) => write!(f, "configuration error: {e}"),
            Error::ActionCount { expected, got } => {
                write!(f, "protocol error: expected {expected} actions, got {got}")
            }
            Error::InvalidSlot { agent, slot, max } => {
                write!(f, "protocol error: agent {agent} chose team slot {slot} (max {max})")
            }
            Error::EpisodeFinished => f.write_str("lifecycle error: episode already finished"),
            Error::AlreadyStarted => {
                f.write_str("lifecycle error: scenario setup after the first step")
            }
            Error::UnknownAgent(id) => write!(f, "unknown agent id {id}"),
            Error::InvalidCell { row, col, reason } => {
                write!(f, "invalid cell ({row}, {col}): {reason}")
            }
            Error::ReplayMismatch { step } => {
                write!(f, "replay diverged from the log at step {step}")
            }
        }
    }
}

impl core::error::Error for Error {}
