//! Deterministic gridworld engine for the Cleanup social dilemma, extended
//! with hidden identity specializations and dynamic teams.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, configuration
//! parsing and the experiment CLI live in the `cleanup-harness` crate.
//!
//! Layout of one step is documented on [`Env::step`].

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod agents;
pub mod config;
pub mod env;
pub mod episode;
mod error;
pub mod identity;
pub mod metrics;
mod num;
pub mod observation;
pub mod rng;
pub mod teams;

pub use config::{ConfigError, EnvConfig, RowSpan};
pub use env::{
    apple_spawn_probability, Action, AgentOutcome, AgentRecord, CellKind, Env, EnvState, Pos,
    StepOutcome,
};
pub use episode::{run_episode, EpisodeLog, StepRecord};
pub use error::Error;
pub use identity::{Identity, IdentityProfile, Labor};
pub use observation::{Observation, Region, TeamSizeBucket};
pub use rng::SimRng;
pub use teams::{TeamEvent, TeamRegistry, SOLO};
