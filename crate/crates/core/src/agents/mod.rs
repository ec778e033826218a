//! Policies: the per-agent decision interface, scripted baselines and
//! independent tabular Q-learners.

mod qlearning;
mod scripted;

pub use qlearning::{EpsilonSchedule, QLearner, QLearnerParams, QTable};
pub use scripted::{GreedyCleaner, GreedyPicker, RandomPolicy};

use crate::env::Action;
use crate::observation::Observation;
use crate::rng::SimRng;

/// One experience tuple. `reward` is shared material reward plus private
/// shaping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub observation: Observation,
    pub action: Action,
    pub reward: f64,
    pub next_observation: Observation,
    pub terminal: bool,
}

/// A per-agent decision rule. Policies only ever see [`Observation`]s, so
/// identity labels are unreachable by construction.
pub trait Policy {
    fn act(&mut self, obs: &Observation, rng: &mut SimRng) -> Action;

    /// Learn from one transition. Scripted policies ignore it.
    fn update(&mut self, _transition: &Transition) {}

    fn begin_episode(&mut self) {}

    fn end_episode(&mut self) {}
}

impl<P: Policy + ?Sized> Policy for alloc::boxed::Box<P> {
    fn act(&mut self, obs: &Observation, rng: &mut SimRng) -> Action {
        (**self).act(obs, rng)
    }

    fn update(&mut self, transition: &Transition) {
        (**self).update(transition)
    }

    fn begin_episode(&mut self) {
        (**self).begin_episode()
    }

    fn end_episode(&mut self) {
        (**self).end_episode()
    }
}
