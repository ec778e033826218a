//! Running episodes and the logs they leave behind.

use alloc::vec::Vec;

use crate::agents::{Policy, Transition};
use crate::config::EnvConfig;
use crate::env::{Action, Env, StepOutcome};
use crate::error::Error;
use crate::identity::Identity;
use crate::rng::SimRng;
use crate::teams::{TeamEvent, TeamRegistry};

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub actions: Vec<Action>,
    pub outcome: StepOutcome,
}

/// Everything needed to recompute metrics or re-simulate an episode.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeLog {
    pub config: EnvConfig,
    /// Seed passed to [`Env::new`].
    pub seed: u64,
    /// Experimenter-visible only.
    pub identities: Vec<Identity>,
    pub steps: Vec<StepRecord>,
    pub final_teams: TeamRegistry,
}

impl EpisodeLog {
    pub fn team_events(&self) -> impl Iterator<Item = &TeamEvent> {
        self.steps.iter().flat_map(|s| s.outcome.team_events.iter())
    }

    /// Re-runs the logged actions from the seed, calling `visit` with the
    /// environment before the first step and after every step.
    pub fn replay_with(&self, mut visit: impl FnMut(&Env)) -> Result<EpisodeLog, Error> {
        let mut env = Env::new(self.config.clone(), self.seed)?;
        visit(&env);
        let mut steps = Vec::with_capacity(self.steps.len());
        for record in &self.steps {
            let outcome = env.step(&record.actions)?;
            visit(&env);
            steps.push(StepRecord {
                actions: record.actions.clone(),
                outcome,
            });
        }
        Ok(EpisodeLog {
            config: self.config.clone(),
            seed: self.seed,
            identities: env.identities(),
            steps,
            final_teams: env.state().teams().clone(),
        })
    }

    /// Checks that the logged actions reproduce the logged outcomes.
    pub fn verify(&self) -> Result<(), Error> {
        let replayed = self.replay_with(|_| {})?;
        if replayed.identities != self.identities || replayed.final_teams != self.final_teams {
            return Err(Error::ReplayMismatch { step: 0 });
        }
        if replayed.steps.len() != self.steps.len() {
            return Err(Error::ReplayMismatch {
                step: replayed.steps.len().min(self.steps.len()) as u32,
            });
        }
        for (i, (a, b)) in replayed.steps.iter().zip(&self.steps).enumerate() {
            if a != b {
                return Err(Error::ReplayMismatch { step: i as u32 });
            }
        }
        Ok(())
    }
}

/// Runs one full episode. Each agent acts from its own observation and
/// generator, and every policy is updated with its transition after each
/// step (scripted policies ignore updates).
pub fn run_episode<P: Policy>(
    config: &EnvConfig,
    seed: u64,
    policies: &mut [P],
    rngs: &mut [SimRng],
) -> Result<EpisodeLog, Error> {
    let mut env = Env::new(config.clone(), seed)?;
    let n = config.num_agents;
    if policies.len() != n || rngs.len() != n {
        return Err(Error::ActionCount {
            expected: n,
            got: policies.len().min(rngs.len()),
        });
    }
    for p in policies.iter_mut() {
        p.begin_episode();
    }
    let mut obs = (0..n).map(|i| env.observe(i)).collect::<Result<Vec<_>, _>>()?;
    let mut steps = Vec::with_capacity(config.episode_length as usize);
    while !env.is_done() {
        let actions: Vec<Action> = policies
            .iter_mut()
            .zip(rngs.iter_mut())
            .zip(&obs)
            .map(|((p, rng), o)| p.act(o, rng))
            .collect();
        let outcome = env.step(&actions)?;
        let terminal = env.is_done();
        let next = (0..n).map(|i| env.observe(i)).collect::<Result<Vec<_>, _>>()?;
        for (i, p) in policies.iter_mut().enumerate() {
            let o = &outcome.agents[i];
            p.update(&Transition {
                observation: obs[i],
                action: actions[i],
                reward: o.material_reward + o.shaping_reward,
                next_observation: next[i],
                terminal,
            });
        }
        obs = next;
        steps.push(StepRecord { actions, outcome });
    }
    for p in policies.iter_mut() {
        p.end_episode();
    }
    Ok(EpisodeLog {
        config: config.clone(),
        seed,
        identities: env.identities(),
        steps,
        final_teams: env.state().teams().clone(),
    })
}
