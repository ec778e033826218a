//! Cooperation and team-structure metrics over episode logs.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::episode::EpisodeLog;
use crate::identity::Identity;
use crate::teams::{team_composition_stats, Composition, TeamRegistry};

/// Total material reward over all steps and agents. Shaping is excluded.
pub fn collective_return(log: &EpisodeLog) -> f64 {
    log.steps.iter().map(|s| s.outcome.total_material()).sum()
}

/// Material reward per agent over the episode.
pub fn per_agent_return(log: &EpisodeLog) -> Vec<f64> {
    let mut totals = vec![0.0; log.config.num_agents];
    for s in &log.steps {
        for (t, o) in totals.iter_mut().zip(&s.outcome.agents) {
            *t += o.material_reward;
        }
    }
    totals
}

/// Gini coefficient of non-negative values: mean absolute pairwise difference
/// over twice the mean. Zero for an all-zero (or empty) input.
///
/// Uses the sorted form `Σ (2i − n − 1)·x₍ᵢ₎ / (n·Σx)`.
pub fn gini(values: &[f64]) -> f64 {
    let total: f64 = values.iter().sum();
    if values.is_empty() || total == 0.0 {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| (2.0 * (i as f64 + 1.0) - n - 1.0) * x)
        .sum();
    weighted / (n * total)
}

/// For each agent, the share of its productive steps (anything cleaned or
/// harvested) that used its identity's conforming action. `None` for agents
/// that never had a productive step.
pub fn identity_conformance_rate(log: &EpisodeLog) -> Vec<Option<f64>> {
    log.identities
        .iter()
        .enumerate()
        .map(|(i, &id)| {
            let mut productive = 0u32;
            let mut conforming = 0u32;
            for s in &log.steps {
                let o = &s.outcome.agents[i];
                let (good, other) = match id {
                    Identity::RiverCleaner => (o.waste_cleaned, o.apples_harvested),
                    Identity::ApplePicker => (o.apples_harvested, o.waste_cleaned),
                };
                if good > 0 || other > 0 {
                    productive += 1;
                    conforming += (good > 0) as u32;
                }
            }
            (productive > 0).then(|| conforming as f64 / productive as f64)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TeamDynamics {
    pub accepted: Vec<u32>,
    pub rejected: Vec<u32>,
    /// Agent-steps spent in a team of each size (solo counts as 1).
    pub size_histogram: BTreeMap<usize, u64>,
    /// Time average of the per-step mean team size.
    pub mean_team_size: f64,
    /// Composition at the start and after every step with an accepted change.
    pub timeline: Vec<(u32, Composition)>,
    pub final_composition: Composition,
}

impl TeamDynamics {
    pub fn total_accepted(&self) -> u64 {
        self.accepted.iter().map(|&x| x as u64).sum()
    }

    pub fn total_rejected(&self) -> u64 {
        self.rejected.iter().map(|&x| x as u64).sum()
    }
}

/// Rebuilds team membership step by step from the logged events.
pub fn team_dynamics_summary(log: &EpisodeLog) -> TeamDynamics {
    let n = log.config.num_agents;
    let mut accepted = vec![0u32; n];
    let mut rejected = vec![0u32; n];
    let mut slots = vec![crate::teams::SOLO; n];
    let mut size_histogram = BTreeMap::new();
    let mut mean_sum = 0.0;
    let mut timeline = vec![(0, team_composition_stats(&TeamRegistry::new(n), &log.identities))];
    for s in &log.steps {
        let mut changed = false;
        for e in &s.outcome.team_events {
            if e.accepted {
                accepted[e.agent] += 1;
                slots[e.agent] = e.to;
                changed = true;
            } else {
                rejected[e.agent] += 1;
            }
        }
        let reg = TeamRegistry::from_slots(slots.clone());
        let comp = team_composition_stats(&reg, &log.identities);
        for i in 0..n {
            let size = reg.team_size(i).unwrap_or(1);
            *size_histogram.entry(size).or_insert(0) += 1;
        }
        mean_sum += comp.mean_size;
        if changed {
            let step = s.outcome.team_events.first().map_or(0, |e| e.step);
            timeline.push((step, comp));
        }
    }
    let mean_team_size = if log.steps.is_empty() {
        1.0
    } else {
        mean_sum / log.steps.len() as f64
    };
    TeamDynamics {
        accepted,
        rejected,
        size_histogram,
        mean_team_size,
        timeline,
        final_composition: team_composition_stats(&log.final_teams, &log.identities),
    }
}

/// One results row, minus the seed and episode columns.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeMetrics {
    pub collective_return: f64,
    pub gini: f64,
    pub mean_pollution: f64,
    pub total_apples: u64,
    pub total_cleaned: u64,
    pub team_switches_accepted: u64,
    pub team_switches_rejected: u64,
    pub mean_team_size: f64,
    /// Mean over agents with a defined rate; `None` if no agent has one.
    pub conformance_mean: Option<f64>,
}

impl EpisodeMetrics {
    pub fn from_log(log: &EpisodeLog) -> Self {
        let dynamics = team_dynamics_summary(log);
        let rates: Vec<f64> = identity_conformance_rate(log).into_iter().flatten().collect();
        let steps = log.steps.len().max(1) as f64;
        EpisodeMetrics {
            collective_return: collective_return(log),
            gini: gini(&per_agent_return(log)),
            mean_pollution: log.steps.iter().map(|s| s.outcome.pollution_level).sum::<f64>() / steps,
            total_apples: log.steps.iter().map(|s| s.outcome.total_harvested() as u64).sum(),
            total_cleaned: log.steps.iter().map(|s| s.outcome.total_cleaned() as u64).sum(),
            team_switches_accepted: dynamics.total_accepted(),
            team_switches_rejected: dynamics.total_rejected(),
            mean_team_size: dynamics.mean_team_size,
            conformance_mean: (!rates.is_empty())
                .then(|| rates.iter().sum::<f64>() / rates.len() as f64),
        }
    }
}
