//! Seed sweeps.
//!
//! Each seed gets a fresh set of policies that train over `episodes`
//! episodes; every episode builds a fresh environment seeded with
//! `mix(seed, episode)`. Seeds run in parallel and share nothing, and rows
//! are merged back in seed order, so output bytes never depend on
//! scheduling.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use cleanup_core::agents::{GreedyCleaner, GreedyPicker, Policy, QLearner, RandomPolicy, Transition};
use cleanup_core::metrics::{collective_return, EpisodeMetrics};
use cleanup_core::rng::{mix, policy_stream};
use cleanup_core::{run_episode, Action, EpisodeLog, Observation, SimRng};
use log::{debug, info};
use rayon::prelude::*;

use crate::error::{HarnessError, Result};
use crate::replay::write_replay;
use crate::snapshot::write_snapshot;
use crate::spec::{ExperimentSpec, PolicyKind};

/// Column order of `results.csv`.
pub const RESULTS_HEADER: [&str; 11] = [
    "seed",
    "episode",
    "collective_return",
    "gini",
    "mean_pollution",
    "total_apples",
    "total_cleaned",
    "team_switches_accepted",
    "team_switches_rejected",
    "mean_team_size",
    "conformance_mean",
];

const TIMESERIES_HEADER: [&str; 9] = [
    "step",
    "pollution",
    "waste_spawned",
    "apples_spawned",
    "apples_harvested",
    "waste_cleaned",
    "material_reward",
    "shaping_reward",
    "team_changes_accepted",
];

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub seed: u64,
    pub episode: u32,
    pub metrics: EpisodeMetrics,
}

impl ResultRow {
    pub fn record(&self) -> Vec<String> {
        let m = &self.metrics;
        vec![
            self.seed.to_string(),
            self.episode.to_string(),
            m.collective_return.to_string(),
            m.gini.to_string(),
            m.mean_pollution.to_string(),
            m.total_apples.to_string(),
            m.total_cleaned.to_string(),
            m.team_switches_accepted.to_string(),
            m.team_switches_rejected.to_string(),
            m.mean_team_size.to_string(),
            m.conformance_mean.map(|c| c.to_string()).unwrap_or_default(),
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSummary {
    pub config_hash: String,
    pub rows: Vec<ResultRow>,
    /// Collective return of the last episode of each seed, in seed order.
    pub final_returns: Vec<f64>,
    pub mean_return: f64,
    /// Sample standard deviation; 0 for a single seed.
    pub std_return: f64,
}

impl ExperimentSummary {
    pub fn report(&self) -> String {
        format!(
            "config {}\nrows {}\nfinal-episode collective return over {} seed(s): {:.3} ± {:.3}\n",
            self.config_hash,
            self.rows.len(),
            self.final_returns.len(),
            self.mean_return,
            self.std_return
        )
    }
}

/// One agent's decision rule as configured in `[agents]`.
#[derive(Clone, Debug)]
pub enum AgentPolicy {
    Cleaner(GreedyCleaner),
    Picker(GreedyPicker),
    Random(RandomPolicy),
    Learner(QLearner),
}

impl AgentPolicy {
    fn inner(&mut self) -> &mut dyn Policy {
        match self {
            AgentPolicy::Cleaner(p) => p,
            AgentPolicy::Picker(p) => p,
            AgentPolicy::Random(p) => p,
            AgentPolicy::Learner(p) => p,
        }
    }

    pub fn learner(&self) -> Option<&QLearner> {
        match self {
            AgentPolicy::Learner(q) => Some(q),
            _ => None,
        }
    }
}

impl Policy for AgentPolicy {
    fn act(&mut self, obs: &Observation, rng: &mut SimRng) -> Action {
        self.inner().act(obs, rng)
    }

    fn update(&mut self, transition: &Transition) {
        self.inner().update(transition)
    }

    fn begin_episode(&mut self) {
        self.inner().begin_episode()
    }

    fn end_episode(&mut self) {
        self.inner().end_episode()
    }
}

pub fn build_policies(spec: &ExperimentSpec) -> Vec<AgentPolicy> {
    let learner_actions = if spec.learner.choose_team {
        QLearner::action_set(0..spec.learner.team_slots)
    } else {
        Action::BASIC.to_vec()
    };
    spec.policies
        .iter()
        .zip(&spec.team_slots)
        .map(|(&kind, &slot)| match kind {
            PolicyKind::GreedyCleaner => AgentPolicy::Cleaner(GreedyCleaner::new(slot)),
            PolicyKind::GreedyPicker => AgentPolicy::Picker(GreedyPicker::new(slot)),
            PolicyKind::Random => AgentPolicy::Random(RandomPolicy),
            PolicyKind::QLearner => AgentPolicy::Learner(QLearner::new(
                learner_actions.clone(),
                spec.learner.params(spec.episodes),
            )),
        })
        .collect()
}

/// Runs one seed's training loop in memory and hands every episode log to
/// `visit` as it completes. Returns the rows and the trained policies.
pub fn run_seed(
    spec: &ExperimentSpec,
    seed: u64,
    mut visit: impl FnMut(u32, &EpisodeLog) -> Result<()>,
) -> Result<(Vec<ResultRow>, Vec<AgentPolicy>)> {
    let mut policies = build_policies(spec);
    let mut rngs: Vec<_> = (0..spec.env.num_agents).map(|i| policy_stream(seed, i)).collect();
    let mut rows = Vec::with_capacity(spec.episodes as usize);
    for episode in 0..spec.episodes {
        let log = run_episode(&spec.env, mix(seed, episode as u64), &mut policies, &mut rngs)?;
        debug!("seed {seed} episode {episode}: return {}", collective_return(&log));
        visit(episode, &log)?;
        rows.push(ResultRow {
            seed,
            episode,
            metrics: EpisodeMetrics::from_log(&log),
        });
    }
    Ok((rows, policies))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(HarnessError::io(path))
}

pub fn write_timeseries(log: &EpisodeLog, sink: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(TIMESERIES_HEADER)?;
    for (i, s) in log.steps.iter().enumerate() {
        let o = &s.outcome;
        w.write_record([
            i.to_string(),
            o.pollution_level.to_string(),
            o.waste_spawned.to_string(),
            o.apples_spawned.to_string(),
            o.total_harvested().to_string(),
            o.total_cleaned().to_string(),
            o.total_material().to_string(),
            o.agents.iter().map(|a| a.shaping_reward).sum::<f64>().to_string(),
            o.team_events.iter().filter(|e| e.accepted).count().to_string(),
        ])?;
    }
    w.flush().map_err(HarnessError::io("timeseries"))?;
    Ok(())
}

pub fn write_results(rows: &[ResultRow], sink: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(RESULTS_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush().map_err(HarnessError::io("results"))?;
    Ok(())
}

fn seed_outputs(spec: &ExperimentSpec, out: &Path, hash: &str, seed: u64) -> Result<Vec<ResultRow>> {
    let (rows, policies) = run_seed(spec, seed, |episode, log| {
        if spec.write_replays {
            let path = out.join("replays").join(format!("seed{seed}_ep{episode}.txt"));
            let mut f = create(&path)?;
            write_replay(log, hash, &mut f)?;
            f.flush().map_err(HarnessError::io(&path))?;
        }
        if spec.write_timeseries {
            let path = out.join("timeseries").join(format!("seed{seed}_ep{episode}.csv"));
            write_timeseries(log, create(&path)?)?;
        }
        Ok(())
    })?;
    for (i, p) in policies.iter().enumerate() {
        if let Some(q) = p.learner() {
            let path = out.join("policies").join(format!("seed{seed}_agent{i}.qtable"));
            let mut f = create(&path)?;
            write_snapshot(q.table(), q.actions(), &mut f)
                .and_then(|_| f.flush())
                .map_err(HarnessError::io(&path))?;
        }
    }
    debug!("seed {seed} done");
    Ok(rows)
}

/// Runs the whole sweep and writes `effective_config.toml`, `results.csv`,
/// `summary.txt`, learner snapshots under `policies/` and, when enabled,
/// `replays/` and `timeseries/` under
/// `spec.output_dir`. The output directory is prepared before any
/// simulation so an unwritable destination fails fast.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentSummary> {
    spec.validate()?;
    let out = spec.output_dir.as_path();
    fs::create_dir_all(out).map_err(HarnessError::io(out))?;
    let hash = spec.config_hash();
    let echo = out.join("effective_config.toml");
    fs::write(&echo, format!("# config_hash {hash}\n{}", spec.to_toml())).map_err(HarnessError::io(&echo))?;
    let results_path = out.join("results.csv");
    let results = create(&results_path)?;
    let has_learners = spec.policies.contains(&PolicyKind::QLearner);
    for (flag, dir) in [
        (spec.write_replays, "replays"),
        (spec.write_timeseries, "timeseries"),
        (has_learners, "policies"),
    ] {
        if flag {
            let d = out.join(dir);
            fs::create_dir_all(&d).map_err(HarnessError::io(d))?;
        }
    }
    info!("running {} seed(s) × {} episode(s), config {hash}", spec.seeds.len(), spec.episodes);

    let per_seed: Vec<Result<Vec<ResultRow>>> = spec
        .seeds
        .par_iter()
        .map(|&seed| seed_outputs(spec, out, &hash, seed))
        .collect();
    let mut rows = Vec::with_capacity(spec.seeds.len() * spec.episodes as usize);
    for r in per_seed {
        rows.extend(r?);
    }
    write_results(&rows, results)?;

    let final_returns: Vec<f64> = spec
        .seeds
        .iter()
        .enumerate()
        .map(|(i, _)| rows[(i + 1) * spec.episodes as usize - 1].metrics.collective_return)
        .collect();
    let k = final_returns.len() as f64;
    let mean_return = final_returns.iter().sum::<f64>() / k;
    let std_return = if final_returns.len() > 1 {
        (final_returns.iter().map(|x| (x - mean_return).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    let summary = ExperimentSummary {
        config_hash: hash,
        rows,
        final_returns,
        mean_return,
        std_return,
    };
    let path = out.join("summary.txt");
    fs::write(&path, summary.report()).map_err(HarnessError::io(&path))?;
    Ok(summary)
}
