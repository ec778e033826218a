//! Experiment configuration files.
//!
//! A config is a TOML document with the sections `[env]`, `[identity]`,
//! `[teams]`, `[agents]` and `[experiment]`. Keys are camelCase, every key
//! is optional, and unknown keys are rejected. [`ExperimentSpec::to_toml`]
//! writes the fully resolved document back out; that echo, minus the output
//! settings, is what the config hash is computed over.

use std::fmt::Write as _;
use std::path::PathBuf;

use cleanup_core::agents::{EpsilonSchedule, QLearnerParams};
use cleanup_core::{EnvConfig, RowSpan};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    GreedyCleaner,
    GreedyPicker,
    Random,
    QLearner,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::GreedyCleaner => "greedy_cleaner",
            PolicyKind::GreedyPicker => "greedy_picker",
            PolicyKind::Random => "random",
            PolicyKind::QLearner => "q_learner",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnerSpec {
    pub learning_rate: f64,
    pub discount: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Share of the episodes over which ε decays linearly.
    pub epsilon_decay_fraction: f64,
    /// Expose `ChooseTeam` to learners.
    pub choose_team: bool,
    /// Learners may choose slots `0..team_slots`.
    pub team_slots: usize,
}

impl Default for LearnerSpec {
    fn default() -> Self {
        LearnerSpec {
            learning_rate: 0.1,
            discount: 0.9,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_fraction: 0.8,
            choose_team: false,
            team_slots: 3,
        }
    }
}

impl LearnerSpec {
    pub fn params(&self, episodes: u32) -> QLearnerParams {
        QLearnerParams {
            learning_rate: self.learning_rate,
            discount: self.discount,
            schedule: EpsilonSchedule::over(
                self.epsilon_start,
                self.epsilon_end,
                episodes,
                self.epsilon_decay_fraction,
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub env: EnvConfig,
    pub policies: Vec<PolicyKind>,
    /// Slot each scripted agent joins at the start of every episode.
    pub team_slots: Vec<usize>,
    pub learner: LearnerSpec,
    pub episodes: u32,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub write_replays: bool,
    pub write_timeseries: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        let env = EnvConfig::default();
        let n = env.num_agents;
        ExperimentSpec {
            env,
            policies: vec![PolicyKind::QLearner; n],
            team_slots: vec![0; n],
            learner: LearnerSpec::default(),
            episodes: 1,
            seeds: vec![0],
            output_dir: PathBuf::from("results"),
            write_replays: false,
            write_timeseries: false,
        }
    }
}

// Raw document. Every field is optional so missing keys fall back to the
// defaults; `deny_unknown_fields` turns typos into errors.

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    #[serde(default)]
    env: RawEnv,
    #[serde(default)]
    identity: RawIdentity,
    #[serde(default)]
    teams: RawTeams,
    #[serde(default)]
    agents: RawAgents,
    #[serde(default)]
    experiment: RawExperiment,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct RawEnv {
    width: Option<u16>,
    height: Option<u16>,
    river_rows: Option<[u16; 2]>,
    orchard_rows: Option<[u16; 2]>,
    num_agents: Option<usize>,
    episode_length: Option<u32>,
    waste_spawn_prob: Option<f64>,
    apple_spawn_max: Option<f64>,
    depletion_threshold: Option<f64>,
    initial_pollution: Option<f64>,
    apple_reward: Option<f64>,
    reach_radius: Option<u16>,
    base_clean_capacity: Option<u32>,
    base_harvest_capacity: Option<u32>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct RawIdentity {
    identity_ratio: Option<f64>,
    cleaner_clean_capacity: Option<u32>,
    picker_harvest_capacity: Option<u32>,
    identity_utility_bonus: Option<f64>,
    identity_utility_cost: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct RawTeams {
    switch_interval: Option<u32>,
    max_switches: Option<u32>,
    lock_step: Option<u32>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct RawAgents {
    policies: Option<Vec<PolicyKind>>,
    team_slots: Option<Vec<usize>>,
    learning_rate: Option<f64>,
    discount: Option<f64>,
    epsilon_start: Option<f64>,
    epsilon_end: Option<f64>,
    epsilon_decay_fraction: Option<f64>,
    learners_choose_team: Option<bool>,
    learner_team_slots: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct RawExperiment {
    episodes: Option<u32>,
    seeds: Option<Vec<u64>>,
    output_dir: Option<String>,
    write_replays: Option<bool>,
    write_timeseries: Option<bool>,
}

fn span(rows: [u16; 2]) -> RowSpan {
    RowSpan::new(rows[0], rows[1])
}

/// Parses and validates a config document. Missing keys take their
/// defaults; `initialPollution` defaults to `depletionThreshold` and the
/// per-agent lists default to one entry per agent.
pub fn parse_config(text: &str) -> Result<ExperimentSpec> {
    let raw: RawDoc = toml::from_str(text).map_err(|e| HarnessError::Parse {
        line: e
            .span()
            .map_or(1, |s| text[..s.start.min(text.len())].matches('\n').count() + 1),
        message: e.message().to_string(),
    })?;
    let spec = resolve(raw);
    spec.validate()?;
    Ok(spec)
}

fn resolve(raw: RawDoc) -> ExperimentSpec {
    let d = EnvConfig::default();
    let e = raw.env;
    let i = raw.identity;
    let t = raw.teams;
    let depletion_threshold = e.depletion_threshold.unwrap_or(d.depletion_threshold);
    let env = EnvConfig {
        width: e.width.unwrap_or(d.width),
        height: e.height.unwrap_or(d.height),
        river_rows: e.river_rows.map_or(d.river_rows, span),
        orchard_rows: e.orchard_rows.map_or(d.orchard_rows, span),
        num_agents: e.num_agents.unwrap_or(d.num_agents),
        episode_length: e.episode_length.unwrap_or(d.episode_length),
        waste_spawn_prob: e.waste_spawn_prob.unwrap_or(d.waste_spawn_prob),
        apple_spawn_max: e.apple_spawn_max.unwrap_or(d.apple_spawn_max),
        depletion_threshold,
        initial_pollution: e.initial_pollution.unwrap_or(depletion_threshold),
        apple_reward: e.apple_reward.unwrap_or(d.apple_reward),
        reach_radius: e.reach_radius.unwrap_or(d.reach_radius),
        base_clean_capacity: e.base_clean_capacity.unwrap_or(d.base_clean_capacity),
        cleaner_clean_capacity: i.cleaner_clean_capacity.unwrap_or(d.cleaner_clean_capacity),
        base_harvest_capacity: e.base_harvest_capacity.unwrap_or(d.base_harvest_capacity),
        picker_harvest_capacity: i.picker_harvest_capacity.unwrap_or(d.picker_harvest_capacity),
        identity_ratio: i.identity_ratio.unwrap_or(d.identity_ratio),
        identity_utility_bonus: i.identity_utility_bonus.unwrap_or(d.identity_utility_bonus),
        identity_utility_cost: i.identity_utility_cost.unwrap_or(d.identity_utility_cost),
        switch_interval: t.switch_interval.unwrap_or(d.switch_interval),
        max_switches: t.max_switches,
        lock_step: t.lock_step,
    };
    let n = env.num_agents;
    let a = raw.agents;
    let dl = LearnerSpec::default();
    let x = raw.experiment;
    let ds = ExperimentSpec::default();
    ExperimentSpec {
        policies: a.policies.unwrap_or_else(|| vec![PolicyKind::QLearner; n]),
        team_slots: a.team_slots.unwrap_or_else(|| vec![0; n]),
        learner: LearnerSpec {
            learning_rate: a.learning_rate.unwrap_or(dl.learning_rate),
            discount: a.discount.unwrap_or(dl.discount),
            epsilon_start: a.epsilon_start.unwrap_or(dl.epsilon_start),
            epsilon_end: a.epsilon_end.unwrap_or(dl.epsilon_end),
            epsilon_decay_fraction: a.epsilon_decay_fraction.unwrap_or(dl.epsilon_decay_fraction),
            choose_team: a.learners_choose_team.unwrap_or(dl.choose_team),
            team_slots: a.learner_team_slots.unwrap_or(dl.team_slots),
        },
        episodes: x.episodes.unwrap_or(ds.episodes),
        seeds: x.seeds.unwrap_or(ds.seeds),
        output_dir: x.output_dir.map_or(ds.output_dir, PathBuf::from),
        write_replays: x.write_replays.unwrap_or(ds.write_replays),
        write_timeseries: x.write_timeseries.unwrap_or(ds.write_timeseries),
        env,
    }
}

impl ExperimentSpec {
    /// Every violation, as `field: constraint` lines.
    pub fn violations(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .env
            .violations()
            .iter()
            .map(|e| format!("{}: {}", e.field, e.constraint))
            .collect();
        let n = self.env.num_agents;
        if self.policies.len() != n {
            out.push(format!("policies: length {} ≠ numAgents {n}", self.policies.len()));
        }
        if self.team_slots.len() != n {
            out.push(format!("teamSlots: length {} ≠ numAgents {n}", self.team_slots.len()));
        }
        if self.team_slots.iter().any(|&s| s > n) {
            out.push("teamSlots: every slot ≤ numAgents".into());
        }
        let l = &self.learner;
        if !(l.learning_rate > 0.0 && l.learning_rate <= 1.0) {
            out.push("learningRate: learningRate ∈ (0,1]".into());
        }
        if !(0.0..1.0).contains(&l.discount) {
            out.push("discount: discount ∈ [0,1)".into());
        }
        if !(0.0..=1.0).contains(&l.epsilon_start) {
            out.push("epsilonStart: epsilonStart ∈ [0,1]".into());
        }
        if !(0.0..=l.epsilon_start.clamp(0.0, 1.0)).contains(&l.epsilon_end) {
            out.push("epsilonEnd: epsilonEnd ∈ [0, epsilonStart]".into());
        }
        if !(0.0..=1.0).contains(&l.epsilon_decay_fraction) {
            out.push("epsilonDecayFraction: epsilonDecayFraction ∈ [0,1]".into());
        }
        if l.team_slots == 0 || l.team_slots > n + 1 {
            out.push("learnerTeamSlots: 1 ≤ learnerTeamSlots ≤ numAgents + 1".into());
        }
        if self.episodes == 0 {
            out.push("episodes: episodes ≥ 1".into());
        }
        if self.seeds.is_empty() {
            out.push("seeds: at least one seed".into());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::Invalid(v))
        }
    }

    /// The fully resolved document, every key written out.
    pub fn to_toml(&self) -> String {
        let e = &self.env;
        let l = &self.learner;
        let raw = RawDoc {
            env: RawEnv {
                width: Some(e.width),
                height: Some(e.height),
                river_rows: Some([e.river_rows.start, e.river_rows.end]),
                orchard_rows: Some([e.orchard_rows.start, e.orchard_rows.end]),
                num_agents: Some(e.num_agents),
                episode_length: Some(e.episode_length),
                waste_spawn_prob: Some(e.waste_spawn_prob),
                apple_spawn_max: Some(e.apple_spawn_max),
                depletion_threshold: Some(e.depletion_threshold),
                initial_pollution: Some(e.initial_pollution),
                apple_reward: Some(e.apple_reward),
                reach_radius: Some(e.reach_radius),
                base_clean_capacity: Some(e.base_clean_capacity),
                base_harvest_capacity: Some(e.base_harvest_capacity),
            },
            identity: RawIdentity {
                identity_ratio: Some(e.identity_ratio),
                cleaner_clean_capacity: Some(e.cleaner_clean_capacity),
                picker_harvest_capacity: Some(e.picker_harvest_capacity),
                identity_utility_bonus: Some(e.identity_utility_bonus),
                identity_utility_cost: Some(e.identity_utility_cost),
            },
            teams: RawTeams {
                switch_interval: Some(e.switch_interval),
                max_switches: e.max_switches,
                lock_step: e.lock_step,
            },
            agents: RawAgents {
                policies: Some(self.policies.clone()),
                team_slots: Some(self.team_slots.clone()),
                learning_rate: Some(l.learning_rate),
                discount: Some(l.discount),
                epsilon_start: Some(l.epsilon_start),
                epsilon_end: Some(l.epsilon_end),
                epsilon_decay_fraction: Some(l.epsilon_decay_fraction),
                learners_choose_team: Some(l.choose_team),
                learner_team_slots: Some(l.team_slots),
            },
            experiment: RawExperiment {
                episodes: Some(self.episodes),
                seeds: Some(self.seeds.clone()),
                output_dir: Some(self.output_dir.to_string_lossy().into_owned()),
                write_replays: Some(self.write_replays),
                write_timeseries: Some(self.write_timeseries),
            },
        };
        let mut text = toml::to_string(&raw).expect("config serializes");
        // unlimited switches and no lock are expressed by omission
        if e.max_switches.is_none() || e.lock_step.is_none() {
            let _ = writeln!(text);
            if e.max_switches.is_none() {
                let _ = writeln!(text, "# maxSwitches: unlimited");
            }
            if e.lock_step.is_none() {
                let _ = writeln!(text, "# lockStep: none");
            }
        }
        text
    }

    /// First 16 hex digits of the SHA-256 of [`Self::to_toml`], with the
    /// output settings (`outputDir`, `writeReplays`, `writeTimeseries`) reset
    /// so that only values the simulation reads affect the hash.
    pub fn config_hash(&self) -> String {
        let sim_only = ExperimentSpec {
            output_dir: PathBuf::new(),
            write_replays: false,
            write_timeseries: false,
            ..self.clone()
        };
        let digest = Sha256::digest(sim_only.to_toml().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}
