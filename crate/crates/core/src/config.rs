//! Environment, identity, team and reward parameters.

use alloc::vec::Vec;
use core::fmt;

/// Inclusive range of grid rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RowSpan {
    pub start: u16,
    pub end: u16,
}

impl RowSpan {
    pub const fn new(start: u16, end: u16) -> Self {
        RowSpan { start, end }
    }

    pub fn contains(&self, row: u16) -> bool {
        self.start <= row && row <= self.end
    }

    pub fn len(&self) -> usize {
        if self.end < self.start {
            0
        } else {
            (self.end - self.start) as usize + 1
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A violated configuration invariant. `field` uses the configuration file
/// key so messages point at what the user wrote.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub field: &'static str,
    pub constraint: &'static str,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid {} (requires {})", self.field, self.constraint)
    }
}

/// Every tunable of one experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvConfig {
    pub width: u16,
    pub height: u16,
    pub river_rows: RowSpan,
    pub orchard_rows: RowSpan,
    pub num_agents: usize,
    pub episode_length: u32,
    /// Probability per step that one clean river cell turns to waste.
    pub waste_spawn_prob: f64,
    /// Per-cell apple spawn probability at zero pollution.
    pub apple_spawn_max: f64,
    /// Pollution fraction at or above which apples stop growing.
    pub depletion_threshold: f64,
    pub initial_pollution: f64,
    pub apple_reward: f64,
    /// Chebyshev radius of Clean and Pick.
    pub reach_radius: u16,
    pub base_clean_capacity: u32,
    pub cleaner_clean_capacity: u32,
    pub base_harvest_capacity: u32,
    pub picker_harvest_capacity: u32,
    /// Fraction of the population that are river cleaners.
    pub identity_ratio: f64,
    pub identity_utility_bonus: f64,
    pub identity_utility_cost: f64,
    /// Minimum steps between two accepted team changes of one agent.
    pub switch_interval: u32,
    /// Accepted team changes per agent before it is locked. `None` is unlimited.
    pub max_switches: Option<u32>,
    /// First step at which every team change is rejected.
    pub lock_step: Option<u32>,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            width: 18,
            height: 10,
            river_rows: RowSpan::new(0, 0),
            orchard_rows: RowSpan::new(5, 9),
            num_agents: 4,
            episode_length: 1000,
            waste_spawn_prob: 0.5,
            apple_spawn_max: 0.05,
            depletion_threshold: 0.4,
            initial_pollution: 0.4,
            apple_reward: 1.0,
            reach_radius: 1,
            base_clean_capacity: 1,
            cleaner_clean_capacity: 3,
            base_harvest_capacity: 1,
            picker_harvest_capacity: 3,
            identity_ratio: 0.5,
            identity_utility_bonus: 0.0,
            identity_utility_cost: 0.0,
            switch_interval: 25,
            max_switches: None,
            lock_step: None,
        }
    }
}

fn unit_interval(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

fn non_negative(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

impl EnvConfig {
    /// One agent on a 5x5 grid with a clean river that never pollutes.
    /// Used to sanity-check learners in isolation from the dilemma.
    pub fn micro_orchard() -> Self {
        EnvConfig {
            width: 5,
            height: 5,
            river_rows: RowSpan::new(0, 0),
            orchard_rows: RowSpan::new(3, 4),
            num_agents: 1,
            episode_length: 100,
            waste_spawn_prob: 0.0,
            initial_pollution: 0.0,
            ..EnvConfig::default()
        }
    }

    pub fn river_cell_count(&self) -> usize {
        self.river_rows.len() * self.width as usize
    }

    pub fn orchard_cell_count(&self) -> usize {
        self.orchard_rows.len() * self.width as usize
    }

    /// Cells that are neither river nor orchard; agents spawn here.
    pub fn open_cell_count(&self) -> usize {
        let rows = (0..self.height)
            .filter(|&r| !self.river_rows.contains(r) && !self.orchard_rows.contains(r))
            .count();
        rows * self.width as usize
    }

    /// Every violated invariant, in field order.
    pub fn violations(&self) -> Vec<ConfigError> {
        let mut out = Vec::new();
        let mut check = |ok: bool, field: &'static str, constraint: &'static str| {
            if !ok {
                out.push(ConfigError { field, constraint });
            }
        };
        check(self.width >= 1, "width", "width ≥ 1");
        check(self.height >= 1, "height", "height ≥ 1");
        check(
            self.river_rows.start <= self.river_rows.end && self.river_rows.end < self.height,
            "riverRows",
            "start ≤ end < height",
        );
        check(
            self.orchard_rows.start <= self.orchard_rows.end && self.orchard_rows.end < self.height,
            "orchardRows",
            "start ≤ end < height",
        );
        // Rows strictly between the river and the orchard.
        let gap = self.orchard_rows.start as i64 - self.river_rows.end as i64 - 1;
        check(
            gap >= 2 * self.reach_radius as i64,
            "orchardRows",
            "below riverRows and separated from it by ≥ 2·reachRadius rows",
        );
        check(self.num_agents >= 1, "numAgents", "numAgents ≥ 1");
        check(
            self.num_agents <= self.open_cell_count(),
            "numAgents",
            "numAgents ≤ number of open-ground cells",
        );
        check(self.episode_length >= 1, "episodeLength", "episodeLength ≥ 1");
        check(
            unit_interval(self.waste_spawn_prob),
            "wasteSpawnProb",
            "wasteSpawnProb ∈ [0,1]",
        );
        check(
            unit_interval(self.apple_spawn_max),
            "appleSpawnMax",
            "appleSpawnMax ∈ [0,1]",
        );
        check(
            self.depletion_threshold > 0.0 && self.depletion_threshold <= 1.0,
            "depletionThreshold",
            "depletionThreshold ∈ (0,1]",
        );
        check(
            unit_interval(self.initial_pollution),
            "initialPollution",
            "initialPollution ∈ [0,1]",
        );
        check(non_negative(self.apple_reward), "appleReward", "appleReward ≥ 0");
        check(self.reach_radius >= 1, "reachRadius", "reachRadius ≥ 1");
        check(
            self.base_clean_capacity >= 1,
            "baseCleanCapacity",
            "baseCleanCapacity ≥ 1",
        );
        check(
            self.cleaner_clean_capacity >= self.base_clean_capacity,
            "cleanerCleanCapacity",
            "cleanerCleanCapacity ≥ baseCleanCapacity",
        );
        check(
            self.base_harvest_capacity >= 1,
            "baseHarvestCapacity",
            "baseHarvestCapacity ≥ 1",
        );
        check(
            self.picker_harvest_capacity >= self.base_harvest_capacity,
            "pickerHarvestCapacity",
            "pickerHarvestCapacity ≥ baseHarvestCapacity",
        );
        check(
            unit_interval(self.identity_ratio),
            "identityRatio",
            "identityRatio ∈ [0,1]",
        );
        check(
            non_negative(self.identity_utility_bonus),
            "identityUtilityBonus",
            "identityUtilityBonus ≥ 0",
        );
        check(
            non_negative(self.identity_utility_cost),
            "identityUtilityCost",
            "identityUtilityCost ≥ 0",
        );
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match self.violations().into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}
