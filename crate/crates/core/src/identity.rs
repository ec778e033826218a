//! Hidden identity categories and the utility agents derive from acting in
//! line with them.
//!
//! Each agent is born a [`Identity::RiverCleaner`] or an
//! [`Identity::ApplePicker`]. The category is never shown to the agent; it
//! only surfaces as a larger effect of the aligned action (more waste cleaned
//! or more apples picked per action) and, when enabled, as a private shaping
//! reward for conforming to it.

use alloc::vec::Vec;
use rand::seq::SliceRandom;

use crate::config::EnvConfig;
use crate::env::AgentOutcome;
use crate::num::round_half_even;
use crate::rng::SimRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Identity {
    RiverCleaner,
    ApplePicker,
}

/// The two productive action kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Labor {
    Clean,
    Pick,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IdentityProfile {
    pub clean_capacity: u32,
    pub harvest_capacity: u32,
    pub conforming: Labor,
}

impl Identity {
    /// The action kind this identity's norm prescribes.
    pub fn conforming_labor(self) -> Labor {
        match self {
            Identity::RiverCleaner => Labor::Clean,
            Identity::ApplePicker => Labor::Pick,
        }
    }

    pub fn profile(self, config: &EnvConfig) -> IdentityProfile {
        IdentityProfile {
            clean_capacity: effect_magnitude(self, Labor::Clean, config),
            harvest_capacity: effect_magnitude(self, Labor::Pick, config),
            conforming: self.conforming_labor(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Identity::RiverCleaner => "cleaner",
            Identity::ApplePicker => "picker",
        }
    }
}

/// Draws exactly `round(ratio·n)` river cleaners (half to even) at uniformly
/// random positions; everyone else is an apple picker.
pub fn assign_identities(n: usize, ratio: f64, rng: &mut SimRng) -> Vec<Identity> {
    let cleaners = round_half_even(ratio * n as f64).min(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut out = alloc::vec![Identity::ApplePicker; n];
    for &i in &order[..cleaners] {
        out[i] = Identity::RiverCleaner;
    }
    out
}

/// Cells affected by one action of kind `labor`.
pub fn effect_magnitude(identity: Identity, labor: Labor, config: &EnvConfig) -> u32 {
    match (identity, labor) {
        (Identity::RiverCleaner, Labor::Clean) => config.cleaner_clean_capacity,
        (Identity::ApplePicker, Labor::Pick) => config.picker_harvest_capacity,
        (_, Labor::Clean) => config.base_clean_capacity,
        (_, Labor::Pick) => config.base_harvest_capacity,
    }
}

/// Shaping reward for one step: `+bonus` when the conforming action had an
/// effect, `-cost` when the other productive action did.
pub fn identity_utility(identity: Identity, outcome: &AgentOutcome, config: &EnvConfig) -> f64 {
    let (conforming, deviating) = match identity {
        Identity::RiverCleaner => (outcome.waste_cleaned, outcome.apples_harvested),
        Identity::ApplePicker => (outcome.apples_harvested, outcome.waste_cleaned),
    };
    let mut u = 0.0;
    if conforming > 0 {
        u += config.identity_utility_bonus;
    }
    if deviating > 0 {
        u -= config.identity_utility_cost;
    }
    u
}
