//! Team membership, switching rules and equal reward sharing.
//!
//! Teams live in a fixed slot namespace `1..=n`; slot [`SOLO`] means the
//! agent belongs to no team. Creating a team is just being the first agent to
//! pick an empty slot, and joining needs nobody's consent.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::config::EnvConfig;
use crate::error::Error;
use crate::identity::Identity;

pub const SOLO: usize = 0;

/// One `ChooseTeam` proposal and how it was resolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TeamEvent {
    pub step: u32,
    pub agent: usize,
    pub from: usize,
    pub to: usize,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TeamRegistry {
    slots: Vec<usize>,
    last_change: Vec<Option<u32>>,
    change_count: Vec<u32>,
}

impl TeamRegistry {
    /// Everyone solo, nobody has changed yet.
    pub fn new(n: usize) -> Self {
        TeamRegistry {
            slots: vec![SOLO; n],
            last_change: vec![None; n],
            change_count: vec![0; n],
        }
    }

    /// A registry with the given assignment and no change history.
    ///
    /// # Panics
    ///
    /// If a slot exceeds the number of agents.
    pub fn from_slots(slots: Vec<usize>) -> Self {
        let n = slots.len();
        assert!(slots.iter().all(|&s| s <= n), "team slot out of range");
        TeamRegistry {
            last_change: vec![None; n],
            change_count: vec![0; n],
            slots,
        }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slots(&self) -> &[usize] {
        &self.slots
    }

    pub fn slot(&self, agent: usize) -> Result<usize, Error> {
        self.slots.get(agent).copied().ok_or(Error::UnknownAgent(agent))
    }

    pub fn last_change(&self, agent: usize) -> Result<Option<u32>, Error> {
        self.last_change.get(agent).copied().ok_or(Error::UnknownAgent(agent))
    }

    pub fn change_count(&self, agent: usize) -> Result<u32, Error> {
        self.change_count.get(agent).copied().ok_or(Error::UnknownAgent(agent))
    }

    /// Whether the interval and lock rules would let `agent` change team at
    /// `step` (the target slot is not considered).
    pub fn change_allowed(&self, agent: usize, step: u32, config: &EnvConfig) -> Result<bool, Error> {
        let last = self.last_change(agent)?;
        let count = self.change_count[agent];
        let interval_ok = match last {
            None => true,
            Some(last) => step.saturating_sub(last) >= config.switch_interval,
        };
        let count_ok = config.max_switches.is_none_or(|max| count < max);
        let lock_ok = config.lock_step.is_none_or(|lock| step < lock);
        Ok(interval_ok && count_ok && lock_ok)
    }

    /// Moves `agent` to `target` if every switching rule allows it. A
    /// rejected proposal leaves the registry untouched.
    pub fn propose(
        &mut self,
        agent: usize,
        target: usize,
        step: u32,
        config: &EnvConfig,
    ) -> Result<bool, Error> {
        let current = self.slot(agent)?;
        if target > self.slots.len() {
            return Err(Error::InvalidSlot {
                agent,
                slot: target,
                max: self.slots.len(),
            });
        }
        if target == current || !self.change_allowed(agent, step, config)? {
            return Ok(false);
        }
        self.slots[agent] = target;
        self.last_change[agent] = Some(step);
        self.change_count[agent] += 1;
        Ok(true)
    }

    /// Members of `slot` in agent order. Empty for [`SOLO`].
    pub fn members(&self, slot: usize) -> impl Iterator<Item = usize> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter(move |&(_, &s)| s == slot && slot != SOLO)
            .map(|(i, _)| i)
    }

    /// Size of the team `agent` is in; solo agents count as a team of one.
    pub fn team_size(&self, agent: usize) -> Result<usize, Error> {
        match self.slot(agent)? {
            SOLO => Ok(1),
            s => Ok(self.members(s).count()),
        }
    }
}

/// Splits each team's pooled reward equally among its members. Solo agents
/// keep their own reward. Sums run in agent order.
///
/// # Panics
///
/// If `raw` and `registry` disagree on the number of agents.
pub fn share_rewards(raw: &[f64], registry: &TeamRegistry) -> Vec<f64> {
    assert_eq!(raw.len(), registry.len(), "one raw reward per agent");
    let n = raw.len();
    let mut pool = vec![0.0; n + 1];
    let mut size = vec![0usize; n + 1];
    for (&r, &slot) in raw.iter().zip(registry.slots()) {
        pool[slot] += r;
        size[slot] += 1;
    }
    raw.iter()
        .zip(registry.slots())
        .map(|(&r, &slot)| if slot == SOLO { r } else { pool[slot] / size[slot] as f64 })
        .collect()
}

/// One occupied team (or a solo agent).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TeamEntry {
    /// `SOLO` for agents in no team.
    pub slot: usize,
    pub size: usize,
    pub cleaners: usize,
    pub pickers: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Composition {
    /// Occupied slots in slot order, then solo agents in agent order.
    pub entries: Vec<TeamEntry>,
    pub mean_size: f64,
    /// Number of teams per (cleaners, pickers) mix.
    pub mix: BTreeMap<(usize, usize), usize>,
}

pub fn team_composition_stats(registry: &TeamRegistry, identities: &[Identity]) -> Composition {
    assert_eq!(registry.len(), identities.len(), "lists aligned by agent id");
    let n = registry.len();
    let mut teams = vec![(0usize, 0usize); n + 1];
    for (&slot, &id) in registry.slots().iter().zip(identities) {
        if slot != SOLO {
            match id {
                Identity::RiverCleaner => teams[slot].0 += 1,
                Identity::ApplePicker => teams[slot].1 += 1,
            }
        }
    }
    let mut entries: Vec<TeamEntry> = teams
        .iter()
        .enumerate()
        .filter(|&(_, &(c, p))| c + p > 0)
        .map(|(slot, &(cleaners, pickers))| TeamEntry {
            slot,
            size: cleaners + pickers,
            cleaners,
            pickers,
        })
        .collect();
    for (&slot, &id) in registry.slots().iter().zip(identities) {
        if slot == SOLO {
            let cleaner = (id == Identity::RiverCleaner) as usize;
            entries.push(TeamEntry {
                slot: SOLO,
                size: 1,
                cleaners: cleaner,
                pickers: 1 - cleaner,
            });
        }
    }
    let mut mix = BTreeMap::new();
    for e in &entries {
        *mix.entry((e.cleaners, e.pickers)).or_insert(0) += 1;
    }
    let mean_size = if entries.is_empty() {
        0.0
    } else {
        n as f64 / entries.len() as f64
    };
    Composition {
        entries,
        mean_size,
        mix,
    }
}
