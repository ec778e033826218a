//! The Cleanup gridworld.
//!
//! Rows are numbered from the top. The river occupies `riverRows`, the
//! orchard `orchardRows` further down, and the rows in between are open
//! ground. The river is impassable; agents clean it from the bank. Apples
//! grow on orchard cells at a rate that falls linearly with pollution and
//! stops entirely once pollution reaches the depletion threshold.

use alloc::vec;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::config::EnvConfig;
use crate::error::Error;
use crate::identity::{assign_identities, effect_magnitude, identity_utility, Identity, Labor};
use crate::num::ceil_tolerant;
use crate::observation::{pollution_bin, Observation, Region, TeamSizeBucket};
use crate::rng::{self, SimRng};
use crate::teams::{share_rewards, TeamEvent, TeamRegistry};

/// A grid coordinate. Ordering is row-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos {
    pub row: u16,
    pub col: u16,
}

impl Pos {
    pub const fn new(row: u16, col: u16) -> Self {
        Pos { row, col }
    }

    pub fn chebyshev(self, other: Pos) -> u16 {
        self.row.abs_diff(other.row).max(self.col.abs_diff(other.col))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    MoveUp,
    MoveDown,
    MoveLeft,
    MoveRight,
    Stay,
    Clean,
    Pick,
    /// Propose moving to team slot `0..=numAgents`; 0 leaves every team.
    ChooseTeam(usize),
}

impl Action {
    /// Every action except `ChooseTeam`, in index order.
    pub const BASIC: [Action; 7] = [
        Action::MoveUp,
        Action::MoveDown,
        Action::MoveLeft,
        Action::MoveRight,
        Action::Stay,
        Action::Clean,
        Action::Pick,
    ];

    fn delta(self) -> Option<(i32, i32)> {
        match self {
            Action::MoveUp => Some((-1, 0)),
            Action::MoveDown => Some((1, 0)),
            Action::MoveLeft => Some((0, -1)),
            Action::MoveRight => Some((0, 1)),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellKind {
    River,
    Open,
    Orchard,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgentRecord {
    pos: Pos,
    identity: Identity,
    material_total: f64,
    shaping_total: f64,
    last_harvested: u32,
    last_cleaned: u32,
}

impl AgentRecord {
    pub fn pos(&self) -> Pos {
        self.pos
    }

    /// Experimenter-visible only; never part of an [`Observation`].
    pub fn identity(&self) -> Identity {
        self.identity
    }

    pub fn material_total(&self) -> f64 {
        self.material_total
    }

    pub fn shaping_total(&self) -> f64 {
        self.shaping_total
    }

    pub fn last_harvested(&self) -> u32 {
        self.last_harvested
    }

    pub fn last_cleaned(&self) -> u32 {
        self.last_cleaned
    }
}

/// Per-agent result of one step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AgentOutcome {
    /// After team sharing.
    pub material_reward: f64,
    pub shaping_reward: f64,
    pub apples_harvested: u32,
    pub waste_cleaned: u32,
    /// `Some(accepted)` when the agent proposed a team change.
    pub team_change: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub agents: Vec<AgentOutcome>,
    /// Pollution at the end of the step.
    pub pollution_level: f64,
    pub apples_spawned: u32,
    pub waste_spawned: u32,
    pub team_events: Vec<TeamEvent>,
}

impl StepOutcome {
    pub fn total_harvested(&self) -> u32 {
        self.agents.iter().map(|a| a.apples_harvested).sum()
    }

    pub fn total_cleaned(&self) -> u32 {
        self.agents.iter().map(|a| a.waste_cleaned).sum()
    }

    /// Material reward summed in agent order.
    pub fn total_material(&self) -> f64 {
        self.agents.iter().map(|a| a.material_reward).sum()
    }
}

/// Full simulation state, including the generator.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvState {
    step: u32,
    waste: Vec<bool>,
    apples: Vec<bool>,
    waste_count: usize,
    apple_count: usize,
    agents: Vec<AgentRecord>,
    teams: TeamRegistry,
    rng: SimRng,
}

impl EnvState {
    pub fn step(&self) -> u32 {
        self.step
    }

    pub fn agents(&self) -> &[AgentRecord] {
        &self.agents
    }

    pub fn teams(&self) -> &TeamRegistry {
        &self.teams
    }

    pub fn waste_count(&self) -> usize {
        self.waste_count
    }

    pub fn apple_count(&self) -> usize {
        self.apple_count
    }
}

/// Per-cell apple spawn probability at pollution `pollution`:
/// `appleSpawnMax · max(0, 1 − pollution/θ)`, exactly zero at or above θ.
pub fn apple_spawn_probability(pollution: f64, config: &EnvConfig) -> f64 {
    if pollution >= config.depletion_threshold {
        return 0.0;
    }
    config.apple_spawn_max * (1.0 - pollution / config.depletion_threshold)
}

/// An environment instance: configuration plus state.
#[derive(Clone, Debug, PartialEq)]
pub struct Env {
    config: EnvConfig,
    state: EnvState,
    river: Vec<usize>,
    orchard: Vec<usize>,
}

impl Env {
    /// Fresh episode. Waste covers `ceil(initialPollution · riverCells)`
    /// uniformly chosen river cells, agents stand on distinct open cells and
    /// everyone is solo. Draw order is waste, agents, identities.
    pub fn new(config: EnvConfig, seed: u64) -> Result<Self, Error> {
        config.validate()?;
        let mut rng = rng::stream(seed, rng::ENV_STREAM);
        let width = config.width as usize;
        let cells = width * config.height as usize;
        let kind = |idx: usize| cell_kind(&config, (idx / width) as u16);
        let river: Vec<usize> = (0..cells).filter(|&i| kind(i) == CellKind::River).collect();
        let orchard: Vec<usize> = (0..cells).filter(|&i| kind(i) == CellKind::Orchard).collect();
        let mut open: Vec<usize> = (0..cells).filter(|&i| kind(i) == CellKind::Open).collect();

        let mut waste = vec![false; cells];
        let waste_count = ceil_tolerant(config.initial_pollution * river.len() as f64).min(river.len());
        let mut shuffled = river.clone();
        let (chosen, _) = shuffled.partial_shuffle(&mut rng, waste_count);
        for &i in chosen.iter() {
            waste[i] = true;
        }

        let n = config.num_agents;
        let (spawn, _) = open.partial_shuffle(&mut rng, n);
        let spawn: Vec<usize> = spawn.to_vec();
        let identities = assign_identities(n, config.identity_ratio, &mut rng);
        let agents = spawn
            .iter()
            .zip(identities)
            .map(|(&idx, identity)| AgentRecord {
                pos: Pos::new((idx / width) as u16, (idx % width) as u16),
                identity,
                material_total: 0.0,
                shaping_total: 0.0,
                last_harvested: 0,
                last_cleaned: 0,
            })
            .collect();

        Ok(Env {
            state: EnvState {
                step: 0,
                waste,
                apples: vec![false; cells],
                waste_count,
                apple_count: 0,
                agents,
                teams: TeamRegistry::new(n),
                rng,
            },
            config,
            river,
            orchard,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn is_done(&self) -> bool {
        self.state.step >= self.config.episode_length
    }

    pub fn identities(&self) -> Vec<Identity> {
        self.state.agents.iter().map(|a| a.identity).collect()
    }

    pub fn cell_kind(&self, pos: Pos) -> Option<CellKind> {
        self.in_bounds(pos).then(|| cell_kind(&self.config, pos.row))
    }

    pub fn has_waste(&self, pos: Pos) -> bool {
        self.in_bounds(pos) && self.state.waste[self.index(pos)]
    }

    pub fn has_apple(&self, pos: Pos) -> bool {
        self.in_bounds(pos) && self.state.apples[self.index(pos)]
    }

    pub fn agent_at(&self, pos: Pos) -> Option<usize> {
        self.state.agents.iter().position(|a| a.pos == pos)
    }

    /// Fraction of river cells holding waste.
    pub fn pollution_level(&self) -> f64 {
        self.state.waste_count as f64 / self.river.len() as f64
    }

    fn in_bounds(&self, pos: Pos) -> bool {
        pos.row < self.config.height && pos.col < self.config.width
    }

    fn index(&self, pos: Pos) -> usize {
        pos.row as usize * self.config.width as usize + pos.col as usize
    }

    fn agent(&self, agent: usize) -> Result<&AgentRecord, Error> {
        self.state.agents.get(agent).ok_or(Error::UnknownAgent(agent))
    }

    /// Cells within reach of `center`, nearest first, row-major among equals.
    fn reach(&self, center: Pos) -> Vec<Pos> {
        let r = self.config.reach_radius;
        let rows = center.row.saturating_sub(r)..=(center.row + r).min(self.config.height - 1);
        let mut out: Vec<Pos> = rows
            .flat_map(|row| {
                let cols = center.col.saturating_sub(r)..=(center.col + r).min(self.config.width - 1);
                cols.map(move |col| Pos::new(row, col))
            })
            .collect();
        out.sort_by_key(|&p| (center.chebyshev(p), p));
        out
    }

    // Scenario setup. These edit the state directly so tests and experiments
    // can build micro-scenarios; each keeps the state invariants.

    /// Moves `agent` onto an unoccupied, non-river cell.
    pub fn place_agent(&mut self, agent: usize, pos: Pos) -> Result<(), Error> {
        self.agent(agent)?;
        match self.cell_kind(pos) {
            None => return Err(invalid(pos, "off the grid")),
            Some(CellKind::River) => return Err(invalid(pos, "agents cannot stand in the river")),
            _ => {}
        }
        if matches!(self.agent_at(pos), Some(other) if other != agent) {
            return Err(invalid(pos, "occupied by another agent"));
        }
        self.state.agents[agent].pos = pos;
        Ok(())
    }

    pub fn set_waste(&mut self, pos: Pos, waste: bool) -> Result<(), Error> {
        if self.cell_kind(pos) != Some(CellKind::River) {
            return Err(invalid(pos, "waste only exists on river cells"));
        }
        let idx = self.index(pos);
        if self.state.waste[idx] != waste {
            self.state.waste[idx] = waste;
            if waste {
                self.state.waste_count += 1;
            } else {
                self.state.waste_count -= 1;
            }
        }
        Ok(())
    }

    pub fn set_apple(&mut self, pos: Pos, apple: bool) -> Result<(), Error> {
        if self.cell_kind(pos) != Some(CellKind::Orchard) {
            return Err(invalid(pos, "apples only grow on orchard cells"));
        }
        let idx = self.index(pos);
        if self.state.apples[idx] != apple {
            self.state.apples[idx] = apple;
            if apple {
                self.state.apple_count += 1;
            } else {
                self.state.apple_count -= 1;
            }
        }
        Ok(())
    }

    /// Removes every apple from the orchard.
    pub fn clear_apples(&mut self) {
        self.state.apples.iter_mut().for_each(|a| *a = false);
        self.state.apple_count = 0;
    }

    /// Overrides identities. Only allowed before the first step.
    pub fn set_identities(&mut self, identities: &[Identity]) -> Result<(), Error> {
        if self.state.step != 0 {
            return Err(Error::AlreadyStarted);
        }
        if identities.len() != self.state.agents.len() {
            return Err(Error::ActionCount {
                expected: self.state.agents.len(),
                got: identities.len(),
            });
        }
        for (a, &id) in self.state.agents.iter_mut().zip(identities) {
            a.identity = id;
        }
        Ok(())
    }

    /// Removes up to the agent's clean capacity of waste cells in reach,
    /// nearest first. Returns the number removed.
    pub fn apply_clean(&mut self, agent: usize) -> Result<u32, Error> {
        let rec = self.agent(agent)?;
        let capacity = effect_magnitude(rec.identity, Labor::Clean, &self.config) as usize;
        let targets: Vec<usize> = self
            .reach(rec.pos)
            .into_iter()
            .map(|p| self.index(p))
            .filter(|&i| self.state.waste[i])
            .take(capacity)
            .collect();
        for &i in &targets {
            self.state.waste[i] = false;
        }
        self.state.waste_count -= targets.len();
        Ok(targets.len() as u32)
    }

    /// Harvests up to the agent's harvest capacity of apples in reach,
    /// nearest first. Returns the number harvested.
    pub fn apply_pick(&mut self, agent: usize) -> Result<u32, Error> {
        let rec = self.agent(agent)?;
        let capacity = effect_magnitude(rec.identity, Labor::Pick, &self.config) as usize;
        let targets: Vec<usize> = self
            .reach(rec.pos)
            .into_iter()
            .map(|p| self.index(p))
            .filter(|&i| self.state.apples[i])
            .take(capacity)
            .collect();
        for &i in &targets {
            self.state.apples[i] = false;
        }
        self.state.apple_count -= targets.len();
        Ok(targets.len() as u32)
    }

    fn try_move(&mut self, agent: usize, (dr, dc): (i32, i32)) {
        let pos = self.state.agents[agent].pos;
        let row = pos.row as i32 + dr;
        let col = pos.col as i32 + dc;
        if row < 0 || col < 0 {
            return;
        }
        let target = Pos::new(row as u16, col as u16);
        let passable = matches!(self.cell_kind(target), Some(CellKind::Open | CellKind::Orchard));
        if passable && self.agent_at(target).is_none() {
            self.state.agents[agent].pos = target;
        }
    }

    /// Advances one step. Phases, in order:
    ///
    /// 1. team changes, in agent order;
    /// 2. moves, in an order shuffled from the environment generator; blocked
    ///    moves (walls, river, occupied cells) become `Stay`;
    /// 3. Clean and Pick, in the same shuffled order;
    /// 4. with probability `wasteSpawnProb`, one uniformly chosen clean river
    ///    cell turns to waste;
    /// 5. every empty orchard cell grows an apple independently with
    ///    [`apple_spawn_probability`] at the current pollution;
    /// 6. material rewards are shared within teams;
    /// 7. identity shaping is added privately.
    pub fn step(&mut self, actions: &[Action]) -> Result<StepOutcome, Error> {
        let n = self.config.num_agents;
        if actions.len() != n {
            return Err(Error::ActionCount {
                expected: n,
                got: actions.len(),
            });
        }
        if self.is_done() {
            return Err(Error::EpisodeFinished);
        }
        for (agent, &a) in actions.iter().enumerate() {
            if let Action::ChooseTeam(slot) = a {
                if slot > n {
                    return Err(Error::InvalidSlot { agent, slot, max: n });
                }
            }
        }
        let step = self.state.step;
        let mut agents = vec![AgentOutcome::default(); n];
        let mut team_events = Vec::new();

        for (agent, &a) in actions.iter().enumerate() {
            if let Action::ChooseTeam(to) = a {
                let from = self.state.teams.slot(agent)?;
                let accepted = self.state.teams.propose(agent, to, step, &self.config)?;
                agents[agent].team_change = Some(accepted);
                team_events.push(TeamEvent {
                    step,
                    agent,
                    from,
                    to,
                    accepted,
                });
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut self.state.rng);
        for &i in &order {
            if let Some(d) = actions[i].delta() {
                self.try_move(i, d);
            }
        }
        for &i in &order {
            match actions[i] {
                Action::Clean => agents[i].waste_cleaned = self.apply_clean(i)?,
                Action::Pick => agents[i].apples_harvested = self.apply_pick(i)?,
                _ => {}
            }
        }

        let mut waste_spawned = 0;
        if self.state.rng.gen_bool(self.config.waste_spawn_prob) {
            let clean = self.river.len() - self.state.waste_count;
            if clean > 0 {
                let k = self.state.rng.gen_range(0..clean);
                let waste = &self.state.waste;
                let idx = self.river.iter().copied().filter(|&i| !waste[i]).nth(k);
                if let Some(idx) = idx {
                    self.state.waste[idx] = true;
                    self.state.waste_count += 1;
                    waste_spawned = 1;
                }
            }
        }

        let p = apple_spawn_probability(self.pollution_level(), &self.config);
        let mut apples_spawned = 0;
        if p > 0.0 {
            for &i in &self.orchard {
                if !self.state.apples[i] && self.state.rng.gen::<f64>() < p {
                    self.state.apples[i] = true;
                    apples_spawned += 1;
                }
            }
            self.state.apple_count += apples_spawned as usize;
        }

        let raw: Vec<f64> = agents
            .iter()
            .map(|o| o.apples_harvested as f64 * self.config.apple_reward)
            .collect();
        let shared = share_rewards(&raw, &self.state.teams);
        for (i, out) in agents.iter_mut().enumerate() {
            out.material_reward = shared[i];
            let rec = &mut self.state.agents[i];
            out.shaping_reward = identity_utility(rec.identity, out, &self.config);
            rec.material_total += out.material_reward;
            rec.shaping_total += out.shaping_reward;
            rec.last_harvested = out.apples_harvested;
            rec.last_cleaned = out.waste_cleaned;
        }
        self.state.step += 1;

        Ok(StepOutcome {
            agents,
            pollution_level: self.pollution_level(),
            apples_spawned,
            waste_spawned,
            team_events,
        })
    }

    /// What `agent` sees. Never includes any identity.
    pub fn observe(&self, agent: usize) -> Result<Observation, Error> {
        let rec = self.agent(agent)?;
        let mut apples = 0u8;
        let mut waste = 0u8;
        let mut bank = false;
        for p in self.reach(rec.pos) {
            let i = self.index(p);
            apples = apples.saturating_add(self.state.apples[i] as u8);
            waste = waste.saturating_add(self.state.waste[i] as u8);
            bank |= cell_kind(&self.config, p.row) == CellKind::River;
        }
        let region = match cell_kind(&self.config, rec.pos.row) {
            CellKind::Orchard => Region::Orchard,
            _ if bank => Region::RiverBank,
            _ => Region::Open,
        };
        let team_size = self.state.teams.team_size(agent)?;
        Ok(Observation {
            region,
            apples_in_reach: apples,
            waste_in_reach: waste,
            pollution_bin: pollution_bin(self.pollution_level()),
            team_size: TeamSizeBucket::from_size(team_size),
            switch_ready: self
                .state
                .teams
                .change_allowed(agent, self.state.step, &self.config)?,
            last_harvested: rec.last_harvested.min(u8::MAX as u32) as u8,
            last_cleaned: rec.last_cleaned.min(u8::MAX as u32) as u8,
        })
    }
}

fn cell_kind(config: &EnvConfig, row: u16) -> CellKind {
    if config.river_rows.contains(row) {
        CellKind::River
    } else if config.orchard_rows.contains(row) {
        CellKind::Orchard
    } else {
        CellKind::Open
    }
}

fn invalid(pos: Pos, reason: &'static str) -> Error {
    Error::InvalidCell {
        row: pos.row,
        col: pos.col,
        reason,
    }
}
