use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use super::{Policy, Transition};
use crate::env::Action;
use crate::observation::Observation;
use crate::rng::SimRng;

/// Action values keyed by observation. Rows appear on first update; unseen
/// observations read as all zeros.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QTable {
    rows: BTreeMap<Observation, Vec<f64>>,
    num_actions: usize,
}

impl QTable {
    pub fn new(num_actions: usize) -> Self {
        QTable {
            rows: BTreeMap::new(),
            num_actions,
        }
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn value(&self, obs: &Observation, action: usize) -> f64 {
        self.rows.get(obs).map_or(0.0, |row| row[action])
    }

    pub fn max_value(&self, obs: &Observation) -> f64 {
        self.rows
            .get(obs)
            .map_or(0.0, |row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }

    /// Index of the largest value; the lowest index wins ties.
    pub fn greedy(&self, obs: &Observation) -> usize {
        let Some(row) = self.rows.get(obs) else {
            return 0;
        };
        let mut best = 0;
        for (i, &v) in row.iter().enumerate().skip(1) {
            if v > row[best] {
                best = i;
            }
        }
        best
    }

    pub fn set(&mut self, obs: Observation, action: usize, value: f64) {
        let n = self.num_actions;
        self.rows.entry(obs).or_insert_with(|| vec![0.0; n])[action] = value;
    }

    /// `(observation, action index, value)` in observation order.
    pub fn entries(&self) -> impl Iterator<Item = (&Observation, usize, f64)> {
        self.rows
            .iter()
            .flat_map(|(obs, row)| row.iter().enumerate().map(move |(a, &v)| (obs, a, v)))
    }
}

/// Linear decay from `start` to `end` over `decay_episodes`, flat after.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_episodes: u32,
}

impl EpsilonSchedule {
    /// Decays over `fraction` of `total_episodes`.
    pub fn over(start: f64, end: f64, total_episodes: u32, fraction: f64) -> Self {
        EpsilonSchedule {
            start,
            end,
            decay_episodes: (total_episodes as f64 * fraction) as u32,
        }
    }

    pub fn epsilon(&self, episode: u32) -> f64 {
        if episode >= self.decay_episodes {
            return self.end;
        }
        let t = episode as f64 / self.decay_episodes as f64;
        self.start + (self.end - self.start) * t
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QLearnerParams {
    pub learning_rate: f64,
    pub discount: f64,
    pub schedule: EpsilonSchedule,
}

impl Default for QLearnerParams {
    fn default() -> Self {
        QLearnerParams {
            learning_rate: 0.1,
            discount: 0.9,
            schedule: EpsilonSchedule {
                start: 1.0,
                end: 0.05,
                decay_episodes: 0,
            },
        }
    }
}

impl QLearnerParams {
    pub fn is_valid(&self) -> bool {
        let s = &self.schedule;
        self.learning_rate > 0.0
            && self.learning_rate <= 1.0
            && (0.0..1.0).contains(&self.discount)
            && (0.0..=1.0).contains(&s.start)
            && (0.0..=1.0).contains(&s.end)
            && s.end <= s.start
    }
}

/// Independent one-step Q-learner with ε-greedy exploration.
#[derive(Clone, Debug)]
pub struct QLearner {
    table: QTable,
    actions: Vec<Action>,
    params: QLearnerParams,
    episode: u32,
    epsilon: f64,
}

impl QLearner {
    /// # Panics
    ///
    /// If `actions` is empty or the parameters are out of range.
    pub fn new(actions: Vec<Action>, params: QLearnerParams) -> Self {
        assert!(!actions.is_empty(), "learner needs at least one action");
        assert!(params.is_valid(), "learner parameters out of range");
        QLearner {
            table: QTable::new(actions.len()),
            actions,
            epsilon: params.schedule.epsilon(0),
            params,
            episode: 0,
        }
    }

    /// The seven basic actions plus `ChooseTeam(s)` for `s` in `team_slots`.
    pub fn action_set(team_slots: core::ops::Range<usize>) -> Vec<Action> {
        let mut actions = Action::BASIC.to_vec();
        actions.extend(team_slots.map(Action::ChooseTeam));
        actions
    }

    pub fn table(&self) -> &QTable {
        &self.table
    }

    pub fn table_mut(&mut self) -> &mut QTable {
        &mut self.table
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn episode(&self) -> u32 {
        self.episode
    }
}

impl Policy for QLearner {
    fn act(&mut self, obs: &Observation, rng: &mut SimRng) -> Action {
        let i = if rng.gen_bool(self.epsilon) {
            rng.gen_range(0..self.actions.len())
        } else {
            self.table.greedy(obs)
        };
        self.actions[i]
    }

    fn update(&mut self, t: &Transition) {
        let Some(a) = self.actions.iter().position(|&x| x == t.action) else {
            return;
        };
        let bootstrap = if t.terminal {
            0.0
        } else {
            self.table.max_value(&t.next_observation)
        };
        let q = self.table.value(&t.observation, a);
        let target = t.reward + self.params.discount * bootstrap;
        self.table
            .set(t.observation, a, q + self.params.learning_rate * (target - q));
    }

    fn end_episode(&mut self) {
        self.episode += 1;
        self.epsilon = self.params.schedule.epsilon(self.episode);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observation::{Region, TeamSizeBucket};
    use crate::rng::stream;

    fn obs(apples: u8) -> Observation {
        Observation {
            region: Region::Orchard,
            apples_in_reach: apples,
            waste_in_reach: 0,
            pollution_bin: 0,
            team_size: TeamSizeBucket::One,
            switch_ready: true,
            last_harvested: 0,
            last_cleaned: 0,
        }
    }

    fn learner(alpha: f64, gamma: f64, eps: f64) -> QLearner {
        QLearner::new(
            Action::BASIC.to_vec(),
            QLearnerParams {
                learning_rate: alpha,
                discount: gamma,
                schedule: EpsilonSchedule {
                    start: eps,
                    end: eps,
                    decay_episodes: 0,
                },
            },
        )
    }

    fn transition(reward: f64, terminal: bool) -> Transition {
        Transition {
            observation: obs(1),
            action: Action::Pick,
            reward,
            next_observation: obs(0),
            terminal,
        }
    }

    #[test]
    fn update_arithmetic() {
        let mut q = learner(0.1, 0.9, 0.0);
        q.update(&transition(1.0, false));
        assert!((q.table().value(&obs(1), 6) - 0.1).abs() < 1e-15);

        let mut q = learner(0.1, 0.9, 0.0);
        q.update(&transition(0.0, false));
        assert_eq!(q.table().value(&obs(1), 6), 0.0);

        let mut q = learner(0.5, 0.9, 0.0);
        q.table_mut().set(obs(0), 2, 10.0);
        q.update(&transition(1.0, true));
        assert_eq!(q.table().value(&obs(1), 6), 0.5);
    }

    #[test]
    fn update_bootstraps_from_next_max() {
        let mut q = learner(0.5, 0.9, 0.0);
        q.table_mut().set(obs(0), 2, 2.0);
        q.update(&transition(1.0, false));
        // 0 + 0.5 · (1 + 0.9·2 − 0)
        assert!((q.table().value(&obs(1), 6) - 1.4).abs() < 1e-12);
    }

    #[test]
    fn greedy_ties_take_lowest_index() {
        let mut q = learner(0.1, 0.9, 0.0);
        let mut rng = stream(0, 1);
        assert_eq!(q.act(&obs(0), &mut rng), Action::MoveUp);
        q.table_mut().set(obs(0), 3, 1.0);
        q.table_mut().set(obs(0), 5, 1.0);
        assert_eq!(q.act(&obs(0), &mut rng), Action::MoveRight);
    }

    #[test]
    fn table_grows_on_update_only() {
        let mut q = learner(0.1, 0.9, 0.0);
        let mut rng = stream(0, 1);
        q.act(&obs(2), &mut rng);
        assert!(q.table().is_empty());
        q.update(&transition(1.0, false));
        assert_eq!(q.table().len(), 1);
    }

    #[test]
    fn full_exploration_is_uniform() {
        let mut q = learner(0.1, 0.9, 1.0);
        q.table_mut().set(obs(0), 6, 100.0);
        let mut rng = stream(11, 1);
        let mut counts = [0usize; 7];
        let draws = 14_000;
        for _ in 0..draws {
            let a = q.act(&obs(0), &mut rng);
            counts[Action::BASIC.iter().position(|&b| b == a).unwrap()] += 1;
        }
        // each bin ~ Binomial(14000, 1/7): sd ≈ 41
        for c in counts {
            assert!((c as f64 - 2000.0).abs() < 5.0 * 41.4, "{counts:?}");
        }
    }

    #[test]
    fn epsilon_decays_to_floor() {
        let s = EpsilonSchedule::over(1.0, 0.05, 500, 0.8);
        assert_eq!(s.decay_episodes, 400);
        let mut q = QLearner::new(
            Action::BASIC.to_vec(),
            QLearnerParams {
                schedule: s,
                ..QLearnerParams::default()
            },
        );
        assert_eq!(q.epsilon(), 1.0);
        let mut prev = q.epsilon();
        for _ in 0..500 {
            q.end_episode();
            assert!(q.epsilon() <= prev);
            prev = q.epsilon();
        }
        assert_eq!(q.epsilon(), 0.05);
        assert!((s.epsilon(200) - 0.525).abs() < 1e-12);
    }

    #[test]
    fn action_set_with_teams() {
        let set = QLearner::action_set(0..3);
        assert_eq!(set.len(), 10);
        assert_eq!(set[7], Action::ChooseTeam(0));
        assert_eq!(set[9], Action::ChooseTeam(2));
    }
}
