use rand::Rng;

use super::Policy;
use crate::env::Action;
use crate::observation::{Observation, Region};
use crate::rng::SimRng;
use crate::teams::SOLO;

// Chance per idle step that a patrolling agent turns around. Agents cannot
// see walls, so this keeps them from pushing into one forever.
const TURN_PROB: f64 = 0.1;

// Chance per transit step of a sideways move instead. Without it a cleaner
// heading up and a picker heading down in the same column block each other
// for the rest of the episode.
const SIDESTEP_PROB: f64 = 0.1;

fn transit(toward: Action, rng: &mut SimRng) -> Action {
    if rng.gen_bool(SIDESTEP_PROB) {
        if rng.gen_bool(0.5) {
            Action::MoveLeft
        } else {
            Action::MoveRight
        }
    } else {
        toward
    }
}

/// Emits `ChooseTeam(slot)` once at the start of each episode when a slot
/// is configured.
#[derive(Clone, Debug)]
struct TeamIntent {
    slot: usize,
    pending: bool,
}

impl TeamIntent {
    fn new(slot: usize) -> Self {
        TeamIntent {
            slot,
            pending: slot != SOLO,
        }
    }

    fn take(&mut self) -> Option<Action> {
        if self.pending {
            self.pending = false;
            Some(Action::ChooseTeam(self.slot))
        } else {
            None
        }
    }

    fn reset(&mut self) {
        self.pending = self.slot != SOLO;
    }
}

/// Cleans whenever waste is in reach, otherwise heads for the river and
/// patrols the bank.
#[derive(Clone, Debug)]
pub struct GreedyCleaner {
    team: TeamIntent,
    heading: Action,
}

impl GreedyCleaner {
    /// `team_slot` is joined at the start of every episode; `SOLO` stays solo.
    pub fn new(team_slot: usize) -> Self {
        GreedyCleaner {
            team: TeamIntent::new(team_slot),
            heading: Action::MoveLeft,
        }
    }
}

impl Policy for GreedyCleaner {
    fn act(&mut self, obs: &Observation, rng: &mut SimRng) -> Action {
        if let Some(a) = self.team.take() {
            return a;
        }
        if obs.waste_in_reach > 0 {
            return Action::Clean;
        }
        if obs.region != Region::RiverBank {
            return transit(Action::MoveUp, rng);
        }
        if rng.gen_bool(TURN_PROB) {
            self.heading = match self.heading {
                Action::MoveLeft => Action::MoveRight,
                _ => Action::MoveLeft,
            };
        }
        self.heading
    }

    fn begin_episode(&mut self) {
        self.team.reset();
    }
}

/// Picks whenever an apple is in reach, otherwise heads for the orchard and
/// wanders inside it.
#[derive(Clone, Debug)]
pub struct GreedyPicker {
    team: TeamIntent,
}

impl GreedyPicker {
    pub fn new(team_slot: usize) -> Self {
        GreedyPicker {
            team: TeamIntent::new(team_slot),
        }
    }
}

impl Policy for GreedyPicker {
    fn act(&mut self, obs: &Observation, rng: &mut SimRng) -> Action {
        if let Some(a) = self.team.take() {
            return a;
        }
        if obs.apples_in_reach > 0 {
            return Action::Pick;
        }
        if obs.region != Region::Orchard {
            return transit(Action::MoveDown, rng);
        }
        Action::BASIC[rng.gen_range(0..4)]
    }

    fn begin_episode(&mut self) {
        self.team.reset();
    }
}

/// Uniform over the seven non-team actions.
#[derive(Clone, Copy, Debug, Default)]
pub struct RandomPolicy;

impl Policy for RandomPolicy {
    fn act(&mut self, _obs: &Observation, rng: &mut SimRng) -> Action {
        Action::BASIC[rng.gen_range(0..Action::BASIC.len())]
    }
}
