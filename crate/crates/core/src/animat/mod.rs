//! Animat state: knowledge, spatial map, behaviors, combat.

mod act;
mod combat;
mod map;
mod sense;

pub use act::{attempt_drop, attempt_pickup, nearest_known_brick, step_behavior, BrickSelector, DropOutcome, StepOutcome};
pub use combat::{combat_strengths, resolve_combat, CombatResult, LOSER_STUN_SECONDS};
pub use map::{SpatialMap, MAX_RECENCY};
pub use sense::sense;

use crate::behavior::{Behavior, BEHAVIOR_SLOTS};
use crate::geometry::Vec2;
use crate::learning::HistoryQueues;
use crate::metrics::SequenceCounter;
use crate::neural::{status, Brain, InputLayout, MemoryRegisters, STATUS_INPUTS};
use crate::signaling::{CommandQueue, Signal, CANONICAL_SIGNALS};
use crate::social::Rank;
use crate::world::{AnimatId, BrickId, TribeId};

/// Seconds over which an unseen tower's observed-age input climbs to 1.
pub const OBSERVATION_RAMP_SECONDS: f64 = 200.0;
pub const ARRIVAL_DISTANCE: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    #[default]
    Standard,
    UnorderedStacking,
    SpottersFetchers,
    SignalInterception,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Standard => "standard",
            Variant::UnorderedStacking => "unordered_stacking",
            Variant::SpottersFetchers => "spotters_fetchers",
            Variant::SignalInterception => "signal_interception",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rewards {
    pub drop: i64,
    pub win: i64,
    pub lose: i64,
}

impl Default for Rewards {
    fn default() -> Self {
        Self {
            drop: 10,
            win: 1,
            lose: -1,
        }
    }
}

/// World rules an animat's procedures consult.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rules {
    pub sight_range: f64,
    pub signal_range: f64,
    pub variant: Variant,
    pub rewards: Rewards,
    pub combat: bool,
    pub give_up: f64,
}

impl Default for Rules {
    fn default() -> Self {
        Self {
            sight_range: 256.0,
            signal_range: 512.0,
            variant: Variant::Standard,
            rewards: Rewards::default(),
            combat: true,
            give_up: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Role {
    #[default]
    Generalist,
    /// Finds bricks but never carries them.
    Spotter,
    /// Carries bricks but learns locations only by hearing them.
    Fetcher,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TowerBelief {
    pub height: usize,
    /// When the height was observed; `None` if never.
    pub observed_at: Option<f64>,
}

impl TowerBelief {
    /// Observed-age input: 0 while in sight, rising to 1 when unseen.
    pub fn age_input(&self, in_sight: bool, now: f64) -> f64 {
        if in_sight {
            return 0.0;
        }
        match self.observed_at {
            Some(t) => ((now - t) / OBSERVATION_RAMP_SECONDS).clamp(0.0, 1.0),
            None => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Knowledge {
    /// The animat's score; never below 1.
    pub health: i64,
    pub behavior: Behavior,
    pub busy: bool,
    pub destination: Option<Vec2>,
    /// Random point being explored toward, when wandering.
    pub wander: Option<Vec2>,
    pub enemy_target: Option<AnimatId>,
    pub enemy_target_combat_power: f64,
    pub enemy_target_has_brick: bool,
    pub signal_target: Option<AnimatId>,
    pub signal_target_behavior: Option<Behavior>,
    pub same_signal_target_as_last: bool,
    pub think_count: u64,
    pub friendly_tower: TowerBelief,
    pub enemy_tower: TowerBelief,
    pub birth_time: f64,
    pub combat_power: f64,
    pub just_attacked: f64,
    pub at_friendly_tower: bool,
    pub sees_friendly_tower: bool,
    pub at_enemy_tower: bool,
    pub sees_enemy_tower: bool,
    pub sees_friend: bool,
    pub sees_enemy: bool,
    pub near_brick: bool,
    /// Set by an incoming attack; ends Defend.
    pub was_attacked: bool,
    /// Set when this animat executed an attack during the current think.
    pub attacked_this_think: bool,
    /// Extra delay owed to the next think after losing a fight.
    pub stun_pending: f64,
    pub last_heard: Option<Signal>,
}

impl Knowledge {
    pub fn new(birth_time: f64) -> Self {
        Self {
            health: 1,
            behavior: Behavior::Wait,
            busy: false,
            destination: None,
            wander: None,
            enemy_target: None,
            enemy_target_combat_power: 0.0,
            enemy_target_has_brick: false,
            signal_target: None,
            signal_target_behavior: None,
            same_signal_target_as_last: false,
            think_count: 0,
            friendly_tower: TowerBelief::default(),
            enemy_tower: TowerBelief::default(),
            birth_time,
            combat_power: 1.0,
            just_attacked: 0.0,
            at_friendly_tower: false,
            sees_friendly_tower: false,
            at_enemy_tower: false,
            sees_enemy_tower: false,
            sees_friend: false,
            sees_enemy: false,
            near_brick: false,
            was_attacked: false,
            attacked_this_think: false,
            stun_pending: 0.0,
            last_heard: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CarriedBrick {
    pub id: BrickId,
    pub number: u8,
}

/// Lifetime tallies reported at death.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnimatStats {
    pub behavior_counts: [u64; BEHAVIOR_SLOTS],
    pub signal_counts: Vec<u64>,
    pub commands_received: u64,
    pub commands_obeyed: u64,
    pub bricks_stacked: u64,
    pub combats_won: u64,
    pub combats_lost: u64,
    pub trainings: u64,
}

/// One decision pair as logged for offline recomputation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoggedDecision {
    pub behavior: usize,
    pub signal: usize,
    pub counted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Animat {
    pub id: AnimatId,
    pub tribe: TribeId,
    pub role: Role,
    pub position: Vec2,
    pub velocity: Vec2,
    pub next_think: f64,
    pub carrying: Option<CarriedBrick>,
    pub knowledge: Knowledge,
    pub map: SpatialMap,
    pub brain: Brain,
    pub history: HistoryQueues,
    pub commands: CommandQueue,
    pub last_action: Option<Behavior>,
    pub last_signal: Option<Signal>,
    /// Eligible for the random-start phase (first generation only).
    pub random_start: bool,
    pub action_sequences: SequenceCounter,
    pub signal_sequences: SequenceCounter,
    pub stats: AnimatStats,
    pub decision_log: Option<Vec<LoggedDecision>>,
}

/// Snapshot of the fields a signal delivery needs from its speaker.
#[derive(Debug, Clone, Copy)]
pub struct SpeakerHeader {
    pub id: AnimatId,
    pub tribe: TribeId,
    pub position: Vec2,
    pub signal_target: Option<AnimatId>,
    pub rank: Rank,
}

impl Animat {
    pub fn new(id: AnimatId, tribe: TribeId, position: Vec2, birth_time: f64, brain: Brain) -> Self {
        let a_in = brain.action.n_in();
        let s_in = brain.signal.n_in();
        let a_out = brain.action.n_out();
        let s_out = brain.signal.n_out();
        Self {
            id,
            tribe,
            role: Role::Generalist,
            position,
            velocity: Vec2::ZERO,
            next_think: 0.0,
            carrying: None,
            knowledge: Knowledge::new(birth_time),
            map: SpatialMap::default(),
            brain,
            history: HistoryQueues::new(a_in, s_in, a_out, s_out),
            commands: CommandQueue::default(),
            last_action: None,
            last_signal: None,
            random_start: false,
            action_sequences: SequenceCounter::new(BEHAVIOR_SLOTS),
            signal_sequences: SequenceCounter::new(CANONICAL_SIGNALS),
            stats: AnimatStats::default(),
            decision_log: None,
        }
    }

    /// An animat with a zero-weight default brain, for tests and tools.
    pub fn bare(id: AnimatId, tribe: TribeId, position: Vec2, birth_time: f64) -> Self {
        Self::new(id, tribe, position, birth_time, Brain::blank())
    }

    pub fn rank(&self) -> Rank {
        Rank {
            id: self.id,
            tribe: self.tribe,
            birth_time: self.knowledge.birth_time,
            health: self.knowledge.health,
        }
    }

    pub fn clone_header(&self) -> SpeakerHeader {
        SpeakerHeader {
            id: self.id,
            tribe: self.tribe,
            position: self.position,
            signal_target: self.knowledge.signal_target,
            rank: self.rank(),
        }
    }

    pub fn is_spotter(&self) -> bool {
        self.role == Role::Spotter
    }

    pub fn age(&self, now: f64) -> f64 {
        now - self.knowledge.birth_time
    }

    /// Past its lifespan and free to die (a carried brick defers death).
    pub fn is_expired(&self, now: f64, lifespan: f64) -> bool {
        self.age(now) >= lifespan && self.carrying.is_none()
    }

    pub fn add_health(&mut self, delta: i64) {
        self.knowledge.health = (self.knowledge.health + delta).max(1);
    }

    /// The scalar status inputs, all in `[0, 1]`.
    pub fn status_inputs(&self, now: f64) -> [f64; STATUS_INPUTS] {
        let k = &self.knowledge;
        let b = |v: bool| if v { 1.0 } else { 0.0 };
        let mut s = [0.0; STATUS_INPUTS];
        s[status::AT_FRIENDLY_TOWER] = b(k.at_friendly_tower);
        s[status::SEE_FRIENDLY_TOWER] = b(k.sees_friendly_tower);
        s[status::AT_ENEMY_TOWER] = b(k.at_enemy_tower);
        s[status::SEE_ENEMY_TOWER] = b(k.sees_enemy_tower);
        s[status::HAVE_TARGET] = b(k.enemy_target.is_some());
        s[status::TARGET_HAS_BRICK] = b(k.enemy_target.is_some() && k.enemy_target_has_brick);
        if let Some(c) = self.carrying {
            let next = k.friendly_tower.height as u8 + 1;
            s[status::HAVE_BRICK] = 1.0;
            s[status::HAVE_RIGHT_BRICK] = b(c.number == next);
            s[status::BRICK_TOO_LOW] = b(c.number < next);
            s[status::BRICK_TOO_HIGH] = b(c.number > next);
        }
        s[status::NEAR_BRICK] = b(k.near_brick);
        for n in 0..5 {
            s[status::KNOW_BRICK + n] = b(self.map.knows(n as u8 + 1));
        }
        s[status::FRIENDLY_TOWER_OBSERVED] = k.friendly_tower.age_input(k.sees_friendly_tower, now);
        s[status::FRIENDLY_TOWER_HEIGHT] = k.friendly_tower.height as f64 / 5.0;
        s[status::ENEMY_TOWER_OBSERVED] = k.enemy_tower.age_input(k.sees_enemy_tower, now);
        s[status::ENEMY_TOWER_HEIGHT] = k.enemy_tower.height as f64 / 5.0;
        s[status::SEE_FRIEND] = b(k.sees_friend);
        s[status::SEE_ENEMY] = b(k.sees_enemy);
        s[status::COMBAT_POWER] = k.combat_power;
        s[status::TARGET_COMBAT_POWER] = if k.enemy_target.is_some() { k.enemy_target_combat_power } else { 0.0 };
        s[status::JUST_ATTACKED] = k.just_attacked;
        s[status::SAME_SIGNAL_TARGET] = b(k.same_signal_target_as_last);
        s
    }

    /// Input frame for the action network (previous think's outputs).
    pub fn action_frame(&self, now: f64) -> crate::neural::InputFrame {
        crate::neural::InputFrame {
            status: self.status_inputs(now),
            target_behavior: self.knowledge.signal_target_behavior.map(Behavior::index),
            last_behavior: self.last_action.map(Behavior::index),
            last_signal: self.last_signal.map(Signal::index),
            memory: self.brain.memory,
        }
    }

    /// Input frame for the signal network: the action chosen this think
    /// replaces the last-behavior group.
    pub fn signal_frame(&self, now: f64, current_action: Behavior, memory: MemoryRegisters) -> crate::neural::InputFrame {
        crate::neural::InputFrame {
            status: self.status_inputs(now),
            target_behavior: self.knowledge.signal_target_behavior.map(Behavior::index),
            last_behavior: Some(current_action.index()),
            last_signal: self.last_signal.map(Signal::index),
            memory,
        }
    }

    pub fn input_layout_fits(&self, layout: &InputLayout) -> bool {
        self.brain.action.n_in() == layout.len() && self.brain.signal.n_in() == layout.len()
    }
}
