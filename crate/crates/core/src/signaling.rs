//! Signal catalog, masks, command queues and delivery.

use std::collections::VecDeque;
use std::fmt;

use crate::animat::{Rules, TowerBelief, Variant};
use crate::behavior::{Behavior, BehaviorCatalog, BRICK_NUMBERS};
use crate::error::{Error, Result};
use crate::geometry::Cell;
use crate::rng::Rng;
use crate::social::{has_authority, AuthorityStructure};
use crate::world::{AnimatId, World};

/// Null, eleven commands, five brick locations and tower height.
pub const CANONICAL_SIGNALS: usize = 18;
/// Adds five relative brick locations and Teach/Learn.
pub const EXTENDED_SIGNALS: usize = 24;
pub const COMMAND_QUEUE_CAPACITY: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Signal {
    Null,
    /// A command to perform one of the eleven non-Wait canonical behaviors.
    Command(Behavior),
    BrickLocation(u8),
    TowerHeight,
    BrickLocationRelative(u8),
    TeachLearn,
}

impl Signal {
    pub fn index(self) -> usize {
        match self {
            Signal::Null => 0,
            Signal::Command(b) => b.index(),
            Signal::BrickLocation(k) => 11 + k as usize,
            Signal::TowerHeight => 17,
            Signal::BrickLocationRelative(k) => 17 + k as usize,
            Signal::TeachLearn => 23,
        }
    }

    pub fn from_index(index: usize) -> Option<Signal> {
        Some(match index {
            0 => Signal::Null,
            1..=11 => Signal::Command(Behavior::from_index(index)?),
            12..=16 => Signal::BrickLocation(index as u8 - 11),
            17 => Signal::TowerHeight,
            18..=22 => Signal::BrickLocationRelative(index as u8 - 17),
            23 => Signal::TeachLearn,
            _ => return None,
        })
    }

    pub fn abbreviation(self) -> String {
        match self {
            Signal::Null => "None".into(),
            Signal::Command(b) => format!("C_{}", b.abbreviation()),
            Signal::BrickLocation(k) => format!("D{k}LOC"),
            Signal::TowerHeight => "THEIGHT".into(),
            Signal::BrickLocationRelative(k) => format!("D+{k}LOC"),
            Signal::TeachLearn => "TL".into(),
        }
    }

    /// The command signal that asks for `b`, if one exists.
    pub fn command_for(b: Behavior) -> Option<Signal> {
        (b != Behavior::Wait && b.index() < 12).then_some(Signal::Command(b))
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.abbreviation())
    }
}

/// The subset of signals a tribe may utter in one trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalMask {
    enabled: Vec<bool>,
}

impl SignalMask {
    pub fn all(width: usize) -> Self {
        Self {
            enabled: vec![true; width],
        }
    }

    /// Parses a string of `0`/`1` characters, one per signal slot.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let enabled = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidValue {
                    key: "signal_mask".into(),
                    message: format!("unexpected character `{c}`"),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        if enabled.len() != CANONICAL_SIGNALS && enabled.len() != EXTENDED_SIGNALS {
            return Err(Error::InvalidValue {
                key: "signal_mask".into(),
                message: format!("expected {CANONICAL_SIGNALS} or {EXTENDED_SIGNALS} bits, got {}", enabled.len()),
            });
        }
        Ok(Self { enabled })
    }

    /// Each signal enabled independently with probability `p`; Null is
    /// always available.
    pub fn random(width: usize, p: f64, rng: &mut Rng) -> Self {
        let mut enabled = vec![true; width];
        for slot in enabled.iter_mut().skip(1) {
            *slot = rng.random() < p;
        }
        Self { enabled }
    }

    /// Masks signals that cannot mean anything in this trial: commands for
    /// disabled behaviors and disabled extensions.
    pub fn restrict(&mut self, behaviors: &BehaviorCatalog, relative: bool, teach_learn: bool) {
        for (i, slot) in self.enabled.iter_mut().enumerate() {
            match Signal::from_index(i) {
                Some(Signal::Command(b)) if !behaviors.is_enabled(b) => *slot = false,
                Some(Signal::BrickLocationRelative(_)) if !relative => *slot = false,
                Some(Signal::TeachLearn) if !teach_learn => *slot = false,
                _ => {}
            }
        }
        self.enabled[0] = true;
    }

    pub fn width(&self) -> usize {
        self.enabled.len()
    }

    pub fn is_enabled(&self, s: Signal) -> bool {
        self.enabled.get(s.index()).copied().unwrap_or(false)
    }

    pub fn mask(&self) -> &[bool] {
        &self.enabled
    }

    pub fn to_bits(&self) -> String {
        self.enabled.iter().map(|&e| if e { '1' } else { '0' }).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommandRecord {
    pub command: Behavior,
    pub commander: AnimatId,
    pub heard_at: f64,
}

/// Pending commands at a listener; oldest first, bounded.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CommandQueue {
    records: VecDeque<CommandRecord>,
}

impl CommandQueue {
    pub fn push(&mut self, record: CommandRecord) {
        if self.records.len() == COMMAND_QUEUE_CAPACITY {
            self.records.pop_front();
        }
        self.records.push_back(record);
    }

    pub fn pop(&mut self) -> Option<CommandRecord> {
        self.records.pop_front()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// What an emission did.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Delivery {
    pub heard: usize,
    pub command_queued: bool,
    pub merged: usize,
}

/// Overwrites `belief` if the incoming observation is strictly newer.
pub fn merge_tower_knowledge(belief: &mut TowerBelief, height: usize, observed_at: Option<f64>) -> bool {
    let Some(t) = observed_at else { return false };
    if belief.observed_at.is_some_and(|held| held >= t) {
        return false;
    }
    belief.height = height;
    belief.observed_at = Some(t);
    true
}

/// Nearest friendly within signal range, ties to the lower id.
pub fn select_signal_target(world: &World, index: usize, rules: &Rules) -> Option<AnimatId> {
    let me = &world.animats[index];
    let mut best: Option<(f64, AnimatId)> = None;
    for other in &world.animats {
        if other.id == me.id || other.tribe != me.tribe {
            continue;
        }
        let d = other.position.distance(me.position);
        if d <= rules.signal_range && best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, other.id));
        }
    }
    best.map(|(_, id)| id)
}

/// The brick a location signal refers to, resolved by the speaker.
fn location_payload(world: &World, index: usize, signal: Signal) -> Option<(u8, Cell)> {
    let speaker = &world.animats[index];
    let number = match signal {
        Signal::BrickLocation(k) => k,
        Signal::BrickLocationRelative(k) => {
            let n = speaker.knowledge.friendly_tower.height as u8 + k;
            if n > BRICK_NUMBERS {
                return None;
            }
            n
        }
        _ => return None,
    };
    speaker
        .map
        .nearest(speaker.position, number)
        .map(|cell| (number, cell))
}

/// Delivers `signal` from the animat at `index` to everyone in range.
pub fn emit_signal(
    world: &mut World,
    index: usize,
    signal: Signal,
    authorities: &[AuthorityStructure],
    rules: &Rules,
) -> Delivery {
    let mut out = Delivery::default();
    if signal == Signal::Null {
        return out;
    }
    let now = world.now();
    let speaker = world.animats[index].clone_header();
    let location = location_payload(world, index, signal);
    let tower = world.animats[index].knowledge.friendly_tower;
    for i in 0..world.animats.len() {
        if i == index {
            continue;
        }
        let hearer = &world.animats[i];
        if hearer.position.distance(speaker.position) > rules.signal_range {
            continue;
        }
        out.heard += 1;
        let friendly = hearer.tribe == speaker.tribe;
        let authority_ok = friendly
            && speaker.signal_target == Some(hearer.id)
            && has_authority(authorities[speaker.tribe], &speaker.rank, &hearer.rank());
        let hearer = &mut world.animats[i];
        hearer.knowledge.last_heard = Some(signal);
        if !friendly {
            hearer.knowledge.enemy_target = Some(speaker.id);
            if rules.variant == Variant::SignalInterception {
                if let Some((number, cell)) = location {
                    hearer.map.set(cell, number);
                    out.merged += 1;
                }
            }
            continue;
        }
        match signal {
            Signal::Command(b) if authority_ok => {
                hearer.commands.push(CommandRecord {
                    command: b,
                    commander: speaker.id,
                    heard_at: now,
                });
                out.command_queued = true;
            }
            Signal::BrickLocation(_) | Signal::BrickLocationRelative(_) => {
                if let Some((number, cell)) = location {
                    if rules.variant != Variant::SpottersFetchers || !hearer.is_spotter() {
                        hearer.map.set(cell, number);
                    }
                    out.merged += 1;
                }
            }
            Signal::TowerHeight
                if merge_tower_knowledge(&mut hearer.knowledge.friendly_tower, tower.height, tower.observed_at) =>
            {
                out.merged += 1;
            }
            _ => {}
        }
    }
    out
}
