//! Behavior identifiers and the per-trial behavior catalog.

use std::fmt;

/// Output slots reserved for behaviors in the action network.
pub const BEHAVIOR_SLOTS: usize = 18;
/// Size of the canonical behavior set (Wait through Defend).
pub const CANONICAL_BEHAVIORS: usize = 12;
pub const BRICK_NUMBERS: u8 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Behavior {
    Wait,
    GoToFriendlyTower,
    GoToEnemyTower,
    /// Fetch a brick with this exact number (1..=5).
    Fetch(u8),
    DropBrick,
    Explore,
    Attack,
    Defend,
    /// Fetch the brick `k` above the believed friendly tower height.
    FetchRelative(u8),
}

impl Behavior {
    pub fn index(self) -> usize {
        match self {
            Behavior::Wait => 0,
            Behavior::GoToFriendlyTower => 1,
            Behavior::GoToEnemyTower => 2,
            Behavior::Fetch(k) => 2 + k as usize,
            Behavior::DropBrick => 8,
            Behavior::Explore => 9,
            Behavior::Attack => 10,
            Behavior::Defend => 11,
            Behavior::FetchRelative(k) => 11 + k as usize,
        }
    }

    pub fn from_index(index: usize) -> Option<Behavior> {
        Some(match index {
            0 => Behavior::Wait,
            1 => Behavior::GoToFriendlyTower,
            2 => Behavior::GoToEnemyTower,
            3..=7 => Behavior::Fetch(index as u8 - 2),
            8 => Behavior::DropBrick,
            9 => Behavior::Explore,
            10 => Behavior::Attack,
            11 => Behavior::Defend,
            12..=16 => Behavior::FetchRelative(index as u8 - 11),
            _ => return None,
        })
    }

    /// Short column label used in dumps and summary tables.
    pub fn abbreviation(self) -> String {
        match self {
            Behavior::Wait => "NONE".into(),
            Behavior::GoToFriendlyTower => "GTFT".into(),
            Behavior::GoToEnemyTower => "GTET".into(),
            Behavior::Fetch(k) => format!("FD{k}"),
            Behavior::DropBrick => "DROP".into(),
            Behavior::Explore => "EXPL".into(),
            Behavior::Attack => "ATTK".into(),
            Behavior::Defend => "DFND".into(),
            Behavior::FetchRelative(k) => format!("FR+{k}"),
        }
    }

    pub fn is_combat(self) -> bool {
        matches!(self, Behavior::Attack | Behavior::Defend)
    }
}

impl fmt::Display for Behavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.abbreviation())
    }
}

/// Which behavior slots an animat may select during a trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BehaviorCatalog {
    enabled: [bool; BEHAVIOR_SLOTS],
}

impl BehaviorCatalog {
    pub fn new(combat: bool, relative_fetch: bool) -> Self {
        let mut enabled = [false; BEHAVIOR_SLOTS];
        for (i, slot) in enabled.iter_mut().enumerate() {
            *slot = match Behavior::from_index(i) {
                Some(b) if b.is_combat() => combat,
                Some(Behavior::FetchRelative(_)) => relative_fetch,
                Some(_) => true,
                None => false,
            };
        }
        Self { enabled }
    }

    pub fn canonical() -> Self {
        Self::new(true, false)
    }

    pub fn is_enabled(&self, b: Behavior) -> bool {
        self.enabled[b.index()]
    }

    pub fn mask(&self) -> &[bool; BEHAVIOR_SLOTS] {
        &self.enabled
    }

    pub fn relative_fetch(&self) -> bool {
        self.enabled[Behavior::FetchRelative(1).index()]
    }

    /// Slots the last-behavior input group spans.
    pub fn input_width(&self) -> usize {
        if self.relative_fetch() {
            17
        } else {
            CANONICAL_BEHAVIORS
        }
    }

    pub fn enabled(&self) -> impl Iterator<Item = Behavior> + '_ {
        (0..BEHAVIOR_SLOTS)
            .filter(|&i| self.enabled[i])
            .filter_map(Behavior::from_index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indices_round_trip() {
        for i in 0..17 {
            assert_eq!(Behavior::from_index(i).unwrap().index(), i);
        }
        assert_eq!(Behavior::from_index(17), None);
    }

    #[test]
    fn canonical_has_twelve() {
        let c = BehaviorCatalog::canonical();
        assert_eq!(c.enabled().count(), 12);
        assert_eq!(c.input_width(), 12);
    }

    #[test]
    fn combat_gates_attack_and_defend() {
        let c = BehaviorCatalog::new(false, false);
        assert!(!c.is_enabled(Behavior::Attack));
        assert!(!c.is_enabled(Behavior::Defend));
        assert_eq!(c.enabled().count(), 10);
    }

    #[test]
    fn abbreviations() {
        assert_eq!(Behavior::Wait.abbreviation(), "NONE");
        assert_eq!(Behavior::Fetch(3).abbreviation(), "FD3");
        assert_eq!(Behavior::DropBrick.to_string(), "DROP");
    }
}
