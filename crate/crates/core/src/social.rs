//! Authority structures deciding whose commands a listener weighs.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::world::{AnimatId, TribeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AuthorityStructure {
    /// Nobody may command anybody.
    NoAuthority,
    /// Everybody may command everybody.
    NoHierarchy,
    /// Older animats command younger ones.
    #[default]
    AgeHierarchy,
    /// Higher scores command lower scores.
    MeritHierarchy,
    /// Both older and higher-scoring.
    AgeMerit,
}

impl AuthorityStructure {
    pub fn code(self) -> &'static str {
        match self {
            AuthorityStructure::NoAuthority => "NA",
            AuthorityStructure::NoHierarchy => "NH",
            AuthorityStructure::AgeHierarchy => "AH",
            AuthorityStructure::MeritHierarchy => "MH",
            AuthorityStructure::AgeMerit => "AM",
        }
    }
}

impl fmt::Display for AuthorityStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for AuthorityStructure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "na" => AuthorityStructure::NoAuthority,
            "nh" => AuthorityStructure::NoHierarchy,
            "ah" => AuthorityStructure::AgeHierarchy,
            "mh" => AuthorityStructure::MeritHierarchy,
            "am" => AuthorityStructure::AgeMerit,
            _ => {
                return Err(Error::InvalidValue {
                    key: "authority".into(),
                    message: format!("`{s}` is not one of na, nh, ah, mh, am"),
                })
            }
        })
    }
}

/// The parts of an animat that rank it within its tribe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rank {
    pub id: AnimatId,
    pub tribe: TribeId,
    pub birth_time: f64,
    pub health: i64,
}

impl Rank {
    /// Strictly older, with equal birth times ordered by id.
    pub fn older_than(&self, other: &Rank) -> bool {
        self.birth_time < other.birth_time || (self.birth_time == other.birth_time && self.id < other.id)
    }
}

pub fn has_authority(structure: AuthorityStructure, speaker: &Rank, listener: &Rank) -> bool {
    if speaker.tribe != listener.tribe || speaker.id == listener.id {
        return false;
    }
    let age = || speaker.older_than(listener);
    let merit = || speaker.health > listener.health;
    match structure {
        AuthorityStructure::NoAuthority => false,
        AuthorityStructure::NoHierarchy => true,
        AuthorityStructure::AgeHierarchy => age(),
        AuthorityStructure::MeritHierarchy => merit(),
        AuthorityStructure::AgeMerit => age() && merit(),
    }
}

/// Obedience multiplier applied to a commanded output before normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObedienceConfig {
    pub x: f64,
}

impl Default for ObedienceConfig {
    fn default() -> Self {
        Self { x: 6.0 }
    }
}
