//! Trial parameters and the plain-text `key=value` config format.
//!
//! Keys without a prefix set a global value or, for per-tribe keys, apply
//! to every tribe. A `tribe0.` or `tribe1.` prefix targets one tribe. Later
//! lines win.

use std::str::FromStr;

use crate::animat::{Rewards, Rules, Variant};
use crate::behavior::BehaviorCatalog;
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::learning::LearnConfig;
use crate::neural::{InputLayout, OutputLayout, SelectionMode};
use crate::signaling::{SignalMask, CANONICAL_SIGNALS, EXTENDED_SIGNALS};
use crate::social::AuthorityStructure;
use crate::world::default_tower_positions;

pub const MAX_TRIBES: usize = 2;

/// How a tribe's signal mask is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum MaskSpec {
    /// Each signal enabled independently with this probability.
    Random(f64),
    Fixed(SignalMask),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TribeConfig {
    pub authority: AuthorityStructure,
    pub obedience: f64,
    pub selection: SelectionMode,
    pub bonus: f64,
    pub memory: bool,
    pub signals: MaskSpec,
    /// Ignore the networks entirely and choose uniformly at random for
    /// the whole trial. Used as a differentiation baseline.
    pub random_policy: bool,
    pub tower: Option<Vec2>,
}

impl Default for TribeConfig {
    fn default() -> Self {
        Self {
            authority: AuthorityStructure::AgeHierarchy,
            obedience: 6.0,
            selection: SelectionMode::Probabilistic,
            bonus: 0.05,
            memory: true,
            signals: MaskSpec::Random(0.5),
            random_policy: false,
            tower: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub seed: u32,
    pub trial_length: f64,
    pub lifespan: f64,
    pub animats_per_tribe: usize,
    pub bricks_per_number: usize,
    /// Fraction of the trial the first generation spends acting randomly.
    pub random_start: f64,
    pub variant: Variant,
    pub sight_range: f64,
    pub signal_range: f64,
    pub rewards: Rewards,
    pub learn: LearnConfig,
    pub give_up: f64,
    pub relative_fetch: bool,
    pub extended_signals: bool,
    pub teach_learn: bool,
    pub observe_target_state: bool,
    pub sample_interval: f64,
    /// Tribe score that ends a one-tribe trial.
    pub solo_target: i64,
    /// Keep every decision for offline recomputation.
    pub record_decisions: bool,
    pub tribes: Vec<TribeConfig>,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            trial_length: 100_000.0,
            lifespan: 20_000.0,
            animats_per_tribe: 10,
            bricks_per_number: 4,
            random_start: 0.05,
            variant: Variant::Standard,
            sight_range: 256.0,
            signal_range: 512.0,
            rewards: Rewards::default(),
            learn: LearnConfig::default(),
            give_up: 0.05,
            relative_fetch: false,
            extended_signals: false,
            teach_learn: false,
            observe_target_state: false,
            sample_interval: 1000.0,
            solo_target: 200,
            record_decisions: false,
            tribes: vec![TribeConfig::default(); 2],
        }
    }
}

impl TrialConfig {
    pub fn combat(&self) -> bool {
        self.tribes.len() > 1
    }

    pub fn rules(&self) -> Rules {
        Rules {
            sight_range: self.sight_range,
            signal_range: self.signal_range,
            variant: self.variant,
            rewards: self.rewards,
            combat: self.combat(),
            give_up: self.give_up,
        }
    }

    pub fn behaviors(&self) -> BehaviorCatalog {
        BehaviorCatalog::new(self.combat(), self.relative_fetch)
    }

    pub fn signal_width(&self) -> usize {
        if self.extended_signals {
            EXTENDED_SIGNALS
        } else {
            CANONICAL_SIGNALS
        }
    }

    pub fn input_layout(&self, tribe: usize) -> InputLayout {
        InputLayout {
            observe_target_state: self.observe_target_state,
            behavior_width: self.behaviors().input_width(),
            signal_width: self.signal_width(),
            memory: self.tribes[tribe].memory,
        }
    }

    pub fn action_outputs(&self, tribe: usize) -> OutputLayout {
        OutputLayout {
            choices: crate::behavior::BEHAVIOR_SLOTS,
            memory: self.tribes[tribe].memory,
        }
    }

    pub fn signal_outputs(&self, tribe: usize) -> OutputLayout {
        OutputLayout {
            choices: self.signal_width(),
            memory: self.tribes[tribe].memory,
        }
    }

    pub fn tower_positions(&self) -> Vec<Vec2> {
        let defaults = default_tower_positions(self.tribes.len());
        self.tribes
            .iter()
            .zip(defaults)
            .map(|(t, d)| t.tower.unwrap_or(d))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: &str| {
            Err(Error::InvalidValue {
                key: key.into(),
                message: message.into(),
            })
        };
        if self.tribes.is_empty() || self.tribes.len() > MAX_TRIBES {
            return bad("tribes", "must be 1 or 2");
        }
        if self.trial_length.is_nan() || self.trial_length <= 0.0 {
            return bad("trial_length", "must be positive");
        }
        if self.lifespan.is_nan() || self.lifespan <= 0.0 || self.lifespan > self.trial_length {
            return bad("lifespan", "must be positive and at most trial_length");
        }
        if self.animats_per_tribe == 0 {
            return bad("animats_per_tribe", "must be at least 1");
        }
        if self.bricks_per_number == 0 {
            return bad("bricks_per_number", "must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.random_start) {
            return bad("random_start", "must be in [0, 1]");
        }
        if !(self.learn.beta > 0.0 && self.learn.beta <= 0.1) {
            return bad("beta", "must be in (0, 0.1]");
        }
        if !(0.0..=1.0).contains(&self.learn.learn_probability) {
            return bad("learn_probability", "must be in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.give_up) {
            return bad("give_up", "must be in [0, 1]");
        }
        if self.sample_interval.is_nan() || self.sample_interval <= 0.0 {
            return bad("sample_interval", "must be positive");
        }
        if !(self.sight_range > 0.0 && self.signal_range > 0.0) {
            return bad("sight_range", "ranges must be positive");
        }
        for t in &self.tribes {
            if !t.obedience.is_finite() || t.obedience < 0.0 {
                return bad("obedience", "must be a finite value >= 0");
            }
            if t.bonus.is_nan() || t.bonus < 0.0 {
                return bad("bonus", "must be >= 0");
            }
            match &t.signals {
                MaskSpec::Random(p) if !(0.0..=1.0).contains(p) => return bad("signals", "probability must be in [0, 1]"),
                MaskSpec::Fixed(m) if m.width() != self.signal_width() => {
                    return bad("signals", "mask width does not match the signal catalog")
                }
                _ => {}
            }
            if let Some(p) = t.tower {
                if !p.in_world() {
                    return bad("tower_x", "tower must lie inside the world");
                }
            }
        }
        Ok(())
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::InvalidValue {
        key: key.into(),
        message: format!("cannot parse `{value}`"),
    })
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::InvalidValue {
            key: key.into(),
            message: format!("`{value}` is not a boolean"),
        }),
    }
}

fn parse_variant(value: &str) -> Result<Variant> {
    Ok(match value.to_ascii_lowercase().as_str() {
        "standard" => Variant::Standard,
        "unordered_stacking" | "us" => Variant::UnorderedStacking,
        "spotters_fetchers" | "sf" => Variant::SpottersFetchers,
        "signal_interception" | "si" => Variant::SignalInterception,
        _ => {
            return Err(Error::InvalidValue {
                key: "variant".into(),
                message: format!("unknown variant `{value}`"),
            })
        }
    })
}

pub(crate) fn parse_selection(value: &str) -> Result<SelectionMode> {
    Ok(match value.to_ascii_lowercase().as_str() {
        "ps" | "probabilistic" => SelectionMode::Probabilistic,
        "wta" | "nps" | "winner_takes_all" => SelectionMode::WinnerTakesAll,
        _ => {
            return Err(Error::InvalidValue {
                key: "selection".into(),
                message: format!("`{value}` is not ps or wta"),
            })
        }
    })
}

fn set_tribe_key(t: &mut TribeConfig, key: &str, value: &str) -> Result<bool> {
    match key {
        "authority" => t.authority = value.parse()?,
        "obedience" => t.obedience = parse(key, value)?,
        "selection" => t.selection = parse_selection(value)?,
        "bonus" => t.bonus = parse(key, value)?,
        "memory" => t.memory = parse_bool(key, value)?,
        "signals" => {
            t.signals = if value.eq_ignore_ascii_case("random") {
                MaskSpec::Random(0.5)
            } else {
                MaskSpec::Fixed(SignalMask::from_bits(value)?)
            }
        }
        "signal_probability" => t.signals = MaskSpec::Random(parse(key, value)?),
        "random_policy" => t.random_policy = parse_bool(key, value)?,
        "tower_x" => t.tower = Some(Vec2::new(parse(key, value)?, t.tower.map_or(0.0, |p| p.y))),
        "tower_y" => t.tower = Some(Vec2::new(t.tower.map_or(0.0, |p| p.x), parse(key, value)?)),
        _ => return Ok(false),
    }
    Ok(true)
}

fn set_global_key(c: &mut TrialConfig, key: &str, value: &str, tribe_count: &mut usize) -> Result<bool> {
    match key {
        "seed" => c.seed = parse(key, value)?,
        "trial_length" => c.trial_length = parse(key, value)?,
        "lifespan" => c.lifespan = parse(key, value)?,
        "tribes" => {
            *tribe_count = parse(key, value)?;
            if *tribe_count == 0 || *tribe_count > MAX_TRIBES {
                return Err(Error::InvalidValue {
                    key: key.into(),
                    message: "must be 1 or 2".into(),
                });
            }
        }
        "animats_per_tribe" => c.animats_per_tribe = parse(key, value)?,
        "bricks_per_number" => c.bricks_per_number = parse(key, value)?,
        "random_start" => c.random_start = parse(key, value)?,
        "variant" => c.variant = parse_variant(value)?,
        "sight_range" => c.sight_range = parse(key, value)?,
        "signal_range" => c.signal_range = parse(key, value)?,
        "reward_drop" => c.rewards.drop = parse(key, value)?,
        "reward_win" => c.rewards.win = parse(key, value)?,
        "reward_lose" => c.rewards.lose = parse(key, value)?,
        "beta" => c.learn.beta = parse(key, value)?,
        "discount" => c.learn.discount = parse(key, value)?,
        "forgiveness" => c.learn.forgiveness = parse(key, value)?,
        "learn_probability" => c.learn.learn_probability = parse(key, value)?,
        "give_up" => c.give_up = parse(key, value)?,
        "relative_fetch" => c.relative_fetch = parse_bool(key, value)?,
        "extended_signals" => c.extended_signals = parse_bool(key, value)?,
        "teach_learn" => c.teach_learn = parse_bool(key, value)?,
        "observe_target_state" => c.observe_target_state = parse_bool(key, value)?,
        "sample_interval" => c.sample_interval = parse(key, value)?,
        "solo_target" => c.solo_target = parse(key, value)?,
        "record_decisions" => c.record_decisions = parse_bool(key, value)?,
        _ => return Ok(false),
    }
    Ok(true)
}

/// Applies `text` on top of `base`.
pub fn apply_config(base: TrialConfig, text: &str) -> Result<TrialConfig> {
    let mut c = base;
    let mut tribe_count = c.tribes.len();
    c.tribes.resize(MAX_TRIBES, c.tribes.last().cloned().unwrap_or_default());
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |message: String| Error::Config { line: n + 1, message };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| at(format!("expected key=value, got `{line}`")))?;
        let (key, value) = (key.trim().to_ascii_lowercase(), value.trim());
        let outcome = if let Some(rest) = key.strip_prefix("tribe") {
            match rest.split_once('.') {
                Some((idx, k)) => {
                    let idx: usize = idx.parse().map_err(|_| at(format!("bad tribe prefix in `{key}`")))?;
                    if idx >= MAX_TRIBES {
                        return Err(at(format!("tribe index {idx} out of range")));
                    }
                    set_tribe_key(&mut c.tribes[idx], k, value)
                }
                None => set_global_key(&mut c, &key, value, &mut tribe_count),
            }
        } else {
            let mut handled = false;
            for t in c.tribes.iter_mut() {
                handled = set_tribe_key(t, &key, value).map_err(|e| at(e.to_string()))?;
            }
            if handled {
                Ok(true)
            } else {
                set_global_key(&mut c, &key, value, &mut tribe_count)
            }
        };
        match outcome {
            Ok(true) => {}
            Ok(false) => return Err(at(format!("unknown key `{key}`"))),
            Err(e) => return Err(at(e.to_string())),
        }
    }
    c.tribes.truncate(tribe_count);
    c.validate()?;
    Ok(c)
}

/// Parses a config document on top of the defaults.
pub fn load_config(text: &str) -> Result<TrialConfig> {
    apply_config(TrialConfig::default(), text)
}

/// Named experiment setups. Tribe 0 is the treatment side where a study
/// compares two conditions.
pub const PRESETS: [(&str, &str); 12] = [
    ("desk", ""),
    ("ahvah", ""),
    ("rolediff", ""),
    ("probreas", "tribe1.selection=wta"),
    ("psvnps", "tribe1.selection=wta"),
    ("mrvnmr", "tribe1.memory=false"),
    ("socstruct", "tribe0.authority=ah\ntribe1.authority=na"),
    ("ahvna", "tribe0.authority=ah\ntribe1.authority=na"),
    ("us", "variant=unordered_stacking"),
    ("sf", "variant=spotters_fetchers"),
    ("si", "variant=signal_interception"),
    ("solo", "tribes=1"),
];

pub fn preset_text(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(name))
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::UnknownPreset(name.into()))
}

pub fn preset(name: &str) -> Result<TrialConfig> {
    load_config(preset_text(name)?)
}
