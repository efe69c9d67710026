use crate::behavior::CANONICAL_BEHAVIORS;
use crate::signaling::CANONICAL_SIGNALS;

/// Scalar inputs drawn from knowledge and senses, before the one-hot groups.
pub const STATUS_INPUTS: usize = 26;
pub const MEMORY_REGISTERS: usize = 10;
/// Registers each network writes.
pub const MEMORY_OUTPUTS: usize = 5;

pub mod status {
    pub const AT_FRIENDLY_TOWER: usize = 0;
    pub const SEE_FRIENDLY_TOWER: usize = 1;
    pub const AT_ENEMY_TOWER: usize = 2;
    pub const SEE_ENEMY_TOWER: usize = 3;
    pub const HAVE_TARGET: usize = 4;
    pub const TARGET_HAS_BRICK: usize = 5;
    pub const HAVE_BRICK: usize = 6;
    pub const HAVE_RIGHT_BRICK: usize = 7;
    pub const BRICK_TOO_LOW: usize = 8;
    pub const BRICK_TOO_HIGH: usize = 9;
    pub const NEAR_BRICK: usize = 10;
    /// First of five know-brick bits.
    pub const KNOW_BRICK: usize = 11;
    pub const FRIENDLY_TOWER_OBSERVED: usize = 16;
    pub const FRIENDLY_TOWER_HEIGHT: usize = 17;
    pub const ENEMY_TOWER_OBSERVED: usize = 18;
    pub const ENEMY_TOWER_HEIGHT: usize = 19;
    pub const SEE_FRIEND: usize = 20;
    pub const SEE_ENEMY: usize = 21;
    pub const COMBAT_POWER: usize = 22;
    pub const TARGET_COMBAT_POWER: usize = 23;
    pub const JUST_ATTACKED: usize = 24;
    pub const SAME_SIGNAL_TARGET: usize = 25;
}

/// Dump column labels for the leading status inputs.
pub const STATUS_LABELS: [(&str, usize); 14] = [
    ("ATFT", status::AT_FRIENDLY_TOWER),
    ("SEFT", status::SEE_FRIENDLY_TOWER),
    ("ATET", status::AT_ENEMY_TOWER),
    ("SEET", status::SEE_ENEMY_TOWER),
    ("HT", status::HAVE_TARGET),
    ("HB", status::HAVE_BRICK),
    ("HBR", status::HAVE_RIGHT_BRICK),
    ("HBTL", status::BRICK_TOO_LOW),
    ("HBTH", status::BRICK_TOO_HIGH),
    ("FTOB", status::FRIENDLY_TOWER_OBSERVED),
    ("FTHT", status::FRIENDLY_TOWER_HEIGHT),
    ("ETOB", status::ENEMY_TOWER_OBSERVED),
    ("SEFR", status::SEE_FRIEND),
    ("SAL", status::SAME_SIGNAL_TARGET),
];

/// The ten registers linking both networks across thinks. Slots 0..5 are
/// written by the action network, 5..10 by the signal network.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MemoryRegisters(pub [f64; MEMORY_REGISTERS]);

impl MemoryRegisters {
    pub fn write(&mut self, offset: usize, values: &[f64]) {
        for (slot, &v) in self.0[offset..offset + values.len()].iter_mut().zip(values) {
            *slot = v.clamp(0.0, 1.0);
        }
    }

    pub fn in_bounds(&self) -> bool {
        self.0.iter().all(|v| (0.0..=1.0).contains(v))
    }
}

/// Which optional input groups a network reads, and their widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InputLayout {
    pub observe_target_state: bool,
    pub behavior_width: usize,
    pub signal_width: usize,
    pub memory: bool,
}

impl Default for InputLayout {
    fn default() -> Self {
        Self {
            observe_target_state: false,
            behavior_width: CANONICAL_BEHAVIORS,
            signal_width: CANONICAL_SIGNALS,
            memory: true,
        }
    }
}

impl InputLayout {
    pub fn target_state_offset(&self) -> usize {
        STATUS_INPUTS
    }

    pub fn last_behavior_offset(&self) -> usize {
        STATUS_INPUTS + if self.observe_target_state { self.behavior_width } else { 0 }
    }

    pub fn last_signal_offset(&self) -> usize {
        self.last_behavior_offset() + self.behavior_width
    }

    pub fn memory_offset(&self) -> usize {
        self.last_signal_offset() + self.signal_width
    }

    pub fn len(&self) -> usize {
        self.memory_offset() + if self.memory { MEMORY_REGISTERS } else { 0 }
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Everything one network reads on one think.
#[derive(Debug, Clone, PartialEq)]
pub struct InputFrame {
    pub status: [f64; STATUS_INPUTS],
    pub target_behavior: Option<usize>,
    pub last_behavior: Option<usize>,
    pub last_signal: Option<usize>,
    pub memory: MemoryRegisters,
}

pub fn assemble_inputs(layout: &InputLayout, frame: &InputFrame) -> Vec<f64> {
    let mut v = vec![0.0; layout.len()];
    v[..STATUS_INPUTS].copy_from_slice(&frame.status);
    let mut set = |offset: usize, width: usize, index: Option<usize>| {
        if let Some(i) = index.filter(|&i| i < width) {
            v[offset + i] = 1.0;
        }
    };
    if layout.observe_target_state {
        set(layout.target_state_offset(), layout.behavior_width, frame.target_behavior);
    }
    set(layout.last_behavior_offset(), layout.behavior_width, frame.last_behavior);
    set(layout.last_signal_offset(), layout.signal_width, frame.last_signal);
    if layout.memory {
        let m = layout.memory_offset();
        v[m..m + MEMORY_REGISTERS].copy_from_slice(&frame.memory.0);
    }
    v
}
