//! The action and signal networks, output selection and memory registers.

mod inputs;
mod network;
mod select;

pub use inputs::{
    assemble_inputs, status, InputFrame, InputLayout, MemoryRegisters, MEMORY_OUTPUTS,
    MEMORY_REGISTERS, STATUS_INPUTS, STATUS_LABELS,
};
pub use network::{
    activation, activation_deriv, hidden_units, Activations, Gradient, NetKind, Network,
    WEIGHT_LIMIT,
};
pub use select::{probabilistic_select, selection_weights, uniform_select, OutputDecision, SelectionMode};

use crate::rng::Rng;

/// Output geometry of one network: choice slots followed by optional
/// memory-register outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputLayout {
    pub choices: usize,
    pub memory: bool,
}

impl OutputLayout {
    pub fn len(&self) -> usize {
        self.choices + if self.memory { MEMORY_OUTPUTS } else { 0 }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Both networks plus the shared registers.
#[derive(Debug, Clone, PartialEq)]
pub struct Brain {
    pub action: Network,
    pub signal: Network,
    pub memory: MemoryRegisters,
}

impl Brain {
    pub fn random(inputs: &InputLayout, action_out: OutputLayout, signal_out: OutputLayout, rng: &mut Rng) -> Self {
        let n_in = inputs.len();
        let a_out = action_out.len();
        let s_out = signal_out.len();
        let action = Network::random(NetKind::Action, n_in, hidden_units(n_in, a_out), a_out, rng);
        let signal = Network::random(NetKind::Signal, n_in, hidden_units(n_in, s_out), s_out, rng);
        Self {
            action,
            signal,
            memory: MemoryRegisters::default(),
        }
    }

    /// Zero-weight brain with the default geometry; used for scaffolding.
    pub fn blank() -> Self {
        let n_in = InputLayout::default().len();
        let n_out = 23;
        let n_hidden = hidden_units(n_in, n_out);
        Self {
            action: Network::zeros(NetKind::Action, n_in, n_hidden, n_out),
            signal: Network::zeros(NetKind::Signal, n_in, n_hidden, n_out),
            memory: MemoryRegisters::default(),
        }
    }
}

/// Scales a raw memory output from (-1, 1) into a register value.
pub fn register_value(raw: f64) -> f64 {
    (raw + 1.0) / 2.0
}
