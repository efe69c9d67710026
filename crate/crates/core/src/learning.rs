//! History queues and the reward-driven training walk.

use crate::error::Result;
use crate::neural::{probabilistic_select, Network, SelectionMode};
use crate::rng::Rng;
use crate::signaling::{CommandRecord, Signal};

pub const QUEUE_LENGTH: usize = 100;

/// Circular records of the last hundred thinks, indexed by
/// `think_count % 100`.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryQueues {
    pub action_inputs: Vec<Vec<f64>>,
    pub signal_inputs: Vec<Vec<f64>>,
    pub action_outputs: Vec<Vec<f64>>,
    pub signal_outputs: Vec<Vec<f64>>,
    pub scores: Vec<i64>,
    pub commands: Vec<Option<CommandRecord>>,
    pub heard: Vec<Option<Signal>>,
}

impl HistoryQueues {
    pub fn new(action_in: usize, signal_in: usize, action_out: usize, signal_out: usize) -> Self {
        Self {
            action_inputs: vec![vec![0.0; action_in]; QUEUE_LENGTH],
            signal_inputs: vec![vec![0.0; signal_in]; QUEUE_LENGTH],
            action_outputs: vec![vec![0.0; action_out]; QUEUE_LENGTH],
            signal_outputs: vec![vec![0.0; signal_out]; QUEUE_LENGTH],
            scores: vec![0; QUEUE_LENGTH],
            commands: vec![None; QUEUE_LENGTH],
            heard: vec![None; QUEUE_LENGTH],
        }
    }

    pub fn slot(think_index: u64) -> usize {
        (think_index % QUEUE_LENGTH as u64) as usize
    }

    /// Stores the vectors used and produced by one think.
    #[allow(clippy::too_many_arguments)]
    pub fn record_decision(
        &mut self,
        think_index: u64,
        a_in: &[f64],
        s_in: &[f64],
        a_out: &[f64],
        s_out: &[f64],
        command: Option<CommandRecord>,
        heard: Option<Signal>,
    ) {
        let s = Self::slot(think_index);
        self.action_inputs[s].copy_from_slice(a_in);
        self.signal_inputs[s].copy_from_slice(s_in);
        self.action_outputs[s].copy_from_slice(a_out);
        self.signal_outputs[s].copy_from_slice(s_out);
        self.commands[s] = command;
        self.heard[s] = heard;
    }

    /// Score after maintenance for the think at `think_index`.
    pub fn record_score(&mut self, think_index: u64, score: i64) {
        self.scores[Self::slot(think_index)] = score;
    }

    /// Slot order oldest to newest as seen from `think_count`: entry 0 is
    /// the current slot, entry 99 the most recent completed one.
    pub fn time_order(think_count: u64) -> [usize; QUEUE_LENGTH] {
        std::array::from_fn(|i| Self::slot(think_count + i as u64))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnConfig {
    /// Base learning coefficient.
    pub beta: f64,
    /// Per-step discount applied to earlier decisions.
    pub discount: f64,
    /// How many earlier decisions share each reward.
    pub forgiveness: usize,
    pub learn_probability: f64,
}

impl Default for LearnConfig {
    fn default() -> Self {
        Self {
            beta: 0.05,
            discount: 0.75,
            forgiveness: 2,
            learn_probability: 0.01,
        }
    }
}

/// Largest absolute score change seen anywhere in the trial.
///
/// Scores are integers, so starting at 1 is indistinguishable from starting
/// empty: the first nonzero delta is always at least 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardLedger {
    max_abs_improvement: f64,
}

impl Default for RewardLedger {
    fn default() -> Self {
        Self {
            max_abs_improvement: 1.0,
        }
    }
}

impl RewardLedger {
    pub fn observe(&mut self, delta: f64) {
        self.max_abs_improvement = self.max_abs_improvement.max(delta.abs());
    }

    pub fn max(&self) -> f64 {
        self.max_abs_improvement
    }
}

/// How a network chooses while being re-evaluated for training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectParams {
    pub mode: SelectionMode,
    pub bonus: f64,
}

/// A commanded decision that earned a reward; friendly hearers of the
/// learner train their signal networks on it.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackEvent {
    pub slot: usize,
    pub snapshot: Vec<f64>,
    pub command_signal: usize,
    pub lr: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrainStats {
    pub rewarded_slots: usize,
    pub updates: usize,
}

/// One training step on one recorded situation: re-evaluate, compare the
/// chosen one-hot with `target`, back-propagate the difference.
#[allow(clippy::too_many_arguments)]
pub fn train_slot(
    net: &mut Network,
    inputs: &[f64],
    target: &[f64],
    choices: usize,
    enabled: &[bool],
    params: SelectParams,
    lr: f64,
    rng: &mut Rng,
) -> Result<bool> {
    let act = net.evaluate(inputs)?;
    let decision = probabilistic_select(&act.outputs[..choices], enabled, params.bonus, None, 1.0, params.mode, rng)?;
    let mut errors = vec![0.0; net.n_out()];
    let mut total = 0.0;
    for k in 0..choices {
        let actual = if k == decision.winner { 1.0 } else { 0.0 };
        errors[k] = target[k] - actual;
        total += errors[k].abs();
    }
    if total == 0.0 {
        return Ok(false);
    }
    net.apply_errors(&act, &errors, lr);
    Ok(true)
}

/// What one network is trained from.
pub struct TrainData<'a> {
    pub inputs: &'a [Vec<f64>],
    pub outputs: &'a [Vec<f64>],
    pub scores: &'a [i64],
    /// Present for the action network; drives feedback events.
    pub commands: Option<&'a [Option<CommandRecord>]>,
    /// Signal inputs, used as feedback snapshots.
    pub snapshots: Option<&'a [Vec<f64>]>,
    pub think_count: u64,
}

/// Walks the queues from newest to oldest and reinforces the decisions
/// leading up to every score change.
#[allow(clippy::too_many_arguments)]
pub fn train_from_history(
    net: &mut Network,
    data: &TrainData<'_>,
    choices: usize,
    enabled: &[bool],
    params: SelectParams,
    ledger: &mut RewardLedger,
    cfg: &LearnConfig,
    rng: &mut Rng,
    feedback: &mut Vec<FeedbackEvent>,
) -> Result<TrainStats> {
    let mut stats = TrainStats::default();
    if data.think_count < QUEUE_LENGTH as u64 {
        return Ok(stats);
    }
    let ts = HistoryQueues::time_order(data.think_count);
    for top in (2..QUEUE_LENGTH).rev() {
        let delta = (data.scores[ts[top]] - data.scores[ts[top - 1]]) as f64;
        if delta == 0.0 {
            continue;
        }
        ledger.observe(delta);
        let base = cfg.beta * delta / ledger.max();
        stats.rewarded_slots += 1;
        let mut fg = 0;
        while fg <= cfg.forgiveness && top > fg {
            let slot = ts[top - fg];
            let lr = base * cfg.discount.powi(fg as i32);
            fg += 1;
            if let (Some(commands), Some(snapshots)) = (data.commands, data.snapshots) {
                if let Some(record) = commands[slot] {
                    if data.outputs[slot][record.command.index()] == 1.0 {
                        if let Some(signal) = Signal::command_for(record.command) {
                            feedback.push(FeedbackEvent {
                                slot,
                                snapshot: snapshots[slot].clone(),
                                command_signal: signal.index(),
                                lr,
                            });
                        }
                    }
                }
            }
            if train_slot(net, &data.inputs[slot], &data.outputs[slot], choices, enabled, params, lr, rng)? {
                stats.updates += 1;
            }
        }
    }
    Ok(stats)
}

/// Trains a hearer's signal network toward the command that paid off.
pub fn apply_feedback_training(
    net: &mut Network,
    event: &FeedbackEvent,
    choices: usize,
    enabled: &[bool],
    params: SelectParams,
    rng: &mut Rng,
) -> Result<bool> {
    if event.lr == 0.0 || event.command_signal >= choices {
        return Ok(false);
    }
    let mut target = vec![0.0; choices];
    target[event.command_signal] = 1.0;
    train_slot(net, &event.snapshot, &target, choices, enabled, params, event.lr, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::NetKind;

    fn params() -> SelectParams {
        SelectParams {
            mode: SelectionMode::Probabilistic,
            bonus: 0.05,
        }
    }

    /// Queues where every slot has the same random input and a one-hot on
    /// output `k`, scores supplied per think index.
    fn filled(rng: &mut Rng, n_in: usize, n_out: usize, think_count: u64, score: impl Fn(u64) -> i64) -> HistoryQueues {
        let mut q = HistoryQueues::new(n_in, n_in, n_out, n_out);
        for t in think_count - 100..think_count {
            let x: Vec<f64> = (0..n_in).map(|_| rng.random()).collect();
            let mut out = vec![0.0; n_out];
            out[(t % 3) as usize] = 1.0;
            q.record_decision(t, &x, &x, &out, &out, None, None);
            q.record_score(t, score(t));
        }
        q
    }

    #[test]
    fn slot_is_modular() {
        assert_eq!(HistoryQueues::slot(250), 50);
        let order = HistoryQueues::time_order(250);
        assert_eq!(order[0], 50);
        assert_eq!(order[99], 49);
    }

    #[test]
    fn no_score_change_no_update() {
        let mut rng = Rng::new(1);
        let q = filled(&mut rng, 6, 4, 300, |_| 7);
        let mut net = Network::random(NetKind::Action, 6, 6, 4, &mut rng);
        let before = net.clone();
        let data = TrainData {
            inputs: &q.action_inputs,
            outputs: &q.action_outputs,
            scores: &q.scores,
            commands: None,
            snapshots: None,
            think_count: 300,
        };
        let mut ledger = RewardLedger::default();
        let mut fb = Vec::new();
        let stats = train_from_history(&mut net, &data, 4, &[true; 4], params(), &mut ledger, &LearnConfig::default(), &mut rng, &mut fb).unwrap();
        assert_eq!(stats, TrainStats::default());
        assert_eq!(net, before);
    }

    #[test]
    fn too_young_never_trains() {
        let mut rng = Rng::new(1);
        let mut net = Network::random(NetKind::Action, 6, 6, 4, &mut rng);
        let q = HistoryQueues::new(6, 6, 4, 4);
        let data = TrainData {
            inputs: &q.action_inputs,
            outputs: &q.action_outputs,
            scores: &q.scores,
            commands: None,
            snapshots: None,
            think_count: 50,
        };
        let stats = train_from_history(&mut net, &data, 4, &[true; 4], params(), &mut RewardLedger::default(), &LearnConfig::default(), &mut rng, &mut Vec::new()).unwrap();
        assert_eq!(stats.rewarded_slots, 0);
    }

    #[test]
    fn ledger_tracks_magnitude() {
        let mut l = RewardLedger::default();
        l.observe(-10.0);
        l.observe(3.0);
        assert_eq!(l.max(), 10.0);
    }

    #[test]
    fn commanded_reward_emits_feedback() {
        let mut rng = Rng::new(5);
        let mut q = filled(&mut rng, 6, 18, 300, |t| if t >= 290 { 11 } else { 1 });
        let slot = HistoryQueues::slot(290);
        q.action_outputs[slot] = vec![0.0; 18];
        q.action_outputs[slot][crate::behavior::Behavior::DropBrick.index()] = 1.0;
        q.commands[slot] = Some(CommandRecord {
            command: crate::behavior::Behavior::DropBrick,
            commander: crate::world::AnimatId(9),
            heard_at: 0.0,
        });
        let mut net = Network::random(NetKind::Action, 6, 6, 18, &mut rng);
        let data = TrainData {
            inputs: &q.action_inputs,
            outputs: &q.action_outputs,
            scores: &q.scores,
            commands: Some(&q.commands),
            snapshots: Some(&q.signal_inputs),
            think_count: 300,
        };
        let mut fb = Vec::new();
        let mut ledger = RewardLedger::default();
        train_from_history(&mut net, &data, 18, &[true; 18], params(), &mut ledger, &LearnConfig::default(), &mut rng, &mut fb).unwrap();
        assert_eq!(fb.len(), 1);
        assert_eq!(fb[0].command_signal, 8);
        assert!((fb[0].lr - 0.05).abs() < 1e-12);
        assert_eq!(ledger.max(), 10.0);
    }

    #[test]
    fn feedback_zero_rate_is_noop() {
        let mut rng = Rng::new(2);
        let mut net = Network::random(NetKind::Signal, 4, 3, 6, &mut rng);
        let before = net.clone();
        let ev = FeedbackEvent {
            slot: 0,
            snapshot: vec![0.5; 4],
            command_signal: 2,
            lr: 0.0,
        };
        assert!(!apply_feedback_training(&mut net, &ev, 6, &[true; 6], params(), &mut rng).unwrap());
        assert_eq!(net, before);
    }
}
