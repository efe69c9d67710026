//! Trial construction and the sense, decide, learn, act cycle.

use log::debug;

use crate::animat::{sense, step_behavior, Animat, AnimatStats, LoggedDecision, Role, Rules, StepOutcome, Variant};
use crate::behavior::{Behavior, BehaviorCatalog, BEHAVIOR_SLOTS};
use crate::config::{MaskSpec, TribeConfig, TrialConfig};
use crate::error::Result;
use crate::geometry::Vec2;
use crate::learning::{
    apply_feedback_training, train_from_history, FeedbackEvent, HistoryQueues, SelectParams, TrainData,
};
use crate::metrics::{normalize_scores, sample_tribe, SequenceCounter, TribeSample};
use crate::neural::{
    assemble_inputs, probabilistic_select, register_value, uniform_select, Brain, InputLayout, MemoryRegisters,
    Network, OutputDecision, OutputLayout, SelectionMode, MEMORY_OUTPUTS,
};
use crate::signaling::{emit_signal, Signal, SignalMask};
use crate::social::AuthorityStructure;
use crate::world::{AnimatId, TribeId, World, TICKS_PER_SECOND};

/// Base delay between thinks, in seconds.
pub const THINK_INTERVAL: f64 = 2.1;
/// New animats appear within this distance of their tower on each axis.
const SPAWN_SPREAD: f64 = 32.0;

/// Everything fixed about one tribe for the length of a trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TribeSetup {
    pub config: TribeConfig,
    pub mask: SignalMask,
    pub inputs: InputLayout,
    pub action_out: OutputLayout,
    pub signal_out: OutputLayout,
}

impl TribeSetup {
    fn select_params(&self) -> SelectParams {
        SelectParams {
            mode: self.config.selection,
            bonus: self.config.bonus,
        }
    }
}

/// Record written when an animat dies.
#[derive(Debug, Clone, PartialEq)]
pub struct Obituary {
    pub id: AnimatId,
    pub tribe: TribeId,
    pub role: Role,
    pub birth: f64,
    pub death: f64,
    pub health: i64,
    pub decisions: u64,
    pub stats: AnimatStats,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrialCounters {
    pub thinks: u64,
    pub decisions: u64,
    pub trainings: u64,
    pub feedback_updates: u64,
    pub commands_queued: u64,
    pub commands_obeyed: u64,
    pub combats: u64,
    pub bricks_stacked: u64,
    pub deaths: u64,
    pub teach_learn: u64,
}

/// Notifications a caller can observe while a trial runs.
pub enum TrialEvent<'a> {
    /// Fired just before the animat is removed.
    Death { animat: &'a Animat, time: f64 },
    Sample(&'a [TribeSample]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TribeSummary {
    pub tribe: TribeId,
    pub authority: AuthorityStructure,
    pub obedience: f64,
    pub selection: SelectionMode,
    pub memory: bool,
    pub random_policy: bool,
    pub signal_mask: String,
    pub enabled_signals: usize,
    pub mean_score: f64,
    pub normalized_score: f64,
    pub mean_adf: f64,
    pub mean_sdf: f64,
    pub final_score: i64,
    pub towers_completed: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub seed: u32,
    /// Simulated seconds actually run.
    pub duration: f64,
    pub tribes: Vec<TribeSummary>,
    pub winner: Option<TribeId>,
    /// Seconds a lone tribe needed to reach the target score.
    pub solo_time: Option<f64>,
    pub samples: Vec<TribeSample>,
    pub obituaries: Vec<Obituary>,
    pub counters: TrialCounters,
}

pub struct Trial {
    pub config: TrialConfig,
    pub world: World,
    pub tribes: Vec<TribeSetup>,
    pub behaviors: BehaviorCatalog,
    pub rules: Rules,
    authorities: Vec<AuthorityStructure>,
    random_start_end: f64,
    next_sample: f64,
    total_ticks: u64,
    pub samples: Vec<TribeSample>,
    pub obituaries: Vec<Obituary>,
    pub counters: TrialCounters,
    pub solo_time: Option<f64>,
}

/// Builds the world for `config`: towers, bricks, masks and a first
/// generation with staggered ages.
pub fn build_trial(config: &TrialConfig) -> Result<Trial> {
    config.validate()?;
    let mut world = World::new(config.seed, &config.tower_positions());
    let behaviors = config.behaviors();
    let width = config.signal_width();

    let mut tribes = Vec::with_capacity(config.tribes.len());
    for (t, tc) in config.tribes.iter().enumerate() {
        let mut mask = match &tc.signals {
            MaskSpec::Random(p) => SignalMask::random(width, *p, &mut world.rng),
            MaskSpec::Fixed(m) => m.clone(),
        };
        mask.restrict(&behaviors, config.extended_signals, config.teach_learn);
        tribes.push(TribeSetup {
            config: tc.clone(),
            mask,
            inputs: config.input_layout(t),
            action_out: config.action_outputs(t),
            signal_out: config.signal_outputs(t),
        });
    }

    for n in 1..=5u8 {
        for _ in 0..config.bricks_per_number {
            world.spawn_brick(n)?;
        }
    }

    let mut trial = Trial {
        config: config.clone(),
        world,
        tribes,
        behaviors,
        rules: config.rules(),
        authorities: config.tribes.iter().map(|t| t.authority).collect(),
        random_start_end: config.random_start * config.trial_length,
        next_sample: config.sample_interval,
        total_ticks: (config.trial_length * TICKS_PER_SECOND as f64).round() as u64,
        samples: Vec::new(),
        obituaries: Vec::new(),
        counters: TrialCounters::default(),
        solo_time: None,
    };

    let size = config.animats_per_tribe;
    let stagger = config.lifespan / size as f64;
    for tribe in 0..config.tribes.len() {
        let roles = trial.initial_roles(size);
        for (k, role) in roles.into_iter().enumerate() {
            let birth = -(k as f64) * stagger;
            let first_think = trial.world.rng.random() * THINK_INTERVAL;
            trial.spawn(tribe, role, birth, first_think, true);
        }
    }
    Ok(trial)
}

impl Trial {
    fn initial_roles(&mut self, size: usize) -> Vec<Role> {
        if self.config.variant != Variant::SpottersFetchers {
            return vec![Role::Generalist; size];
        }
        let mut roles: Vec<Role> = (0..size)
            .map(|k| if k < size / 2 { Role::Spotter } else { Role::Fetcher })
            .collect();
        for k in (1..size).rev() {
            let j = self.world.rng.index(k + 1);
            roles.swap(k, j);
        }
        roles
    }

    fn spawn(&mut self, tribe: TribeId, role: Role, birth: f64, next_think: f64, first_generation: bool) -> AnimatId {
        let setup = &self.tribes[tribe];
        let rng = &mut self.world.rng;
        let brain = Brain::random(&setup.inputs, setup.action_out, setup.signal_out, rng);
        let home = self.world.towers[tribe].position;
        let offset = Vec2::new(rng.crandom() * SPAWN_SPREAD, rng.crandom() * SPAWN_SPREAD);
        let id = self.world.allocate_id();
        let mut a = Animat::new(id, tribe, (home + offset).clamp_to_world(), birth, brain);
        a.role = role;
        a.next_think = next_think;
        a.random_start = first_generation && self.config.random_start > 0.0;
        a.action_sequences = SequenceCounter::new(self.behaviors.input_width());
        a.signal_sequences = SequenceCounter::new(setup.mask.width());
        a.stats.signal_counts = vec![0; setup.mask.width()];
        if self.config.record_decisions {
            a.decision_log = Some(Vec::new());
        }
        self.world.insert_animat(a);
        id
    }

    pub fn random_start_end(&self) -> f64 {
        self.random_start_end
    }

    pub fn finished(&self) -> bool {
        self.solo_time.is_some() || self.world.clock.tick() >= self.total_ticks
    }

    /// Summed health of a tribe's living members.
    pub fn tribe_score(&self, tribe: TribeId) -> i64 {
        self.world
            .animats
            .iter()
            .filter(|a| a.tribe == tribe)
            .map(|a| a.knowledge.health)
            .sum()
    }

    /// Runs one tick: motion, due thinks, sampling and the solo check.
    pub fn step(&mut self, hook: &mut dyn FnMut(TrialEvent<'_>)) -> Result<()> {
        let due = self.world.advance_tick();
        for id in due {
            self.think(id, hook)?;
        }
        let now = self.world.now();
        if now + 1e-9 >= self.next_sample {
            self.take_sample(hook);
            self.next_sample += self.config.sample_interval;
        }
        if self.tribes.len() == 1 && self.tribe_score(0) >= self.config.solo_target {
            self.solo_time = Some(now);
            if self.samples.last().is_none_or(|s| s.time < now) {
                self.take_sample(hook);
            }
        }
        Ok(())
    }

    fn take_sample(&mut self, hook: &mut dyn FnMut(TrialEvent<'_>)) {
        let now = self.world.now();
        let flagged = self.random_start_end > 0.0 && now <= self.random_start_end;
        let start = self.samples.len();
        for t in 0..self.tribes.len() {
            self.samples.push(sample_tribe(&self.world, t, flagged));
        }
        hook(TrialEvent::Sample(&self.samples[start..]));
    }

    pub fn run(&mut self, hook: &mut dyn FnMut(TrialEvent<'_>)) -> Result<TrialReport> {
        while !self.finished() {
            self.step(hook)?;
        }
        Ok(self.report())
    }

    fn think(&mut self, id: AnimatId, hook: &mut dyn FnMut(TrialEvent<'_>)) -> Result<()> {
        let Some(i) = self.world.index_of(id) else { return Ok(()) };
        let now = self.world.now();
        if self.world.animats[i].is_expired(now, self.config.lifespan) {
            self.retire(i, hook);
            return Ok(());
        }
        self.counters.thinks += 1;
        sense(&mut self.world, i, &self.rules);
        {
            let World { animats, rng, .. } = &mut self.world;
            animats[i].map.decay(rng);
        }

        let fresh = !self.world.animats[i].knowledge.busy;
        if fresh {
            self.decide(i)?;
        }
        let outcome = step_behavior(&mut self.world, i, fresh, &self.rules)?;
        self.tally(&outcome);

        let busy = !outcome.completed && self.world.rng.random() >= self.config.give_up;
        let jitter = if busy { 0.0 } else { self.world.rng.crandom() };
        let a = &mut self.world.animats[i];
        let k = &mut a.knowledge;
        if !busy && !outcome.completed {
            a.velocity = Vec2::ZERO;
            k.destination = None;
            k.wander = None;
        }
        k.busy = busy;
        a.next_think = now + THINK_INTERVAL + jitter + k.stun_pending;
        k.stun_pending = 0.0;
        if !busy {
            k.health = k.health.max(1);
            if !k.attacked_this_think {
                k.combat_power = (k.combat_power + 0.1).min(1.0);
            }
            k.just_attacked = (k.just_attacked - 0.2).max(0.0);
            let (tc, health) = (k.think_count, k.health);
            a.history.record_score(tc, health);
        }
        a.knowledge.attacked_this_think = false;
        Ok(())
    }

    fn tally(&mut self, outcome: &StepOutcome) {
        if outcome.combat.is_some() {
            self.counters.combats += 1;
        }
        if let Some(crate::animat::DropOutcome::Stacked { .. }) = outcome.drop {
            self.counters.bricks_stacked += 1;
        }
    }

    fn in_random_phase(&self, a: &Animat, setup: &TribeSetup) -> bool {
        setup.config.random_policy || (a.random_start && self.world.now() < self.random_start_end)
    }

    /// Chooses a behavior and a signal, emits the signal and possibly
    /// trains. Consumes no simulated time.
    fn decide(&mut self, i: usize) -> Result<()> {
        let now = self.world.now();
        let tribe = self.world.animats[i].tribe;
        let random_phase = self.in_random_phase(&self.world.animats[i], &self.tribes[tribe]);
        let counting = now > self.random_start_end;
        let setup = &self.tribes[tribe];
        let behavior_mask = self.behaviors.mask();
        let World { animats, rng, .. } = &mut self.world;
        let a = &mut animats[i];

        a.knowledge.think_count += 1;
        let tc = a.knowledge.think_count;
        let a_in = assemble_inputs(&setup.inputs, &a.action_frame(now));
        let command = a.commands.pop();
        let commanded = command.map(|c| c.command.index()).filter(|&c| behavior_mask[c]);
        let (a_choice, a_out) = choose(
            &a.brain.action,
            &a_in,
            behavior_mask,
            setup.action_out,
            &setup.config,
            commanded,
            random_phase,
            rng,
        )?;
        let behavior = Behavior::from_index(a_choice.winner).expect("enabled behavior slot");
        let mut registers = a.brain.memory;
        if setup.action_out.memory {
            let values: Vec<f64> = a_out[BEHAVIOR_SLOTS..].iter().map(|&r| register_value(r)).collect();
            registers.write(0, &values);
        }

        let s_in = assemble_inputs(&setup.inputs, &a.signal_frame(now, behavior, registers));
        let (s_choice, s_out) = choose(
            &a.brain.signal,
            &s_in,
            setup.mask.mask(),
            setup.signal_out,
            &setup.config,
            None,
            random_phase,
            rng,
        )?;
        if setup.signal_out.memory {
            let values: Vec<f64> = s_out[setup.signal_out.choices..].iter().map(|&r| register_value(r)).collect();
            registers.write(MEMORY_OUTPUTS, &values);
        }
        a.brain.memory = registers;
        let signal = Signal::from_index(s_choice.winner).expect("enabled signal slot");

        a.knowledge.behavior = behavior;
        a.stats.behavior_counts[behavior.index()] += 1;
        a.stats.signal_counts[signal.index()] += 1;
        if let Some(c) = command {
            a.stats.commands_received += 1;
            if c.command == behavior {
                a.stats.commands_obeyed += 1;
                self.counters.commands_obeyed += 1;
            }
        }
        let heard = a.knowledge.last_heard.take();
        a.history.record_decision(tc, &a_in, &s_in, &a_out, &s_out, command, heard);
        a.action_sequences.record(behavior.index(), counting);
        a.signal_sequences.record(signal.index(), counting);
        if let Some(log) = a.decision_log.as_mut() {
            log.push(LoggedDecision {
                behavior: behavior.index(),
                signal: signal.index(),
                counted: counting,
            });
        }
        a.last_action = Some(behavior);
        a.last_signal = Some(signal);
        self.counters.decisions += 1;

        let delivery = emit_signal(&mut self.world, i, signal, &self.authorities, &self.rules);
        if delivery.command_queued {
            self.counters.commands_queued += 1;
        }
        if signal == Signal::TeachLearn && self.config.teach_learn {
            self.teach_learn(i)?;
        }

        let draw = self.world.rng.random();
        let learns = tc >= crate::learning::QUEUE_LENGTH as u64
            && draw < self.config.learn.learn_probability
            && !self.tribes[tribe].config.random_policy;
        if learns {
            self.learn(i)?;
        }
        Ok(())
    }

    /// Trains both networks from the animat's own history and delivers
    /// the resulting feedback to friendly hearers.
    fn learn(&mut self, i: usize) -> Result<()> {
        let tribe = self.world.animats[i].tribe;
        let setup = &self.tribes[tribe];
        let params = setup.select_params();
        let World { animats, rng, ledger, .. } = &mut self.world;
        let a = &mut animats[i];
        let saved = a.brain.memory;
        let tc = a.knowledge.think_count;
        let h = &a.history;
        let mut feedback = Vec::new();
        let action_data = TrainData {
            inputs: &h.action_inputs,
            outputs: &h.action_outputs,
            scores: &h.scores,
            commands: Some(&h.commands),
            snapshots: Some(&h.signal_inputs),
            think_count: tc,
        };
        train_from_history(
            &mut a.brain.action,
            &action_data,
            BEHAVIOR_SLOTS,
            self.behaviors.mask(),
            params,
            ledger,
            &self.config.learn,
            rng,
            &mut feedback,
        )?;
        let signal_data = TrainData {
            inputs: &h.signal_inputs,
            outputs: &h.signal_outputs,
            scores: &h.scores,
            commands: None,
            snapshots: None,
            think_count: tc,
        };
        train_from_history(
            &mut a.brain.signal,
            &signal_data,
            setup.signal_out.choices,
            setup.mask.mask(),
            params,
            ledger,
            &self.config.learn,
            rng,
            &mut Vec::new(),
        )?;
        a.brain.memory = saved;
        a.stats.trainings += 1;
        self.counters.trainings += 1;
        let origin = a.position;
        self.deliver_feedback(i, tribe, origin, &feedback)
    }

    fn deliver_feedback(&mut self, learner: usize, tribe: TribeId, origin: Vec2, events: &[FeedbackEvent]) -> Result<()> {
        if events.is_empty() {
            return Ok(());
        }
        let setup = &self.tribes[tribe];
        let params = setup.select_params();
        let World { animats, rng, .. } = &mut self.world;
        for (j, hearer) in animats.iter_mut().enumerate() {
            if j == learner || hearer.tribe != tribe || hearer.position.distance(origin) > self.rules.signal_range {
                continue;
            }
            for event in events {
                if apply_feedback_training(&mut hearer.brain.signal, event, setup.signal_out.choices, setup.mask.mask(), params, rng)? {
                    self.counters.feedback_updates += 1;
                }
            }
        }
        Ok(())
    }

    /// The higher scorer of the speaker and its signal target teaches the
    /// other by lending its queues for one training pass.
    fn teach_learn(&mut self, i: usize) -> Result<()> {
        let me = &self.world.animats[i];
        let Some(j) = me.knowledge.signal_target.and_then(|t| self.world.index_of(t)) else {
            return Ok(());
        };
        let other = &self.world.animats[j];
        if other.tribe != me.tribe || other.position.distance(me.position) > self.rules.signal_range {
            return Ok(());
        }
        let (teacher, learner) = match me.knowledge.health.cmp(&other.knowledge.health) {
            std::cmp::Ordering::Equal => return Ok(()),
            std::cmp::Ordering::Greater => (i, j),
            std::cmp::Ordering::Less => (j, i),
        };
        let queues: HistoryQueues = self.world.animats[teacher].history.clone();
        let tc = self.world.animats[teacher].knowledge.think_count;
        let setup = &self.tribes[me.tribe];
        let params = setup.select_params();
        let World { animats, rng, ledger, .. } = &mut self.world;
        let l = &mut animats[learner];
        for (net, inputs, outputs, choices, mask) in [
            (&mut l.brain.action, &queues.action_inputs, &queues.action_outputs, BEHAVIOR_SLOTS, &self.behaviors.mask()[..]),
            (&mut l.brain.signal, &queues.signal_inputs, &queues.signal_outputs, setup.signal_out.choices, setup.mask.mask()),
        ] {
            let data = TrainData {
                inputs,
                outputs,
                scores: &queues.scores,
                commands: None,
                snapshots: None,
                think_count: tc,
            };
            train_from_history(net, &data, choices, mask, params, ledger, &self.config.learn, rng, &mut Vec::new())?;
        }
        self.counters.teach_learn += 1;
        Ok(())
    }

    fn retire(&mut self, i: usize, hook: &mut dyn FnMut(TrialEvent<'_>)) {
        let now = self.world.now();
        let a = &self.world.animats[i];
        hook(TrialEvent::Death { animat: a, time: now });
        self.obituaries.push(Obituary {
            id: a.id,
            tribe: a.tribe,
            role: a.role,
            birth: a.knowledge.birth_time,
            death: now,
            health: a.knowledge.health,
            decisions: a.knowledge.think_count,
            stats: a.stats.clone(),
        });
        let (id, tribe, role) = (a.id, a.tribe, a.role);
        self.world.remove_animat(id);
        self.counters.deaths += 1;
        let next = now + THINK_INTERVAL + self.world.rng.crandom();
        let new_id = self.spawn(tribe, role, now, next, false);
        debug!("t={now:.1} animat {id} died, replaced by {new_id}");
    }

    pub fn report(&self) -> TrialReport {
        let n = self.tribes.len();
        let mut tribes: Vec<TribeSummary> = (0..n)
            .map(|t| {
                let all: Vec<&TribeSample> = self.samples.iter().filter(|s| s.tribe == t).collect();
                let kept: Vec<&TribeSample> = all.iter().copied().filter(|s| !s.random_start).collect();
                let used = if kept.is_empty() { &all } else { &kept };
                let mean = |f: &dyn Fn(&TribeSample) -> f64| {
                    if used.is_empty() {
                        0.0
                    } else {
                        used.iter().map(|s| f(s)).sum::<f64>() / used.len() as f64
                    }
                };
                let setup = &self.tribes[t];
                TribeSummary {
                    tribe: t,
                    authority: setup.config.authority,
                    obedience: setup.config.obedience,
                    selection: setup.config.selection,
                    memory: setup.config.memory,
                    random_policy: setup.config.random_policy,
                    signal_mask: setup.mask.to_bits(),
                    enabled_signals: setup.mask.mask().iter().skip(1).filter(|&&e| e).count(),
                    mean_score: mean(&|s| s.score as f64),
                    normalized_score: 1000.0,
                    mean_adf: mean(&|s| s.adf),
                    mean_sdf: mean(&|s| s.sdf),
                    final_score: self.tribe_score(t),
                    towers_completed: self.world.towers[t].completions,
                }
            })
            .collect();
        let mut winner = None;
        if n == 2 {
            let (a, b) = normalize_scores(tribes[0].mean_score, tribes[1].mean_score);
            tribes[0].normalized_score = a;
            tribes[1].normalized_score = b;
            winner = match a.partial_cmp(&b) {
                Some(std::cmp::Ordering::Greater) => Some(0),
                Some(std::cmp::Ordering::Less) => Some(1),
                _ => None,
            };
        }
        TrialReport {
            seed: self.config.seed,
            duration: self.world.now(),
            tribes,
            winner,
            solo_time: self.solo_time,
            samples: self.samples.clone(),
            obituaries: self.obituaries.clone(),
            counters: self.counters,
        }
    }
}

/// Picks one output of `net`. Returns the decision and the vector stored
/// in the output queue: the winner's one-hot over the choice slots
/// followed by the raw memory outputs.
#[allow(clippy::too_many_arguments)]
fn choose(
    net: &Network,
    inputs: &[f64],
    enabled: &[bool],
    layout: OutputLayout,
    tribe: &TribeConfig,
    command: Option<usize>,
    random_phase: bool,
    rng: &mut crate::rng::Rng,
) -> Result<(OutputDecision, Vec<f64>)> {
    let mut out = vec![0.0; layout.len()];
    let decision = if random_phase {
        let d = uniform_select(enabled, rng)?;
        for v in out[layout.choices..].iter_mut() {
            *v = rng.crandom();
        }
        d
    } else {
        let act = net.evaluate(inputs)?;
        out[layout.choices..].copy_from_slice(&act.outputs[layout.choices..]);
        probabilistic_select(
            &act.outputs[..layout.choices],
            enabled,
            tribe.bonus,
            command,
            tribe.obedience,
            tribe.selection,
            rng,
        )?
    };
    out[decision.winner] = 1.0;
    Ok((decision, out))
}

/// Builds and runs a trial, discarding events.
pub fn run_trial(config: &TrialConfig) -> Result<TrialReport> {
    build_trial(config)?.run(&mut |_| {})
}

/// Registers as the action network last left them, for tests.
pub fn registers_in_bounds(memory: &MemoryRegisters) -> bool {
    memory.in_bounds()
}
