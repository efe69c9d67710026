#![allow(clippy::field_reassign_with_default)]

use std::collections::HashMap;

use brickworld::animat::{sense, Animat, Role, Rules, Variant};
use brickworld::config::{load_config, preset, MaskSpec, TrialConfig};
use brickworld::export::{summary_csv, timeseries_csv};
use brickworld::geometry::{Cell, Vec2, WORLD_SIZE};
use brickworld::signaling::{emit_signal, Signal};
use brickworld::social::AuthorityStructure;
use brickworld::trial::THINK_INTERVAL;
use brickworld::world::World;
use brickworld::{build_trial, run_trial};
use proptest::prelude::*;

fn short(c: &mut TrialConfig, length: f64, lifespan: f64) {
    c.trial_length = length;
    c.lifespan = lifespan;
}

#[test]
fn same_config_same_report() {
    let mut c = preset("si").unwrap();
    short(&mut c, 8000.0, 2000.0);
    c.seed = 77;
    let a = run_trial(&c).unwrap();
    let b = run_trial(&c).unwrap();
    assert_eq!(a, b);
    assert_eq!(timeseries_csv(&a), timeseries_csv(&b));
    assert_eq!(summary_csv([&a]), summary_csv([&b]));
    c.seed = 78;
    assert_ne!(run_trial(&c).unwrap(), a);
}

#[test]
fn births_are_staggered_by_lifespan_over_size() {
    let mut c = TrialConfig::default();
    short(&mut c, 1_000_000.0, 200_000.0);
    let t = build_trial(&c).unwrap();
    for tribe in 0..2 {
        let mut ages: Vec<f64> = t.world.animats.iter().filter(|a| a.tribe == tribe).map(|a| a.age(0.0)).collect();
        ages.sort_by(f64::total_cmp);
        let expected: Vec<f64> = (0..10).map(|k| 20_000.0 * f64::from(k)).collect();
        assert_eq!(ages, expected);
    }
}

#[test]
fn spotters_and_fetchers_split_evenly() {
    for seed in 1..=5 {
        let mut c = preset("sf").unwrap();
        c.seed = seed;
        let t = build_trial(&c).unwrap();
        for tribe in 0..2 {
            let roles: Vec<Role> = t.world.animats.iter().filter(|a| a.tribe == tribe).map(|a| a.role).collect();
            assert_eq!(roles.iter().filter(|&&r| r == Role::Spotter).count(), 5);
            assert_eq!(roles.iter().filter(|&&r| r == Role::Fetcher).count(), 5);
        }
    }
}

#[test]
fn spotters_never_carry() {
    let mut c = preset("sf").unwrap();
    short(&mut c, 20_000.0, 5_000.0);
    let mut t = build_trial(&c).unwrap();
    let mut carried = 0;
    while !t.finished() {
        t.step(&mut |_| {}).unwrap();
        for a in &t.world.animats {
            if a.carrying.is_some() {
                assert_ne!(a.role, Role::Spotter);
                carried += 1;
            }
        }
    }
    assert!(carried > 0, "fetchers should pick something up");
}

fn two_animat_world(variant: Variant, listener_role: Role, enemy: bool) -> (World, Rules) {
    let mut world = World::new(3, &[Vec2::new(512.0, 512.0), Vec2::new(1536.0, 1536.0)]);
    let s = world.allocate_id();
    let l = world.allocate_id();
    world.insert_animat(Animat::bare(s, 0, Vec2::new(1000.0, 1000.0), 0.0));
    let mut listener = Animat::bare(l, usize::from(enemy), Vec2::new(1100.0, 1000.0), 0.0);
    listener.role = listener_role;
    world.insert_animat(listener);
    let rules = Rules {
        variant,
        ..Rules::default()
    };
    (world, rules)
}

#[test]
fn fetchers_only_learn_bricks_by_ear() {
    let (mut world, rules) = two_animat_world(Variant::SpottersFetchers, Role::Fetcher, false);
    for n in 1..=5 {
        world.spawn_brick(n).unwrap();
    }
    // Put a brick right under the fetcher.
    let b = world.spawn_brick(2).unwrap();
    let cell = Cell::containing(world.animats[1].position);
    world.take_brick(b, world.animats[1].id);
    world.place_brick(b, cell).unwrap();
    sense(&mut world, 1, &rules);
    assert!(world.animats[1].map.is_empty());

    world.animats[0].map.set(Cell::new(3, 4), 2);
    emit_signal(&mut world, 0, Signal::BrickLocation(2), &[AuthorityStructure::AgeHierarchy; 2], &rules);
    assert_eq!(world.animats[1].map.get(Cell::new(3, 4)).map(|e| e.0), Some(2));
}

#[test]
fn interception_merges_enemy_locations() {
    for (variant, expect) in [(Variant::SignalInterception, true), (Variant::Standard, false)] {
        let (mut world, rules) = two_animat_world(variant, Role::Generalist, true);
        world.animats[0].map.set(Cell::new(5, 5), 4);
        emit_signal(&mut world, 0, Signal::BrickLocation(4), &[AuthorityStructure::AgeHierarchy; 2], &rules);
        assert_eq!(world.animats[1].map.get(Cell::new(5, 5)).is_some(), expect, "{variant:?}");
    }
}

#[test]
fn think_spacing() {
    let mut c = TrialConfig::default();
    short(&mut c, 5_000.0, 2_000.0);
    let mut t = build_trial(&c).unwrap();
    let mut checked = [0usize; 2];
    while !t.finished() {
        let before: HashMap<_, _> = t.world.animats.iter().map(|a| (a.id, a.next_think)).collect();
        t.step(&mut |_| {}).unwrap();
        let now = t.world.now();
        for a in &t.world.animats {
            let Some(&prev) = before.get(&a.id) else { continue };
            if prev > now + 1e-9 || a.next_think == prev {
                continue;
            }
            let d = a.next_think - now;
            // Losing a fight adds a whole number of stuns on top.
            let stuns = ((d - 1.1) / 5.0).floor().max(0.0);
            let base = d - 5.0 * stuns;
            if a.knowledge.busy {
                assert!((base - THINK_INTERVAL).abs() < 1e-9, "busy spacing {d}");
                checked[1] += 1;
            } else {
                assert!((1.1 - 1e-9..3.1).contains(&base), "spacing {d}");
                checked[0] += 1;
            }
        }
    }
    assert!(checked[0] > 100 && checked[1] > 100, "{checked:?}");
}

#[test]
fn about_forty_two_thinks_to_cross_the_world() {
    let mut world = World::new(42, &[]);
    let n = 20_000;
    let mean_speed = (0..n).map(|_| world.draw_speed()).sum::<f64>() / f64::from(n);
    let thinks = WORLD_SIZE / (mean_speed * THINK_INTERVAL);
    assert!((40.0..45.0).contains(&thinks), "{thinks}");
}

#[test]
fn signal_network_sees_this_thinks_action() {
    let mut c = TrialConfig::default();
    short(&mut c, 3_000.0, 1_500.0);
    let mut t = build_trial(&c).unwrap();
    t.run(&mut |_| {}).unwrap();
    let mut checked = 0;
    for a in &t.world.animats {
        let layout = &t.tribes[a.tribe].inputs;
        let h = &a.history;
        // Thinks are numbered from one, so slot zero fills last.
        let tc = a.knowledge.think_count as usize;
        let slots: Vec<usize> = if tc >= 100 { (0..100).collect() } else { (1..=tc).collect() };
        for slot in slots {
            let chosen = h.action_outputs[slot].iter().position(|&x| x == 1.0).unwrap();
            let off = layout.last_behavior_offset();
            let seen = h.signal_inputs[slot][off..off + layout.behavior_width]
                .iter()
                .position(|&x| x == 1.0);
            assert_eq!(seen, Some(chosen));
            checked += 1;
        }
    }
    assert!(checked > 100);
}

#[test]
fn solo_tribe_reaches_target() {
    let mut c = preset("solo").unwrap();
    // Guard against a deadlock: far longer than the target should need.
    c.trial_length = 1_000_000.0;
    let r = run_trial(&c).unwrap();
    let when = r.solo_time.expect("solo tribe never reached the target");
    assert!(when < c.trial_length);
    assert_eq!(r.duration, when);
}

#[test]
fn random_masks_enable_about_half() {
    let mut enabled = 0usize;
    let mut total = 0usize;
    for seed in 1..=200 {
        let mut c = TrialConfig::default();
        c.seed = seed;
        c.tribes[0].signals = MaskSpec::Random(0.5);
        let t = build_trial(&c).unwrap();
        let bits = t.tribes[0].mask.to_bits();
        // The null signal is always on; skip it.
        enabled += bits.bytes().skip(1).filter(|&b| b == b'1').count();
        total += bits.len() - 1;
    }
    let frac = enabled as f64 / total as f64;
    assert!((0.45..0.55).contains(&frac), "{frac}");
}

#[test]
fn obedience_key() {
    let c = load_config("tribe0.obedience=6").unwrap();
    assert_eq!(c.tribes[0].obedience, 6.0);
    let e = load_config("tribe0.authority=xx").unwrap_err().to_string();
    assert!(e.contains("authority"), "{e}");
}

fn check_world(t: &brickworld::Trial) {
    assert!(t.world.check_bricks());
    for a in &t.world.animats {
        assert!(a.knowledge.health >= 1);
        assert!((0.0..=1.0).contains(&a.knowledge.combat_power));
        assert!(a.brain.action.weights_in_bounds() && a.brain.signal.weights_in_bounds());
        assert!(a.map.recency_in_bounds());
        assert!(brickworld::trial::registers_in_bounds(&a.brain.memory));
        assert!(a.position.in_world());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn invariants_hold_through_random_trials(
        seed in 1u32..10_000,
        size in 2usize..6,
        variant in 0usize..4,
        extended in any::<bool>(),
        observe in any::<bool>(),
        relative in any::<bool>(),
        teach in any::<bool>(),
        tribes in 1usize..3,
    ) {
        let mut c = TrialConfig::default();
        c.seed = seed;
        short(&mut c, 3_000.0, 1_000.0);
        c.animats_per_tribe = size;
        c.variant = [Variant::Standard, Variant::UnorderedStacking, Variant::SpottersFetchers, Variant::SignalInterception][variant];
        c.extended_signals = extended;
        c.observe_target_state = observe;
        c.relative_fetch = relative;
        c.teach_learn = teach;
        c.tribes.truncate(tribes);
        c.solo_target = i64::MAX;
        let mut t = build_trial(&c).unwrap();
        let mut ticks = 0u64;
        while !t.finished() {
            t.step(&mut |_| {}).unwrap();
            ticks += 1;
            if ticks.is_multiple_of(500) {
                check_world(&t);
                let per_tribe = t.world.animats.iter().filter(|a| a.tribe == 0).count();
                prop_assert_eq!(per_tribe, size);
            }
        }
        check_world(&t);
    }
}
