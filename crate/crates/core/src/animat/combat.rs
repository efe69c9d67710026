use super::{act::put_down, Behavior, Rules};
use crate::error::Result;
use crate::geometry::Vec2;
use crate::world::{AnimatId, World, BASE_SPEED};

pub const LOSER_STUN_SECONDS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombatResult {
    pub winner: AnimatId,
    pub loser: AnimatId,
    pub attacker_strength: f64,
    pub defender_strength: f64,
    /// Equal strengths; the winner came from a random draw.
    pub tie: bool,
}

/// `(a_str, b_str)` for an attack.
pub fn combat_strengths(
    attacker_power: f64,
    attacker_carrying: bool,
    defender_power: f64,
    defender_carrying: bool,
    defender_guarding: bool,
) -> (f64, f64) {
    let mut a = attacker_power;
    if !attacker_carrying {
        a += 1.0;
    }
    let mut b = defender_power;
    if !defender_carrying {
        b += 1.0;
    }
    if defender_guarding {
        b += 1.0;
    }
    (a, b)
}

/// Resolves an attack by `attacker` on `defender` (registry indices).
pub fn resolve_combat(world: &mut World, attacker: usize, defender: usize, rules: &Rules) -> Result<CombatResult> {
    let (a_id, b_id) = (world.animats[attacker].id, world.animats[defender].id);
    {
        let b = &mut world.animats[defender].knowledge;
        b.just_attacked = 1.0;
        b.was_attacked = true;
        b.enemy_target = Some(a_id);
    }
    world.animats[attacker].knowledge.enemy_target = Some(b_id);

    let a = &world.animats[attacker];
    let b = &world.animats[defender];
    let home = world.towers[b.tribe].position;
    let guarding = b.knowledge.behavior == Behavior::Defend && b.position.distance(home) <= rules.sight_range;
    let (a_str, b_str) = combat_strengths(
        a.knowledge.combat_power,
        a.carrying.is_some(),
        b.knowledge.combat_power,
        b.carrying.is_some(),
        guarding,
    );
    let tie = a_str == b_str;
    let attacker_wins = if tie { world.rng.random() < 0.5 } else { a_str > b_str };
    let (w, l) = if attacker_wins { (attacker, defender) } else { (defender, attacker) };

    world.animats[w].add_health(rules.rewards.win);
    world.animats[w].stats.combats_won += 1;
    let push = (world.animats[l].position - world.animats[w].position)
        .normalized()
        .unwrap_or(Vec2::new(1.0, 0.0));
    {
        let loser = &mut world.animats[l];
        loser.add_health(rules.rewards.lose);
        loser.stats.combats_lost += 1;
        loser.velocity = push * BASE_SPEED;
        loser.knowledge.destination = None;
        if l == attacker {
            loser.knowledge.stun_pending += LOSER_STUN_SECONDS;
        } else {
            loser.next_think += LOSER_STUN_SECONDS;
        }
    }

    put_down(world, attacker)?;
    put_down(world, defender)?;
    let k = &mut world.animats[attacker].knowledge;
    k.combat_power = 0.0;
    k.attacked_this_think = true;

    Ok(CombatResult {
        winner: world.animats[w].id,
        loser: world.animats[l].id,
        attacker_strength: a_str,
        defender_strength: b_str,
        tie,
    })
}
