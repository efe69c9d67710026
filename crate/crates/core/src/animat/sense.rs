use super::{Role, Rules};
use crate::geometry::Cell;
use crate::signaling::select_signal_target;
use crate::world::{AnimatId, World, AT_TOWER_RANGE};

/// Refreshes an animat's knowledge and spatial map from what it can see.
pub fn sense(world: &mut World, index: usize, rules: &Rules) {
    let now = world.now();
    let me = &world.animats[index];
    let (pos, tribe, id) = (me.position, me.tribe, me.id);
    let writes_sightings = me.role != Role::Fetcher;

    let cells: Vec<(Cell, Option<u8>)> = Cell::within(pos, rules.sight_range)
        .map(|cell| (cell, world.free_brick_at(cell).map(|b| world.brick(b).number)))
        .collect();
    let near_brick = world.free_brick_at(Cell::containing(pos)).is_some();

    let towers: Vec<(bool, usize, f64)> = world
        .towers
        .iter()
        .map(|t| (t.tribe == tribe, t.height(), t.position.distance(pos)))
        .collect();

    let mut sees_friend = false;
    let mut sees_enemy = false;
    let mut nearest_enemy: Option<(f64, AnimatId)> = None;
    for other in &world.animats {
        if other.id == id {
            continue;
        }
        let d = other.position.distance(pos);
        if d > rules.sight_range {
            continue;
        }
        if other.tribe == tribe {
            sees_friend = true;
        } else {
            sees_enemy = true;
            if nearest_enemy.is_none_or(|(bd, _)| d < bd) {
                nearest_enemy = Some((d, other.id));
            }
        }
    }

    // Current target, if it still lives: (combat power, carrying, visible).
    let held_target = world.animats[index].knowledge.enemy_target;
    let target_view = held_target.and_then(|t| world.animat(t)).map(|t| {
        (
            t.knowledge.combat_power,
            t.carrying.is_some(),
            t.position.distance(pos) <= rules.sight_range,
        )
    });

    let signal_target = select_signal_target(world, index, rules);
    let target_behavior = signal_target
        .and_then(|t| world.animat(t))
        .filter(|t| t.position.distance(pos) <= rules.sight_range)
        .map(|t| t.knowledge.behavior);
    let new_target_view = nearest_enemy.and_then(|(_, e)| world.animat(e)).map(|t| (t.id, t.knowledge.combat_power, t.carrying.is_some()));

    let me = &mut world.animats[index];
    for (cell, brick) in cells {
        match brick {
            Some(number) if writes_sightings => me.map.set(cell, number),
            Some(_) => {}
            None => me.map.clear(cell),
        }
    }

    let k = &mut me.knowledge;
    k.near_brick = near_brick;
    k.sees_friendly_tower = false;
    k.at_friendly_tower = false;
    k.sees_enemy_tower = false;
    k.at_enemy_tower = false;
    for (friendly, height, d) in towers {
        if d > rules.sight_range {
            continue;
        }
        let (belief, sees, at) = if friendly {
            (&mut k.friendly_tower, &mut k.sees_friendly_tower, &mut k.at_friendly_tower)
        } else {
            (&mut k.enemy_tower, &mut k.sees_enemy_tower, &mut k.at_enemy_tower)
        };
        belief.height = height;
        belief.observed_at = Some(now);
        *sees = true;
        *at = d <= AT_TOWER_RANGE;
    }
    k.sees_friend = sees_friend;
    k.sees_enemy = sees_enemy;

    match target_view {
        Some((cp, carrying, visible)) => {
            if visible {
                k.enemy_target_combat_power = cp;
                k.enemy_target_has_brick = carrying;
            }
        }
        None => {
            k.enemy_target = None;
            if rules.combat {
                if let Some((eid, cp, carrying)) = new_target_view {
                    k.enemy_target = Some(eid);
                    k.enemy_target_combat_power = cp;
                    k.enemy_target_has_brick = carrying;
                }
            }
        }
    }

    k.same_signal_target_as_last = signal_target.is_some() && signal_target == k.signal_target;
    k.signal_target = signal_target;
    k.signal_target_behavior = target_behavior;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::animat::Animat;
    use crate::geometry::Vec2;
    use crate::world::default_tower_positions;

    fn world() -> World {
        World::new(1, &default_tower_positions(2))
    }

    fn add(w: &mut World, tribe: usize, pos: Vec2) -> usize {
        let id = w.allocate_id();
        w.insert_animat(Animat::bare(id, tribe, pos, 0.0));
        w.index_of(id).unwrap()
    }

    fn put_brick(w: &mut World, number: u8, cell: Cell) {
        let b = w.spawn_brick(number).unwrap();
        w.take_brick(b, AnimatId(999));
        w.place_brick(b, cell).unwrap();
    }

    #[test]
    fn records_bricks_in_sight() {
        let mut w = world();
        let pos = Cell::new(10, 10).center();
        put_brick(&mut w, 4, Cell::containing(pos + Vec2::new(192.0, 0.0)));
        put_brick(&mut w, 2, Cell::containing(pos + Vec2::new(320.0, 0.0)));
        let i = add(&mut w, 0, pos);
        sense(&mut w, i, &Rules::default());
        let map = &w.animats[i].map;
        assert_eq!(map.get(Cell::new(13, 10)), Some((4, 1000.0)));
        assert_eq!(map.get(Cell::new(15, 10)), None);
        assert!(!map.knows(2));
    }

    #[test]
    fn tower_in_sight_updates_belief() {
        let mut w = world();
        let tower = w.towers[0].position;
        for n in 1..=2 {
            let b = w.spawn_brick(n).unwrap();
            w.take_brick(b, AnimatId(999));
            w.stack_brick(b, 0).unwrap();
        }
        w.clock = Default::default();
        let i = add(&mut w, 0, tower + Vec2::new(10.0, 0.0));
        sense(&mut w, i, &Rules::default());
        let k = &w.animats[i].knowledge;
        assert_eq!(k.friendly_tower.height, 2);
        assert_eq!(k.friendly_tower.observed_at, Some(0.0));
        assert!(k.at_friendly_tower && k.sees_friendly_tower);
        assert!(!k.sees_enemy_tower);
    }

    #[test]
    fn targets_and_flags() {
        let mut w = world();
        let me = add(&mut w, 0, Vec2::new(1000.0, 1000.0));
        add(&mut w, 0, Vec2::new(1100.0, 1000.0));
        add(&mut w, 0, Vec2::new(1400.0, 1000.0));
        add(&mut w, 1, Vec2::new(1000.0, 1200.0));
        sense(&mut w, me, &Rules::default());
        let k = w.animats[me].knowledge.clone();
        assert!(k.sees_friend && k.sees_enemy);
        assert_eq!(k.signal_target, Some(AnimatId(2)));
        assert_eq!(k.enemy_target, Some(AnimatId(4)));
        assert!(!k.same_signal_target_as_last);
        sense(&mut w, me, &Rules::default());
        assert!(w.animats[me].knowledge.same_signal_target_as_last);
    }

    #[test]
    fn no_friend_in_signal_range() {
        let mut w = world();
        let me = add(&mut w, 0, Vec2::new(100.0, 100.0));
        add(&mut w, 0, Vec2::new(700.0, 100.0));
        sense(&mut w, me, &Rules::default());
        assert_eq!(w.animats[me].knowledge.signal_target, None);
        assert!(!w.animats[me].knowledge.sees_friend);
    }
}
