use super::{combat::resolve_combat, CarriedBrick, CombatResult, Role, Rules, Variant, ARRIVAL_DISTANCE};
use crate::behavior::{Behavior, BRICK_NUMBERS};
use crate::error::Result;
use crate::geometry::{Cell, Vec2, WORLD_SIZE};
use crate::world::{World, AT_TOWER_RANGE};

/// Which brick a fetch is after.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrickSelector {
    Exact(u8),
    /// `k` above the believed friendly tower height.
    Relative(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropOutcome {
    Stacked { height: usize, completed_tower: bool },
    Placed(Cell),
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepOutcome {
    pub completed: bool,
    pub combat: Option<CombatResult>,
    pub drop: Option<DropOutcome>,
}

impl StepOutcome {
    fn done() -> Self {
        Self {
            completed: true,
            ..Self::default()
        }
    }

    fn busy() -> Self {
        Self::default()
    }
}

/// Brick number a selector resolves to, or `None` if it would exceed 5.
fn resolve_number(world: &World, index: usize, selector: BrickSelector) -> Option<u8> {
    match selector {
        BrickSelector::Exact(k) => Some(k),
        BrickSelector::Relative(k) => {
            let n = world.animats[index].knowledge.friendly_tower.height as u8 + k;
            (n <= BRICK_NUMBERS).then_some(n)
        }
    }
}

/// Nearest remembered brick for `selector`, measured to cell centers.
pub fn nearest_known_brick(world: &World, index: usize, selector: BrickSelector) -> Option<Cell> {
    let number = resolve_number(world, index, selector)?;
    let a = &world.animats[index];
    a.map.nearest(a.position, number)
}

fn stop(world: &mut World, index: usize) {
    let a = &mut world.animats[index];
    a.velocity = Vec2::ZERO;
    a.knowledge.destination = None;
}

/// Points the animat at `dest` with a freshly drawn speed.
fn head_to(world: &mut World, index: usize, dest: Vec2) {
    let speed = world.draw_speed();
    let a = &mut world.animats[index];
    a.knowledge.destination = Some(dest);
    a.velocity = match (dest - a.position).normalized() {
        Some(dir) if a.position.distance(dest) > ARRIVAL_DISTANCE => dir * speed,
        _ => Vec2::ZERO,
    };
}

fn random_point(world: &mut World) -> Vec2 {
    let x = world.rng.random() * WORLD_SIZE;
    let y = world.rng.random() * WORLD_SIZE;
    Vec2::new(x, y)
}

/// Keeps wandering toward a random point, choosing a new one on arrival.
fn wander(world: &mut World, index: usize) {
    let a = &world.animats[index];
    let dest = match a.knowledge.wander {
        Some(p) if a.position.distance(p) > ARRIVAL_DISTANCE => p,
        _ => random_point(world),
    };
    world.animats[index].knowledge.wander = Some(dest);
    head_to(world, index, dest);
}

/// Picks up the free brick in `cell`. Fails (and forgets the sector) when
/// the brick is gone.
pub fn attempt_pickup(world: &mut World, index: usize, cell: Cell) -> bool {
    let a = &world.animats[index];
    if a.carrying.is_some() || a.role == Role::Spotter || Cell::containing(a.position) != cell {
        return false;
    }
    let Some(brick) = world.free_brick_at(cell) else {
        world.animats[index].map.clear(cell);
        return false;
    };
    let number = world.brick(brick).number;
    let id = world.animats[index].id;
    world.take_brick(brick, id);
    let a = &mut world.animats[index];
    a.carrying = Some(CarriedBrick { id: brick, number });
    a.map.clear(cell);
    true
}

/// Puts a carried brick down where the animat stands, returning where it
/// landed. Used by drops and by combat.
pub(crate) fn put_down(world: &mut World, index: usize) -> Result<Option<Cell>> {
    let Some(carried) = world.animats[index].carrying.take() else {
        return Ok(None);
    };
    let here = Cell::containing(world.animats[index].position);
    let cell = world.place_brick(carried.id, here)?;
    world.animats[index].map.set(cell, carried.number);
    Ok(Some(cell))
}

/// Drops the carried brick, stacking it when at the own tower with the
/// right number.
pub fn attempt_drop(world: &mut World, index: usize, rules: &Rules) -> Result<DropOutcome> {
    let a = &world.animats[index];
    let Some(carried) = a.carrying else {
        return Ok(DropOutcome::Rejected);
    };
    let tribe = a.tribe;
    let tower = &world.towers[tribe];
    let at_tower = tower.position.distance(a.position) <= AT_TOWER_RANGE;
    let fits = rules.variant == Variant::UnorderedStacking || carried.number as usize == tower.height() + 1;
    if at_tower && fits {
        let now = world.now();
        let height = world.stack_brick(carried.id, tribe)?;
        let completed_tower = height >= crate::world::TOWER_COMPLETE;
        let a = &mut world.animats[index];
        a.carrying = None;
        a.add_health(rules.rewards.drop);
        a.stats.bricks_stacked += 1;
        a.knowledge.friendly_tower.height = if completed_tower { 0 } else { height };
        a.knowledge.friendly_tower.observed_at = Some(now);
        return Ok(DropOutcome::Stacked { height, completed_tower });
    }
    Ok(match put_down(world, index)? {
        Some(cell) => DropOutcome::Placed(cell),
        None => DropOutcome::Rejected,
    })
}

fn fetch(world: &mut World, index: usize, selector: BrickSelector) -> Result<StepOutcome> {
    let Some(number) = resolve_number(world, index, selector) else {
        wander(world, index);
        return Ok(StepOutcome::busy());
    };
    if let Some(c) = world.animats[index].carrying {
        if c.number == number {
            stop(world, index);
            return Ok(StepOutcome::done());
        }
        // Hands full with the wrong brick: nothing useful to do.
        stop(world, index);
        return Ok(StepOutcome::busy());
    }
    let here = Cell::containing(world.animats[index].position);
    if let Some(b) = world.free_brick_at(here) {
        if world.brick(b).number == number && attempt_pickup(world, index, here) {
            stop(world, index);
            world.animats[index].knowledge.wander = None;
            return Ok(StepOutcome::done());
        }
    }
    loop {
        let Some(cell) = nearest_known_brick(world, index, BrickSelector::Exact(number)) else {
            wander(world, index);
            return Ok(StepOutcome::busy());
        };
        if cell == here && !world.free_brick_at(here).is_some_and(|b| world.brick(b).number == number) {
            world.animats[index].map.clear(cell);
            continue;
        }
        world.animats[index].knowledge.wander = None;
        head_to(world, index, cell.center());
        return Ok(StepOutcome::busy());
    }
}

fn go_to(world: &mut World, index: usize, target: Option<Vec2>) -> StepOutcome {
    let Some(target) = target else {
        stop(world, index);
        return StepOutcome::done();
    };
    if world.animats[index].position.distance(target) <= AT_TOWER_RANGE {
        stop(world, index);
        return StepOutcome::done();
    }
    head_to(world, index, target);
    StepOutcome::busy()
}

/// Runs one think-step of the animat's current behavior. `fresh` marks
/// the first step after the behavior was selected.
pub fn step_behavior(world: &mut World, index: usize, fresh: bool, rules: &Rules) -> Result<StepOutcome> {
    let behavior = world.animats[index].knowledge.behavior;
    let tribe = world.animats[index].tribe;
    // Only hunting behaviors keep a grudge; everything else lets the target
    // go and picks up whoever is nearest on the next sense.
    if fresh && !matches!(behavior, Behavior::Attack | Behavior::GoToEnemyTower) {
        world.animats[index].knowledge.enemy_target = None;
    }
    Ok(match behavior {
        Behavior::Wait => {
            stop(world, index);
            let k = &mut world.animats[index].knowledge;
            k.combat_power = (k.combat_power + 0.1).min(1.0);
            StepOutcome::done()
        }
        Behavior::GoToFriendlyTower => {
            let p = world.tower_of(tribe).map(|t| t.position);
            go_to(world, index, p)
        }
        Behavior::GoToEnemyTower => {
            let p = world.enemy_tower_of(tribe).map(|t| t.position);
            go_to(world, index, p)
        }
        Behavior::Fetch(k) => fetch(world, index, BrickSelector::Exact(k))?,
        Behavior::FetchRelative(k) => fetch(world, index, BrickSelector::Relative(k))?,
        Behavior::DropBrick => {
            stop(world, index);
            let outcome = attempt_drop(world, index, rules)?;
            StepOutcome {
                completed: true,
                combat: None,
                drop: Some(outcome),
            }
        }
        Behavior::Explore => {
            let a = &world.animats[index];
            let arrived = a.knowledge.wander.is_some_and(|p| a.position.distance(p) <= ARRIVAL_DISTANCE);
            if !fresh && arrived {
                world.animats[index].knowledge.wander = None;
                stop(world, index);
                StepOutcome::done()
            } else {
                if fresh {
                    world.animats[index].knowledge.wander = None;
                }
                wander(world, index);
                StepOutcome::busy()
            }
        }
        Behavior::Attack => {
            let target = world.animats[index]
                .knowledge
                .enemy_target
                .and_then(|t| world.index_of(t))
                .filter(|&t| world.animats[t].tribe != tribe);
            match target {
                None => {
                    world.animats[index].knowledge.enemy_target = None;
                    stop(world, index);
                    StepOutcome::done()
                }
                Some(t) => {
                    let d = world.animats[t].position.distance(world.animats[index].position);
                    if d <= rules.sight_range {
                        stop(world, index);
                        let result = resolve_combat(world, index, t, rules)?;
                        StepOutcome {
                            completed: true,
                            combat: Some(result),
                            drop: None,
                        }
                    } else {
                        let p = world.animats[t].position;
                        head_to(world, index, p);
                        StepOutcome::busy()
                    }
                }
            }
        }
        Behavior::Defend => {
            if fresh {
                stop(world, index);
                world.animats[index].knowledge.was_attacked = false;
                StepOutcome::busy()
            } else if world.animats[index].knowledge.was_attacked {
                StepOutcome::done()
            } else {
                stop(world, index);
                StepOutcome::busy()
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::animat::Animat;
    use crate::world::{default_tower_positions, AnimatId};

    fn setup(pos: Vec2) -> (World, usize) {
        let mut w = World::new(2, &default_tower_positions(2));
        let id = w.allocate_id();
        w.insert_animat(Animat::bare(id, 0, pos, 0.0));
        (w, 0)
    }

    fn brick_at(w: &mut World, number: u8, cell: Cell) -> crate::world::BrickId {
        let b = w.spawn_brick(number).unwrap();
        w.take_brick(b, AnimatId(999));
        w.place_brick(b, cell).unwrap();
        b
    }

    fn carry(w: &mut World, i: usize, number: u8) {
        let b = w.spawn_brick(number).unwrap();
        let id = w.animats[i].id;
        w.take_brick(b, id);
        w.animats[i].carrying = Some(CarriedBrick { id: b, number });
    }

    fn stack(w: &mut World, n: u8) {
        for k in 1..=n {
            let b = w.spawn_brick(k).unwrap();
            w.take_brick(b, AnimatId(999));
            w.stack_brick(b, 0).unwrap();
        }
    }

    #[test]
    fn go_to_friendly_tower_completes_nearby() {
        let (mut w, i) = setup(Vec2::new(522.0, 512.0));
        w.animats[i].knowledge.behavior = Behavior::GoToFriendlyTower;
        assert!(step_behavior(&mut w, i, true, &Rules::default()).unwrap().completed);
        w.animats[i].position = Vec2::new(900.0, 512.0);
        let out = step_behavior(&mut w, i, true, &Rules::default()).unwrap();
        assert!(!out.completed);
        assert!(w.animats[i].velocity.x < 0.0);
    }

    #[test]
    fn pickup_and_stale_entries() {
        let (mut w, i) = setup(Cell::new(3, 3).center());
        let cell = Cell::new(3, 3);
        brick_at(&mut w, 2, cell);
        assert!(attempt_pickup(&mut w, i, cell));
        assert_eq!(w.animats[i].carrying.unwrap().number, 2);
        assert!(!attempt_pickup(&mut w, i, cell));
        let (mut w, i) = setup(Cell::new(3, 3).center());
        w.animats[i].map.set(cell, 4);
        assert!(!attempt_pickup(&mut w, i, cell));
        assert_eq!(w.animats[i].map.get(cell), None);
        assert!(w.check_bricks());
    }

    #[test]
    fn stacking_rewards_and_scatters() {
        let tower = Vec2::new(512.0, 512.0);
        let (mut w, i) = setup(tower);
        stack(&mut w, 2);
        carry(&mut w, i, 3);
        let out = attempt_drop(&mut w, i, &Rules::default()).unwrap();
        assert_eq!(out, DropOutcome::Stacked { height: 3, completed_tower: false });
        assert_eq!(w.animats[i].knowledge.health, 11);

        carry(&mut w, i, 5);
        let out = attempt_drop(&mut w, i, &Rules::default()).unwrap();
        assert!(matches!(out, DropOutcome::Placed(_)));
        assert_eq!(w.towers[0].height(), 3);

        carry(&mut w, i, 4);
        attempt_drop(&mut w, i, &Rules::default()).unwrap();
        carry(&mut w, i, 5);
        let out = attempt_drop(&mut w, i, &Rules::default()).unwrap();
        assert_eq!(out, DropOutcome::Stacked { height: 5, completed_tower: true });
        assert_eq!(w.towers[0].height(), 0);
        assert!(w.check_bricks());
    }

    #[test]
    fn unordered_stacking_accepts_any() {
        let (mut w, i) = setup(Vec2::new(512.0, 512.0));
        carry(&mut w, i, 4);
        let rules = Rules {
            variant: Variant::UnorderedStacking,
            ..Rules::default()
        };
        assert!(matches!(attempt_drop(&mut w, i, &rules).unwrap(), DropOutcome::Stacked { .. }));
    }

    #[test]
    fn drop_without_brick_is_rejected() {
        let (mut w, i) = setup(Vec2::new(512.0, 512.0));
        assert_eq!(attempt_drop(&mut w, i, &Rules::default()).unwrap(), DropOutcome::Rejected);
    }

    #[test]
    fn fetch_heads_for_nearest_then_explores() {
        let (mut w, i) = setup(Cell::new(10, 10).center());
        w.animats[i].map.set(Cell::new(12, 10), 3);
        w.animats[i].map.set(Cell::new(20, 10), 3);
        brick_at(&mut w, 3, Cell::new(12, 10));
        brick_at(&mut w, 3, Cell::new(20, 10));
        assert_eq!(nearest_known_brick(&w, i, BrickSelector::Exact(3)), Some(Cell::new(12, 10)));
        w.animats[i].knowledge.behavior = Behavior::Fetch(3);
        step_behavior(&mut w, i, true, &Rules::default()).unwrap();
        assert_eq!(w.animats[i].knowledge.destination, Some(Cell::new(12, 10).center()));
        w.animats[i].knowledge.behavior = Behavior::Fetch(1);
        step_behavior(&mut w, i, true, &Rules::default()).unwrap();
        assert!(w.animats[i].knowledge.wander.is_some());
    }

    #[test]
    fn fetch_completes_on_pickup() {
        let (mut w, i) = setup(Cell::new(10, 10).center());
        brick_at(&mut w, 1, Cell::new(10, 10));
        w.animats[i].knowledge.behavior = Behavior::Fetch(1);
        assert!(step_behavior(&mut w, i, true, &Rules::default()).unwrap().completed);
        assert!(w.animats[i].carrying.is_some());
    }

    #[test]
    fn relative_selector() {
        let (mut w, i) = setup(Cell::new(10, 10).center());
        w.animats[i].knowledge.friendly_tower.height = 2;
        w.animats[i].map.set(Cell::new(11, 10), 3);
        assert_eq!(nearest_known_brick(&w, i, BrickSelector::Relative(1)), Some(Cell::new(11, 10)));
        w.animats[i].knowledge.friendly_tower.height = 4;
        assert_eq!(nearest_known_brick(&w, i, BrickSelector::Relative(2)), None);
    }

    #[test]
    fn explore_completes_on_arrival() {
        let (mut w, i) = setup(Vec2::new(100.0, 100.0));
        w.animats[i].knowledge.behavior = Behavior::Explore;
        assert!(!step_behavior(&mut w, i, true, &Rules::default()).unwrap().completed);
        let p = w.animats[i].knowledge.wander.unwrap();
        assert!(p.in_world());
        w.animats[i].position = p;
        assert!(step_behavior(&mut w, i, false, &Rules::default()).unwrap().completed);
    }

    #[test]
    fn wait_regenerates_power() {
        let (mut w, i) = setup(Vec2::new(100.0, 100.0));
        w.animats[i].knowledge.combat_power = 0.3;
        assert!(step_behavior(&mut w, i, true, &Rules::default()).unwrap().completed);
        assert!((w.animats[i].knowledge.combat_power - 0.4).abs() < 1e-12);
    }

    #[test]
    fn defend_ends_when_attacked() {
        let (mut w, i) = setup(Vec2::new(100.0, 100.0));
        w.animats[i].knowledge.behavior = Behavior::Defend;
        assert!(!step_behavior(&mut w, i, true, &Rules::default()).unwrap().completed);
        assert!(!step_behavior(&mut w, i, false, &Rules::default()).unwrap().completed);
        w.animats[i].knowledge.was_attacked = true;
        assert!(step_behavior(&mut w, i, false, &Rules::default()).unwrap().completed);
    }
}
