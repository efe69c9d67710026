//! World substrate: clock, bricks, towers, entity registry and motion.

use log::warn;

use crate::animat::Animat;
use crate::error::{Error, Result};
use crate::geometry::{Cell, Vec2, CELL_COUNT, WORLD_SIZE};
use crate::learning::RewardLedger;
use crate::rng::Rng;

pub const TICKS_PER_SECOND: u64 = 10;
pub const TICK_SECONDS: f64 = 0.1;
pub const TOWER_COMPLETE: usize = 5;
/// Distance at which an animat counts as being at a tower.
pub const AT_TOWER_RANGE: f64 = 32.0;
pub const BASE_SPEED: f64 = 23.0;
pub const SPEED_JITTER: f64 = 3.0;

const SCATTER_ATTEMPTS: usize = 100_000;

pub type TribeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AnimatId(pub u32);

impl std::fmt::Display for AnimatId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BrickId(pub usize);

/// Discrete simulation time; ten ticks per simulated second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Clock {
    tick: u64,
}

impl Clock {
    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn seconds(&self) -> f64 {
        self.tick as f64 / TICKS_PER_SECOND as f64
    }

    fn advance(&mut self) {
        self.tick += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrickPlace {
    Free(Cell),
    Carried(AnimatId),
    OnTower(TribeId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Brick {
    pub number: u8,
    pub place: BrickPlace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tower {
    pub tribe: TribeId,
    pub position: Vec2,
    pub bricks: Vec<BrickId>,
    pub completions: u32,
}

impl Tower {
    pub fn height(&self) -> usize {
        self.bricks.len()
    }
}

/// Default tower sites: centers of opposite quadrants.
pub fn default_tower_positions(tribes: usize) -> Vec<Vec2> {
    let near = WORLD_SIZE / 4.0;
    let far = WORLD_SIZE * 3.0 / 4.0;
    [Vec2::new(near, near), Vec2::new(far, far)]
        .into_iter()
        .take(tribes)
        .collect()
}

/// Everything a running trial mutates. Owned by exactly one scheduler.
#[derive(Debug, Clone)]
pub struct World {
    pub rng: Rng,
    pub clock: Clock,
    pub towers: Vec<Tower>,
    pub bricks: Vec<Brick>,
    cell_bricks: Vec<Option<BrickId>>,
    /// Living animats, kept sorted by id.
    pub animats: Vec<Animat>,
    pub ledger: RewardLedger,
    next_id: u32,
}

impl World {
    /// Empty world with towers at `tower_positions` and no bricks.
    pub fn new(seed: u32, tower_positions: &[Vec2]) -> Self {
        let towers = tower_positions
            .iter()
            .enumerate()
            .map(|(tribe, &position)| Tower {
                tribe,
                position,
                bricks: Vec::new(),
                completions: 0,
            })
            .collect();
        Self {
            rng: Rng::new(seed),
            clock: Clock::default(),
            towers,
            bricks: Vec::new(),
            cell_bricks: vec![None; CELL_COUNT],
            animats: Vec::new(),
            ledger: RewardLedger::default(),
            next_id: 1,
        }
    }

    pub fn now(&self) -> f64 {
        self.clock.seconds()
    }

    pub fn allocate_id(&mut self) -> AnimatId {
        let id = AnimatId(self.next_id);
        self.next_id += 1;
        id
    }

    pub fn index_of(&self, id: AnimatId) -> Option<usize> {
        self.animats.binary_search_by_key(&id, |a| a.id).ok()
    }

    pub fn animat(&self, id: AnimatId) -> Option<&Animat> {
        self.index_of(id).map(|i| &self.animats[i])
    }

    pub fn animat_mut(&mut self, id: AnimatId) -> Option<&mut Animat> {
        self.index_of(id).map(move |i| &mut self.animats[i])
    }

    /// Inserts an animat, keeping the registry ordered by id.
    pub fn insert_animat(&mut self, animat: Animat) {
        let at = self.animats.partition_point(|a| a.id < animat.id);
        self.animats.insert(at, animat);
    }

    pub fn remove_animat(&mut self, id: AnimatId) -> Option<Animat> {
        self.index_of(id).map(|i| self.animats.remove(i))
    }

    pub fn tower_of(&self, tribe: TribeId) -> Option<&Tower> {
        self.towers.get(tribe)
    }

    /// The first tower not owned by `tribe`.
    pub fn enemy_tower_of(&self, tribe: TribeId) -> Option<&Tower> {
        self.towers.iter().find(|t| t.tribe != tribe)
    }

    pub fn free_brick_at(&self, cell: Cell) -> Option<BrickId> {
        self.cell_bricks[cell.index()]
    }

    pub fn brick(&self, id: BrickId) -> &Brick {
        &self.bricks[id.0]
    }

    pub fn free_bricks(&self) -> impl Iterator<Item = (BrickId, Cell, u8)> + '_ {
        self.bricks.iter().enumerate().filter_map(|(i, b)| match b.place {
            BrickPlace::Free(cell) => Some((BrickId(i), cell, b.number)),
            _ => None,
        })
    }

    /// Adds a new brick at a uniformly random unoccupied cell.
    pub fn spawn_brick(&mut self, number: u8) -> Result<BrickId> {
        let id = BrickId(self.bricks.len());
        let cell = self.random_free_cell()?;
        self.bricks.push(Brick {
            number,
            place: BrickPlace::Free(cell),
        });
        self.cell_bricks[cell.index()] = Some(id);
        Ok(id)
    }

    fn random_free_cell(&mut self) -> Result<Cell> {
        for _ in 0..SCATTER_ATTEMPTS {
            let cell = Cell::from_index(self.rng.index(CELL_COUNT));
            if self.cell_bricks[cell.index()].is_none() {
                return Ok(cell);
            }
        }
        Err(Error::NoFreeCell)
    }

    /// Nearest unoccupied cell to `target` by center distance; ties go to
    /// the lowest cell index.
    pub fn nearest_free_cell(&self, target: Cell) -> Option<Cell> {
        if self.cell_bricks[target.index()].is_none() {
            return Some(target);
        }
        let origin = target.center();
        let mut best: Option<(f64, Cell)> = None;
        for cell in Cell::all() {
            if self.cell_bricks[cell.index()].is_some() {
                continue;
            }
            let d = cell.center().distance(origin);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, cell));
            }
        }
        best.map(|(_, c)| c)
    }

    /// Removes a free brick from its cell and hands it to `carrier`.
    pub fn take_brick(&mut self, brick: BrickId, carrier: AnimatId) {
        if let BrickPlace::Free(cell) = self.bricks[brick.0].place {
            self.cell_bricks[cell.index()] = None;
        }
        self.bricks[brick.0].place = BrickPlace::Carried(carrier);
    }

    /// Puts a brick on the ground at `near`, or the nearest free cell.
    pub fn place_brick(&mut self, brick: BrickId, near: Cell) -> Result<Cell> {
        let cell = self.nearest_free_cell(near).ok_or(Error::NoFreeCell)?;
        self.bricks[brick.0].place = BrickPlace::Free(cell);
        self.cell_bricks[cell.index()] = Some(brick);
        Ok(cell)
    }

    /// Stacks a brick on `tribe`'s tower. Returns the new height; a height
    /// of five is reported once and then the tower is scattered.
    pub fn stack_brick(&mut self, brick: BrickId, tribe: TribeId) -> Result<usize> {
        if let BrickPlace::Free(cell) = self.bricks[brick.0].place {
            self.cell_bricks[cell.index()] = None;
        }
        self.bricks[brick.0].place = BrickPlace::OnTower(tribe);
        self.towers[tribe].bricks.push(brick);
        let height = self.towers[tribe].height();
        if height >= TOWER_COMPLETE {
            self.scatter_tower_bricks(tribe)?;
        }
        Ok(height)
    }

    /// Resets a completed tower and scatters its bricks uniformly.
    pub fn scatter_tower_bricks(&mut self, tribe: TribeId) -> Result<Vec<(BrickId, Cell)>> {
        let bricks = std::mem::take(&mut self.towers[tribe].bricks);
        self.towers[tribe].completions += 1;
        let mut placed = Vec::with_capacity(bricks.len());
        for brick in bricks {
            let cell = self.random_free_cell()?;
            self.bricks[brick.0].place = BrickPlace::Free(cell);
            self.cell_bricks[cell.index()] = Some(brick);
            placed.push((brick, cell));
        }
        Ok(placed)
    }

    /// Brick conservation and occupancy consistency.
    pub fn check_bricks(&self) -> bool {
        let mut free = 0;
        for (i, b) in self.bricks.iter().enumerate() {
            match b.place {
                BrickPlace::Free(cell) => {
                    free += 1;
                    if self.cell_bricks[cell.index()] != Some(BrickId(i)) {
                        return false;
                    }
                }
                BrickPlace::Carried(id) => {
                    if self.animat(id).and_then(|a| a.carrying).map(|c| c.id) != Some(BrickId(i)) {
                        return false;
                    }
                }
                BrickPlace::OnTower(t) => {
                    if !self.towers[t].bricks.contains(&BrickId(i)) {
                        return false;
                    }
                }
            }
        }
        let occupied = self.cell_bricks.iter().filter(|c| c.is_some()).count();
        let on_towers: usize = self.towers.iter().map(|t| t.height()).sum();
        let carried = self.animats.iter().filter(|a| a.carrying.is_some()).count();
        occupied == free && free + on_towers + carried == self.bricks.len()
    }

    /// Moves one animat by a single tick of its velocity.
    pub fn integrate_motion(&mut self, index: usize) -> Vec2 {
        let home = self.towers.get(self.animats[index].tribe).map(|t| t.position);
        let a = &mut self.animats[index];
        let step = a.velocity * TICK_SECONDS;
        let mut next = a.position + step;
        if let Some(dest) = a.knowledge.destination {
            let step_len = step.length();
            if step_len > 0.0 && a.position.distance(dest) <= step_len {
                next = dest;
                a.velocity = Vec2::ZERO;
            }
        }
        next = next.clamp_to_world();
        if !(next.x.is_finite() && next.y.is_finite()) || !next.in_world() {
            warn!("animat {} left the world; relocating to its tower", a.id);
            next = home.unwrap_or(Vec2::new(WORLD_SIZE / 2.0, WORLD_SIZE / 2.0)) + Vec2::new(25.0, 0.0);
            a.velocity = Vec2::ZERO;
        }
        a.position = next;
        next
    }

    /// Advances the clock one tick, integrates motion for every animat and
    /// returns the ids due to think, in ascending id order.
    pub fn advance_tick(&mut self) -> Vec<AnimatId> {
        self.clock.advance();
        for i in 0..self.animats.len() {
            self.integrate_motion(i);
        }
        let now = self.now();
        self.animats
            .iter()
            .filter(|a| a.next_think <= now + 1e-9)
            .map(|a| a.id)
            .collect()
    }

    /// Random speed around the standard animat velocity.
    pub fn draw_speed(&mut self) -> f64 {
        BASE_SPEED + SPEED_JITTER * self.rng.crandom()
    }
}
