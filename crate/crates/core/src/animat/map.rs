use crate::geometry::{Cell, Vec2, CELL_COUNT};
use crate::rng::Rng;

pub const MAX_RECENCY: f64 = 1000.0;
/// Largest recency loss per think.
pub const DECAY_PER_THINK: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct Entry {
    number: u8,
    recency: f64,
}

/// Remembered brick sightings, one per 64x64 sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialMap {
    entries: Vec<Entry>,
    known: [u32; 5],
}

impl Default for SpatialMap {
    fn default() -> Self {
        Self {
            entries: vec![Entry::default(); CELL_COUNT],
            known: [0; 5],
        }
    }
}

impl SpatialMap {
    /// Records brick `number` at `cell` with full recency, replacing
    /// whatever the sector held.
    pub fn set(&mut self, cell: Cell, number: u8) {
        debug_assert!((1..=5).contains(&number));
        self.clear(cell);
        self.entries[cell.index()] = Entry {
            number,
            recency: MAX_RECENCY,
        };
        self.known[number as usize - 1] += 1;
    }

    pub fn clear(&mut self, cell: Cell) {
        let e = &mut self.entries[cell.index()];
        if e.number != 0 {
            self.known[e.number as usize - 1] -= 1;
            *e = Entry::default();
        }
    }

    /// `(number, recency)` for a remembered sector.
    pub fn get(&self, cell: Cell) -> Option<(u8, f64)> {
        let e = self.entries[cell.index()];
        (e.number != 0).then_some((e.number, e.recency))
    }

    pub fn knows(&self, number: u8) -> bool {
        (1..=5).contains(&number) && self.known[number as usize - 1] > 0
    }

    pub fn len(&self) -> usize {
        self.known.iter().sum::<u32>() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// One think's forgetting: every remembered sector loses a fresh
    /// `random() * 5`, and is cleared at zero.
    pub fn decay(&mut self, rng: &mut Rng) {
        if self.is_empty() {
            return;
        }
        for i in 0..CELL_COUNT {
            let e = &mut self.entries[i];
            if e.number == 0 {
                continue;
            }
            e.recency -= rng.random() * DECAY_PER_THINK;
            if e.recency <= 0.0 {
                self.known[e.number as usize - 1] -= 1;
                *e = Entry::default();
            }
        }
    }

    /// Nearest remembered sector holding `number`; ties go to the lowest
    /// cell index.
    pub fn nearest(&self, from: Vec2, number: u8) -> Option<Cell> {
        if !self.knows(number) {
            return None;
        }
        let mut best: Option<(f64, Cell)> = None;
        for (i, e) in self.entries.iter().enumerate() {
            if e.number != number {
                continue;
            }
            let cell = Cell::from_index(i);
            let d = cell.center().distance(from);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, cell));
            }
        }
        best.map(|(_, c)| c)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Cell, u8, f64)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.number != 0)
            .map(|(i, e)| (Cell::from_index(i), e.number, e.recency))
    }

    pub fn recency_in_bounds(&self) -> bool {
        self.entries
            .iter()
            .all(|e| (0.0..=MAX_RECENCY).contains(&e.recency) && (e.number == 0) == (e.recency == 0.0))
    }
}
