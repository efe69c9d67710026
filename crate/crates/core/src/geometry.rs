//! Planar geometry for the 2048x2048 world and its 32x32 brick grid.

use std::ops::{Add, Mul, Sub};

pub const WORLD_SIZE: f64 = 2048.0;
pub const CELL_SIZE: f64 = 64.0;
pub const GRID_DIM: usize = 32;
pub const CELL_COUNT: usize = GRID_DIM * GRID_DIM;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn length(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).length()
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec2> {
        let len = self.length();
        (len > 0.0).then(|| self * (1.0 / len))
    }

    pub fn clamp_to_world(self) -> Vec2 {
        Vec2::new(self.x.clamp(0.0, WORLD_SIZE), self.y.clamp(0.0, WORLD_SIZE))
    }

    pub fn in_world(self) -> bool {
        (0.0..=WORLD_SIZE).contains(&self.x) && (0.0..=WORLD_SIZE).contains(&self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

/// One 64x64 sector of the brick grid, stored as a row-major index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell(u16);

impl Cell {
    pub fn new(col: usize, row: usize) -> Self {
        assert!(col < GRID_DIM && row < GRID_DIM, "cell ({col},{row}) out of grid");
        Cell((row * GRID_DIM + col) as u16)
    }

    pub fn from_index(index: usize) -> Self {
        assert!(index < CELL_COUNT);
        Cell(index as u16)
    }

    pub fn containing(p: Vec2) -> Self {
        let col = ((p.x / CELL_SIZE).floor().max(0.0) as usize).min(GRID_DIM - 1);
        let row = ((p.y / CELL_SIZE).floor().max(0.0) as usize).min(GRID_DIM - 1);
        Cell::new(col, row)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn col(self) -> usize {
        self.index() % GRID_DIM
    }

    pub fn row(self) -> usize {
        self.index() / GRID_DIM
    }

    pub fn center(self) -> Vec2 {
        Vec2::new(
            (self.col() as f64 + 0.5) * CELL_SIZE,
            (self.row() as f64 + 0.5) * CELL_SIZE,
        )
    }

    pub fn all() -> impl Iterator<Item = Cell> {
        (0..CELL_COUNT).map(Cell::from_index)
    }

    /// Cells whose centers lie within `radius` of `p`.
    pub fn within(p: Vec2, radius: f64) -> impl Iterator<Item = Cell> {
        let span = |v: f64| {
            let lo = ((v - radius) / CELL_SIZE).floor().max(0.0) as usize;
            let hi = (((v + radius) / CELL_SIZE).ceil().max(0.0) as usize).min(GRID_DIM);
            lo..hi
        };
        let rows = span(p.y);
        let cols = span(p.x);
        rows.flat_map(move |r| cols.clone().map(move |c| Cell::new(c, r)))
            .filter(move |cell| cell.center().distance(p) <= radius)
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.col(), self.row())
    }
}
