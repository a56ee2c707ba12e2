use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Grid coordinate. Ordering is row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }

    pub fn index(&self, side: usize) -> usize {
        self.row * side + self.col
    }

    pub fn from_index(i: usize, side: usize) -> Self {
        Cell::new(i / side, i % side)
    }

    pub fn distance(&self, other: &Cell) -> f64 {
        let dr = self.row as f64 - other.row as f64;
        let dc = self.col as f64 - other.col as f64;
        (dr * dr + dc * dc).sqrt()
    }

    pub fn manhattan(&self, other: &Cell) -> usize {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col)
    }

    pub fn chebyshev(&self, other: &Cell) -> usize {
        self.row.abs_diff(other.row).max(self.col.abs_diff(other.col))
    }

    /// Neighbor one step along `h`, if it stays on a `side × side` grid.
    pub fn step(&self, h: Heading, side: usize) -> Option<Cell> {
        let (dc, dr) = h.delta();
        let r = self.row.checked_add_signed(dr)?;
        let c = self.col.checked_add_signed(dc)?;
        (r < side && c < side).then_some(Cell::new(r, c))
    }

    /// In-bounds 4-neighbors in N, E, S, W order.
    pub fn neighbors4(&self, side: usize) -> impl Iterator<Item = Cell> + '_ {
        Heading::ALL.into_iter().filter_map(move |h| self.step(h, side))
    }
}

/// Four-way heading. Rows grow southward, columns eastward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Heading {
    North,
    East,
    South,
    West,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::North, Heading::East, Heading::South, Heading::West];

    /// `(dcol, drow)` for one step.
    pub fn delta(self) -> (isize, isize) {
        match self {
            Heading::North => (0, -1),
            Heading::East => (1, 0),
            Heading::South => (0, 1),
            Heading::West => (-1, 0),
        }
    }

    pub fn left(self) -> Heading {
        match self {
            Heading::North => Heading::West,
            Heading::West => Heading::South,
            Heading::South => Heading::East,
            Heading::East => Heading::North,
        }
    }

    pub fn right(self) -> Heading {
        self.left().left().left()
    }

    /// Angle of `delta()` in the (col, row) plane.
    pub fn angle(self) -> f64 {
        match self {
            Heading::East => 0.0,
            Heading::South => PI / 2.0,
            Heading::West => PI,
            Heading::North => 1.5 * PI,
        }
    }

    /// Heading that moves from `a` to the 4-adjacent `b`.
    pub fn between(a: &Cell, b: &Cell) -> Option<Heading> {
        Heading::ALL.into_iter().find(|h| {
            let (dc, dr) = h.delta();
            a.row.checked_add_signed(dr) == Some(b.row) && a.col.checked_add_signed(dc) == Some(b.col)
        })
    }
}
