use serde::{Deserialize, Serialize};

use super::grid::{Cell, Heading};
use super::maze::{MazeGrid, Terrain};
use crate::geometry::angular_distance;

pub const DEFAULT_FOV_DEGREES: f64 = 75.0;
pub const DEFAULT_MAX_RANGE: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObservedState {
    Free,
    Wall,
    Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub cell: Cell,
    pub state: ObservedState,
    pub distance: f64,
}

/// Cells on the supercover line from `a` to `b`, excluding `a`. Where the line
/// passes exactly through a lattice corner the two side cells are returned as a pair.
fn supercover(a: Cell, b: Cell) -> Vec<(Cell, Option<Cell>)> {
    let dx = b.col as isize - a.col as isize;
    let dy = b.row as isize - a.row as isize;
    let (nx, ny) = (dx.abs(), dy.abs());
    let (sx, sy) = (dx.signum(), dy.signum());
    let (mut x, mut y) = (a.col as isize, a.row as isize);
    let (mut ix, mut iy) = (0, 0);
    let mut out = Vec::with_capacity((nx + ny) as usize);
    let at = |x: isize, y: isize| Cell::new(y as usize, x as usize);
    while ix < nx || iy < ny {
        let decision = (1 + 2 * ix) * ny - (1 + 2 * iy) * nx;
        if decision == 0 {
            let side = (at(x + sx, y), Some(at(x, y + sy)));
            out.push(side);
            x += sx;
            y += sy;
            ix += 1;
            iy += 1;
        } else if decision < 0 {
            x += sx;
            ix += 1;
        } else {
            y += sy;
            iy += 1;
        }
        out.push((at(x, y), None));
    }
    out
}

/// True when nothing opaque lies strictly between `from` and `to`. A corner
/// crossing is blocked only when both side cells are walls.
pub fn line_of_sight(maze: &MazeGrid, from: Cell, to: Cell) -> bool {
    let path = supercover(from, to);
    let n = path.len();
    path.iter().enumerate().all(|(i, (c, pair))| match pair {
        Some(other) => maze.is_free(c) || maze.is_free(other),
        None => i + 1 == n || maze.is_free(c),
    })
}

/// Visible cells within `max_range` whose centers fall inside the field of view.
/// Each candidate is tested by its own ray, so the result does not depend on
/// enumeration order. The agent's own cell is always included. Sorted row-major.
pub fn observe(maze: &MazeGrid, cell: Cell, heading: Heading, fov_degrees: f64, max_range: f64) -> Vec<Observation> {
    let half_fov = fov_degrees.to_radians() / 2.0;
    let reach = max_range.floor() as usize;
    let side = maze.side();
    let (r0, r1) = (cell.row.saturating_sub(reach), (cell.row + reach).min(side - 1));
    let (c0, c1) = (cell.col.saturating_sub(reach), (cell.col + reach).min(side - 1));
    let mut out = Vec::new();
    for r in r0..=r1 {
        for c in c0..=c1 {
            let target = Cell::new(r, c);
            let d = cell.distance(&target);
            if target != cell {
                if d > max_range + 1e-9 {
                    continue;
                }
                let angle = (r as f64 - cell.row as f64).atan2(c as f64 - cell.col as f64);
                if angular_distance(angle, heading.angle()) > half_fov + 1e-9 {
                    continue;
                }
                if !line_of_sight(maze, cell, target) {
                    continue;
                }
            }
            let state = if target == maze.target() {
                ObservedState::Target
            } else if maze.terrain(&target) == Terrain::Wall {
                ObservedState::Wall
            } else {
                ObservedState::Free
            };
            out.push(Observation {
                cell: target,
                state,
                distance: d,
            });
        }
    }
    out
}
