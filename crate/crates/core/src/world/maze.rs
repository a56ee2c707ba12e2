use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grid::Cell;
use crate::error::{Error, Result};

/// Maze sides used by the default curriculum.
pub const DEFAULT_SIDES: [usize; 5] = [15, 25, 29, 35, 39];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Terrain {
    Wall,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MazeParams {
    /// Fraction of removable interior walls knocked out after carving.
    pub loop_fraction: f64,
    pub spawn_count: usize,
    /// Minimum BFS distance of the target from the spawn origin, as a fraction of the farthest cell.
    pub target_min_fraction: f64,
}

impl Default for MazeParams {
    fn default() -> Self {
        MazeParams {
            loop_fraction: 0.1,
            spawn_count: 5,
            target_min_fraction: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MazeGrid {
    side: usize,
    cells: Vec<Terrain>,
    target: Cell,
    spawns: Vec<Cell>,
}

impl MazeGrid {
    /// Validates the structural invariants: walled border, free target and spawns,
    /// every free cell reachable.
    pub fn new(side: usize, cells: Vec<Terrain>, target: Cell, spawns: Vec<Cell>) -> Result<Self> {
        if side < 3 || cells.len() != side * side {
            return Err(Error::invalid(format!(
                "maze needs side ≥ 3 and side² cells, got {side}"
            )));
        }
        let maze = MazeGrid {
            side,
            cells,
            target,
            spawns,
        };
        for i in 0..side {
            for c in [
                Cell::new(0, i),
                Cell::new(side - 1, i),
                Cell::new(i, 0),
                Cell::new(i, side - 1),
            ] {
                if maze.is_free(&c) {
                    return Err(Error::invalid(format!("border cell {c:?} is not a wall")));
                }
            }
        }
        if maze.spawns.is_empty() {
            return Err(Error::invalid("maze needs at least one spawn"));
        }
        for c in maze.spawns.iter().chain(std::iter::once(&maze.target)) {
            if c.row >= side || c.col >= side || !maze.is_free(c) {
                return Err(Error::invalid(format!("{c:?} must be a free cell")));
            }
        }
        let dist = maze.bfs_distances(&maze.spawns[0]);
        if (0..side * side).any(|i| maze.cells[i] == Terrain::Free && dist[i].is_none()) {
            return Err(Error::invalid("maze has unreachable free cells"));
        }
        Ok(maze)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn target(&self) -> Cell {
        self.target
    }

    pub fn spawns(&self) -> &[Cell] {
        &self.spawns
    }

    pub fn cells(&self) -> &[Terrain] {
        &self.cells
    }

    pub fn terrain(&self, c: &Cell) -> Terrain {
        self.cells[c.index(self.side)]
    }

    pub fn is_free(&self, c: &Cell) -> bool {
        self.terrain(c) == Terrain::Free
    }

    pub fn free_count(&self) -> usize {
        self.cells.iter().filter(|t| **t == Terrain::Free).count()
    }

    /// BFS step counts over free cells; `None` where unreachable.
    pub fn bfs_distances(&self, from: &Cell) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.side * self.side];
        if !self.is_free(from) {
            return dist;
        }
        dist[from.index(self.side)] = Some(0);
        let mut queue = VecDeque::from([*from]);
        while let Some(c) = queue.pop_front() {
            let d = dist[c.index(self.side)].unwrap_or(0);
            for n in c.neighbors4(self.side) {
                if self.is_free(&n) && dist[n.index(self.side)].is_none() {
                    dist[n.index(self.side)] = Some(d + 1);
                    queue.push_back(n);
                }
            }
        }
        dist
    }

    /// One row per line: `#` wall, `.` free, `T` target, `S` spawn.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.side * (self.side + 1));
        for r in 0..self.side {
            for c in 0..self.side {
                let cell = Cell::new(r, c);
                let ch = if cell == self.target {
                    'T'
                } else if self.spawns.contains(&cell) {
                    'S'
                } else if self.is_free(&cell) {
                    '.'
                } else {
                    '#'
                };
                out.push(ch);
            }
            let _ = writeln!(out);
        }
        out
    }

    /// Parses the text form. Spawns are listed in row-major order.
    pub fn from_text(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        let side = lines.len();
        let mut cells = Vec::with_capacity(side * side);
        let mut target = None;
        let mut spawns = Vec::new();
        for (r, line) in lines.iter().enumerate() {
            let chars: Vec<char> = line.trim_end().chars().collect();
            if chars.len() != side {
                return Err(Error::invalid(format!(
                    "row {r} has {} columns, expected {side}",
                    chars.len()
                )));
            }
            for (c, ch) in chars.into_iter().enumerate() {
                cells.push(match ch {
                    '#' => Terrain::Wall,
                    '.' => Terrain::Free,
                    'T' => {
                        if target.replace(Cell::new(r, c)).is_some() {
                            return Err(Error::invalid("more than one target"));
                        }
                        Terrain::Free
                    }
                    'S' => {
                        spawns.push(Cell::new(r, c));
                        Terrain::Free
                    }
                    other => return Err(Error::invalid(format!("unexpected character {other:?}"))),
                });
            }
        }
        let target = target.ok_or_else(|| Error::invalid("maze has no target"))?;
        MazeGrid::new(side, cells, target, spawns)
    }
}

pub fn generate_maze(seed: u64, side: usize) -> Result<MazeGrid> {
    generate_maze_with(seed, side, &MazeParams::default())
}

/// Recursive-backtracker perfect maze on the odd lattice, then a fraction of the
/// interior walls removed to create loops.
pub fn generate_maze_with(seed: u64, side: usize, params: &MazeParams) -> Result<MazeGrid> {
    if side < 7 || side.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "maze side must be odd and at least 7, got {side}"
        )));
    }
    if !(0.0..=1.0).contains(&params.loop_fraction) || params.spawn_count == 0 {
        return Err(Error::invalid(
            "loop_fraction must lie in [0, 1] and spawn_count be positive",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells = vec![Terrain::Wall; side * side];
    let idx = |r: usize, c: usize| r * side + c;

    let nodes = (side - 1) / 2;
    let start = (rng.random_range(0..nodes) * 2 + 1, rng.random_range(0..nodes) * 2 + 1);
    let mut visited = vec![false; side * side];
    let mut stack = vec![start];
    visited[idx(start.0, start.1)] = true;
    cells[idx(start.0, start.1)] = Terrain::Free;
    while let Some(&(r, c)) = stack.last() {
        let mut options: Vec<(usize, usize)> = [(-2isize, 0isize), (0, 2), (2, 0), (0, -2)]
            .into_iter()
            .filter_map(|(dr, dc)| {
                let nr = r.checked_add_signed(dr)?;
                let nc = c.checked_add_signed(dc)?;
                (nr > 0 && nc > 0 && nr < side - 1 && nc < side - 1 && !visited[idx(nr, nc)]).then_some((nr, nc))
            })
            .collect();
        if options.is_empty() {
            stack.pop();
            continue;
        }
        options.shuffle(&mut rng);
        let (nr, nc) = options[0];
        visited[idx(nr, nc)] = true;
        cells[idx((r + nr) / 2, (c + nc) / 2)] = Terrain::Free;
        cells[idx(nr, nc)] = Terrain::Free;
        stack.push((nr, nc));
    }

    // interior walls separating two free cells along a row or a column
    let mut removable: Vec<usize> = (1..side - 1)
        .flat_map(|r| (1..side - 1).map(move |c| (r, c)))
        .filter(|&(r, c)| {
            cells[idx(r, c)] == Terrain::Wall
                && ((cells[idx(r, c - 1)] == Terrain::Free && cells[idx(r, c + 1)] == Terrain::Free)
                    || (cells[idx(r - 1, c)] == Terrain::Free && cells[idx(r + 1, c)] == Terrain::Free))
        })
        .map(|(r, c)| idx(r, c))
        .collect();
    removable.shuffle(&mut rng);
    let n_remove = (params.loop_fraction * removable.len() as f64).round() as usize;
    for &i in &removable[..n_remove] {
        cells[i] = Terrain::Free;
    }

    let free: Vec<usize> = (0..side * side).filter(|i| cells[*i] == Terrain::Free).collect();
    let origin = Cell::from_index(free[rng.random_range(0..free.len())], side);
    let probe = MazeGrid {
        side,
        cells,
        target: origin,
        spawns: vec![origin],
    };
    let dist = probe.bfs_distances(&origin);

    let mut order: Vec<(usize, Cell)> = free
        .iter()
        .filter_map(|i| dist[*i].map(|d| (d, Cell::from_index(*i, side))))
        .collect();
    order.sort();
    let spawns: Vec<Cell> = order.iter().take(params.spawn_count).map(|(_, c)| *c).collect();
    let max_d = order.last().map(|(d, _)| *d).unwrap_or(0);
    let threshold = (params.target_min_fraction * max_d as f64).ceil() as usize;
    let far: Vec<Cell> = order
        .iter()
        .filter(|(d, c)| *d >= threshold.max(1) && !spawns.contains(c))
        .map(|(_, c)| *c)
        .collect();
    let target = if far.is_empty() {
        order.last().map(|(_, c)| *c).unwrap_or(origin)
    } else {
        far[rng.random_range(0..far.len())]
    };
    MazeGrid::new(side, probe.cells, target, spawns)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let a = generate_maze(0, 15).unwrap();
        let b = generate_maze(0, 15).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        assert_ne!(a.to_text(), generate_maze(1, 15).unwrap().to_text());
    }

    #[test]
    fn invariants_across_sizes() {
        for side in DEFAULT_SIDES {
            for seed in 0..10 {
                let m = generate_maze(seed, side).unwrap();
                assert_eq!(m.side(), side);
                assert_eq!(m.cells().len(), side * side);
                assert_eq!(m.spawns().len(), 5);
                assert!(!m.spawns().contains(&m.target()));
                // flood fill from the first spawn reaches every free cell
                let dist = m.bfs_distances(&m.spawns()[0]);
                let reached = dist.iter().filter(|d| d.is_some()).count();
                assert_eq!(reached, m.free_count());
            }
        }
    }

    #[test]
    fn loops_are_added() {
        let perfect = MazeParams {
            loop_fraction: 0.0,
            ..MazeParams::default()
        };
        let a = generate_maze_with(3, 25, &perfect).unwrap();
        let b = generate_maze(3, 25).unwrap();
        assert!(b.free_count() > a.free_count());
        // a perfect maze on the odd lattice has exactly nodes² + nodes² − 1 free cells
        let nodes = 12;
        assert_eq!(a.free_count(), 2 * nodes * nodes - 1);
    }

    #[test]
    fn rejects_bad_sides() {
        assert!(generate_maze(0, 5).is_err());
        assert!(generate_maze(0, 16).is_err());
    }

    #[test]
    fn text_round_trip() {
        let m = generate_maze(42, 15).unwrap();
        let text = m.to_text();
        assert_eq!(text.lines().count(), 15);
        assert!(text.lines().all(|l| l.len() == 15));
        assert_eq!(MazeGrid::from_text(&text).unwrap().to_text(), text);
    }

    #[test]
    fn from_text_validates() {
        assert!(MazeGrid::from_text("###\n#T#\n###\n").is_err()); // no spawn
        assert!(MazeGrid::from_text("###\n#S.\n###\n").is_err()); // open border, no target
        assert!(MazeGrid::from_text("#####\n#S#T#\n#####\n#####\n#####\n").is_err()); // disconnected
        assert!(MazeGrid::from_text("####\n#ST#\n####\n####\n").is_ok());
    }
}
