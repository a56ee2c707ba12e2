use serde::{Deserialize, Serialize};

use super::grid::Cell;
use super::maze::{MazeGrid, Terrain};
use super::observe::{Observation, ObservedState};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BeliefState {
    Unknown,
    Free,
    Wall,
    Target,
}

impl BeliefState {
    pub fn is_known(self) -> bool {
        self != BeliefState::Unknown
    }

    /// Free space, including the target cell.
    pub fn is_free(self) -> bool {
        matches!(self, BeliefState::Free | BeliefState::Target)
    }

    /// Final tie-break in fusion: walls outrank free space.
    fn precedence(self) -> u8 {
        match self {
            BeliefState::Unknown => 0,
            BeliefState::Free => 1,
            BeliefState::Wall => 2,
            BeliefState::Target => 3,
        }
    }
}

impl From<ObservedState> for BeliefState {
    fn from(s: ObservedState) -> Self {
        match s {
            ObservedState::Free => BeliefState::Free,
            ObservedState::Wall => BeliefState::Wall,
            ObservedState::Target => BeliefState::Target,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellBelief {
    pub state: BeliefState,
    pub confidence: f64,
    pub timestamp: u32,
}

impl CellBelief {
    pub const UNKNOWN: CellBelief = CellBelief {
        state: BeliefState::Unknown,
        confidence: 0.0,
        timestamp: 0,
    };

    pub fn new(state: BeliefState, confidence: f64, timestamp: u32) -> Result<Self> {
        let ok = match state {
            BeliefState::Unknown => confidence == 0.0,
            _ => confidence > 0.0 && confidence <= 1.0,
        };
        if !ok {
            return Err(Error::invalid(format!(
                "confidence {confidence} inconsistent with {state:?}"
            )));
        }
        Ok(CellBelief {
            state,
            confidence,
            timestamp,
        })
    }

    /// Lexicographic fusion key: newer, then more confident, then wall over free.
    fn outranks(&self, other: &CellBelief) -> bool {
        (self.timestamp, self.confidence, self.state.precedence())
            > (other.timestamp, other.confidence, other.state.precedence())
    }
}

/// Confidence of a direct observation at `distance` cells.
pub fn observation_confidence(distance: f64) -> f64 {
    (1.0 - 0.05 * distance).max(0.5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefMap {
    side: usize,
    cells: Vec<CellBelief>,
}

impl BeliefMap {
    pub fn unknown(side: usize) -> Self {
        BeliefMap {
            side,
            cells: vec![CellBelief::UNKNOWN; side * side],
        }
    }

    /// Every cell known with full confidence at step 0.
    pub fn revealed(maze: &MazeGrid) -> Self {
        let side = maze.side();
        let cells = (0..side * side)
            .map(|i| {
                let c = Cell::from_index(i, side);
                let state = if c == maze.target() {
                    BeliefState::Target
                } else if maze.terrain(&c) == Terrain::Wall {
                    BeliefState::Wall
                } else {
                    BeliefState::Free
                };
                CellBelief {
                    state,
                    confidence: 1.0,
                    timestamp: 0,
                }
            })
            .collect();
        BeliefMap { side, cells }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn cells(&self) -> &[CellBelief] {
        &self.cells
    }

    pub fn get(&self, c: &Cell) -> &CellBelief {
        &self.cells[c.index(self.side)]
    }

    pub fn state(&self, c: &Cell) -> BeliefState {
        self.get(c).state
    }

    pub fn set(&mut self, c: &Cell, b: CellBelief) {
        let i = c.index(self.side);
        self.cells[i] = b;
    }

    pub fn known_count(&self) -> usize {
        self.cells.iter().filter(|c| c.state.is_known()).count()
    }

    /// Cell believed to hold the target, if any.
    pub fn target(&self) -> Option<Cell> {
        self.cells
            .iter()
            .position(|c| c.state == BeliefState::Target)
            .map(|i| Cell::from_index(i, self.side))
    }
}

/// Writes direct observations: state and timestamp always replaced, confidence from
/// distance, never lowered for an identical state seen in the same step.
pub fn integrate_observation(belief: &mut BeliefMap, obs: &[Observation], step: u32) {
    for o in obs {
        let state = BeliefState::from(o.state);
        let mut confidence = observation_confidence(o.distance);
        let old = belief.get(&o.cell);
        if old.timestamp == step && old.state == state {
            confidence = confidence.max(old.confidence);
        }
        belief.set(
            &o.cell,
            CellBelief {
                state,
                confidence,
                timestamp: step,
            },
        );
    }
}

/// Per-cell merge: unknown never overrides known; otherwise newer timestamp, then
/// higher confidence, then wall over free.
pub fn fuse_belief(mine: &BeliefMap, received: &BeliefMap) -> Result<BeliefMap> {
    let mut out = mine.clone();
    fuse_into(&mut out, received)?;
    Ok(out)
}

/// In-place form of [`fuse_belief`]; returns the number of cells that changed.
pub fn fuse_into(mine: &mut BeliefMap, received: &BeliefMap) -> Result<usize> {
    if mine.side != received.side {
        return Err(Error::invalid(format!(
            "belief sides differ: {} vs {}",
            mine.side, received.side
        )));
    }
    let mut changed = 0;
    for (m, r) in mine.cells.iter_mut().zip(&received.cells) {
        if !r.state.is_known() {
            continue;
        }
        if !m.state.is_known() || r.outranks(m) {
            if m != r {
                changed += 1;
            }
            *m = *r;
        }
    }
    Ok(changed)
}

/// Intersection over union of the believed-free and truly-free cell sets.
pub fn map_iou(belief: &BeliefMap, truth: &MazeGrid) -> Result<f64> {
    if belief.side != truth.side() {
        return Err(Error::invalid("belief and maze sizes differ"));
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (b, t) in belief.cells.iter().zip(truth.cells()) {
        let a = b.state.is_free();
        let f = *t == Terrain::Free;
        inter += (a && f) as usize;
        union += (a || f) as usize;
    }
    Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExplorationStats {
    pub explored_ratio: f64,
    pub known_cells: usize,
    pub total_cells: usize,
}

pub fn exploration_stats(belief: &BeliefMap) -> ExplorationStats {
    let known = belief.known_count();
    ExplorationStats {
        explored_ratio: known as f64 / belief.cells.len() as f64,
        known_cells: known,
        total_cells: belief.cells.len(),
    }
}

/// Known cells last updated at or after `since`, row-major.
pub fn newly_explored(belief: &BeliefMap, since: u32) -> Vec<Cell> {
    belief
        .cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.state.is_known() && c.timestamp >= since)
        .map(|(i, _)| Cell::from_index(i, belief.side))
        .collect()
}
