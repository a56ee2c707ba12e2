//! Grid mazes, raycast observation, belief maps and map-quality metrics.

mod belief;
mod grid;
mod maze;
mod observe;

pub use belief::{
    exploration_stats, fuse_belief, fuse_into, integrate_observation, map_iou, newly_explored, observation_confidence,
    BeliefMap, BeliefState, CellBelief, ExplorationStats,
};
pub use grid::{Cell, Heading};
pub use maze::{generate_maze, generate_maze_with, MazeGrid, MazeParams, Terrain, DEFAULT_SIDES};
pub use observe::{line_of_sight, observe, Observation, ObservedState, DEFAULT_FOV_DEGREES, DEFAULT_MAX_RANGE};

use serde::{Deserialize, Serialize};

use crate::coordination::TokenBudget;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: usize,
    pub cell: Cell,
    pub heading: Heading,
    pub belief: BeliefMap,
    pub tokens: TokenBudget,
}

impl AgentState {
    pub fn new(id: usize, cell: Cell, heading: Heading, side: usize, tokens: TokenBudget) -> Self {
        AgentState {
            id,
            cell,
            heading,
            belief: BeliefMap::unknown(side),
            tokens,
        }
    }
}
