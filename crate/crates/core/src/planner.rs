//! A* over the believed map and compilation of paths into discrete actions.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::world::{BeliefMap, BeliefState, Cell, Heading};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActionStep {
    MoveForward,
    TurnLeft,
    TurnRight,
    Stay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    /// Start through goal inclusive; empty when start equals goal.
    pub cells: Vec<Cell>,
    pub actions: Vec<ActionStep>,
    /// Number of moves.
    pub cost: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerParams {
    pub unknown_cost: f64,
    /// Walls believed with confidence below this are planned through like unknown cells.
    pub tentative_wall_confidence: f64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        PlannerParams {
            unknown_cost: 1.5,
            tentative_wall_confidence: 0.0,
        }
    }
}

/// Entry cost of a cell, `None` when believed wall.
fn step_cost(belief: &BeliefMap, c: &Cell, params: &PlannerParams) -> Option<f64> {
    let b = belief.get(c);
    match b.state {
        BeliefState::Wall if b.confidence < params.tentative_wall_confidence => Some(params.unknown_cost),
        BeliefState::Wall => None,
        BeliefState::Unknown => Some(params.unknown_cost),
        BeliefState::Free | BeliefState::Target => Some(1.0),
    }
}

/// Heap key ordered by (f, h, row-major index), smallest first.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Key {
    f: f64,
    h: f64,
    index: usize,
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.f
            .total_cmp(&other.f)
            .then(self.h.total_cmp(&other.h))
            .then(self.index.cmp(&other.index))
    }
}

/// Cheapest 4-connected path through cells not believed to be walls. Returns
/// `None` when the goal is unreachable.
pub fn astar(
    belief: &BeliefMap,
    start: Cell,
    goal: Cell,
    start_heading: Heading,
    params: &PlannerParams,
) -> Result<Option<PlanResult>> {
    let side = belief.side();
    if start.row >= side || start.col >= side || goal.row >= side || goal.col >= side {
        return Err(Error::invalid("start or goal outside the map"));
    }
    if belief.state(&start) == BeliefState::Wall {
        return Err(Error::invalid(format!("start {start:?} is believed to be a wall")));
    }
    if start == goal {
        return Ok(Some(PlanResult {
            cells: Vec::new(),
            actions: Vec::new(),
            cost: 0,
        }));
    }
    if step_cost(belief, &goal, params).is_none() {
        return Ok(None);
    }

    let n = side * side;
    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    let h = |c: &Cell| c.manhattan(&goal) as f64;
    g[start.index(side)] = 0.0;
    open.push(Reverse(Key {
        f: h(&start),
        h: h(&start),
        index: start.index(side),
    }));

    while let Some(Reverse(key)) = open.pop() {
        if closed[key.index] {
            continue;
        }
        closed[key.index] = true;
        let c = Cell::from_index(key.index, side);
        if c == goal {
            break;
        }
        for nb in c.neighbors4(side) {
            let Some(cost) = step_cost(belief, &nb, params) else {
                continue;
            };
            let ni = nb.index(side);
            let tentative = g[key.index] + cost;
            if !closed[ni] && tentative < g[ni] {
                g[ni] = tentative;
                parent[ni] = key.index;
                let hn = h(&nb);
                open.push(Reverse(Key {
                    f: tentative + hn,
                    h: hn,
                    index: ni,
                }));
            }
        }
    }

    let gi = goal.index(side);
    if !closed[gi] {
        return Ok(None);
    }
    let mut cells = vec![goal];
    let mut i = gi;
    while parent[i] != usize::MAX {
        i = parent[i];
        cells.push(Cell::from_index(i, side));
    }
    cells.reverse();
    let actions = path_to_actions(&cells, start_heading)?;
    Ok(Some(PlanResult {
        cost: cells.len() - 1,
        cells,
        actions,
    }))
}

/// Turns needed to face `to` from `from`: none, one left, one right, or two lefts.
pub fn turns_between(from: Heading, to: Heading) -> Vec<ActionStep> {
    if from == to {
        vec![]
    } else if from.left() == to {
        vec![ActionStep::TurnLeft]
    } else if from.right() == to {
        vec![ActionStep::TurnRight]
    } else {
        vec![ActionStep::TurnLeft, ActionStep::TurnLeft]
    }
}

/// Minimal turn-then-move sequence following `path` (which starts at the agent's cell).
pub fn path_to_actions(path: &[Cell], start_heading: Heading) -> Result<Vec<ActionStep>> {
    let mut heading = start_heading;
    let mut actions = Vec::new();
    for w in path.windows(2) {
        let next = Heading::between(&w[0], &w[1])
            .ok_or_else(|| Error::invalid(format!("{:?} and {:?} are not 4-adjacent", w[0], w[1])))?;
        actions.extend(turns_between(heading, next));
        actions.push(ActionStep::MoveForward);
        heading = next;
    }
    Ok(actions)
}

/// Applies one action on an unobstructed grid.
pub fn apply_action(cell: Cell, heading: Heading, action: ActionStep, side: usize) -> (Cell, Heading) {
    match action {
        ActionStep::MoveForward => (cell.step(heading, side).unwrap_or(cell), heading),
        ActionStep::TurnLeft => (cell, heading.left()),
        ActionStep::TurnRight => (cell, heading.right()),
        ActionStep::Stay => (cell, heading),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{generate_maze, BeliefMap, CellBelief, MazeGrid};
    use proptest::prelude::*;
    use std::collections::VecDeque;

    fn params() -> PlannerParams {
        PlannerParams::default()
    }

    #[test]
    fn trivial_paths() {
        let m = MazeGrid::from_text("#######\n#S...T#\n#######\n#######\n#######\n#######\n#######\n").unwrap();
        let b = BeliefMap::revealed(&m);
        let same = astar(&b, Cell::new(1, 1), Cell::new(1, 1), Heading::East, &params())
            .unwrap()
            .unwrap();
        assert!(same.cells.is_empty() && same.cost == 0);
        let line = astar(&b, Cell::new(1, 1), Cell::new(1, 5), Heading::East, &params())
            .unwrap()
            .unwrap();
        assert_eq!(line.cells.len(), 5);
        assert_eq!(line.cost, 4);
        assert_eq!(line.actions, vec![ActionStep::MoveForward; 4]);
    }

    #[test]
    fn walled_off_goal() {
        let m = MazeGrid::from_text("#####\n#S#T#\n#.#.#\n#...#\n#####\n").unwrap();
        let mut b = BeliefMap::revealed(&m);
        b.set(&Cell::new(3, 2), CellBelief::new(BeliefState::Wall, 1.0, 0).unwrap());
        assert!(astar(&b, Cell::new(1, 1), Cell::new(1, 3), Heading::East, &params())
            .unwrap()
            .is_none());
        assert!(astar(&b, Cell::new(1, 1), Cell::new(0, 0), Heading::East, &params())
            .unwrap()
            .is_none());
    }

    #[test]
    fn action_compilation() {
        assert!(path_to_actions(&[], Heading::North).unwrap().is_empty());
        let ahead = [Cell::new(3, 3), Cell::new(2, 3)];
        assert_eq!(
            path_to_actions(&ahead, Heading::North).unwrap(),
            vec![ActionStep::MoveForward]
        );
        let behind = [Cell::new(3, 3), Cell::new(4, 3)];
        assert_eq!(
            path_to_actions(&behind, Heading::North).unwrap(),
            vec![ActionStep::TurnLeft, ActionStep::TurnLeft, ActionStep::MoveForward]
        );
        let right = [Cell::new(3, 3), Cell::new(3, 4)];
        assert_eq!(
            path_to_actions(&right, Heading::North).unwrap(),
            vec![ActionStep::TurnRight, ActionStep::MoveForward]
        );
        assert!(path_to_actions(&[Cell::new(0, 0), Cell::new(1, 1)], Heading::North).is_err());
    }

    #[test]
    fn unknown_costs_more_than_known() {
        // detour of 2 extra known cells beats 2 unknown cells (2·1.5 > 2 is false, 4 known vs 2 unknown: 4 > 3)
        let m = MazeGrid::from_text("#######\n#S...T#\n#.###.#\n#.....#\n#######\n#######\n#######\n").unwrap();
        let mut b = BeliefMap::revealed(&m);
        b.set(&Cell::new(1, 3), CellBelief::UNKNOWN);
        let p = astar(&b, Cell::new(1, 1), Cell::new(1, 5), Heading::East, &params())
            .unwrap()
            .unwrap();
        assert!(p.cells.contains(&Cell::new(1, 3)));
        for c in [Cell::new(1, 2), Cell::new(1, 3), Cell::new(1, 4)] {
            b.set(&c, CellBelief::UNKNOWN);
        }
        // 4 steps via three unknowns cost 1.5·3 + 1 = 5.5 < 8 around
        let p = astar(&b, Cell::new(1, 1), Cell::new(1, 5), Heading::East, &params())
            .unwrap()
            .unwrap();
        assert_eq!(p.cost, 4);
    }

    fn bfs(b: &BeliefMap, s: Cell, g: Cell) -> Option<usize> {
        let side = b.side();
        let mut dist = vec![usize::MAX; side * side];
        dist[s.index(side)] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(c) = q.pop_front() {
            if c == g {
                return Some(dist[c.index(side)]);
            }
            for n in c.neighbors4(side) {
                if b.state(&n) != BeliefState::Wall && dist[n.index(side)] == usize::MAX {
                    dist[n.index(side)] = dist[c.index(side)] + 1;
                    q.push_back(n);
                }
            }
        }
        None
    }

    #[test]
    fn matches_bfs_on_mazes() {
        let unit = PlannerParams {
            unknown_cost: 1.0,
            ..PlannerParams::default()
        };
        for seed in 0..50 {
            let m = generate_maze(seed, 25).unwrap();
            let mut b = BeliefMap::revealed(&m);
            // hide a band so unknown cells are part of the search
            for r in 10..14 {
                for c in 0..25 {
                    b.set(&Cell::new(r, c), CellBelief::UNKNOWN);
                }
            }
            let s = m.spawns()[0];
            let p = astar(&b, s, m.target(), Heading::North, &unit).unwrap();
            assert_eq!(p.map(|p| p.cost), bfs(&b, s, m.target()));
        }
    }

    proptest! {
        #[test]
        fn replay_reaches_goal(seed in 0u64..200, h in 0usize..4) {
            let m = generate_maze(seed, 15).unwrap();
            let b = BeliefMap::revealed(&m);
            let start = m.spawns()[0];
            let heading = Heading::ALL[h];
            let p = astar(&b, start, m.target(), heading, &params()).unwrap().unwrap();
            for w in p.cells.windows(2) {
                prop_assert_eq!(w[0].manhattan(&w[1]), 1);
            }
            let (mut c, mut hd) = (start, heading);
            for a in &p.actions {
                let (nc, nh) = apply_action(c, hd, *a, 15);
                prop_assert!(m.is_free(&nc));
                c = nc;
                hd = nh;
            }
            prop_assert_eq!(c, m.target());
            let again = astar(&b, start, m.target(), heading, &params()).unwrap().unwrap();
            prop_assert_eq!(serde_json::to_string(&again).unwrap(), serde_json::to_string(&p).unwrap());
        }
    }
}
