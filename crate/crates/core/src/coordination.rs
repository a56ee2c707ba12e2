//! Region-level decision stack: regional summaries, frontier curiosity, intrinsic
//! rewards, the logistic communication gate, token accounting and goal selection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::world::{AgentState, BeliefMap, BeliefState, Cell};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntrinsicWeights {
    pub curiosity: f64,
    pub coord: f64,
    pub explore: f64,
}

impl Default for IntrinsicWeights {
    fn default() -> Self {
        IntrinsicWeights {
            curiosity: 1.0,
            coord: 0.5,
            explore: 0.3,
        }
    }
}

/// Constants of the decision stack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoordinationParams {
    pub d_norm: f64,
    pub d_min: f64,
    pub alpha: f64,
    pub r_local: usize,
    pub weights: IntrinsicWeights,
    pub grid_factor: usize,
    pub local_window: usize,
    /// Distance decay in the curiosity map.
    pub curiosity_decay: f64,
}

impl Default for CoordinationParams {
    fn default() -> Self {
        CoordinationParams {
            d_norm: 10.0,
            d_min: 3.0,
            alpha: 0.1,
            r_local: 2,
            weights: IntrinsicWeights::default(),
            grid_factor: 4,
            local_window: 3,
            curiosity_decay: 0.1,
        }
    }
}

/// `g × g` tiling of a square map with ceiling-sized tiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionGrid {
    pub side: usize,
    pub g: usize,
}

impl RegionGrid {
    pub fn new(side: usize, g: usize) -> Result<Self> {
        if g == 0 || side == 0 {
            return Err(Error::invalid("grid factor and side must be positive"));
        }
        Ok(RegionGrid { side, g })
    }

    pub fn count(&self) -> usize {
        self.g * self.g
    }

    fn tile(&self) -> usize {
        self.side.div_ceil(self.g)
    }

    pub fn region_of(&self, c: &Cell) -> usize {
        let t = self.tile();
        (c.row / t) * self.g + c.col / t
    }

    /// Half-open row and column ranges; empty when the tiling overshoots the map.
    pub fn bounds(&self, region: usize) -> ((usize, usize), (usize, usize)) {
        let t = self.tile();
        let (i, j) = (region / self.g, region % self.g);
        let rows = ((i * t).min(self.side), ((i + 1) * t).min(self.side));
        let cols = ((j * t).min(self.side), ((j + 1) * t).min(self.side));
        (rows, cols)
    }

    pub fn cells(&self, region: usize) -> impl Iterator<Item = Cell> {
        let ((r0, r1), (c0, c1)) = self.bounds(region);
        (r0..r1).flat_map(move |r| (c0..c1).map(move |c| Cell::new(r, c)))
    }

    /// Geometric center in cell coordinates `(row, col)`.
    pub fn center(&self, region: usize) -> (f64, f64) {
        let ((r0, r1), (c0, c1)) = self.bounds(region);
        ((r0 + r1) as f64 / 2.0 - 0.5, (c0 + c1) as f64 / 2.0 - 0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionStats {
    pub exploration_ratio: f64,
    pub walkability_ratio: f64,
    pub agent_present: bool,
    /// No unknown cell in the region borders anything but believed walls.
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionalSummary {
    pub grid: RegionGrid,
    pub regions: Vec<RegionStats>,
}

impl RegionalSummary {
    /// `[exploration, walkability, agent_present]` per region, region-major; length `3g²`.
    pub fn features(&self) -> Vec<f64> {
        self.regions
            .iter()
            .flat_map(|r| [r.exploration_ratio, r.walkability_ratio, r.agent_present as u8 as f64])
            .collect()
    }

    pub fn mean_exploration(&self) -> f64 {
        self.regions.iter().map(|r| r.exploration_ratio).sum::<f64>() / self.regions.len() as f64
    }
}

/// Unknown cell with at least one 4-neighbor not believed to be a wall.
fn open_unknown(belief: &BeliefMap, c: &Cell) -> bool {
    belief.state(c) == BeliefState::Unknown
        && c.neighbors4(belief.side())
            .any(|n| belief.state(&n) != BeliefState::Wall)
}

pub fn regional_summary(belief: &BeliefMap, agents: &[Cell], g: usize) -> Result<RegionalSummary> {
    let grid = RegionGrid::new(belief.side(), g)?;
    let regions = (0..grid.count())
        .map(|region| {
            let (mut total, mut known, mut free, mut saturated) = (0usize, 0usize, 0usize, true);
            for c in grid.cells(region) {
                total += 1;
                let s = belief.state(&c);
                if s.is_known() {
                    known += 1;
                    free += s.is_free() as usize;
                } else if saturated && open_unknown(belief, &c) {
                    saturated = false;
                }
            }
            RegionStats {
                exploration_ratio: if total == 0 { 0.0 } else { known as f64 / total as f64 },
                walkability_ratio: if known == 0 { 0.0 } else { free as f64 / known as f64 },
                agent_present: agents.iter().any(|a| grid.region_of(a) == region),
                saturated,
            }
        })
        .collect();
    Ok(RegionalSummary { grid, regions })
}

/// Frontier score `(unknown 4-neighbors / 4) · exp(−decay · distance)` on believed-free
/// cells with an unknown neighbor, max-normalized. Row-major, one value per cell.
pub fn curiosity_map(belief: &BeliefMap, agent: &Cell, decay: f64) -> Vec<f64> {
    let side = belief.side();
    let mut out: Vec<f64> = (0..side * side)
        .map(|i| {
            let c = Cell::from_index(i, side);
            if !belief.state(&c).is_free() {
                return 0.0;
            }
            let unknown = c.neighbors4(side).filter(|n| !belief.state(n).is_known()).count();
            if unknown == 0 {
                return 0.0;
            }
            unknown as f64 / 4.0 * (-decay * c.distance(agent)).exp()
        })
        .collect();
    let max = out.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        out.iter_mut().for_each(|v| *v /= max);
    }
    out
}

/// Mean curiosity over each region's cells.
pub fn regional_curiosity(curiosity: &[f64], grid: &RegionGrid) -> Vec<f64> {
    (0..grid.count())
        .map(|region| {
            let (sum, n) = grid
                .cells(region)
                .fold((0.0, 0usize), |(s, n), c| (s + curiosity[c.index(grid.side)], n + 1));
            if n == 0 {
                0.0
            } else {
                sum / n as f64
            }
        })
        .collect()
}

/// Estimated distance to one partner, standing in for a learned social-place-cell readout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartnerEstimate {
    pub partner_id: usize,
    pub distance_cells: f64,
    pub position: Cell,
}

/// `Σ min(d̂/d_norm, 1) · [d̂ ≥ d_min]`
pub fn coordination_reward(distances: &[f64], d_norm: f64, d_min: f64) -> Result<f64> {
    if !(d_norm > 0.0) || !(d_min >= 0.0) {
        return Err(Error::invalid("d_norm must be positive and d_min non-negative"));
    }
    let mut total = 0.0;
    for d in distances {
        if !(*d >= 0.0) {
            return Err(Error::invalid(format!("distance must be non-negative, got {d}")));
        }
        if *d >= d_min {
            total += (d / d_norm).min(1.0);
        }
    }
    Ok(total)
}

/// `Σ exp(−α · ‖c − agent‖)` over cells within Chebyshev radius `r_local` that the
/// team did not know before and the agent knows now.
pub fn exploration_reward(newly_revealed: &[(Cell, bool)], agent: &Cell, alpha: f64, r_local: usize) -> f64 {
    newly_revealed
        .iter()
        .filter(|(c, team_unknown)| *team_unknown && c.chebyshev(agent) <= r_local)
        .map(|(c, _)| (-alpha * c.distance(agent)).exp())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntrinsicRewardBreakdown {
    pub curiosity: f64,
    pub coordination: f64,
    pub exploration: f64,
    pub composite: f64,
    pub weights: IntrinsicWeights,
}

pub fn intrinsic_reward(
    curiosity: f64,
    coord: f64,
    explore: f64,
    weights: IntrinsicWeights,
) -> IntrinsicRewardBreakdown {
    IntrinsicRewardBreakdown {
        curiosity,
        coordination: coord,
        exploration: explore,
        composite: weights.curiosity * curiosity + weights.coord * coord + weights.explore * explore,
        weights,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LocationType {
    Junction,
    Corridor,
    DeadEnd,
    OpenArea,
}

/// Local topology from the believed-free 4-neighborhood and 3×3 window.
pub fn classify_location(belief: &BeliefMap, c: &Cell) -> LocationType {
    let side = belief.side();
    let mut window_free = 0;
    for dr in -1isize..=1 {
        for dc in -1isize..=1 {
            if let (Some(r), Some(col)) = (c.row.checked_add_signed(dr), c.col.checked_add_signed(dc)) {
                if r < side && col < side && belief.state(&Cell::new(r, col)).is_free() {
                    window_free += 1;
                }
            }
        }
    }
    if window_free >= 7 {
        return LocationType::OpenArea;
    }
    let free: Vec<Cell> = c.neighbors4(side).filter(|n| belief.state(n).is_free()).collect();
    match free.len() {
        n if n >= 3 => LocationType::Junction,
        2 => {
            let opposite = free[0].row == free[1].row || free[0].col == free[1].col;
            if opposite {
                LocationType::Corridor
            } else {
                LocationType::Junction
            }
        }
        1 => LocationType::DeadEnd,
        _ => LocationType::Corridor,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GatingFeatures {
    pub exploration_progress: f64,
    pub tokens_normalized: f64,
    pub local_confidence: f64,
    pub connectivity: f64,
    pub onehot_junction: f64,
    pub onehot_corridor: f64,
    pub onehot_deadend: f64,
    pub onehot_openarea: f64,
    pub bias: f64,
}

impl GatingFeatures {
    pub fn to_array(&self) -> [f64; 9] {
        [
            self.exploration_progress,
            self.tokens_normalized,
            self.local_confidence,
            self.connectivity,
            self.onehot_junction,
            self.onehot_corridor,
            self.onehot_deadend,
            self.onehot_openarea,
            self.bias,
        ]
    }
}

pub fn gating_features(agent: &AgentState, belief: &BeliefMap, params: &CoordinationParams) -> Result<GatingFeatures> {
    let summary = regional_summary(belief, &[agent.cell], params.grid_factor)?;
    let side = belief.side();
    let half = (params.local_window / 2) as isize;
    let (mut conf, mut n) = (0.0, 0usize);
    for dr in -half..=half {
        for dc in -half..=half {
            if let (Some(r), Some(c)) = (
                agent.cell.row.checked_add_signed(dr),
                agent.cell.col.checked_add_signed(dc),
            ) {
                if r < side && c < side {
                    conf += belief.get(&Cell::new(r, c)).confidence;
                    n += 1;
                }
            }
        }
    }
    let connectivity = agent
        .cell
        .neighbors4(side)
        .filter(|c| belief.state(c).is_free())
        .count() as f64
        / 4.0;
    let loc = classify_location(belief, &agent.cell);
    let hot = |t: LocationType| if loc == t { 1.0 } else { 0.0 };
    Ok(GatingFeatures {
        exploration_progress: summary.mean_exploration(),
        tokens_normalized: agent.tokens.current / agent.tokens.initial,
        local_confidence: conf / n.max(1) as f64,
        connectivity,
        onehot_junction: hot(LocationType::Junction),
        onehot_corridor: hot(LocationType::Corridor),
        onehot_deadend: hot(LocationType::DeadEnd),
        onehot_openarea: hot(LocationType::OpenArea),
        bias: 1.0,
    })
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Transmit iff a partner is in range, a token is available and `σ(w·f) ≥ 0.5`.
pub fn gate_decision(f: &GatingFeatures, w: &[f64; 9], partner_in_range: bool, tokens_available: bool) -> bool {
    if !partner_in_range || !tokens_available {
        return false;
    }
    let z: f64 = f.to_array().iter().zip(w).map(|(a, b)| a * b).sum();
    sigmoid(z) >= 0.5
}

/// Slack on the one-token threshold so accumulated refills are not lost to rounding.
const TOKEN_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TokenBudget {
    pub current: f64,
    pub initial: f64,
    pub refill_rate: f64,
}

impl Default for TokenBudget {
    fn default() -> Self {
        TokenBudget {
            current: 10.0,
            initial: 10.0,
            refill_rate: 1.0 / 60.0,
        }
    }
}

impl TokenBudget {
    pub fn new(initial: f64, refill_rate: f64) -> Result<Self> {
        if !(initial >= 1.0) || !(refill_rate >= 0.0) {
            return Err(Error::invalid("token budget needs initial ≥ 1 and refill ≥ 0"));
        }
        Ok(TokenBudget {
            current: initial,
            initial,
            refill_rate,
        })
    }

    pub fn available(&self) -> bool {
        self.current >= 1.0 - TOKEN_SLACK
    }
}

/// `clamp(current − [transmitted] + refill, 0, initial)`.
pub fn tick_tokens(b: &TokenBudget, transmitted: bool) -> Result<TokenBudget> {
    if transmitted && !b.available() {
        return Err(Error::InsufficientTokens { current: b.current });
    }
    let spent = if transmitted { 1.0 } else { 0.0 };
    Ok(TokenBudget {
        current: (b.current - spent + b.refill_rate).clamp(0.0, b.initial),
        ..*b
    })
}

/// Everything a goal policy may look at.
#[derive(Debug, Clone)]
pub struct GoalInput<'a> {
    pub summary: &'a RegionalSummary,
    pub region_curiosity: &'a [f64],
    pub estimates: &'a [PartnerEstimate],
    pub target_region: Option<usize>,
    /// Regions ruled out by the caller, e.g. after a failed plan.
    pub excluded: &'a [bool],
    pub params: &'a CoordinationParams,
}

impl GoalInput<'_> {
    pub fn is_masked(&self, region: usize) -> bool {
        self.summary.regions[region].saturated || self.excluded.get(region).copied().unwrap_or(false)
    }
}

pub trait GoalPolicy {
    fn select(&self, input: &GoalInput<'_>) -> Result<usize>;
}

/// Highest `intrinsic_reward(curiosity, coordination at region center, 0)` over
/// unmasked regions; a known target's region wins outright; ties go to the lower index.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyCuriosity;

impl GoalPolicy for GreedyCuriosity {
    fn select(&self, input: &GoalInput<'_>) -> Result<usize> {
        if let Some(t) = input.target_region {
            return Ok(t);
        }
        let grid = &input.summary.grid;
        let mut best: Option<(f64, usize)> = None;
        for region in 0..grid.count() {
            if input.is_masked(region) {
                continue;
            }
            let (cr, cc) = grid.center(region);
            let distances: Vec<f64> = input
                .estimates
                .iter()
                .map(|e| ((e.position.row as f64 - cr).powi(2) + (e.position.col as f64 - cc).powi(2)).sqrt())
                .collect();
            let coord = coordination_reward(&distances, input.params.d_norm, input.params.d_min)?;
            let score = intrinsic_reward(input.region_curiosity[region], coord, 0.0, input.params.weights).composite;
            if best.is_none_or(|(b, _)| score > b) {
                best = Some((score, region));
            }
        }
        best.map(|(_, r)| r).ok_or(Error::ExplorationComplete)
    }
}

pub fn select_goal(policy: &dyn GoalPolicy, input: &GoalInput<'_>) -> Result<usize> {
    policy.select(input)
}
