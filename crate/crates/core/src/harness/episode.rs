use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{CommMode, EpisodeConfig, MessageContent, TENTATIVE_WALL_CONFIDENCE};
use crate::coordination::{
    coordination_reward, curiosity_map, exploration_reward, gate_decision, gating_features, intrinsic_reward,
    regional_curiosity, regional_summary, select_goal, tick_tokens, CoordinationParams, GoalInput, GreedyCuriosity,
    IntrinsicRewardBreakdown, PartnerEstimate,
};
use crate::error::{Error, Result};
use crate::ib_comm::{decode_map, encode_map, grid_side_for_budget, Message, MessageHeader, OccupancyImage};
use crate::planner::{astar, turns_between, ActionStep, PlannerParams};
use crate::world::{
    fuse_belief, fuse_into, generate_maze_with, integrate_observation, map_iou, observation_confidence, observe,
    AgentState, BeliefMap, BeliefState, Cell, CellBelief, Heading, MazeGrid,
};

/// Confidence and timestamp given to cells learned second-hand. Both sit below any
/// direct observation so received content only ever fills unknown cells.
const RELAYED_FREE_CONFIDENCE: f64 = 0.4;
const RELAYED_WALL_CONFIDENCE: f64 = 0.2;
const RELAYED_TIMESTAMP: u32 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentStepRecord {
    pub id: usize,
    pub cell: Cell,
    pub heading: Heading,
    pub action: ActionStep,
    pub collided: bool,
    pub goal: Option<Cell>,
    pub intrinsic: IntrinsicRewardBreakdown,
    pub transmitted: bool,
    pub tokens: f64,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageRecord {
    pub sender: usize,
    pub header: MessageHeader,
    pub delivered_to: Vec<usize>,
    pub dropped_for: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionEvent {
    pub receiver: usize,
    pub sender: usize,
    pub cells_changed: usize,
    /// Fusing the same content a second time changed nothing.
    pub idempotent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u32,
    pub agents: Vec<AgentStepRecord>,
    pub extrinsic: f64,
    pub messages: Vec<MessageRecord>,
    pub fusions: Vec<FusionEvent>,
    pub mean_iou: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub success: bool,
    pub steps_used: u32,
    pub collisions: u32,
    pub extrinsic_total: f64,
    pub bits_tx: usize,
    pub msgs: usize,
    pub final_iou: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub config_digest: String,
    pub seed: u64,
    pub target: Cell,
    pub start: Vec<(Cell, Heading)>,
    pub steps: Vec<StepRecord>,
    pub outcome: EpisodeOutcome,
}

impl EpisodeLog {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("log is plain data")
    }
}

/// A wall the planner will not cross.
fn blocks(belief: &BeliefMap, c: &Cell) -> bool {
    let b = belief.get(c);
    b.state == BeliefState::Wall && b.confidence >= TENTATIVE_WALL_CONFIDENCE
}

/// Observed first-hand rather than relayed.
fn directly_known(b: &CellBelief) -> bool {
    b.state.is_known() && b.confidence >= observation_confidence(f64::INFINITY)
}

#[derive(Debug, Clone)]
struct Plan {
    goal: Cell,
    to_target: bool,
    curiosity: f64,
    /// Cells still to enter, in order.
    path: VecDeque<Cell>,
    actions: VecDeque<ActionStep>,
}

/// One cooperative search run, advanced a step at a time.
#[derive(Debug, Clone)]
pub struct Episode {
    cfg: EpisodeConfig,
    coord: CoordinationParams,
    planner: PlannerParams,
    maze: MazeGrid,
    agents: Vec<AgentState>,
    plans: Vec<Option<Plan>>,
    /// `estimates[i]` holds agent i's view of every other agent.
    estimates: Vec<Vec<PartnerEstimate>>,
    team: BeliefMap,
    rng: ChaCha8Rng,
    agent_rngs: Vec<ChaCha8Rng>,
    t: u32,
    start: Vec<(Cell, Heading)>,
    steps: Vec<StepRecord>,
    collisions: u32,
    bits_tx: usize,
    msgs: usize,
    success: bool,
}

impl Episode {
    pub fn new(cfg: &EpisodeConfig) -> Result<Self> {
        cfg.validate()?;
        let maze = generate_maze_with(cfg.seed, cfg.maze_side, &cfg.maze_params())?;
        Self::with_maze(cfg, maze)
    }

    /// Runs on a given maze; agents take its spawns in order.
    pub fn with_maze(cfg: &EpisodeConfig, maze: MazeGrid) -> Result<Self> {
        cfg.validate()?;
        if maze.side() != cfg.maze_side {
            return Err(Error::InvalidConfig(format!(
                "maze side {} does not match maze_side {}",
                maze.side(),
                cfg.maze_side
            )));
        }
        if maze.spawns().len() < cfg.n_agents {
            return Err(Error::InvalidConfig(format!(
                "maze has {} spawns for {} agents",
                maze.spawns().len(),
                cfg.n_agents
            )));
        }
        let tokens = cfg.tokens()?;
        let mut agents = Vec::with_capacity(cfg.n_agents);
        let mut agent_rngs = Vec::with_capacity(cfg.n_agents);
        for id in 0..cfg.n_agents {
            let mut agent_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            agent_rng.set_stream(id as u64 + 1);
            let heading = Heading::ALL[agent_rng.random_range(0..4)];
            agents.push(AgentState::new(id, maze.spawns()[id], heading, maze.side(), tokens));
            agent_rngs.push(agent_rng);
        }
        let start = agents.iter().map(|a| (a.cell, a.heading)).collect();
        let mut ep = Episode {
            coord: cfg.coordination(),
            planner: cfg.planner(),
            team: BeliefMap::unknown(maze.side()),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            agent_rngs,
            plans: vec![None; cfg.n_agents],
            estimates: vec![Vec::new(); cfg.n_agents],
            cfg: cfg.clone(),
            maze,
            agents,
            t: 0,
            start,
            steps: Vec::new(),
            collisions: 0,
            bits_tx: 0,
            msgs: 0,
            success: false,
        };
        for i in 0..ep.agents.len() {
            ep.estimates[i] = (0..ep.agents.len())
                .filter(|&j| j != i)
                .map(|j| ep.true_estimate(i, j))
                .collect();
        }
        ep.observe_all(0);
        ep.success = ep.agents.iter().any(|a| a.cell == ep.maze.target());
        Ok(ep)
    }

    pub fn maze(&self) -> &MazeGrid {
        &self.maze
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn config(&self) -> &EpisodeConfig {
        &self.cfg
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn is_done(&self) -> bool {
        self.success || self.t >= self.cfg.max_steps
    }

    fn true_estimate(&mut self, i: usize, j: usize) -> PartnerEstimate {
        let d = self.agents[i].cell.distance(&self.agents[j].cell);
        let noise = if self.cfg.partner_noise > 0.0 {
            self.rng.random_range(-self.cfg.partner_noise..=self.cfg.partner_noise)
        } else {
            0.0
        };
        PartnerEstimate {
            partner_id: j,
            distance_cells: (d + noise).max(0.0),
            position: self.agents[j].cell,
        }
    }

    /// Observes from every agent and returns, per agent, the cells that were unknown
    /// to the whole team beforehand.
    fn observe_all(&mut self, t: u32) -> Vec<Vec<(Cell, bool)>> {
        let views: Vec<_> = self
            .agents
            .iter()
            .map(|a| observe(&self.maze, a.cell, a.heading, self.cfg.fov_degrees, self.cfg.max_range))
            .collect();
        let mut revealed = Vec::with_capacity(views.len());
        for (agent, obs) in self.agents.iter_mut().zip(&views) {
            revealed.push(
                obs.iter()
                    .map(|o| (o.cell, self.team.state(&o.cell) == BeliefState::Unknown))
                    .collect(),
            );
            integrate_observation(&mut agent.belief, obs, t);
        }
        for obs in &views {
            integrate_observation(&mut self.team, obs, t);
        }
        if self.cfg.partner_visibility {
            for i in 0..self.agents.len() {
                for j in 0..self.agents.len() {
                    if i != j && views[i].iter().any(|o| o.cell == self.agents[j].cell) {
                        self.refresh_estimate(i, j);
                    }
                }
            }
        } else {
            for i in 0..self.agents.len() {
                for j in 0..self.agents.len() {
                    if i != j {
                        self.refresh_estimate(i, j);
                    }
                }
            }
        }
        revealed
    }

    fn refresh_estimate(&mut self, i: usize, j: usize) {
        let e = self.true_estimate(i, j);
        if let Some(slot) = self.estimates[i].iter_mut().find(|s| s.partner_id == j) {
            *slot = e;
        }
    }

    fn needs_plan(&self, i: usize, t: u32) -> bool {
        let Some(plan) = &self.plans[i] else { return true };
        let belief = &self.agents[i].belief;
        (t - 1).is_multiple_of(self.cfg.k_interval)
            || plan.actions.is_empty()
            || (!plan.to_target && belief.target().is_some())
            || plan.path.iter().any(|c| blocks(belief, c))
    }

    /// A* to `goal`; frontier goals end facing their first unknown neighbor so the
    /// narrow field of view actually covers it.
    fn plan_to(&self, i: usize, goal: Cell, to_target: bool, curiosity: f64) -> Result<Option<Plan>> {
        let a = &self.agents[i];
        let Some(p) = astar(&a.belief, a.cell, goal, a.heading, &self.planner)? else {
            return Ok(None);
        };
        let mut actions: VecDeque<ActionStep> = p.actions.into();
        if !to_target {
            let arrival = match p.cells.len() {
                0 | 1 => a.heading,
                n => Heading::between(&p.cells[n - 2], &p.cells[n - 1]).unwrap_or(a.heading),
            };
            let side = a.belief.side();
            let unknown = Heading::ALL
                .into_iter()
                .filter(|h| goal.step(*h, side).is_some_and(|c| !a.belief.state(&c).is_known()))
                .min_by_key(|h| turns_between(arrival, *h).len());
            if let Some(h) = unknown {
                actions.extend(turns_between(arrival, h));
            }
        }
        if actions.is_empty() {
            return Ok(None);
        }
        Ok(Some(Plan {
            goal,
            to_target,
            curiosity,
            path: p.cells.into_iter().skip(1).collect(),
            actions,
        }))
    }

    /// Region-level goal choice followed by A*; unreachable regions are excluded
    /// and the choice repeated.
    fn choose_plan(&self, i: usize, jitter: &[f64]) -> Result<Option<Plan>> {
        let agent = &self.agents[i];
        let belief = &agent.belief;
        if let Some(target) = belief.target() {
            if let Some(plan) = self.plan_to(i, target, true, 1.0)? {
                return Ok(Some(plan));
            }
        }
        let mut occupied = vec![agent.cell];
        occupied.extend(self.estimates[i].iter().map(|e| e.position));
        let summary = regional_summary(belief, &occupied, self.coord.grid_factor)?;
        let curiosity = curiosity_map(belief, &agent.cell, self.coord.curiosity_decay);
        let mut region_curiosity = regional_curiosity(&curiosity, &summary.grid);
        let top = region_curiosity.iter().copied().fold(0.0, f64::max);
        for (c, j) in region_curiosity.iter_mut().zip(jitter) {
            if top > 0.0 {
                *c /= top;
            }
            *c += j;
        }
        let mut excluded = vec![false; summary.grid.count()];
        loop {
            let input = GoalInput {
                summary: &summary,
                region_curiosity: &region_curiosity,
                estimates: &self.estimates[i],
                target_region: None,
                excluded: &excluded,
                params: &self.coord,
            };
            let region = match select_goal(&GreedyCuriosity, &input) {
                Ok(r) => r,
                Err(Error::ExplorationComplete) => return Ok(None),
                Err(e) => return Err(e),
            };
            excluded[region] = true;
            let side = belief.side();
            let frontier = summary
                .grid
                .cells(region)
                .filter(|c| curiosity[c.index(side)] > 0.0)
                .max_by(|a, b| {
                    curiosity[a.index(side)]
                        .total_cmp(&curiosity[b.index(side)])
                        .then(b.index(side).cmp(&a.index(side)))
                });
            let goal = frontier.or_else(|| {
                let (cr, cc) = summary.grid.center(region);
                let d = |c: &Cell| (c.row as f64 - cr).powi(2) + (c.col as f64 - cc).powi(2);
                summary
                    .grid
                    .cells(region)
                    .filter(|c| *c != agent.cell && belief.state(c) != BeliefState::Wall)
                    .min_by(|a, b| d(a).total_cmp(&d(b)).then(a.index(side).cmp(&b.index(side))))
            });
            let Some(goal) = goal else { continue };
            if let Some(plan) = self.plan_to(i, goal, false, curiosity[goal.index(side)])? {
                return Ok(Some(plan));
            }
        }
    }

    /// Forgets relayed walls, which may hide passages the sender never saw.
    fn forget_relayed_walls(&mut self, i: usize) -> bool {
        let belief = &mut self.agents[i].belief;
        let side = belief.side();
        let mut any = false;
        for idx in 0..side * side {
            let c = Cell::from_index(idx, side);
            let b = belief.get(&c);
            if b.state == BeliefState::Wall && b.confidence < RELAYED_FREE_CONFIDENCE {
                belief.set(&c, CellBelief::UNKNOWN);
                any = true;
            }
        }
        any
    }

    fn ensure_plan(&mut self, i: usize, t: u32) -> Result<()> {
        if !self.needs_plan(i, t) {
            return Ok(());
        }
        let g = self.coord.grid_factor;
        let jitter: Vec<f64> = (0..g * g)
            .map(|_| self.cfg.policy_jitter * self.agent_rngs[i].random::<f64>())
            .collect();
        let mut plan = self.choose_plan(i, &jitter)?;
        if plan.is_none() && self.forget_relayed_walls(i) {
            plan = self.choose_plan(i, &jitter)?;
        }
        self.plans[i] = plan;
        Ok(())
    }

    fn outgoing_image(&self, i: usize, k: usize) -> Result<OccupancyImage> {
        match self.cfg.message_content {
            MessageContent::Coverage => {
                let side = self.maze.side();
                let values = self.agents[i]
                    .belief
                    .cells()
                    .iter()
                    .map(|b| if directly_known(b) { 0.0 } else { 1.0 })
                    .collect();
                OccupancyImage::new(side, side, values)
            }
            MessageContent::LocalOccupancy => self.local_image(i, k),
        }
    }

    fn overlay_from(&self, msg: &Message) -> Result<BeliefMap> {
        match self.cfg.message_content {
            MessageContent::Coverage => {
                let side = self.maze.side();
                let image = decode_map(msg, side);
                let mut overlay = BeliefMap::unknown(side);
                let relayed = CellBelief::new(BeliefState::Wall, RELAYED_WALL_CONFIDENCE, RELAYED_TIMESTAMP)?;
                for (idx, v) in image.values().iter().enumerate() {
                    if *v < 0.5 {
                        overlay.set(&Cell::from_index(idx, side), relayed);
                    }
                }
                Ok(overlay)
            }
            MessageContent::LocalOccupancy => self.local_overlay(msg),
        }
    }

    /// Crop of the sender's belief centered on itself: 0 for believed free, 1 otherwise.
    fn local_image(&self, i: usize, k: usize) -> Result<OccupancyImage> {
        let a = &self.agents[i];
        let side = self.maze.side() as isize;
        let r0 = a.cell.row as isize - (k / 2) as isize;
        let c0 = a.cell.col as isize - (k / 2) as isize;
        let mut values = Vec::with_capacity(k * k);
        for r in r0..r0 + k as isize {
            for c in c0..c0 + k as isize {
                let free = r >= 0
                    && c >= 0
                    && r < side
                    && c < side
                    && a.belief.state(&Cell::new(r as usize, c as usize)).is_free();
                values.push(if free { 0.0 } else { 1.0 });
            }
        }
        OccupancyImage::new(k, k, values)
    }

    /// Belief overlay a receiver reconstructs from a local window.
    fn local_overlay(&self, msg: &Message) -> Result<BeliefMap> {
        let k = msg.grid_side() as usize;
        let image = decode_map(msg, k);
        let side = self.maze.side() as isize;
        let r0 = msg.sender.1 as isize - (k / 2) as isize;
        let c0 = msg.sender.0 as isize - (k / 2) as isize;
        let free_at = |i: isize, j: isize| {
            i >= 0 && j >= 0 && i < k as isize && j < k as isize && image.get(i as usize, j as usize) < 0.5
        };
        let mut overlay = BeliefMap::unknown(self.maze.side());
        for i in 0..k as isize {
            for j in 0..k as isize {
                let (r, c) = (r0 + i, c0 + j);
                if r < 0 || c < 0 || r >= side || c >= side {
                    continue;
                }
                let cell = Cell::new(r as usize, c as usize);
                if free_at(i, j) {
                    overlay.set(
                        &cell,
                        CellBelief::new(BeliefState::Free, RELAYED_FREE_CONFIDENCE, RELAYED_TIMESTAMP)?,
                    );
                } else if self.cfg.overlay_walls
                    && [(-1, 0), (1, 0), (0, -1), (0, 1)]
                        .iter()
                        .any(|(di, dj)| free_at(i + di, j + dj))
                {
                    overlay.set(
                        &cell,
                        CellBelief::new(BeliefState::Wall, RELAYED_WALL_CONFIDENCE, RELAYED_TIMESTAMP)?,
                    );
                }
            }
        }
        Ok(overlay)
    }

    fn wants_to_send(&self, i: usize, t: u32, in_range: bool) -> Result<bool> {
        Ok(match self.cfg.comm_mode {
            CommMode::None => false,
            CommMode::Full => in_range,
            CommMode::Periodic => in_range && t.is_multiple_of(self.cfg.periodic_interval),
            CommMode::Gated => {
                let a = &self.agents[i];
                let f = gating_features(a, &a.belief, &self.coord)?;
                gate_decision(&f, &self.cfg.gate_weights, in_range, a.tokens.available())
            }
        })
    }

    /// Advances one step. Returns true once the episode has ended.
    pub fn step(&mut self) -> Result<bool> {
        if self.is_done() {
            return Ok(true);
        }
        let t = self.t + 1;
        let n = self.agents.len();
        let side = self.maze.side();

        let mut actions = Vec::with_capacity(n);
        let mut collided = vec![false; n];
        for i in 0..n {
            self.ensure_plan(i, t)?;
            let action = self.plans[i]
                .as_mut()
                .and_then(|p| p.actions.pop_front())
                .unwrap_or(ActionStep::Stay);
            let a = &mut self.agents[i];
            match action {
                ActionStep::MoveForward => match a.cell.step(a.heading, side) {
                    Some(next) if self.maze.is_free(&next) => {
                        a.cell = next;
                        if let Some(p) = self.plans[i].as_mut() {
                            p.path.pop_front();
                        }
                    }
                    blocked => {
                        if let Some(c) = blocked {
                            a.belief.set(&c, CellBelief::new(BeliefState::Wall, 1.0, t)?);
                        }
                        collided[i] = true;
                        self.plans[i] = None;
                    }
                },
                ActionStep::TurnLeft => a.heading = a.heading.left(),
                ActionStep::TurnRight => a.heading = a.heading.right(),
                ActionStep::Stay => {}
            }
            actions.push(action);
        }

        let revealed = self.observe_all(t);
        self.success = self.agents.iter().any(|a| a.cell == self.maze.target());

        let mut messages = Vec::new();
        let mut fusions = Vec::new();
        let mut transmitted = vec![false; n];
        if !self.success {
            let k = grid_side_for_budget(self.cfg.bit_budget);
            let mut outgoing = Vec::new();
            for i in 0..n {
                let reachable: Vec<usize> = self.estimates[i]
                    .iter()
                    .filter(|e| e.distance_cells <= self.cfg.d_comm)
                    .map(|e| e.partner_id)
                    .collect();
                if !self.wants_to_send(i, t, !reachable.is_empty())? {
                    continue;
                }
                let image = self.outgoing_image(i, k)?;
                let a = &self.agents[i];
                let msg =
                    encode_map(&image, self.cfg.bit_budget)?.with_origin((a.cell.col as u16, a.cell.row as u16), t);
                transmitted[i] = true;
                outgoing.push((i, msg, reachable));
            }
            for (sender, msg, reachable) in outgoing {
                let overlay = self.overlay_from(&msg)?;
                let (mut delivered, mut dropped) = (Vec::new(), Vec::new());
                for j in reachable {
                    if self.cfg.drop_probability > 0.0 && self.rng.random::<f64>() < self.cfg.drop_probability {
                        dropped.push(j);
                        continue;
                    }
                    let belief = &mut self.agents[j].belief;
                    let changed = fuse_into(belief, &overlay)?;
                    let idempotent = fuse_belief(belief, &overlay)? == *belief;
                    fusions.push(FusionEvent {
                        receiver: j,
                        sender,
                        cells_changed: changed,
                        idempotent,
                    });
                    let sender_cell = Cell::new(msg.sender.1 as usize, msg.sender.0 as usize);
                    let d = self.agents[j].cell.distance(&sender_cell);
                    if let Some(slot) = self.estimates[j].iter_mut().find(|e| e.partner_id == sender) {
                        slot.position = sender_cell;
                        slot.distance_cells = d;
                    }
                    delivered.push(j);
                }
                self.bits_tx += msg.payload_bits();
                self.msgs += 1;
                messages.push(MessageRecord {
                    sender,
                    header: msg.header(),
                    delivered_to: delivered,
                    dropped_for: dropped,
                });
            }
        }
        if self.cfg.comm_mode == CommMode::Gated {
            for (a, sent) in self.agents.iter_mut().zip(&transmitted) {
                a.tokens = tick_tokens(&a.tokens, *sent)?;
            }
        }

        let step_collisions = collided.iter().filter(|c| **c).count() as u32;
        self.collisions += step_collisions;
        let mut extrinsic = self.cfg.reward_step + self.cfg.reward_collision * step_collisions as f64;
        if self.success {
            extrinsic += self.cfg.reward_success;
        }

        let mut records = Vec::with_capacity(n);
        let mut iou_sum = 0.0;
        for i in 0..n {
            let a = &self.agents[i];
            let distances: Vec<f64> = self.estimates[i].iter().map(|e| e.distance_cells).collect();
            let coord = coordination_reward(&distances, self.coord.d_norm, self.coord.d_min)?;
            let explore = exploration_reward(&revealed[i], &a.cell, self.coord.alpha, self.coord.r_local);
            let curiosity = self.plans[i].as_ref().map_or(0.0, |p| p.curiosity);
            let iou = map_iou(&a.belief, &self.maze)?;
            iou_sum += iou;
            records.push(AgentStepRecord {
                id: i,
                cell: a.cell,
                heading: a.heading,
                action: actions[i],
                collided: collided[i],
                goal: self.plans[i].as_ref().map(|p| p.goal),
                intrinsic: intrinsic_reward(curiosity, coord, explore, self.coord.weights),
                transmitted: transmitted[i],
                tokens: a.tokens.current,
                iou,
            });
        }
        self.steps.push(StepRecord {
            t,
            agents: records,
            extrinsic,
            messages,
            fusions,
            mean_iou: iou_sum / n as f64,
        });
        self.t = t;
        Ok(self.is_done())
    }

    pub fn finish(self) -> Result<EpisodeLog> {
        let final_iou = match self.steps.last() {
            Some(s) => s.mean_iou,
            None => {
                let mut sum = 0.0;
                for a in &self.agents {
                    sum += map_iou(&a.belief, &self.maze)?;
                }
                sum / self.agents.len() as f64
            }
        };
        let success = self.success;
        let steps_used = self.t;
        let extrinsic_total = self.cfg.reward_success * f64::from(u8::from(success))
            + self.cfg.reward_step * f64::from(steps_used)
            + self.cfg.reward_collision * f64::from(self.collisions);
        Ok(EpisodeLog {
            config_digest: self.cfg.digest(),
            seed: self.cfg.seed,
            target: self.maze.target(),
            start: self.start,
            steps: self.steps,
            outcome: EpisodeOutcome {
                success,
                steps_used,
                collisions: self.collisions,
                extrinsic_total,
                bits_tx: self.bits_tx,
                msgs: self.msgs,
                final_iou,
            },
        })
    }
}

/// Runs an episode to success or `max_steps`.
pub fn run_episode(cfg: &EpisodeConfig) -> Result<EpisodeLog> {
    let mut ep = Episode::new(cfg)?;
    while !ep.step()? {}
    ep.finish()
}

/// Belief maps of every agent, keyed by step.
pub type BeliefSnapshots = Vec<(u32, Vec<BeliefMap>)>;

/// Like [`run_episode`], also returning belief snapshots every `log_interval` steps
/// and at the end.
pub fn run_episode_with_snapshots(cfg: &EpisodeConfig) -> Result<(EpisodeLog, MazeGrid, BeliefSnapshots)> {
    let mut ep = Episode::new(cfg)?;
    let snap = |ep: &Episode| (ep.t(), ep.agents().iter().map(|a| a.belief.clone()).collect::<Vec<_>>());
    let mut snaps = vec![snap(&ep)];
    while !ep.step()? {
        if cfg.log_interval > 0 && ep.t().is_multiple_of(cfg.log_interval) {
            snaps.push(snap(&ep));
        }
    }
    if snaps.last().map(|s| s.0) != Some(ep.t()) {
        snaps.push(snap(&ep));
    }
    let maze = ep.maze().clone();
    Ok((ep.finish()?, maze, snaps))
}
