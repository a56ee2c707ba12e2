use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coordination::{CoordinationParams, IntrinsicWeights, TokenBudget};
use crate::error::{Error, Result};
use crate::planner::PlannerParams;
use crate::world::{MazeParams, DEFAULT_FOV_DEGREES, DEFAULT_MAX_RANGE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommMode {
    None,
    Periodic,
    Full,
    Gated,
}

impl CommMode {
    pub const ALL: [CommMode; 4] = [CommMode::None, CommMode::Periodic, CommMode::Full, CommMode::Gated];

    pub fn as_str(self) -> &'static str {
        match self {
            CommMode::None => "none",
            CommMode::Periodic => "periodic",
            CommMode::Full => "full",
            CommMode::Gated => "gated",
        }
    }
}

impl fmt::Display for CommMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CommMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CommMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown comm_mode {s:?}")))
    }
}

/// Relayed walls sit below this confidence; direct observations never do.
pub const TENTATIVE_WALL_CONFIDENCE: f64 = 0.3;

/// What a message's payload image describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageContent {
    /// Whole-map mask of cells the sender has observed.
    Coverage,
    /// Occupancy of a square window centered on the sender.
    LocalOccupancy,
}

/// Gate weights in feature order: exploration progress, tokens, local confidence,
/// connectivity, junction, corridor, dead end, open area, bias.
/// Sends late in exploration, near partners and at junctions; holds back in corridors.
pub const DEFAULT_GATE_WEIGHTS: [f64; 9] = [4.0, 2.0, 0.0, 2.0, 1.0, -3.0, 0.0, -1.0, -5.3];

/// One episode's settings. Keys mirror the usual symbols; every field has a default
/// except the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpisodeConfig {
    pub seed: u64,
    pub maze_side: usize,
    pub n_agents: usize,
    pub bit_budget: usize,
    pub comm_mode: CommMode,
    pub periodic_interval: u32,
    #[serde(rename = "K_interval")]
    pub k_interval: u32,
    pub max_steps: u32,
    pub dt: f64,
    pub reward_success: f64,
    pub reward_step: f64,
    pub reward_collision: f64,
    pub d_norm: f64,
    pub d_min: f64,
    pub alpha: f64,
    pub r_local: usize,
    pub w_curiosity: f64,
    pub w_coord: f64,
    pub w_explore: f64,
    pub token_initial: f64,
    pub token_refill: f64,
    pub d_comm: f64,
    pub gate_weights: [f64; 9],
    pub grid_factor: usize,
    pub local_window: usize,
    pub curiosity_decay: f64,
    pub unknown_cost: f64,
    pub fov_degrees: f64,
    pub max_range: f64,
    pub loop_fraction: f64,
    /// Half-width of uniform noise added to partner distance estimates.
    pub partner_noise: f64,
    /// Refresh partner estimates only on sight or message receipt.
    pub partner_visibility: bool,
    pub drop_probability: f64,
    /// Upper end of the uniform per-agent noise added to region scores.
    pub policy_jitter: f64,
    pub message_content: MessageContent,
    /// Receivers also mark occupied bits bordering free bits as tentative walls.
    pub overlay_walls: bool,
    /// Belief snapshots are written every this many steps (0 disables).
    pub log_interval: u32,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        let coord = CoordinationParams::default();
        let tokens = TokenBudget::default();
        EpisodeConfig {
            seed: 0,
            maze_side: 29,
            n_agents: 2,
            bit_budget: 128,
            comm_mode: CommMode::Gated,
            periodic_interval: 10,
            k_interval: 20,
            max_steps: 650,
            dt: 1.0,
            reward_success: 500.0,
            reward_step: -0.01,
            reward_collision: -3.0,
            d_norm: coord.d_norm,
            d_min: coord.d_min,
            alpha: coord.alpha,
            r_local: coord.r_local,
            w_curiosity: coord.weights.curiosity,
            w_coord: coord.weights.coord,
            w_explore: coord.weights.explore,
            token_initial: tokens.initial,
            token_refill: tokens.refill_rate,
            d_comm: 5.0,
            gate_weights: DEFAULT_GATE_WEIGHTS,
            grid_factor: coord.grid_factor,
            local_window: coord.local_window,
            curiosity_decay: coord.curiosity_decay,
            unknown_cost: PlannerParams::default().unknown_cost,
            fov_degrees: DEFAULT_FOV_DEGREES,
            max_range: DEFAULT_MAX_RANGE,
            loop_fraction: MazeParams::default().loop_fraction,
            partner_noise: 0.0,
            partner_visibility: false,
            drop_probability: 0.0,
            policy_jitter: 0.1,
            message_content: MessageContent::Coverage,
            overlay_walls: true,
            log_interval: 20,
        }
    }
}

fn check(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidConfig(msg.to_string()))
    }
}

impl EpisodeConfig {
    pub fn validate(&self) -> Result<()> {
        check(
            self.maze_side >= 7 && self.maze_side % 2 == 1,
            "maze_side must be odd and at least 7",
        )?;
        check((1..=5).contains(&self.n_agents), "n_agents must be in 1..=5")?;
        check((1..=4096).contains(&self.bit_budget), "bit_budget must be in 1..=4096")?;
        check(self.periodic_interval >= 1, "periodic_interval must be positive")?;
        check(self.k_interval >= 1, "K_interval must be positive")?;
        check(self.max_steps >= 1, "max_steps must be positive")?;
        check(self.dt > 0.0, "dt must be positive")?;
        check(self.reward_success.is_finite(), "reward_success must be finite")?;
        check(self.reward_step.is_finite(), "reward_step must be finite")?;
        check(self.reward_collision.is_finite(), "reward_collision must be finite")?;
        check(self.d_norm > 0.0, "d_norm must be positive")?;
        check(self.d_min >= 0.0, "d_min must be non-negative")?;
        check(self.alpha >= 0.0, "alpha must be non-negative")?;
        for w in [self.w_curiosity, self.w_coord, self.w_explore] {
            check(w.is_finite(), "reward weights must be finite")?;
        }
        check(self.token_initial >= 1.0, "token_initial must be at least 1")?;
        check(self.token_refill >= 0.0, "token_refill must be non-negative")?;
        check(self.d_comm > 0.0, "d_comm must be positive")?;
        check(
            self.gate_weights.iter().all(|w| w.is_finite()),
            "gate_weights must be finite",
        )?;
        check(
            self.grid_factor >= 1 && self.grid_factor <= self.maze_side,
            "grid_factor must be in 1..=maze_side",
        )?;
        check(self.local_window % 2 == 1, "local_window must be odd")?;
        check(self.curiosity_decay >= 0.0, "curiosity_decay must be non-negative")?;
        check(self.unknown_cost >= 1.0, "unknown_cost must be at least 1")?;
        check(
            self.fov_degrees > 0.0 && self.fov_degrees <= 360.0,
            "fov_degrees must be in (0, 360]",
        )?;
        check(self.max_range >= 1.0, "max_range must be at least 1")?;
        check(
            (0.0..=1.0).contains(&self.loop_fraction),
            "loop_fraction must be in [0, 1]",
        )?;
        check(self.partner_noise >= 0.0, "partner_noise must be non-negative")?;
        check(
            (0.0..=1.0).contains(&self.drop_probability),
            "drop_probability must be in [0, 1]",
        )?;
        check(
            self.policy_jitter >= 0.0 && self.policy_jitter.is_finite(),
            "policy_jitter must be non-negative",
        )?;
        Ok(())
    }

    pub fn coordination(&self) -> CoordinationParams {
        CoordinationParams {
            d_norm: self.d_norm,
            d_min: self.d_min,
            alpha: self.alpha,
            r_local: self.r_local,
            weights: IntrinsicWeights {
                curiosity: self.w_curiosity,
                coord: self.w_coord,
                explore: self.w_explore,
            },
            grid_factor: self.grid_factor,
            local_window: self.local_window,
            curiosity_decay: self.curiosity_decay,
        }
    }

    pub fn planner(&self) -> PlannerParams {
        PlannerParams {
            unknown_cost: self.unknown_cost,
            tentative_wall_confidence: TENTATIVE_WALL_CONFIDENCE,
        }
    }

    pub fn maze_params(&self) -> MazeParams {
        MazeParams {
            loop_fraction: self.loop_fraction,
            ..MazeParams::default()
        }
    }

    pub fn tokens(&self) -> Result<TokenBudget> {
        TokenBudget::new(self.token_initial, self.token_refill)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: EpisodeConfig = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: EpisodeConfig = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config fields are plain values")
    }

    /// SHA-256 of the canonical TOML form, hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }
}
