use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{CommMode, EpisodeConfig};
use super::episode::{run_episode, EpisodeLog};
use super::stats::{bootstrap_ci, mean, median};
use crate::error::{Error, Result};

pub const METRICS_HEADER: [&str; 10] = [
    "seed",
    "side",
    "agents",
    "comm_mode",
    "bit_budget",
    "success",
    "steps",
    "iou",
    "bits_tx",
    "msgs",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub config_digest: String,
    pub seed: u64,
    pub side: usize,
    pub agents: usize,
    pub comm_mode: CommMode,
    pub bit_budget: usize,
    pub success: bool,
    pub steps: u32,
    pub iou: f64,
    pub bits_tx: usize,
    pub msgs: usize,
}

impl MetricsRow {
    pub fn from_log(cfg: &EpisodeConfig, log: &EpisodeLog) -> Self {
        MetricsRow {
            config_digest: log.config_digest.clone(),
            seed: cfg.seed,
            side: cfg.maze_side,
            agents: cfg.n_agents,
            comm_mode: cfg.comm_mode,
            bit_budget: cfg.bit_budget,
            success: log.outcome.success,
            steps: log.outcome.steps_used,
            iou: log.outcome.final_iou,
            bits_tx: log.outcome.bits_tx,
            msgs: log.outcome.msgs,
        }
    }

    pub fn csv_record(&self) -> [String; 10] {
        [
            self.seed.to_string(),
            self.side.to_string(),
            self.agents.to_string(),
            self.comm_mode.to_string(),
            self.bit_budget.to_string(),
            u8::from(self.success).to_string(),
            self.steps.to_string(),
            format!("{:.6}", self.iou),
            self.bits_tx.to_string(),
            self.msgs.to_string(),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedRange {
    pub start: u64,
    pub count: u64,
}

/// A base config plus axes to sweep. Empty axes keep the base value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub base: EpisodeConfig,
    pub seeds: SeedRange,
    #[serde(default)]
    pub maze_sides: Vec<usize>,
    #[serde(default)]
    pub n_agents: Vec<usize>,
    #[serde(default)]
    pub comm_modes: Vec<CommMode>,
    #[serde(default)]
    pub bit_budgets: Vec<usize>,
}

fn axis<T: Copy>(values: &[T], base: T) -> Vec<T> {
    if values.is_empty() {
        vec![base]
    } else {
        values.to_vec()
    }
}

impl SweepSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Cartesian product, seed-major.
    pub fn expand(&self) -> Result<Vec<EpisodeConfig>> {
        if self.seeds.count == 0 {
            return Err(Error::InvalidConfig("sweep has no seeds".into()));
        }
        let mut out = Vec::new();
        for seed in self.seeds.start..self.seeds.start + self.seeds.count {
            for &maze_side in &axis(&self.maze_sides, self.base.maze_side) {
                for &n_agents in &axis(&self.n_agents, self.base.n_agents) {
                    for &comm_mode in &axis(&self.comm_modes, self.base.comm_mode) {
                        for &bit_budget in &axis(&self.bit_budgets, self.base.bit_budget) {
                            let cfg = EpisodeConfig {
                                seed,
                                maze_side,
                                n_agents,
                                comm_mode,
                                bit_budget,
                                ..self.base.clone()
                            };
                            cfg.validate()?;
                            out.push(cfg);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Runs every config on `jobs` worker threads. Rows come back in seed order, ties
/// kept in input order, whatever the degree of parallelism.
pub fn run_batch(cfgs: &[EpisodeConfig], jobs: usize) -> Result<Vec<MetricsRow>> {
    if cfgs.is_empty() {
        return Err(Error::InvalidConfig("empty batch".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let rows: Vec<MetricsRow> = pool.install(|| {
        cfgs.par_iter()
            .map(|cfg| run_episode(cfg).map(|log| MetricsRow::from_log(cfg, &log)))
            .collect::<Result<_>>()
    })?;
    let mut indexed: Vec<(usize, MetricsRow)> = rows.into_iter().enumerate().collect();
    indexed.sort_by_key(|(i, r)| (r.seed, *i));
    Ok(indexed.into_iter().map(|(_, r)| r).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub side: usize,
    pub agents: usize,
    pub comm_mode: CommMode,
    pub bit_budget: usize,
    pub episodes: usize,
    pub success_rate: f64,
    pub success_ci_lo: f64,
    pub success_ci_hi: f64,
    pub mean_steps: f64,
    pub median_steps: f64,
    pub median_steps_ci_lo: f64,
    pub median_steps_ci_hi: f64,
    pub mean_iou: f64,
    pub total_bits: usize,
    pub total_msgs: usize,
}

pub const SUMMARY_RESAMPLES: usize = 2000;

/// Per-condition aggregates with 95% percentile-bootstrap intervals.
pub fn summarize(rows: &[MetricsRow]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(usize, usize, CommMode, usize), Vec<&MetricsRow>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.side, r.agents, r.comm_mode, r.bit_budget))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .enumerate()
        .map(|(g, ((side, agents, comm_mode, bit_budget), rs))| {
            let success: Vec<f64> = rs.iter().map(|r| f64::from(u8::from(r.success))).collect();
            let steps: Vec<f64> = rs.iter().map(|r| f64::from(r.steps)).collect();
            let iou: Vec<f64> = rs.iter().map(|r| r.iou).collect();
            let s_ci = bootstrap_ci(&success, mean, SUMMARY_RESAMPLES, 0.05, g as u64);
            let m_ci = bootstrap_ci(&steps, median, SUMMARY_RESAMPLES, 0.05, g as u64);
            SummaryRow {
                side,
                agents,
                comm_mode,
                bit_budget,
                episodes: rs.len(),
                success_rate: mean(&success),
                success_ci_lo: s_ci.lo,
                success_ci_hi: s_ci.hi,
                mean_steps: mean(&steps),
                median_steps: median(&steps),
                median_steps_ci_lo: m_ci.lo,
                median_steps_ci_hi: m_ci.hi,
                mean_iou: mean(&iou),
                total_bits: rs.iter().map(|r| r.bits_tx).sum(),
                total_msgs: rs.iter().map(|r| r.msgs).sum(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> SweepSpec {
        SweepSpec::from_toml_str(
            "bit_budgets = [4, 16, 64, 128]\ncomm_modes = [\"gated\"]\n[seeds]\nstart = 0\ncount = 3\n[base]\nmaze_side = 15\nmax_steps = 40\n",
        )
        .unwrap()
    }

    #[test]
    fn cartesian_count() {
        let cfgs = spec().expand().unwrap();
        assert_eq!(cfgs.len(), 12);
        assert!(cfgs.windows(2).all(|w| w[0].seed <= w[1].seed));
    }

    #[test]
    fn parallelism_does_not_change_rows() {
        let cfgs = spec().expand().unwrap();
        let serial = run_batch(&cfgs, 1).unwrap();
        let parallel = run_batch(&cfgs, 4).unwrap();
        assert_eq!(serial, parallel);
        let summary = summarize(&serial);
        assert_eq!(summary.len(), 4);
        assert!(summary.iter().all(|s| s.episodes == 3));
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(run_batch(&[], 2).is_err());
        let mut s = spec();
        s.seeds.count = 0;
        assert!(s.expand().is_err());
    }
}
