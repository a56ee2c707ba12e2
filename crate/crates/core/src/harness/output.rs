use std::path::{Path, PathBuf};

use super::analysis::csv_io;
use super::batch::{MetricsRow, SummaryRow, METRICS_HEADER};
use super::config::EpisodeConfig;
use super::episode::EpisodeLog;
use crate::error::{Error, Result};
use crate::pgm::{belief_pixels, write_pgm};
use crate::world::{BeliefMap, MazeGrid};

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_metrics_csv(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record(METRICS_HEADER).map_err(|e| csv_io(path, e))?;
    for r in rows {
        w.write_record(r.csv_record()).map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_maze(path: &Path, maze: &MazeGrid) -> Result<()> {
    write_text(path, &maze.to_text())
}

pub fn write_belief_pgm(path: &Path, belief: &BeliefMap) -> Result<()> {
    write_pgm(path, belief.side(), belief.side(), &belief_pixels(belief))
}

/// Files written for one episode, relative to the output directory.
pub fn write_episode_outputs(
    out: &Path,
    cfg: &EpisodeConfig,
    log: &EpisodeLog,
    maze: &MazeGrid,
    snapshots: &[(u32, Vec<BeliefMap>)],
) -> Result<Vec<PathBuf>> {
    create_dir(out)?;
    let beliefs = out.join("beliefs");
    create_dir(&beliefs)?;
    let mut written = vec![
        out.join("metrics.csv"),
        out.join("maze.txt"),
        out.join("config.toml"),
        out.join("log.json"),
    ];
    write_metrics_csv(&written[0], &[MetricsRow::from_log(cfg, log)])?;
    write_maze(&written[1], maze)?;
    write_text(&written[2], &cfg.to_toml())?;
    write_text(&written[3], &log.to_json())?;
    for (t, maps) in snapshots {
        for (id, b) in maps.iter().enumerate() {
            let p = beliefs.join(format!("agent{id}_t{t:05}.pgm"));
            write_belief_pgm(&p, b)?;
            written.push(p);
        }
    }
    Ok(written)
}

pub fn write_batch_outputs(out: &Path, rows: &[MetricsRow], summary: &[SummaryRow]) -> Result<()> {
    create_dir(out)?;
    write_metrics_csv(&out.join("metrics.csv"), rows)?;
    write_summary_csv(&out.join("summary.csv"), summary)
}
