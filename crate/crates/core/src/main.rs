use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use swarmmap::harness::{
    analyze_trajectory_file, hexcode_demo, run_batch, run_episode_with_snapshots, summarize, write_batch_outputs,
    write_episode_outputs, EpisodeConfig, SweepSpec,
};
use swarmmap::world::generate_maze;
use swarmmap::Result;

#[derive(Parser)]
#[command(
    name = "swarmmap",
    version,
    about = "Cooperative maze exploration and spatial-code analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maze generation.
    Maze {
        #[command(subcommand)]
        action: MazeCmd,
    },
    /// Single episodes.
    Episode {
        #[command(subcommand)]
        action: EpisodeCmd,
    },
    /// Parameter sweeps.
    Batch {
        #[command(subcommand)]
        action: BatchCmd,
    },
    /// Offline analysis of recorded activity.
    Analyze {
        #[command(subcommand)]
        action: AnalyzeCmd,
    },
    /// Synthetic examples.
    Demo {
        #[command(subcommand)]
        action: DemoCmd,
    },
}

#[derive(Subcommand)]
enum MazeCmd {
    /// Writes a maze as text: '#' wall, '.' free, 'S' spawn, 'T' target.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 29)]
        side: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum EpisodeCmd {
    /// Runs one episode and writes metrics, log, maze, config echo and belief images.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum BatchCmd {
    /// Runs a sweep and writes per-episode metrics and a per-condition summary.
    Eval {
        #[arg(long)]
        sweep: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum AnalyzeCmd {
    /// Gridness scores and autocorrelograms from a trajectory CSV (t,x,y,dwell,a_1..a_U).
    Gridness {
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Spatial bin size; defaults to a 40-bin grid over the visited extent.
        #[arg(long)]
        bin_size: Option<f64>,
    },
}

#[derive(Subcommand)]
enum DemoCmd {
    /// Hexagonal three-wave code: rate map, autocorrelogram and gridness report.
    Hexcode {
        #[arg(long)]
        magnitude: f64,
        #[arg(long, default_value_t = 64)]
        side: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Maze {
            action: MazeCmd::Gen { seed, side, out },
        } => {
            let maze = generate_maze(seed, side)?;
            if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| swarmmap::Error::Io {
                    path: dir.to_path_buf(),
                    source: e,
                })?;
            }
            swarmmap::harness::write_maze(&out, &maze)?;
            println!("wrote {}", out.display());
        }
        Command::Episode {
            action: EpisodeCmd::Run { config, out },
        } => {
            let cfg = EpisodeConfig::load(&config)?;
            let (log, maze, snaps) = run_episode_with_snapshots(&cfg)?;
            write_episode_outputs(&out, &cfg, &log, &maze, &snaps)?;
            let o = &log.outcome;
            println!(
                "success={} steps={} iou={:.4} bits={} msgs={}",
                o.success, o.steps_used, o.final_iou, o.bits_tx, o.msgs
            );
        }
        Command::Batch {
            action: BatchCmd::Eval { sweep, jobs, out },
        } => {
            let spec = SweepSpec::load(&sweep)?;
            let rows = run_batch(&spec.expand()?, jobs)?;
            let summary = summarize(&rows);
            write_batch_outputs(&out, &rows, &summary)?;
            for s in &summary {
                println!(
                    "side={} agents={} mode={} budget={} n={} success={:.3} median_steps={}",
                    s.side, s.agents, s.comm_mode, s.bit_budget, s.episodes, s.success_rate, s.median_steps
                );
            }
        }
        Command::Analyze {
            action: AnalyzeCmd::Gridness { traj, out, bin_size },
        } => {
            for u in analyze_trajectory_file(&traj, &out, bin_size)? {
                match &u.report {
                    Some(r) => println!("{} g60={:.4} g90={:.4}", u.unit, r.g60, r.g90),
                    None => println!("{} unscored (no defined gridness)", u.unit),
                }
            }
        }
        Command::Demo {
            action: DemoCmd::Hexcode { magnitude, side, out },
        } => {
            let r = hexcode_demo(magnitude, side, &out)?;
            println!("g60={:.4} g90={:.4}", r.g60, r.g90);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
