//! Episode and batch orchestration, baselines, metrics, output files and analysis
//! entry points used by the command line.

mod analysis;
mod batch;
mod config;
mod episode;
mod output;
pub mod stats;

pub use analysis::{
    analyze_trajectory_file, analyze_unit, arena_of, hexcode_demo, parse_trajectory_csv, write_report_csv,
    TrajectoryTable, UnitAnalysis, UnitMaps, DEFAULT_BINS, DEFAULT_SMOOTHING_BINS, REPORT_HEADER,
};
pub use batch::{
    run_batch, summarize, MetricsRow, SeedRange, SummaryRow, SweepSpec, METRICS_HEADER, SUMMARY_RESAMPLES,
};
pub use config::{CommMode, EpisodeConfig, MessageContent, DEFAULT_GATE_WEIGHTS, TENTATIVE_WALL_CONFIDENCE};
pub use episode::{
    run_episode, run_episode_with_snapshots, AgentStepRecord, BeliefSnapshots, Episode, EpisodeLog, EpisodeOutcome,
    FusionEvent, MessageRecord, StepRecord,
};
pub use output::{
    write_batch_outputs, write_belief_pgm, write_episode_outputs, write_maze, write_metrics_csv, write_summary_csv,
};
