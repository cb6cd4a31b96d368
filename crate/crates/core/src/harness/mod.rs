//! Experiment runner: instance sets, batch runs, aggregation, statistics and
//! plot data.

mod experiment;
mod files;
mod plot;
mod spec;
mod stats;

pub use experiment::{
    aggregate, render_table, run_experiment, variant_number, verdicts, ExperimentOutput, ResultRow,
    RunRecord, RunSummary, VerdictRow, ALPHA,
};
pub use files::{
    aggregate_csv, parse_group_values, parse_runs_csv, parse_trajectory_csv, runs_csv, stats_csv,
    trajectory_csv, TrajectoryMeta, TrajectoryPoint,
};
pub use plot::{emit_plotdata, min_max, min_max_joint, parse_plot_csv, CellPlot, PlotData};
pub use spec::{instance_seed, mix_seed, run_seed, ExperimentSpec};
pub use stats::{
    compare, kruskal_wallis, mean, median, pairwise_bonferroni, rank_with_ties, Comparison,
    KruskalWallis,
};
