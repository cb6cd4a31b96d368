//! Batch runs over an instance set, aggregation and statistics.
//!
//! Output directory layout (when `out_dir` is set):
//!
//! ```text
//! spec.conf            the spec as run
//! instances/*.cnf      generated instances
//! traj/*.csv           one trajectory per run
//! plot/                plot-ready trajectories, see `plot`
//! runs.csv             one line per run, failures included
//! aggregate.csv        one line per (m, variant, fitness) cell
//! stats.csv            Kruskal-Wallis verdicts per cell
//! timings.csv          wall time per run (the only non-reproducible file)
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::algorithms::{self, Variant};
use crate::cnf::{read_dimacs_file, write_dimacs_with_comments, Formula};
use crate::diversity::{Measure, MeasureKind};
use crate::error::{Error, Result};
use crate::generator::{generate, GenConfig};

use super::files::{
    aggregate_csv, clamp01, runs_csv, stats_csv, timings_csv, trajectory_csv, write_file,
    TrajectoryMeta,
};
use super::plot::{emit_plotdata, PlotData};
use super::spec::{instance_seed, run_seed, ExperimentSpec};
use super::stats::{kruskal_wallis, mean, median, pairwise_bonferroni, Comparison, KruskalWallis};

/// Family-wise significance level for the pairwise comparisons.
pub const ALPHA: f64 = 0.05;

/// Final values of one successful run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub h1: f64,
    pub h2: f64,
    pub h1_norm: f64,
    pub h2_norm: f64,
    pub unsat_count: u64,
    pub solver_calls: u64,
    /// Zero for runs read back from `runs.csv`.
    pub wall: Duration,
}

impl RunSummary {
    pub fn normalized(&self, kind: MeasureKind) -> f64 {
        match kind {
            MeasureKind::H1 => self.h1_norm,
            MeasureKind::H2 => self.h2_norm,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub m: usize,
    pub instance: usize,
    pub variant: Variant,
    pub fitness: MeasureKind,
    pub seed: u64,
    pub l: usize,
    /// The error message for runs that aborted.
    pub outcome: std::result::Result<RunSummary, String>,
}

/// Aggregate over the successful runs of one (m, variant, fitness) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub m: usize,
    pub variant: Variant,
    pub fitness: MeasureKind,
    pub failed: usize,
    pub mean_h1: f64,
    pub median_h1: f64,
    pub mean_h2: f64,
    pub median_h2: f64,
    /// Normalized final `H1` per successful run, in instance order.
    pub h1_values: Vec<f64>,
    pub h2_values: Vec<f64>,
    pub total_unsat: u64,
    pub wall: Duration,
}

impl ResultRow {
    pub fn mean(&self, kind: MeasureKind) -> f64 {
        match kind {
            MeasureKind::H1 => self.mean_h1,
            MeasureKind::H2 => self.mean_h2,
        }
    }

    pub fn values(&self, kind: MeasureKind) -> &[f64] {
        match kind {
            MeasureKind::H1 => &self.h1_values,
            MeasureKind::H2 => &self.h2_values,
        }
    }
}

/// One variant's standing among all variants run at the same `m` and fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct VerdictRow {
    pub m: usize,
    pub fitness: MeasureKind,
    pub variant: Variant,
    /// Median of the compared normalized entropy.
    pub median: f64,
    /// Test across all variants of the cell; `None` when some group has
    /// fewer than two runs.
    pub omnibus: Option<KruskalWallis>,
    pub comparisons: Vec<(Variant, Comparison)>,
}

impl VerdictRow {
    /// Comparisons written as `<number><symbol>`, variants numbered 1-4 in
    /// the order basic, bitflip, edo_mutation, edo_crossover. Example:
    /// `1+ 2+ 4*`.
    pub fn label(&self) -> String {
        self.comparisons
            .iter()
            .map(|(v, c)| format!("{}{}", variant_number(*v), c))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub fn variant_number(v: Variant) -> usize {
    Variant::ALL.iter().position(|x| *x == v).expect("listed") + 1
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub runs: Vec<RunRecord>,
    pub verdicts: Vec<VerdictRow>,
    /// Present when trajectories were written.
    pub plots: Option<PlotData>,
}

impl ExperimentOutput {
    pub fn row(&self, m: usize, variant: Variant, fitness: MeasureKind) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.m == m && r.variant == variant && r.fitness == fitness)
    }
}

fn instance_config(spec: &ExperimentSpec, m: usize, index: usize) -> GenConfig {
    GenConfig {
        m,
        seed: instance_seed(spec.seed, m, index),
        ..spec.gen.clone()
    }
}

/// Loads the instance from `instance_dir` when present, else generates it
/// (and saves it under `out_dir/instances`).
fn load_or_generate(spec: &ExperimentSpec, m: usize, index: usize) -> Result<Formula> {
    let cfg = instance_config(spec, m, index);
    if let Some(dir) = &spec.instance_dir {
        let path = dir.join(cfg.file_name());
        if path.exists() {
            return read_dimacs_file(&path);
        }
    }
    let g = generate(&cfg)?;
    if let Some(out) = &spec.out_dir {
        let text = write_dimacs_with_comments(&g.formula, &[cfg.comment()]);
        write_file(&out.join("instances").join(cfg.file_name()), &text)?;
    }
    Ok(g.formula)
}

struct Task {
    m: usize,
    instance: usize,
    variant: Variant,
    fitness: MeasureKind,
}

/// Runs one task. `Err` is reserved for I/O failures, which abort the whole
/// experiment; algorithm failures end up in the record.
fn run_task(
    spec: &ExperimentSpec,
    task: &Task,
    formula: &std::result::Result<Formula, String>,
) -> Result<(RunRecord, Option<PathBuf>)> {
    let seed = run_seed(spec.seed, task.m, task.instance, task.variant);
    let l = spec.l_for(task.m);
    let mut record = RunRecord {
        m: task.m,
        instance: task.instance,
        variant: task.variant,
        fitness: task.fitness,
        seed,
        l,
        outcome: Err(String::new()),
    };
    let formula = match formula {
        Ok(f) => f,
        Err(e) => {
            record.outcome = Err(format!("instance: {e}"));
            return Ok((record, None));
        }
    };

    let mut cfg = spec.run.clone();
    cfg.variant = task.variant;
    cfg.measure = task.fitness;
    cfg.seed = seed;
    cfg.l = l;
    let mut f = formula.clone();
    let start = Instant::now();
    let result = algorithms::run(&mut f, &cfg);
    let wall = start.elapsed();

    let r = match result {
        Ok(r) => r,
        Err(e) => {
            record.outcome = Err(e.to_string());
            return Ok((record, None));
        }
    };
    let mut traj_file = None;
    if let (Some(out), true) = (&spec.out_dir, spec.trajectories) {
        let meta = TrajectoryMeta {
            m: task.m,
            instance: task.instance,
            variant: task.variant,
            fitness: task.fitness,
            seed,
        };
        let h1 = Measure::h1(f.num_vars());
        let h2 = Measure::for_formula(MeasureKind::H2, &f);
        let path = out.join("traj").join(format!("{}.csv", meta.file_stem()));
        write_file(&path, &trajectory_csv(&meta, &r.trajectory, &h1, &h2))?;
        traj_file = Some(path);
    }
    log::debug!(
        "m={} instance={} {} {}: H1={:.4} unsat={}",
        task.m,
        task.instance,
        task.variant,
        task.fitness,
        r.h1_normalized,
        r.trajectory.final_unsat()
    );
    record.outcome = Ok(RunSummary {
        h1: r.h1,
        h2: r.h2,
        h1_norm: clamp01(r.h1_normalized),
        h2_norm: clamp01(r.h2_normalized),
        unsat_count: r.trajectory.final_unsat(),
        solver_calls: r.solver_calls,
        wall,
    });
    Ok((record, traj_file))
}

/// Builds the aggregate rows, one per (m, variant, fitness) in spec order.
/// Failed runs are excluded with a warning; a cell where more than half the
/// runs failed is an error.
pub fn aggregate(
    runs: &[RunRecord],
    ms: &[usize],
    variants: &[Variant],
    measures: &[MeasureKind],
) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for &m in ms {
        for &variant in variants {
            for &fitness in measures {
                let cell: Vec<&RunRecord> = runs
                    .iter()
                    .filter(|r| r.m == m && r.variant == variant && r.fitness == fitness)
                    .collect();
                let ok: Vec<&RunSummary> = cell
                    .iter()
                    .filter_map(|r| r.outcome.as_ref().ok())
                    .collect();
                let failed = cell.len() - ok.len();
                if failed > 0 {
                    for r in cell.iter().filter(|r| r.outcome.is_err()) {
                        log::warn!(
                            "m={m} instance={} {variant} {fitness} failed: {}",
                            r.instance,
                            r.outcome.as_ref().unwrap_err()
                        );
                    }
                    if 2 * failed > cell.len() {
                        return Err(Error::Experiment(format!(
                            "{failed} of {} runs failed for m={m} {variant} {fitness}",
                            cell.len()
                        )));
                    }
                }
                let h1_values: Vec<f64> = ok.iter().map(|o| o.h1_norm).collect();
                let h2_values: Vec<f64> = ok.iter().map(|o| o.h2_norm).collect();
                rows.push(ResultRow {
                    m,
                    variant,
                    fitness,
                    failed,
                    mean_h1: mean(&h1_values),
                    median_h1: median(&h1_values),
                    mean_h2: mean(&h2_values),
                    median_h2: median(&h2_values),
                    h1_values,
                    h2_values,
                    total_unsat: ok.iter().map(|o| o.unsat_count).sum(),
                    wall: ok.iter().map(|o| o.wall).sum(),
                });
            }
        }
    }
    Ok(rows)
}

/// Kruskal-Wallis verdicts for every (m, fitness) combination present in
/// `runs`, compared on normalized `on` (default: the fitness measure itself).
/// Variants appear in the order given.
pub fn verdicts(
    runs: &[RunRecord],
    variants: &[Variant],
    on: Option<MeasureKind>,
) -> Result<Vec<VerdictRow>> {
    let mut cells: BTreeMap<(usize, MeasureKind), Vec<Vec<f64>>> = BTreeMap::new();
    for r in runs {
        let Some(vi) = variants.iter().position(|v| *v == r.variant) else {
            continue;
        };
        if let Ok(o) = &r.outcome {
            let groups = cells
                .entry((r.m, r.fitness))
                .or_insert_with(|| vec![Vec::new(); variants.len()]);
            groups[vi].push(o.normalized(on.unwrap_or(r.fitness)));
        }
    }

    let mut out = Vec::new();
    for ((m, fitness), groups) in cells {
        let refs: Vec<&[f64]> = groups.iter().map(Vec::as_slice).collect();
        let testable = refs.len() >= 2 && refs.iter().all(|g| g.len() >= 2);
        let omnibus = if testable {
            Some(kruskal_wallis(&refs)?)
        } else {
            None
        };
        let pairs = if testable {
            pairwise_bonferroni(&refs, ALPHA)?
        } else {
            vec![Vec::new(); refs.len()]
        };
        for (i, cmp) in pairs.into_iter().enumerate() {
            out.push(VerdictRow {
                m,
                fitness,
                variant: variants[i],
                median: median(&groups[i]),
                omnibus,
                comparisons: cmp.into_iter().map(|(j, c)| (variants[j], c)).collect(),
            });
        }
    }
    Ok(out)
}

/// Runs every (m, instance, variant, fitness) combination of `spec`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.threads)
        .build()
        .map_err(|e| Error::Experiment(format!("thread pool: {e}")))?;
    let ms = spec.m_values();
    if let Some(out) = &spec.out_dir {
        write_file(&out.join("spec.conf"), &spec.to_config())?;
    }

    let slots: Vec<(usize, usize)> = ms
        .iter()
        .flat_map(|&m| (0..spec.instances).map(move |i| (m, i)))
        .collect();
    log::info!("preparing {} instances", slots.len());
    let formulas: Vec<std::result::Result<Formula, String>> = pool.install(|| {
        slots
            .par_iter()
            .map(|&(m, i)| match load_or_generate(spec, m, i) {
                Err(e @ Error::Io { .. }) => Err(e),
                r => Ok(r.map_err(|e| e.to_string())),
            })
            .collect::<Result<_>>()
    })?;

    let tasks: Vec<(usize, Task)> = slots
        .iter()
        .enumerate()
        .flat_map(|(slot, &(m, instance))| {
            spec.variants.iter().flat_map(move |&variant| {
                spec.measures.iter().map(move |&fitness| {
                    (
                        slot,
                        Task {
                            m,
                            instance,
                            variant,
                            fitness,
                        },
                    )
                })
            })
        })
        .collect();
    log::info!("running {} tasks", tasks.len());
    let results: Vec<(RunRecord, Option<PathBuf>)> = pool.install(|| {
        tasks
            .par_iter()
            .map(|(slot, task)| run_task(spec, task, &formulas[*slot]))
            .collect::<Result<_>>()
    })?;
    let (runs, traj_files): (Vec<RunRecord>, Vec<Option<PathBuf>>) = results.into_iter().unzip();

    let rows = aggregate(&runs, &ms, &spec.variants, &spec.measures)?;
    let verdicts = verdicts(&runs, &spec.variants, None)?;
    let mut output = ExperimentOutput {
        rows,
        runs,
        verdicts,
        plots: None,
    };

    if let Some(out) = &spec.out_dir {
        write_outputs(out, &output)?;
        if spec.trajectories {
            let files: Vec<PathBuf> = traj_files.into_iter().flatten().collect();
            output.plots = Some(emit_plotdata(&files, &out.join("plot"))?);
        }
    }
    Ok(output)
}

fn write_outputs(out: &Path, o: &ExperimentOutput) -> Result<()> {
    write_file(&out.join("runs.csv"), &runs_csv(&o.runs))?;
    write_file(&out.join("aggregate.csv"), &aggregate_csv(&o.rows))?;
    write_file(&out.join("stats.csv"), &stats_csv(&o.verdicts))?;
    write_file(&out.join("timings.csv"), &timings_csv(&o.runs))
}

/// Text table with one line per `m`: mean normalized `H1`, `H2` and the
/// verdict label for each variant.
pub fn render_table(o: &ExperimentOutput, fitness: MeasureKind) -> String {
    let mut variants: Vec<Variant> = Vec::new();
    let mut ms: Vec<usize> = Vec::new();
    for r in o.rows.iter().filter(|r| r.fitness == fitness) {
        if !variants.contains(&r.variant) {
            variants.push(r.variant);
        }
        if !ms.contains(&r.m) {
            ms.push(r.m);
        }
    }
    let mut s = format!("fitness {fitness}\n{:>6}", "m");
    for v in &variants {
        s += &format!(" | {:^28}", format!("({}) {v}", variant_number(*v)));
    }
    s += "\n";
    s += &format!("{:>6}", "");
    for _ in &variants {
        s += &format!(" | {:>6} {:>6} {:<14}", "H1", "H2", "stat");
    }
    s += "\n";
    for m in ms {
        s += &format!("{m:>6}");
        for &v in &variants {
            let row = o.row(m, v, fitness).expect("row exists");
            let label = o
                .verdicts
                .iter()
                .find(|x| x.m == m && x.variant == v && x.fitness == fitness)
                .map(VerdictRow::label)
                .unwrap_or_default();
            s += &format!(" | {:>6.3} {:>6.3} {label:<14}", row.mean_h1, row.mean_h2);
        }
        s += "\n";
    }
    s
}
