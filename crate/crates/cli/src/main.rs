//! `satdiv`: generate instances, solve them, compute diverse model sets and
//! run batch experiments.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error
//! (unreadable or malformed input), 3 experiment or solver failure.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::LevelFilter;

use satdiv::cnf::{read_dimacs_file, write_dimacs_with_comments};
use satdiv::generator::generate;
use satdiv::harness::{
    self, kruskal_wallis, median, pairwise_bonferroni, parse_group_values, parse_runs_csv,
    render_table, run_experiment, trajectory_csv, variant_number, ExperimentSpec, TrajectoryMeta,
    ALPHA,
};
use satdiv::solver::solve;
use satdiv::{
    Distribution, Error, GenConfig, Measure, MeasureKind, RunConfig, SolveResult, SolverConfig,
    SolverEngine, Variant,
};

#[derive(Parser)]
#[command(
    name = "satdiv",
    version,
    about = "Maximally diverse sets of SAT assignments"
)]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate satisfiable random k-CNF instances as DIMACS files.
    Generate(GenerateArgs),
    /// Run one algorithm on one instance.
    Run(RunArgs),
    /// Run a batch experiment described by a config file.
    Experiment(ExperimentArgs),
    /// Kruskal-Wallis report for a runs.csv or a `group,value` CSV.
    Stats(StatsArgs),
    /// Plain satisfiability check.
    Solve(SolveArgs),
}

#[derive(Args)]
struct SolverArg {
    /// External solver command, run as `<cmd> <file.cnf>`. Default: built-in CDCL.
    #[arg(long)]
    solver: Option<PathBuf>,
}

impl SolverArg {
    fn config(&self) -> SolverConfig {
        match &self.solver {
            Some(p) => SolverConfig::external(p),
            None => SolverConfig::default(),
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(short, long)]
    n: usize,
    #[arg(short, long)]
    m: usize,
    #[arg(short, long, default_value_t = 3)]
    k: usize,
    /// `uniform`, `powerlaw` or `powerlaw:<beta>`.
    #[arg(long, default_value = "powerlaw")]
    dist: Distribution,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of instances; instance i uses seed + i.
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 1000)]
    max_rejects: usize,
    #[arg(short, long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// DIMACS instance.
    instance: PathBuf,
    #[arg(long, default_value = "edo_mutation")]
    variant: Variant,
    /// Fitness measure, `h1` or `h2`.
    #[arg(long, default_value = "h1")]
    measure: MeasureKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    mu: usize,
    #[arg(long, default_value_t = 2000)]
    iterations: usize,
    /// Initial fix-set size (EDO variants).
    #[arg(short, long, default_value_t = 10)]
    l: usize,
    /// Trajectory CSV path. Default: `<instance>.<variant>.<measure>.seed<seed>.csv`.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Also print the final population, one `v` line per assignment.
    #[arg(long)]
    models: bool,
    #[command(flatten)]
    solver: SolverArg,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Config file of `key = value` lines.
    spec: PathBuf,
    /// Overrides `out` from the config.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Overrides `threads` from the config.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct StatsArgs {
    /// runs.csv written by `experiment`, or a CSV of `group,value` lines.
    input: PathBuf,
    /// For runs.csv: compare on this measure instead of each run's fitness measure.
    #[arg(long)]
    measure: Option<MeasureKind>,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[command(flatten)]
    solver: SolverArg,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 1,
        Error::Parse { .. }
        | Error::InvalidClause(_)
        | Error::Io { .. }
        | Error::TooManyVariables { .. }
        | Error::EmptyScopeStack
        | Error::Unsatisfiable
        | Error::Generation { .. } => 2,
        Error::Experiment(_) | Error::InitFailure { .. } | Error::Solver(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();

    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Run(a) => cmd_run(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Solve(a) => cmd_solve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn write(path: &Path, text: &str) -> satdiv::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn cmd_generate(a: GenerateArgs) -> satdiv::Result<()> {
    let mut template = GenConfig::new(a.n, a.m, a.k, a.dist);
    template.max_rejects = a.max_rejects;
    template.validate()?;
    for i in 0..a.count {
        let cfg = template.clone().with_seed(a.seed.wrapping_add(i as u64));
        let g = generate(&cfg)?;
        let path = a.out.join(cfg.file_name());
        write(
            &path,
            &write_dimacs_with_comments(&g.formula, &[cfg.comment()]),
        )?;
        log::info!("{} ({} rejected draws)", path.display(), g.rejects);
        println!("{}", path.display());
    }
    Ok(())
}

fn cmd_run(a: RunArgs) -> satdiv::Result<()> {
    let mut f = read_dimacs_file(&a.instance)?;
    let cfg = RunConfig {
        mu: a.mu,
        iterations: a.iterations,
        l: a.l,
        measure: a.measure,
        variant: a.variant,
        seed: a.seed,
        solver: a.solver.config(),
    };
    let r = satdiv::run(&mut f, &cfg)?;

    let out = a.out.unwrap_or_else(|| {
        let stem = a.instance.file_stem().unwrap_or_default().to_string_lossy();
        PathBuf::from(format!(
            "{stem}.{}.{}.seed{}.csv",
            a.variant, a.measure, a.seed
        ))
    });
    let meta = TrajectoryMeta {
        m: f.num_base_clauses(),
        instance: 0,
        variant: a.variant,
        fitness: a.measure,
        seed: a.seed,
    };
    let h1 = Measure::h1(f.num_vars());
    let h2 = Measure::for_formula(MeasureKind::H2, &f);
    write(&out, &trajectory_csv(&meta, &r.trajectory, &h1, &h2))?;

    let mut stdout = std::io::stdout().lock();
    if a.models {
        for x in r.population.members() {
            let _ = writeln!(stdout, "v {}", x.to_dimacs());
        }
    }
    let _ = writeln!(
        stdout,
        "variant={} measure={} seed={} size={} h1={:.6} h1_norm={:.6} h2={:.6} h2_norm={:.6} unsat={} solver_calls={} trajectory={}",
        a.variant,
        a.measure,
        a.seed,
        r.population.len(),
        r.h1,
        r.h1_normalized,
        r.h2,
        r.h2_normalized,
        r.trajectory.final_unsat(),
        r.solver_calls,
        out.display()
    );
    Ok(())
}

fn cmd_experiment(a: ExperimentArgs) -> satdiv::Result<()> {
    let text = fs::read_to_string(&a.spec).map_err(|e| io_err(&a.spec, e))?;
    let mut spec = ExperimentSpec::parse(&text)?;
    if let Some(out) = a.out {
        spec.out_dir = Some(out);
    }
    if let Some(t) = a.threads {
        spec.threads = t;
    }
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    if spec.out_dir.is_none() {
        return Err(Error::Config(
            "no output directory (set `out` or pass --out)".into(),
        ));
    }
    let output = run_experiment(&spec)?;
    for &m in &spec.measures {
        println!("{}", render_table(&output, m));
    }
    let failed = output.runs.iter().filter(|r| r.outcome.is_err()).count();
    if failed > 0 {
        println!(
            "{failed} of {} runs failed; see runs.csv",
            output.runs.len()
        );
    }
    println!(
        "results in {}",
        spec.out_dir.as_ref().expect("checked").display()
    );
    Ok(())
}

fn cmd_stats(a: StatsArgs) -> satdiv::Result<()> {
    let text = fs::read_to_string(&a.input).map_err(|e| io_err(&a.input, e))?;
    if text.starts_with("# satdiv runs") {
        let runs = parse_runs_csv(&text)?;
        let mut variants: Vec<Variant> = Vec::new();
        for r in &runs {
            if !variants.contains(&r.variant) {
                variants.push(r.variant);
            }
        }
        let verdicts = harness::verdicts(&runs, &variants, a.measure)?;
        let mut last = None;
        for v in &verdicts {
            if last != Some((v.m, v.fitness)) {
                last = Some((v.m, v.fitness));
                match v.omnibus {
                    Some(kw) => println!(
                        "m={} fitness={}: H={:.4} df={} p={:.4e}",
                        v.m, v.fitness, kw.h, kw.df, kw.p
                    ),
                    None => println!("m={} fitness={}: too few runs to test", v.m, v.fitness),
                }
            }
            println!(
                "  ({}) {:<14} median={:.4}  {}",
                variant_number(v.variant),
                v.variant.as_str(),
                v.median,
                v.label()
            );
        }
        return Ok(());
    }

    let groups = parse_group_values(&text)?;
    let refs: Vec<&[f64]> = groups.iter().map(|(_, v)| v.as_slice()).collect();
    let kw = kruskal_wallis(&refs)?;
    println!("H={:.6} df={} p={:.6e}", kw.h, kw.df, kw.p);
    let pairs = pairwise_bonferroni(&refs, ALPHA)?;
    for (i, (name, values)) in groups.iter().enumerate() {
        let label: Vec<String> = pairs[i]
            .iter()
            .map(|(j, c)| format!("{}{}", groups[*j].0, c))
            .collect();
        println!(
            "{name}: n={} median={:.6} {}",
            values.len(),
            median(values),
            label.join(" ")
        );
    }
    Ok(())
}

fn cmd_solve(a: SolveArgs) -> satdiv::Result<()> {
    let f = read_dimacs_file(&a.instance)?;
    let cfg = a.solver.config();
    if let SolverEngine::External(p) = &cfg.engine {
        log::info!("solving with {}", p.display());
    }
    match solve(&f, &cfg)? {
        SolveResult::Sat(x) => {
            println!("s SATISFIABLE");
            println!("v {}", x.to_dimacs());
        }
        SolveResult::Unsat => println!("s UNSATISFIABLE"),
    }
    Ok(())
}
