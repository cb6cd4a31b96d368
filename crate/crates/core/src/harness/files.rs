//! CSV layouts written and read by the harness.
//!
//! Every file starts with a `# satdiv <kind> v<N>` comment naming its schema.
//! Floats use Rust's shortest round-trip formatting, so reading a value back
//! yields the identical `f64`. None of these files except `timings.csv`
//! contains wall-clock data, which keeps them byte-for-byte reproducible.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use crate::algorithms::{Trajectory, Variant};
use crate::diversity::{Measure, MeasureKind};
use crate::error::{Error, Result};

use super::experiment::{ResultRow, RunRecord, RunSummary, VerdictRow};

pub const TRAJECTORY_SCHEMA: &str = "# satdiv trajectory v1";
pub const RUNS_SCHEMA: &str = "# satdiv runs v1";
pub const AGGREGATE_SCHEMA: &str = "# satdiv aggregate v1";
pub const STATS_SCHEMA: &str = "# satdiv stats v1";
pub const TIMINGS_SCHEMA: &str = "# satdiv timings v1";
pub const PLOT_SCHEMA: &str = "# satdiv plot v1";

const RUNS_HEADER: &str =
    "m,instance,variant,fitness,seed,l,status,h1,h2,h1_norm,h2_norm,unsat_count,solver_calls,error";

/// Identifies the run a trajectory file belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectoryMeta {
    pub m: usize,
    pub instance: usize,
    pub variant: Variant,
    pub fitness: MeasureKind,
    pub seed: u64,
}

impl TrajectoryMeta {
    pub fn file_stem(&self) -> String {
        format!(
            "m{}_i{:03}_{}_{}",
            self.m, self.instance, self.variant, self.fitness
        )
    }
}

/// One parsed trajectory line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub iteration: usize,
    pub size: usize,
    pub h1: f64,
    pub h2: f64,
    pub h1_norm: f64,
    pub h2_norm: f64,
    pub unsat_count: u64,
    pub accepted: bool,
}

impl TrajectoryPoint {
    pub fn normalized(&self, kind: MeasureKind) -> f64 {
        match kind {
            MeasureKind::H1 => self.h1_norm,
            MeasureKind::H2 => self.h2_norm,
        }
    }
}

pub(crate) fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

pub fn trajectory_csv(meta: &TrajectoryMeta, t: &Trajectory, h1: &Measure, h2: &Measure) -> String {
    let mut s = format!(
        "{TRAJECTORY_SCHEMA} m={} instance={} variant={} fitness={} seed={}\n",
        meta.m, meta.instance, meta.variant, meta.fitness, meta.seed
    );
    s.push_str("iteration,size,h1,h2,h1_norm,h2_norm,unsat_count,accepted\n");
    for r in &t.records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.iteration,
            r.size,
            r.h1,
            r.h2,
            clamp01(h1.normalized(r.h1)),
            clamp01(h2.normalized(r.h2)),
            r.unsat_count,
            u8::from(r.accepted)
        );
    }
    s
}

fn schema_line<'a>(text: &'a str, schema: &str) -> Result<&'a str> {
    let first = text.lines().next().unwrap_or("");
    first
        .strip_prefix(schema)
        .ok_or_else(|| Error::parse(1, format!("expected `{schema}` header")))
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, name: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::parse(line, format!("missing column `{name}`")))?;
    tok.trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("bad `{name}` value `{tok}`")))
}

pub fn parse_trajectory_csv(text: &str) -> Result<(TrajectoryMeta, Vec<TrajectoryPoint>)> {
    let rest = schema_line(text, TRAJECTORY_SCHEMA)?;
    let mut kv = std::collections::HashMap::new();
    for tok in rest.split_whitespace() {
        if let Some((k, v)) = tok.split_once('=') {
            kv.insert(k, v);
        }
    }
    let meta = TrajectoryMeta {
        m: field(kv.get("m").copied(), 1, "m")?,
        instance: field(kv.get("instance").copied(), 1, "instance")?,
        variant: field(kv.get("variant").copied(), 1, "variant")?,
        fitness: field(kv.get("fitness").copied(), 1, "fitness")?,
        seed: field(kv.get("seed").copied(), 1, "seed")?,
    };
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate().skip(2) {
        if line.trim().is_empty() {
            continue;
        }
        let n = i + 1;
        let mut t = line.split(',');
        points.push(TrajectoryPoint {
            iteration: field(t.next(), n, "iteration")?,
            size: field(t.next(), n, "size")?,
            h1: field(t.next(), n, "h1")?,
            h2: field(t.next(), n, "h2")?,
            h1_norm: field(t.next(), n, "h1_norm")?,
            h2_norm: field(t.next(), n, "h2_norm")?,
            unsat_count: field(t.next(), n, "unsat_count")?,
            accepted: field::<u8>(t.next(), n, "accepted")? != 0,
        });
    }
    Ok((meta, points))
}

fn sanitize(msg: &str) -> String {
    msg.replace([',', '\n', '\r'], " ")
}

pub fn runs_csv(runs: &[RunRecord]) -> String {
    let mut s = format!("{RUNS_SCHEMA}\n{RUNS_HEADER}\n");
    for r in runs {
        let _ = write!(
            s,
            "{},{},{},{},{},{},",
            r.m, r.instance, r.variant, r.fitness, r.seed, r.l
        );
        let _ = match &r.outcome {
            Ok(o) => writeln!(
                s,
                "ok,{},{},{},{},{},{},",
                o.h1, o.h2, o.h1_norm, o.h2_norm, o.unsat_count, o.solver_calls
            ),
            Err(e) => writeln!(s, "failed,,,,,,,{}", sanitize(e)),
        };
    }
    s
}

pub fn parse_runs_csv(text: &str) -> Result<Vec<RunRecord>> {
    schema_line(text, RUNS_SCHEMA)?;
    let header = text.lines().nth(1).unwrap_or("");
    if header != RUNS_HEADER {
        return Err(Error::parse(2, "unexpected runs header"));
    }
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(2) {
        if line.trim().is_empty() {
            continue;
        }
        let n = i + 1;
        let mut t = line.splitn(14, ',');
        let m = field(t.next(), n, "m")?;
        let instance = field(t.next(), n, "instance")?;
        let variant = field(t.next(), n, "variant")?;
        let fitness = field(t.next(), n, "fitness")?;
        let seed = field(t.next(), n, "seed")?;
        let l = field(t.next(), n, "l")?;
        let status: String = field(t.next(), n, "status")?;
        let outcome = match status.as_str() {
            "ok" => Ok(RunSummary {
                h1: field(t.next(), n, "h1")?,
                h2: field(t.next(), n, "h2")?,
                h1_norm: field(t.next(), n, "h1_norm")?,
                h2_norm: field(t.next(), n, "h2_norm")?,
                unsat_count: field(t.next(), n, "unsat_count")?,
                solver_calls: field(t.next(), n, "solver_calls")?,
                wall: Duration::ZERO,
            }),
            "failed" => Err(t.nth(6).unwrap_or("").to_string()),
            other => return Err(Error::parse(n, format!("unknown status `{other}`"))),
        };
        out.push(RunRecord {
            m,
            instance,
            variant,
            fitness,
            seed,
            l,
            outcome,
        });
    }
    Ok(out)
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

pub fn aggregate_csv(rows: &[ResultRow]) -> String {
    let mut s = format!(
        "{AGGREGATE_SCHEMA}\nm,variant,fitness,runs,failed,mean_h1,median_h1,mean_h2,median_h2,total_unsat,h1_values,h2_values\n"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.m,
            r.variant,
            r.fitness,
            r.h1_values.len(),
            r.failed,
            r.mean_h1,
            r.median_h1,
            r.mean_h2,
            r.median_h2,
            r.total_unsat,
            join(&r.h1_values),
            join(&r.h2_values)
        );
    }
    s
}

pub fn stats_csv(verdicts: &[VerdictRow]) -> String {
    let mut s = format!("{STATS_SCHEMA}\nm,fitness,variant,median,kw_h,kw_p,verdict\n");
    for v in verdicts {
        let (h, p) = match v.omnibus {
            Some(kw) => (kw.h.to_string(), kw.p.to_string()),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{h},{p},{}",
            v.m,
            v.fitness,
            v.variant,
            v.median,
            v.label()
        );
    }
    s
}

pub fn timings_csv(runs: &[RunRecord]) -> String {
    let mut s = format!("{TIMINGS_SCHEMA}\nm,instance,variant,fitness,wall_ms\n");
    for r in runs {
        let ms = r
            .outcome
            .as_ref()
            .map_or(0.0, |o| o.wall.as_secs_f64() * 1e3);
        let _ = writeln!(
            s,
            "{},{},{},{},{ms:.3}",
            r.m, r.instance, r.variant, r.fitness
        );
    }
    s
}

/// Reads a plain `group,value` CSV (header optional) into groups in order of
/// first appearance.
pub fn parse_group_values(text: &str) -> Result<Vec<(String, Vec<f64>)>> {
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    let mut first = true;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (g, v) = line
            .split_once(',')
            .ok_or_else(|| Error::parse(i + 1, "expected `group,value`"))?;
        let is_first = std::mem::replace(&mut first, false);
        let Ok(v) = v.trim().parse::<f64>() else {
            if is_first {
                continue;
            }
            return Err(Error::parse(i + 1, format!("bad value `{}`", v.trim())));
        };
        let g = g.trim();
        match groups.iter_mut().find(|(name, _)| name == g) {
            Some((_, vs)) => vs.push(v),
            None => groups.push((g.to_string(), vec![v])),
        }
    }
    Ok(groups)
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
