//! Plot-ready trajectory CSVs.
//!
//! Each output has columns `iteration,normalized_H,normalized_unsat_count`,
//! both series min-max scaled to `[0, 1]` (a constant series becomes all
//! zeros). `normalized_H` is built from the fitness measure's normalized
//! entropy. Per-instance files are scaled on their own. Per-cell mean files
//! are scaled jointly across all `m` sharing a variant and fitness measure,
//! so curves for different clause counts stay comparable on one chart.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::algorithms::Variant;
use crate::diversity::MeasureKind;
use crate::error::Result;

use super::files::{parse_trajectory_csv, read_file, write_file, PLOT_SCHEMA};

/// Averaged trajectory of one (m, variant, fitness) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellPlot {
    pub m: usize,
    pub variant: Variant,
    pub fitness: MeasureKind,
    pub instances: usize,
    /// Mean normalized fitness entropy per iteration.
    pub mean_h: Vec<f64>,
    /// Mean unsat count per iteration.
    pub mean_unsat: Vec<f64>,
    /// `mean_h` after joint min-max scaling.
    pub plot_h: Vec<f64>,
    /// `mean_unsat` after joint min-max scaling.
    pub plot_unsat: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct PlotData {
    pub cells: Vec<CellPlot>,
    pub files: Vec<PathBuf>,
}

/// Scales `values` to `[0, 1]` with the given bounds; zero when `lo == hi`.
fn scale(values: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    if hi <= lo {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - lo) / (hi - lo)).collect()
}

fn bounds<'a>(series: impl IntoIterator<Item = &'a [f64]>) -> (f64, f64) {
    series
        .into_iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

/// Min-max normalization of one series.
pub fn min_max(values: &[f64]) -> Vec<f64> {
    let (lo, hi) = bounds([values]);
    scale(values, lo, hi)
}

/// Min-max normalization of several series with shared bounds.
pub fn min_max_joint(series: &[&[f64]]) -> Vec<Vec<f64>> {
    let (lo, hi) = bounds(series.iter().copied());
    series.iter().map(|s| scale(s, lo, hi)).collect()
}

pub fn plot_csv(h: &[f64], unsat: &[f64]) -> String {
    let mut s = format!("{PLOT_SCHEMA}\niteration,normalized_H,normalized_unsat_count\n");
    for (i, (h, u)) in h.iter().zip(unsat).enumerate() {
        let _ = writeln!(s, "{i},{h},{u}");
    }
    s
}

/// Element-wise mean of series with possibly different lengths. Shorter
/// series (enumeration that stopped early) are held at their last value.
fn padded_mean(series: &[Vec<f64>]) -> Vec<f64> {
    let len = series.iter().map(Vec::len).max().unwrap_or(0);
    (0..len)
        .map(|i| {
            let sum: f64 = series
                .iter()
                .map(|s| s.get(i).or(s.last()).copied().unwrap_or(0.0))
                .sum();
            sum / series.len() as f64
        })
        .collect()
}

/// Reads trajectory CSVs and writes per-instance plot files under
/// `out/instance/` and per-cell mean files `out/mean_<variant>_<fitness>_m<m>.csv`.
pub fn emit_plotdata(trajectory_files: &[PathBuf], out: &Path) -> Result<PlotData> {
    // (variant, fitness) -> m -> [(instance, h, unsat)]
    type Cell = Vec<(usize, Vec<f64>, Vec<f64>)>;
    let mut groups: BTreeMap<(Variant, MeasureKind), BTreeMap<usize, Cell>> = BTreeMap::new();
    let mut data = PlotData::default();

    for path in trajectory_files {
        let (meta, points) = parse_trajectory_csv(&read_file(path)?)?;
        let h: Vec<f64> = points.iter().map(|p| p.normalized(meta.fitness)).collect();
        let unsat: Vec<f64> = points.iter().map(|p| p.unsat_count as f64).collect();

        let file = out
            .join("instance")
            .join(format!("{}.csv", meta.file_stem()));
        write_file(&file, &plot_csv(&min_max(&h), &min_max(&unsat)))?;
        data.files.push(file);

        groups
            .entry((meta.variant, meta.fitness))
            .or_default()
            .entry(meta.m)
            .or_default()
            .push((meta.instance, h, unsat));
    }

    for ((variant, fitness), by_m) in groups {
        let mut cells: Vec<CellPlot> = by_m
            .into_iter()
            .map(|(m, mut runs)| {
                runs.sort_by_key(|r| r.0);
                let hs: Vec<Vec<f64>> = runs.iter().map(|r| r.1.clone()).collect();
                let us: Vec<Vec<f64>> = runs.iter().map(|r| r.2.clone()).collect();
                CellPlot {
                    m,
                    variant,
                    fitness,
                    instances: runs.len(),
                    mean_h: padded_mean(&hs),
                    mean_unsat: padded_mean(&us),
                    plot_h: Vec::new(),
                    plot_unsat: Vec::new(),
                }
            })
            .collect();
        let hb = bounds(cells.iter().map(|c| c.mean_h.as_slice()));
        let ub = bounds(cells.iter().map(|c| c.mean_unsat.as_slice()));
        for c in &mut cells {
            c.plot_h = scale(&c.mean_h, hb.0, hb.1);
            c.plot_unsat = scale(&c.mean_unsat, ub.0, ub.1);
            let file = out.join(format!("mean_{variant}_{fitness}_m{}.csv", c.m));
            write_file(&file, &plot_csv(&c.plot_h, &c.plot_unsat))?;
            data.files.push(file);
        }
        data.cells.extend(cells);
    }
    Ok(data)
}

/// Reads a plot CSV back as `(normalized_H, normalized_unsat_count)` columns.
pub fn parse_plot_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    use crate::error::Error;
    if !text.starts_with(PLOT_SCHEMA) {
        return Err(Error::parse(1, format!("expected `{PLOT_SCHEMA}` header")));
    }
    let mut h = Vec::new();
    let mut u = Vec::new();
    for (i, line) in text.lines().enumerate().skip(2) {
        let cols: Vec<&str> = line.split(',').collect();
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::parse(i + 1, format!("bad number `{s}`")))
        };
        if cols.len() != 3 {
            return Err(Error::parse(i + 1, "expected three columns"));
        }
        h.push(parse(cols[1])?);
        u.push(parse(cols[2])?);
    }
    Ok((h, u))
}
