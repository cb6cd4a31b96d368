//! Experiment description and its flat `key = value` config format.
//!
//! ```text
//! # power-law grid, reduced
//! dist = powerlaw:2.75
//! n = 100
//! k = 3
//! m_start = 210
//! m_end = 380
//! m_step = 85
//! instances = 5
//! variants = basic, bitflip, edo_mutation, edo_crossover
//! measures = h1, h2
//! seed = 42
//! out = results/powerlaw
//! ```
//!
//! Every key is optional. Unknown or repeated keys are errors.

use std::collections::HashSet;
use std::path::PathBuf;

use crate::algorithms::{l_schedule, RunConfig, Variant};
use crate::diversity::MeasureKind;
use crate::error::{Error, Result};
use crate::generator::{Distribution, GenConfig, DEFAULT_BETA};
use crate::solver::SolverEngine;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    /// Instance template. `m` and `seed` are replaced per instance.
    pub gen: GenConfig,
    pub m_start: usize,
    pub m_end: usize,
    pub m_step: usize,
    pub instances: usize,
    pub variants: Vec<Variant>,
    /// Each variant is run once per fitness measure listed here.
    pub measures: Vec<MeasureKind>,
    /// Run template. `variant`, `measure`, `seed` and `l` are replaced per run.
    pub run: RunConfig,
    pub l_max: usize,
    pub l_min: usize,
    pub seed: u64,
    /// Where CSVs go. `None` keeps everything in memory.
    pub out_dir: Option<PathBuf>,
    /// Load instances from here (by their generated file name) when present.
    pub instance_dir: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    /// Write per-run trajectory and plot CSVs.
    pub trajectories: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            gen: GenConfig::new(100, 210, 3, Distribution::PowerLaw { beta: DEFAULT_BETA }),
            m_start: 210,
            m_end: 210,
            m_step: 10,
            instances: 30,
            variants: Variant::ALL.to_vec(),
            measures: vec![MeasureKind::H1],
            run: RunConfig::new(Variant::Basic),
            l_max: 10,
            l_min: 4,
            seed: 0,
            out_dir: None,
            instance_dir: None,
            threads: 0,
            trajectories: true,
        }
    }
}

impl ExperimentSpec {
    pub fn m_values(&self) -> Vec<usize> {
        (self.m_start..=self.m_end)
            .step_by(self.m_step.max(1))
            .collect()
    }

    /// Initial fix-set size used at clause count `m`.
    pub fn l_for(&self, m: usize) -> usize {
        l_schedule(m, self.m_start, self.m_end, self.l_max, self.l_min)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.instances == 0 {
            return bad("instances must be at least 1".into());
        }
        if self.m_step == 0 {
            return bad("m_step must be at least 1".into());
        }
        if self.m_end < self.m_start {
            return bad(format!(
                "m_end={} is below m_start={}",
                self.m_end, self.m_start
            ));
        }
        if !(self.m_end - self.m_start).is_multiple_of(self.m_step) {
            return bad(format!(
                "m range {}..={} is not a whole number of steps of {}",
                self.m_start, self.m_end, self.m_step
            ));
        }
        if self.variants.is_empty() {
            return bad("no variants selected".into());
        }
        if self.measures.is_empty() {
            return bad("no fitness measures selected".into());
        }
        if has_duplicates(&self.variants) || has_duplicates(&self.measures) {
            return bad("variants and measures must not repeat".into());
        }
        if self.l_min == 0 || self.l_min > self.l_max {
            return bad(format!(
                "need 1 <= l_min={} <= l_max={}",
                self.l_min, self.l_max
            ));
        }
        self.gen.validate()?;
        for v in &self.variants {
            let mut cfg = self.run.clone();
            cfg.variant = *v;
            cfg.l = self.l_max;
            cfg.validate(self.gen.n)?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = ExperimentSpec::default();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::parse(line_no, format!("expected `key = value`, got `{line}`"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::parse(line_no, format!("`{key}` given twice")));
            }
            spec.set(key, value)
                .map_err(|e| Error::parse(line_no, e.to_string()))?;
        }
        Ok(spec)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "dist" => self.gen.dist = value.parse()?,
            "n" => self.gen.n = num(key, value)?,
            "k" => self.gen.k = num(key, value)?,
            "max_rejects" => self.gen.max_rejects = num(key, value)?,
            "m" => {
                self.m_start = num(key, value)?;
                self.m_end = self.m_start;
            }
            "m_start" => self.m_start = num(key, value)?,
            "m_end" => self.m_end = num(key, value)?,
            "m_step" => self.m_step = num(key, value)?,
            "instances" => self.instances = num(key, value)?,
            "variants" => self.variants = list(value)?,
            "measures" | "measure" => self.measures = list(value)?,
            "mu" => self.run.mu = num(key, value)?,
            "iterations" => self.run.iterations = num(key, value)?,
            "l" => {
                self.l_max = num(key, value)?;
                self.l_min = self.l_max;
            }
            "l_max" => self.l_max = num(key, value)?,
            "l_min" => self.l_min = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "solver" => {
                self.run.solver.engine = match value {
                    "builtin" => SolverEngine::Builtin,
                    path => SolverEngine::External(PathBuf::from(path)),
                }
            }
            "out" => self.out_dir = Some(PathBuf::from(value)),
            "instances_dir" => self.instance_dir = Some(PathBuf::from(value)),
            "threads" => self.threads = num(key, value)?,
            "trajectories" => {
                self.trajectories = value.parse().map_err(|_| {
                    Error::Config(format!(
                        "trajectories: expected true or false, got `{value}`"
                    ))
                })?
            }
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Renders the spec in the config format; [`ExperimentSpec::parse`] reads it back.
    pub fn to_config(&self) -> String {
        let join = |xs: Vec<String>| xs.join(", ");
        let mut lines = vec![
            format!("dist = {}", self.gen.dist),
            format!("n = {}", self.gen.n),
            format!("k = {}", self.gen.k),
            format!("max_rejects = {}", self.gen.max_rejects),
            format!("m_start = {}", self.m_start),
            format!("m_end = {}", self.m_end),
            format!("m_step = {}", self.m_step),
            format!("instances = {}", self.instances),
            format!(
                "variants = {}",
                join(self.variants.iter().map(|v| v.to_string()).collect())
            ),
            format!(
                "measures = {}",
                join(self.measures.iter().map(|m| m.to_string()).collect())
            ),
            format!("mu = {}", self.run.mu),
            format!("iterations = {}", self.run.iterations),
            format!("l_max = {}", self.l_max),
            format!("l_min = {}", self.l_min),
            format!("seed = {}", self.seed),
        ];
        if let SolverEngine::External(p) = &self.run.solver.engine {
            lines.push(format!("solver = {}", p.display()));
        }
        if let Some(p) = &self.out_dir {
            lines.push(format!("out = {}", p.display()));
        }
        if let Some(p) = &self.instance_dir {
            lines.push(format!("instances_dir = {}", p.display()));
        }
        lines.push(format!("threads = {}", self.threads));
        lines.push(format!("trajectories = {}", self.trajectories));
        lines.join("\n") + "\n"
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: `{value}` is not a non-negative integer")))
}

fn list<T: std::str::FromStr<Err = Error>>(value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

fn has_duplicates<T: PartialEq>(xs: &[T]) -> bool {
    xs.iter().enumerate().any(|(i, x)| xs[..i].contains(x))
}

/// SplitMix64 finaliser.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-sensitive hash of `parts`, stable across platforms and releases.
pub fn mix_seed(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x243F_6A88_85A3_08D3, |h, &p| splitmix64(h ^ splitmix64(p)))
}

/// Seed for generating instance `index` at clause count `m`.
pub fn instance_seed(master: u64, m: usize, index: usize) -> u64 {
    mix_seed(&[master, m as u64, index as u64])
}

/// Seed for running `variant` on that instance. The fitness measure is left
/// out so both measures see the same random stream.
pub fn run_seed(master: u64, m: usize, index: usize, variant: Variant) -> u64 {
    let code = Variant::ALL
        .iter()
        .position(|v| *v == variant)
        .expect("listed") as u64;
    mix_seed(&[master, m as u64, index as u64, code + 1])
}
