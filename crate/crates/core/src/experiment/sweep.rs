//! Parameter sweeps: grid expansion, parallel replication, raw and summary
//! CSV output.

use std::fs::{self, File};
use std::io::{Read, Write};
use std::path::Path;

use log::{debug, info};
use rayon::prelude::*;

use super::stats::{rank_sum_less, summarize, RankSumTest, Summary};
use crate::engine::{run, GaConfig, Mechanism, Trajectory};
use crate::error::{invalid, io_error, Error, Result};
use crate::variation::derive_seed;

pub const DEFAULT_REPLICATIONS: u64 = 100;

/// Per-run evaluation budget of sweeps; runs hitting it count as timeouts.
pub const DEFAULT_SWEEP_BUDGET: u64 = 100_000_000;

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "JUMPGA_WORKERS";

pub const RAW_HEADER: [&str; 14] = [
    "grid_index",
    "replication",
    "n",
    "k",
    "mu",
    "p_c",
    "chi",
    "mechanism",
    "max_evaluations",
    "seed",
    "evaluations",
    "success",
    "plateau_arrival",
    "receiver_success",
];

pub const SUMMARY_HEADER: [&str; 17] = [
    "grid_index",
    "n",
    "k",
    "mu",
    "p_c",
    "chi",
    "mechanism",
    "replications",
    "completed",
    "timeout_count",
    "mean",
    "median",
    "std",
    "min",
    "max",
    "q1",
    "q3",
];

/// Population size round(4e ln n), at least 2.
pub fn derive_mu(n: usize) -> usize {
    let mu = (4.0 * std::f64::consts::E * (n.max(1) as f64).ln()).round() as usize;
    mu.max(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuRule {
    Derived,
    Fixed(usize),
}

impl MuRule {
    pub fn resolve(&self, n: usize) -> usize {
        match *self {
            MuRule::Derived => derive_mu(n),
            MuRule::Fixed(mu) => mu,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    N(Vec<usize>),
    K(Vec<usize>),
    Chi(Vec<f64>),
    Pc(Vec<f64>),
    Mechanism(Vec<String>),
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::N(_) => "n",
            SweepAxis::K(_) => "k",
            SweepAxis::Chi(_) => "chi",
            SweepAxis::Pc(_) => "p_c",
            SweepAxis::Mechanism(_) => "mechanism",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SweepAxis::N(v) | SweepAxis::K(v) => v.len(),
            SweepAxis::Chi(v) | SweepAxis::Pc(v) => v.len(),
            SweepAxis::Mechanism(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A base configuration plus sweep axes; the grid is the cartesian product
/// of the axes, first axis outermost.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub n: usize,
    pub k: usize,
    pub mu: MuRule,
    pub p_c: f64,
    pub chi: f64,
    pub mechanism: String,
    pub sigma: Option<f64>,
    pub alpha: Option<f64>,
    pub receiver_mutation: bool,
    pub max_evaluations: u64,
    pub replications: u64,
    pub master_seed: u64,
    pub axes: Vec<SweepAxis>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            n: 100,
            k: 3,
            mu: MuRule::Derived,
            p_c: 1.0,
            chi: 1.0,
            mechanism: "uniform".into(),
            sigma: None,
            alpha: None,
            receiver_mutation: true,
            max_evaluations: DEFAULT_SWEEP_BUDGET,
            replications: DEFAULT_REPLICATIONS,
            master_seed: 0,
            axes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
struct Params {
    n: usize,
    k: usize,
    p_c: f64,
    chi: f64,
    mechanism: String,
}

impl SweepSpec {
    /// Per-grid-point configurations (seed 0, no trajectory).
    pub fn grid(&self) -> Result<Vec<GaConfig>> {
        if self.replications == 0 {
            return Err(invalid("replications must be >= 1"));
        }
        let mut seen = Vec::new();
        for axis in &self.axes {
            if axis.is_empty() {
                return Err(invalid(format!("sweep axis {} has no values", axis.name())));
            }
            if seen.contains(&axis.name()) {
                return Err(invalid(format!("sweep axis {} given twice", axis.name())));
            }
            seen.push(axis.name());
        }
        let mut params = vec![Params {
            n: self.n,
            k: self.k,
            p_c: self.p_c,
            chi: self.chi,
            mechanism: self.mechanism.clone(),
        }];
        for axis in &self.axes {
            let mut next = Vec::with_capacity(params.len() * axis.len());
            for p in &params {
                for i in 0..axis.len() {
                    let mut q = p.clone();
                    match axis {
                        SweepAxis::N(v) => q.n = v[i],
                        SweepAxis::K(v) => q.k = v[i],
                        SweepAxis::Chi(v) => q.chi = v[i],
                        SweepAxis::Pc(v) => q.p_c = v[i],
                        SweepAxis::Mechanism(v) => q.mechanism = v[i].clone(),
                    }
                    next.push(q);
                }
            }
            params = next;
        }
        // Later axes vary fastest.
        params
            .into_iter()
            .map(|p| {
                let mut mechanism = Mechanism::from_id(&p.mechanism, p.k, self.sigma, self.alpha)?;
                if let Mechanism::Island { receiver_mutation } = &mut mechanism {
                    *receiver_mutation = self.receiver_mutation;
                }
                let mut c = GaConfig::new(p.n, p.k, self.mu.resolve(p.n));
                c.p_c = p.p_c;
                c.chi = p.chi;
                c.mechanism = mechanism;
                c.max_evaluations = self.max_evaluations;
                c.trajectory = Trajectory::Off;
                c.validate()?;
                Ok(c)
            })
            .collect()
    }
}

/// Fig. 4 style comparison: every mechanism at fixed (n, k, p_c = 1, chi),
/// the island model with its own population size, and optionally the
/// uniform tie-break at a high mutation rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonSpec {
    pub n: usize,
    pub k: usize,
    pub mu: MuRule,
    pub chi: f64,
    pub mechanisms: Vec<String>,
    pub island_mu: usize,
    pub baseline_chi: Option<f64>,
    pub sigma: Option<f64>,
    pub alpha: Option<f64>,
    pub max_evaluations: u64,
    pub replications: u64,
    pub master_seed: u64,
}

impl ComparisonSpec {
    pub fn grid(&self) -> Result<Vec<GaConfig>> {
        if self.mechanisms.is_empty() {
            return Err(invalid("mechanism list is empty"));
        }
        if self.replications == 0 {
            return Err(invalid("replications must be >= 1"));
        }
        let make = |id: &str, chi: f64| -> Result<GaConfig> {
            let mechanism = Mechanism::from_id(id, self.k, self.sigma, self.alpha)?;
            let mu = match mechanism {
                Mechanism::Island { .. } => self.island_mu,
                Mechanism::TieBreak(_) => self.mu.resolve(self.n),
            };
            let mut c = GaConfig::new(self.n, self.k, mu);
            c.p_c = 1.0;
            c.chi = chi;
            c.mechanism = mechanism;
            c.max_evaluations = self.max_evaluations;
            c.trajectory = Trajectory::Off;
            c.validate()?;
            Ok(c)
        };
        let mut grid = self
            .mechanisms
            .iter()
            .map(|id| make(id, self.chi))
            .collect::<Result<Vec<_>>>()?;
        if let Some(chi) = self.baseline_chi {
            grid.push(make("uniform", chi)?);
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    pub grid_index: usize,
    pub replication: u64,
    pub n: usize,
    pub k: usize,
    pub mu: usize,
    pub p_c: f64,
    pub chi: f64,
    pub mechanism: String,
    pub max_evaluations: u64,
    pub seed: u64,
    pub evaluations: u64,
    pub success: bool,
    pub plateau_arrival: Option<u64>,
    pub receiver_success: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub grid_index: usize,
    pub n: usize,
    pub k: usize,
    pub mu: usize,
    pub p_c: f64,
    pub chi: f64,
    pub mechanism: String,
    pub replications: u64,
    pub completed: u64,
    pub timeout_count: u64,
    /// Over completed runs only; `None` if none completed.
    pub stats: Option<Summary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub grid: Vec<GaConfig>,
    pub raw: Vec<RawRow>,
    pub summary: Vec<SummaryRow>,
}

impl SweepOutput {
    /// Evaluation counts of one grid point, censored runs at their budget.
    pub fn evaluations(&self, grid_index: usize) -> Vec<f64> {
        self.raw
            .iter()
            .filter(|r| r.grid_index == grid_index)
            .map(|r| r.evaluations as f64)
            .collect()
    }

    /// One-sided rank-sum test that grid point `a` needs fewer evaluations
    /// than grid point `b`.
    pub fn rank_sum_less(&self, a: usize, b: usize) -> Option<RankSumTest> {
        rank_sum_less(&self.evaluations(a), &self.evaluations(b))
    }
}

/// Worker count from the environment, else the available parallelism.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs `replications` independent runs of every grid point. Run seeds are
/// `derive_seed(master_seed, grid_index, replication)`, so results do not
/// depend on scheduling; rows come back ordered by (grid index,
/// replication).
pub fn run_grid(grid: &[GaConfig], replications: u64, master_seed: u64) -> Result<Vec<RawRow>> {
    let tasks: Vec<(usize, u64)> = (0..grid.len())
        .flat_map(|g| (0..replications).map(move |r| (g, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?;
    info!("running {} runs over {} grid points", tasks.len(), grid.len());
    pool.install(|| {
        tasks
            .par_iter()
            .map(|&(g, r)| {
                let mut config = grid[g].clone();
                config.seed = derive_seed(master_seed, g as u64, r);
                let rec = run(&config)?;
                debug!("grid {g} rep {r}: {} evaluations", rec.evaluations);
                Ok(RawRow {
                    grid_index: g,
                    replication: r,
                    n: config.n,
                    k: config.k,
                    mu: config.mu,
                    p_c: config.p_c,
                    chi: config.chi,
                    mechanism: config.mechanism.id().to_string(),
                    max_evaluations: config.max_evaluations,
                    seed: config.seed,
                    evaluations: rec.evaluations,
                    success: rec.success(),
                    plateau_arrival: rec.plateau_arrival,
                    receiver_success: rec.receiver_success,
                })
            })
            .collect()
    })
}

/// One summary row per grid point, in grid order.
pub fn summarize_rows(grid: &[GaConfig], raw: &[RawRow]) -> Vec<SummaryRow> {
    grid.iter()
        .enumerate()
        .map(|(g, c)| {
            let rows: Vec<&RawRow> = raw.iter().filter(|r| r.grid_index == g).collect();
            let done: Vec<f64> = rows.iter().filter(|r| r.success).map(|r| r.evaluations as f64).collect();
            SummaryRow {
                grid_index: g,
                n: c.n,
                k: c.k,
                mu: c.mu,
                p_c: c.p_c,
                chi: c.chi,
                mechanism: c.mechanism.id().to_string(),
                replications: rows.len() as u64,
                completed: done.len() as u64,
                timeout_count: (rows.len() - done.len()) as u64,
                stats: summarize(&done),
            }
        })
        .collect()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn write_raw_csv<W: Write>(out: W, rows: &[RawRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RAW_HEADER)?;
    for r in rows {
        w.write_record([
            r.grid_index.to_string(),
            r.replication.to_string(),
            r.n.to_string(),
            r.k.to_string(),
            r.mu.to_string(),
            r.p_c.to_string(),
            r.chi.to_string(),
            r.mechanism.clone(),
            r.max_evaluations.to_string(),
            r.seed.to_string(),
            r.evaluations.to_string(),
            r.success.to_string(),
            opt(r.plateau_arrival),
            opt(r.receiver_success),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        let s = r.stats.as_ref();
        w.write_record([
            r.grid_index.to_string(),
            r.n.to_string(),
            r.k.to_string(),
            r.mu.to_string(),
            r.p_c.to_string(),
            r.chi.to_string(),
            r.mechanism.clone(),
            r.replications.to_string(),
            r.completed.to_string(),
            r.timeout_count.to_string(),
            opt(s.map(|s| s.mean)),
            opt(s.map(|s| s.median)),
            opt(s.and_then(|s| s.std)),
            opt(s.map(|s| s.min)),
            opt(s.map(|s| s.max)),
            opt(s.map(|s| s.q1)),
            opt(s.map(|s| s.q3)),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T> {
    let raw = rec.get(i).ok_or_else(|| Error::Parse(format!("missing column {}", RAW_HEADER[i])))?;
    raw.parse()
        .map_err(|_| Error::Parse(format!("bad {} value {raw:?}", RAW_HEADER[i])))
}

fn opt_field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<Option<T>> {
    match rec.get(i) {
        Some("") | None => Ok(None),
        Some(_) => field(rec, i).map(Some),
    }
}

/// Reads a raw CSV written by [`write_raw_csv`].
pub fn read_raw_csv<R: Read>(input: R) -> Result<Vec<RawRow>> {
    let mut rd = csv::Reader::from_reader(input);
    if rd.headers()?.iter().ne(RAW_HEADER) {
        return Err(Error::Parse("unexpected raw CSV header".into()));
    }
    rd.records()
        .map(|rec| {
            let rec = rec?;
            Ok(RawRow {
                grid_index: field(&rec, 0)?,
                replication: field(&rec, 1)?,
                n: field(&rec, 2)?,
                k: field(&rec, 3)?,
                mu: field(&rec, 4)?,
                p_c: field(&rec, 5)?,
                chi: field(&rec, 6)?,
                mechanism: field(&rec, 7)?,
                max_evaluations: field(&rec, 8)?,
                seed: field(&rec, 9)?,
                evaluations: field(&rec, 10)?,
                success: field(&rec, 11)?,
                plateau_arrival: opt_field(&rec, 12)?,
                receiver_success: opt_field(&rec, 13)?,
            })
        })
        .collect()
}

/// Creates the output directory and truncates both CSV files, so an
/// unwritable destination fails before any run starts.
fn open_outputs(dir: &Path) -> Result<(File, File)> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let raw = dir.join("raw.csv");
    let summary = dir.join("summary.csv");
    Ok((
        File::create(&raw).map_err(|e| io_error(&raw, e))?,
        File::create(&summary).map_err(|e| io_error(&summary, e))?,
    ))
}

fn execute(grid: Vec<GaConfig>, replications: u64, master_seed: u64, out_dir: Option<&Path>) -> Result<SweepOutput> {
    let files = out_dir.map(open_outputs).transpose()?;
    let raw = run_grid(&grid, replications, master_seed)?;
    let summary = summarize_rows(&grid, &raw);
    if let Some((raw_file, summary_file)) = files {
        write_raw_csv(std::io::BufWriter::new(raw_file), &raw)?;
        write_summary_csv(std::io::BufWriter::new(summary_file), &summary)?;
    }
    Ok(SweepOutput { grid, raw, summary })
}

/// Runs the sweep and, if `out_dir` is given, writes `raw.csv` and
/// `summary.csv` there.
pub fn run_sweep(spec: &SweepSpec, out_dir: Option<&Path>) -> Result<SweepOutput> {
    execute(spec.grid()?, spec.replications, spec.master_seed, out_dir)
}

pub fn run_mechanism_comparison(spec: &ComparisonSpec, out_dir: Option<&Path>) -> Result<SweepOutput> {
    execute(spec.grid()?, spec.replications, spec.master_seed, out_dir)
}
