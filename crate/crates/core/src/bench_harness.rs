//! Replicated experiments and their reports.
//!
//! A [`RunSpec`] is run `replications` times with seeds `seed, seed+1, …`.
//! Per-replication rows go to CSV (`seed,best_f,value_error,location_error,
//! evaluations,wall_time_s`), aggregates to a JSON summary, and the first
//! replication's convergence trace optionally to a trace CSV
//! (`level,cumulative_evals,best_f,value_error`). Floats are written in
//! shortest round-trip form; an unknown location error is written as `–`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engines::{
    run_asynchronous, run_sequential, run_synchronous, EngineConfig, RunResult, StartMode,
};
use crate::error::{Error, Result};
use crate::local_refine::{hybrid_run, NelderMeadConfig};
use crate::objective_bench::{registry_get, ObjectiveFunction};
use crate::sa_core::{expected_evaluations, AnnealSchedule, Precision};

/// Marker for a location error that cannot be computed.
pub const UNKNOWN_MARKER: &str = "–";

pub const REPORT_COLUMNS: [&str; 6] = [
    "seed",
    "best_f",
    "value_error",
    "location_error",
    "evaluations",
    "wall_time_s",
];

pub const TRACE_COLUMNS: [&str; 4] = ["level", "cumulative_evals", "best_f", "value_error"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    V0,
    V1,
    V2,
    Hybrid,
}

impl EngineKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EngineKind::V0 => "v0",
            EngineKind::V1 => "v1",
            EngineKind::V2 => "v2",
            EngineKind::Hybrid => "hybrid",
        }
    }
}

impl FromStr for EngineKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "v0" => Ok(EngineKind::V0),
            "v1" => Ok(EngineKind::V1),
            "v2" => Ok(EngineKind::V2),
            "hybrid" => Ok(EngineKind::Hybrid),
            other => Err(format!("unknown engine `{other}` (v0|v1|v2|hybrid)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StartKind {
    #[default]
    Shared,
    Random,
}

impl FromStr for StartKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "shared" => Ok(StartKind::Shared),
            "random" => Ok(StartKind::Random),
            other => Err(format!("unknown start mode `{other}` (shared|random)")),
        }
    }
}

/// One experiment. Also the JSON config-file schema; missing fields take the
/// defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSpec {
    pub function_id: String,
    pub engine: EngineKind,
    pub t0: f64,
    pub t_min: f64,
    pub rho: f64,
    pub chain_length: usize,
    pub n_chains: usize,
    pub start: StartKind,
    /// Shared start point; the box centre when absent.
    pub start_point: Option<Vec<f64>>,
    pub seed: u64,
    pub replications: usize,
    pub precision: Precision,
    pub workers: Option<usize>,
    pub parallel_replications: bool,
    pub nelder_mead: NelderMeadConfig,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub trace: Option<PathBuf>,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            function_id: "F0_a".into(),
            engine: EngineKind::V2,
            t0: 100.0,
            t_min: 0.01,
            rho: 0.95,
            chain_length: 50,
            n_chains: 1024,
            start: StartKind::Shared,
            start_point: None,
            seed: 0,
            replications: 30,
            precision: Precision::Double,
            workers: None,
            parallel_replications: false,
            nelder_mead: NelderMeadConfig::default(),
            out: None,
            summary: None,
            trace: None,
        }
    }
}

impl RunSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn schedule(&self) -> Result<AnnealSchedule> {
        AnnealSchedule::new(self.t0, self.t_min, self.rho, self.chain_length)
    }

    pub fn function(&self) -> Result<&'static ObjectiveFunction> {
        registry_get(&self.function_id)
    }

    pub fn validate(&self) -> Result<()> {
        let f = self.function()?;
        self.schedule()?;
        if self.replications == 0 {
            return Err(Error::config("replications", "must be at least 1"));
        }
        if self.n_chains == 0 {
            return Err(Error::config("n_chains", "must be at least 1"));
        }
        if self.engine == EngineKind::V0 && self.n_chains != 1 {
            return Err(Error::config(
                "n_chains",
                "engine v0 runs exactly one chain",
            ));
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers", "must be at least 1"));
        }
        if let Some(p) = &self.start_point {
            if self.start == StartKind::Random {
                return Err(Error::config(
                    "start_point",
                    "cannot be combined with random starts",
                ));
            }
            if p.len() != f.dim() {
                return Err(Error::config(
                    "start_point",
                    format!("expected {} coordinates, got {}", f.dim(), p.len()),
                ));
            }
            if !f.domain().contains(p)? {
                return Err(Error::config("start_point", "outside the search domain"));
            }
        }
        self.nelder_mead.validate()
    }

    pub fn expected_evaluations(&self) -> Result<u64> {
        Ok(expected_evaluations(&self.schedule()?, self.n_chains))
    }

    pub fn engine_config(&self, seed: u64) -> Result<EngineConfig> {
        let start = match (self.start, &self.start_point) {
            (StartKind::Random, _) => StartMode::RandomPerChain,
            (StartKind::Shared, Some(p)) => StartMode::Point(p.clone()),
            (StartKind::Shared, None) => StartMode::Center,
        };
        Ok(EngineConfig {
            n_chains: self.n_chains,
            start,
            schedule: self.schedule()?,
            precision: self.precision,
            seed,
            workers: self.workers,
        })
    }
}

/// Runs one replication of `spec` with the given seed.
pub fn run_once(spec: &RunSpec, seed: u64) -> Result<RunResult> {
    let f = spec.function()?;
    let cfg = spec.engine_config(seed)?;
    let result = match spec.engine {
        EngineKind::V0 => run_sequential(f, &cfg)?,
        EngineKind::V1 => run_asynchronous(f, &cfg)?,
        EngineKind::V2 => run_synchronous(f, &cfg)?,
        EngineKind::Hybrid => hybrid_run(f, &cfg, &cfg.schedule, &spec.nelder_mead)?,
    };
    let expected = cfg.expected_evaluations();
    if result.anneal_evaluations != expected {
        return Err(Error::EvaluationCount {
            expected,
            measured: result.anneal_evaluations,
        });
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRow {
    pub seed: u64,
    pub best_f: f64,
    pub value_error: f64,
    pub location_error: Option<f64>,
    pub evaluations: u64,
    pub wall_time_s: f64,
}

impl ReplicationRow {
    pub fn from_result(f: &ObjectiveFunction, seed: u64, result: &RunResult) -> Self {
        Self {
            seed,
            best_f: result.best_f,
            value_error: f.value_error(result.best_f),
            location_error: f.location_error(&result.best_x).ok(),
            evaluations: result.evaluations,
            wall_time_s: result.wall_time.as_secs_f64(),
        }
    }

    fn to_record(&self) -> [String; 6] {
        [
            self.seed.to_string(),
            fmt_f64(self.best_f),
            fmt_f64(self.value_error),
            self.location_error
                .map_or_else(|| UNKNOWN_MARKER.to_owned(), fmt_f64),
            self.evaluations.to_string(),
            fmt_f64(self.wall_time_s),
        ]
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v != 0.0 && v.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub median: f64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    /// `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        Some(Self {
            median,
            mean: sorted.iter().sum::<f64>() / n as f64,
            min: sorted[0],
            max: sorted[n - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub best_f: Stats,
    pub value_error: Stats,
    /// Absent when the location of the minimum is unknown.
    pub location_error: Option<Stats>,
    pub evaluations: Stats,
    pub wall_time_s: Stats,
}

impl Aggregates {
    pub fn from_rows(rows: &[ReplicationRow]) -> Option<Self> {
        let col = |g: fn(&ReplicationRow) -> f64| rows.iter().map(g).collect::<Vec<_>>();
        let locations: Vec<f64> = rows.iter().filter_map(|r| r.location_error).collect();
        Some(Self {
            best_f: Stats::of(&col(|r| r.best_f))?,
            value_error: Stats::of(&col(|r| r.value_error))?,
            location_error: if locations.len() == rows.len() {
                Stats::of(&locations)
            } else {
                None
            },
            evaluations: Stats::of(&col(|r| r.evaluations as f64))?,
            wall_time_s: Stats::of(&col(|r| r.wall_time_s))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationReport {
    pub spec: RunSpec,
    pub expected_evaluations: u64,
    pub rows: Vec<ReplicationRow>,
    pub aggregates: Aggregates,
    /// Result of the first replication (seed = `spec.seed`).
    pub first: RunResult,
}

/// JSON summary written next to the CSV rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub function_id: String,
    pub function_name: String,
    pub dim: usize,
    pub f_star: f64,
    pub engine: EngineKind,
    pub t0: f64,
    pub t_min: f64,
    pub rho: f64,
    pub chain_length: usize,
    pub n_chains: usize,
    pub levels: usize,
    pub precision: Precision,
    pub seeds: Vec<u64>,
    pub expected_evaluations: u64,
    pub aggregates: Aggregates,
}

impl ReplicationReport {
    pub fn summary(&self) -> Result<Summary> {
        let f = self.spec.function()?;
        let sched = self.spec.schedule()?;
        Ok(Summary {
            function_id: f.id().to_owned(),
            function_name: f.name().to_owned(),
            dim: f.dim(),
            f_star: f.reference().f_star,
            engine: self.spec.engine,
            t0: sched.t0,
            t_min: sched.t_min,
            rho: sched.rho,
            chain_length: sched.sweep_length,
            n_chains: self.spec.n_chains,
            levels: sched.ladder().levels,
            precision: self.spec.precision,
            seeds: self.rows.iter().map(|r| r.seed).collect(),
            expected_evaluations: self.expected_evaluations,
            aggregates: self.aggregates.clone(),
        })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_rows(&self.rows, writer)
    }
}

pub fn write_rows<W: Write>(rows: &[ReplicationRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(REPORT_COLUMNS)?;
    for row in rows {
        w.write_record(row.to_record())?;
    }
    w.flush()?;
    Ok(())
}

fn parse_field<T: FromStr>(record: &csv::StringRecord, idx: usize) -> Result<T> {
    let raw = record.get(idx).unwrap_or_default();
    raw.parse().map_err(|_| {
        Error::config(
            "report",
            format!(
                "cannot parse column `{}` value `{raw}`",
                REPORT_COLUMNS[idx]
            ),
        )
    })
}

/// Parses a report CSV written by [`write_rows`].
pub fn read_rows<R: Read>(reader: R) -> Result<Vec<ReplicationRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.iter().ne(REPORT_COLUMNS) {
        return Err(Error::config("report", "unexpected column set"));
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let location = record.get(3).unwrap_or_default();
        rows.push(ReplicationRow {
            seed: parse_field(&record, 0)?,
            best_f: parse_field(&record, 1)?,
            value_error: parse_field(&record, 2)?,
            location_error: if location == UNKNOWN_MARKER {
                None
            } else {
                Some(parse_field(&record, 3)?)
            },
            evaluations: parse_field(&record, 4)?,
            wall_time_s: parse_field(&record, 5)?,
        });
    }
    Ok(rows)
}

/// Executes every replication of `spec` and writes the requested outputs.
pub fn run_spec(spec: &RunSpec) -> Result<ReplicationReport> {
    spec.validate()?;
    let f = spec.function()?;
    let expected = spec.expected_evaluations()?;
    let seeds: Vec<u64> = (0..spec.replications as u64)
        .map(|i| spec.seed.wrapping_add(i))
        .collect();

    let results: Vec<RunResult> = if spec.parallel_replications {
        seeds
            .par_iter()
            .map(|&s| run_once(spec, s))
            .collect::<Result<_>>()?
    } else {
        seeds
            .iter()
            .map(|&s| run_once(spec, s))
            .collect::<Result<_>>()?
    };

    let rows: Vec<ReplicationRow> = seeds
        .iter()
        .zip(&results)
        .map(|(&s, r)| ReplicationRow::from_result(f, s, r))
        .collect();
    let aggregates =
        Aggregates::from_rows(&rows).ok_or(Error::config("replications", "no rows"))?;
    let first = results
        .into_iter()
        .next()
        .expect("at least one replication");

    let report = ReplicationReport {
        spec: spec.clone(),
        expected_evaluations: expected,
        rows,
        aggregates,
        first,
    };
    if let Some(path) = &spec.out {
        report.write_csv(File::create(path)?)?;
    }
    if let Some(path) = &spec.summary {
        let mut file = File::create(path)?;
        serde_json::to_writer_pretty(&mut file, &report.summary()?)?;
        writeln!(file)?;
    }
    if let Some(path) = &spec.trace {
        emit_trace(&report.first, f.reference().f_star, path)?;
    }
    Ok(report)
}

pub fn write_trace<W: Write>(result: &RunResult, f_star: f64, writer: W) -> Result<()> {
    if result.trace.is_empty() {
        return Err(Error::config("trace", "run has no trace records"));
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TRACE_COLUMNS)?;
    for rec in &result.trace {
        w.write_record([
            rec.level.to_string(),
            rec.cumulative_evaluations.to_string(),
            fmt_f64(rec.best_so_far),
            fmt_f64((rec.best_so_far - f_star).abs()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per trace record: level, cumulative evaluations, best value so
/// far and its value error.
pub fn emit_trace(result: &RunResult, f_star: f64, path: &Path) -> Result<()> {
    write_trace(result, f_star, File::create(path)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub engine: EngineKind,
    pub n_chains: usize,
    pub workers: Option<usize>,
    pub evaluations: u64,
    pub median_value_error: f64,
    pub median_location_error: Option<f64>,
    pub median_wall_time_s: f64,
    /// Median wall time of the first row divided by this row's.
    pub speedup_vs_first: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub function_id: String,
    pub rows: Vec<ComparisonRow>,
}

pub const COMPARISON_COLUMNS: [&str; 8] = [
    "engine",
    "n_chains",
    "workers",
    "evaluations",
    "median_value_error",
    "median_location_error",
    "median_wall_time_s",
    "cpu_speedup_vs_first",
];

impl ComparisonTable {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(COMPARISON_COLUMNS)?;
        for row in &self.rows {
            w.write_record([
                row.engine.as_str().to_owned(),
                row.n_chains.to_string(),
                row.workers
                    .map_or_else(|| "auto".to_owned(), |w| w.to_string()),
                row.evaluations.to_string(),
                fmt_f64(row.median_value_error),
                row.median_location_error
                    .map_or_else(|| UNKNOWN_MARKER.to_owned(), fmt_f64),
                fmt_f64(row.median_wall_time_s),
                fmt_f64(row.speedup_vs_first),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "{}: medians over replications; speedup is a wall-time ratio on this host (CPU workers), not a GPU speedup\n",
            self.function_id
        );
        out.push_str(&format!(
            "{:<7} {:>8} {:>7} {:>14} {:>14} {:>14} {:>10} {:>9}\n",
            "engine",
            "chains",
            "workers",
            "evaluations",
            "|fa-fr|",
            "loc. error",
            "time [s]",
            "speedup"
        ));
        for r in &self.rows {
            let loc = r
                .median_location_error
                .map_or_else(|| UNKNOWN_MARKER.to_owned(), |v| format!("{v:.4e}"));
            out.push_str(&format!(
                "{:<7} {:>8} {:>7} {:>14} {:>14.4e} {:>14} {:>10.3} {:>9.3}\n",
                r.engine.as_str(),
                r.n_chains,
                r.workers
                    .map_or_else(|| "auto".to_owned(), |w| w.to_string()),
                r.evaluations,
                r.median_value_error,
                loc,
                r.median_wall_time_s,
                r.speedup_vs_first,
            ));
        }
        out
    }
}

/// Runs each spec and tabulates median errors side by side. All specs must
/// target the same function with the same annealing budget.
pub fn compare_engines(specs: &[RunSpec]) -> Result<ComparisonTable> {
    let first = specs
        .first()
        .ok_or(Error::config("specs", "at least one spec is required"))?;
    let budget = first.expected_evaluations()?;
    for spec in &specs[1..] {
        if spec.function_id != first.function_id {
            return Err(Error::FunctionMismatch {
                first: first.function_id.clone(),
                second: spec.function_id.clone(),
            });
        }
        let other = spec.expected_evaluations()?;
        if other != budget {
            return Err(Error::BudgetMismatch {
                first: budget,
                second: other,
            });
        }
    }

    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let report = run_spec(spec)?;
        let agg = &report.aggregates;
        rows.push(ComparisonRow {
            engine: spec.engine,
            n_chains: spec.n_chains,
            workers: spec.workers,
            evaluations: agg.evaluations.median as u64,
            median_value_error: agg.value_error.median,
            median_location_error: agg.location_error.map(|s| s.median),
            median_wall_time_s: agg.wall_time_s.median,
            speedup_vs_first: 0.0,
        });
    }
    let base = rows[0].median_wall_time_s;
    for row in &mut rows {
        row.speedup_vs_first = if row.median_wall_time_s > 0.0 {
            base / row.median_wall_time_s
        } else {
            f64::NAN
        };
    }
    Ok(ComparisonTable {
        function_id: first.function_id.clone(),
        rows,
    })
}

/// Parses `--chains`: a plain count or `BxG` (block size × grid size).
pub fn parse_chain_count(s: &str) -> std::result::Result<usize, String> {
    let s = s.trim();
    let parsed = match s.split_once(['x', 'X']) {
        Some((b, g)) => {
            let b: usize = b
                .trim()
                .parse()
                .map_err(|_| format!("bad block size in `{s}`"))?;
            let g: usize = g
                .trim()
                .parse()
                .map_err(|_| format!("bad grid size in `{s}`"))?;
            b.checked_mul(g)
                .ok_or_else(|| format!("chain count `{s}` overflows"))?
        }
        None => s.parse().map_err(|_| format!("bad chain count `{s}`"))?,
    };
    if parsed == 0 {
        return Err("chain count must be at least 1".into());
    }
    Ok(parsed)
}
