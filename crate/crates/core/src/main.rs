use std::fs;
use std::io;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use multichain_sa::bench_harness::{
    compare_engines, parse_chain_count, run_once, run_spec, write_trace, EngineKind, RunSpec,
    StartKind,
};
use multichain_sa::objective_bench::registry;
use multichain_sa::sa_core::Precision;

#[derive(Parser)]
#[command(
    name = "multichain-sa",
    version,
    about = "Multi-chain simulated annealing benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List benchmark function ids with dimension, domain and reference value.
    ListFunctions,
    /// Run replications and write per-seed rows plus a JSON summary.
    Run(RunArgs),
    /// Run several engines on the same function and budget.
    Compare {
        /// Comma-separated engines, e.g. `v1,v2`.
        #[arg(long, value_delimiter = ',', default_value = "v1,v2")]
        engines: Vec<EngineKind>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run a single replication and write its convergence trace.
    Trace(RunArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// JSON run spec; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    function: Option<String>,
    #[arg(long)]
    engine: Option<EngineKind>,
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    tmin: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    chain_length: Option<usize>,
    /// Number of chains, either a count or `BxG`.
    #[arg(long, value_parser = parse_chain_count)]
    chains: Option<usize>,
    /// `shared` (one start point for all chains) or `random`.
    #[arg(long)]
    start: Option<StartKind>,
    /// Shared start point as comma-separated coordinates; box centre by default.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    start_point: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    precision: Option<Precision>,
    /// Worker threads; all cores by default.
    #[arg(long)]
    workers: Option<usize>,
    /// Per-replication CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON summary.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Trace CSV of the first replication.
    #[arg(long)]
    trace: Option<PathBuf>,
}

impl RunArgs {
    fn spec(&self) -> Result<RunSpec> {
        let mut spec = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                RunSpec::from_json(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => RunSpec::default(),
        };
        if let Some(v) = &self.function {
            spec.function_id = v.clone();
        }
        if let Some(v) = self.engine {
            spec.engine = v;
            if v == EngineKind::V0 && self.chains.is_none() {
                spec.n_chains = 1;
            }
        }
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = self.$flag.clone() { spec.$field = v; })*
            };
        }
        set!(t0 => t0, tmin => t_min, rho => rho, chain_length => chain_length,
             chains => n_chains, start => start, seed => seed, reps => replications,
             precision => precision);
        if self.start_point.is_some() {
            spec.start_point = self.start_point.clone();
        }
        if self.workers.is_some() {
            spec.workers = self.workers;
        }
        if self.out.is_some() {
            spec.out = self.out.clone();
        }
        if self.summary.is_some() {
            spec.summary = self.summary.clone();
        }
        if self.trace.is_some() {
            spec.trace = self.trace.clone();
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn list_functions() {
    println!(
        "{:<7} {:<32} {:>4} {:>24} {:>16} location",
        "id", "name", "n", "domain", "f*"
    );
    for f in registry() {
        let d = f.domain();
        let uniform = d.lower().iter().all(|&v| v == d.lower()[0])
            && d.upper().iter().all(|&v| v == d.upper()[0]);
        let domain = if uniform {
            format!("[{}, {}]^{}", d.lower()[0], d.upper()[0], f.dim())
        } else {
            "mixed".to_owned()
        };
        let location = if f.reference().location_known {
            "known"
        } else {
            "–"
        };
        println!(
            "{:<7} {:<32} {:>4} {:>24} {:>16} {}",
            f.id(),
            f.name(),
            f.dim(),
            domain,
            f.reference().f_star,
            location
        );
    }
}

fn run(args: &RunArgs) -> Result<()> {
    let spec = args.spec()?;
    let report = run_spec(&spec)?;
    if spec.out.is_none() {
        report.write_csv(io::stdout().lock())?;
    }
    let summary = report.summary()?;
    if spec.summary.is_none() {
        eprintln!("{}", serde_json::to_string_pretty(&summary)?);
    }
    Ok(())
}

fn compare(engines: &[EngineKind], args: &RunArgs) -> Result<()> {
    if engines.is_empty() {
        bail!("--engines needs at least one engine");
    }
    let base = args.spec()?;
    let specs: Vec<RunSpec> = engines
        .iter()
        .map(|&engine| RunSpec {
            engine,
            out: None,
            summary: None,
            trace: None,
            ..base.clone()
        })
        .collect();
    let table = compare_engines(&specs)?;
    match &base.out {
        Some(path) => table.write_csv(fs::File::create(path)?)?,
        None => print!("{}", table.render()),
    }
    Ok(())
}

fn trace(args: &RunArgs) -> Result<()> {
    let spec = args.spec()?;
    let result = run_once(&spec, spec.seed)?;
    let f_star = spec.function()?.reference().f_star;
    match spec.trace.as_ref().or(spec.out.as_ref()) {
        Some(path) => write_trace(&result, f_star, fs::File::create(path)?)?,
        None => write_trace(&result, f_star, io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::ListFunctions => list_functions(),
        Command::Run(args) => run(args)?,
        Command::Compare { engines, run } => compare(engines, run)?,
        Command::Trace(args) => trace(args)?,
    }
    Ok(())
}
