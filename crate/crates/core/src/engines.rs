//! Optimisation drivers: sequential (V0), asynchronous multi-chain (V1) and
//! synchronous multi-chain with a reduce-min exchange at every level (V2).
//!
//! Chains run as data-parallel tasks on a rayon pool. Every chain draws from
//! its own keyed stream and all reductions use a total order with a
//! chain-index tie-break, so results do not depend on the worker count.

use std::cmp::Ordering;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective_bench::ObjectiveFunction;
use crate::rng_streams::{make_stream, StreamKey, START_LEVEL};
use crate::sa_core::{
    expected_evaluations, ladder, metropolis_sweep, AnnealSchedule, ChainState, CountingObjective,
    LadderInfo, Precision,
};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartMode {
    /// All chains start from the centre of the box.
    #[default]
    Center,
    /// All chains start from this point.
    Point(Vec<f64>),
    /// Each chain draws its own uniform start point.
    RandomPerChain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub n_chains: usize,
    pub start: StartMode,
    pub schedule: AnnealSchedule,
    pub precision: Precision,
    pub seed: u64,
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
}

impl EngineConfig {
    pub fn new(schedule: AnnealSchedule, n_chains: usize) -> Self {
        Self {
            n_chains,
            start: StartMode::Center,
            schedule,
            precision: Precision::Double,
            seed: 0,
            workers: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_start(mut self, start: StartMode) -> Self {
        self.start = start;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    pub fn expected_evaluations(&self) -> u64 {
        expected_evaluations(&self.schedule, self.n_chains)
    }

    fn validate(&self, f: &ObjectiveFunction) -> Result<()> {
        self.schedule.validate()?;
        if self.n_chains == 0 {
            return Err(Error::config("n_chains", "must be at least 1"));
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers", "must be at least 1"));
        }
        if let StartMode::Point(p) = &self.start {
            if !f.domain().contains(p)? {
                return Err(Error::InfeasibleStart);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Anneal,
    Refine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub level: usize,
    pub cumulative_evaluations: u64,
    /// Running minimum of the per-level best value across chains.
    pub best_so_far: f64,
    pub phase: Phase,
}

/// Summary of the local-refinement phase of a hybrid run.
#[derive(Debug, Clone, PartialEq)]
pub struct RefineSummary {
    pub start_f: f64,
    pub f_best: f64,
    pub iterations: usize,
    pub evaluations: u64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub best_x: Vec<f64>,
    pub best_f: f64,
    /// Total objective evaluations, all phases included.
    pub evaluations: u64,
    /// Evaluations spent in the annealing phase.
    pub anneal_evaluations: u64,
    /// Uniform draws consumed by the Metropolis sweeps (start-point draws
    /// excluded).
    pub draws: u64,
    pub wall_time: Duration,
    pub trace: Vec<TraceRecord>,
    pub winning_chain: usize,
    pub refine: Option<RefineSummary>,
}

impl RunResult {
    /// Equality on everything except wall time.
    pub fn same_outcome(&self, other: &RunResult) -> bool {
        self.best_x == other.best_x
            && self.best_f.to_bits() == other.best_f.to_bits()
            && self.evaluations == other.evaluations
            && self.draws == other.draws
            && self.winning_chain == other.winning_chain
            && self.trace.len() == other.trace.len()
            && self.trace.iter().zip(&other.trace).all(|(a, b)| {
                a.level == b.level
                    && a.cumulative_evaluations == b.cumulative_evaluations
                    && a.best_so_far.to_bits() == b.best_so_far.to_bits()
                    && a.phase == b.phase
            })
    }
}

/// A chain's reported state at a reduce point.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub x: Vec<f64>,
    pub value: f64,
    pub chain_index: usize,
}

/// Smaller value first, then smaller chain index.
fn candidate_order(a: &Candidate, b: &Candidate) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then(a.chain_index.cmp(&b.chain_index))
}

/// Entry with the smallest value; ties go to the smallest chain index.
pub fn reduce_min(candidates: &[Candidate]) -> Result<&Candidate> {
    candidates
        .iter()
        .min_by(|a, b| candidate_order(a, b))
        .ok_or(Error::EmptyCandidates)
}

fn min_candidate(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if candidate_order(&a, &b).is_le() {
            a
        } else {
            b
        }),
        (a, None) => a,
        (None, b) => b,
    }
}

/// Partial result of a parallel reduction over chains. Every field merges
/// with an associative, commutative operation.
struct Accum {
    best: Option<Candidate>,
    level_min: Vec<f64>,
    evaluations: u64,
    draws: u64,
}

impl Accum {
    fn empty(levels: usize) -> Self {
        Self {
            best: None,
            level_min: vec![f64::INFINITY; levels],
            evaluations: 0,
            draws: 0,
        }
    }

    fn merge(mut self, other: Accum) -> Accum {
        self.best = min_candidate(self.best, other.best);
        for (a, b) in self.level_min.iter_mut().zip(other.level_min) {
            *a = a.min(b);
        }
        self.evaluations += other.evaluations;
        self.draws += other.draws;
        self
    }
}

fn worker_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::WorkerPool(e.to_string()))
}

fn start_point(f: &ObjectiveFunction, cfg: &EngineConfig, chain: usize) -> Vec<f64> {
    let domain = f.domain();
    match &cfg.start {
        StartMode::Center => domain.center(),
        StartMode::Point(p) => p.clone(),
        StartMode::RandomPerChain => {
            let mut s = make_stream(StreamKey::new(cfg.seed, chain as u64, START_LEVEL));
            domain
                .lower()
                .iter()
                .zip(domain.upper())
                .map(|(l, u)| (l + s.next_uniform() * (u - l)).min(*u))
                .collect()
        }
    }
}

fn trace_from_level_minima(
    level_min: &[f64],
    n_chains: usize,
    sweep_length: usize,
) -> Vec<TraceRecord> {
    let mut best = f64::INFINITY;
    level_min
        .iter()
        .enumerate()
        .map(|(level, &m)| {
            best = best.min(m);
            TraceRecord {
                level,
                cumulative_evaluations: n_chains as u64
                    * (1 + sweep_length as u64 * (level as u64 + 1)),
                best_so_far: best,
                phase: Phase::Anneal,
            }
        })
        .collect()
}

/// One chain through the whole ladder using stream `(seed, chain, 0)`.
fn anneal_chain(
    f: &ObjectiveFunction,
    cfg: &EngineConfig,
    ladder: &LadderInfo,
    chain: usize,
) -> Result<Accum> {
    let mut objective = CountingObjective::new(f, cfg.precision);
    let stream = make_stream(StreamKey::new(cfg.seed, chain as u64, 0));
    let mut state = ChainState::start(start_point(f, cfg, chain), &mut objective, stream)?;
    let mut level_min = Vec::with_capacity(ladder.levels);
    for &t in &ladder.temperatures {
        metropolis_sweep(&mut state, &mut objective, t, cfg.schedule.sweep_length)?;
        level_min.push(state.energy);
    }
    Ok(Accum {
        best: Some(Candidate {
            x: state.x,
            value: state.energy,
            chain_index: chain,
        }),
        level_min,
        evaluations: objective.evaluations(),
        draws: state.stream.counter(),
    })
}

fn finish(acc: Accum, trace: Vec<TraceRecord>, started: Instant) -> Result<RunResult> {
    let best = acc.best.ok_or(Error::EmptyCandidates)?;
    Ok(RunResult {
        best_x: best.x,
        best_f: best.value,
        evaluations: acc.evaluations,
        anneal_evaluations: acc.evaluations,
        draws: acc.draws,
        wall_time: started.elapsed(),
        trace,
        winning_chain: best.chain_index,
        refine: None,
    })
}

/// Single-chain annealing (V0).
pub fn run_sequential(f: &ObjectiveFunction, cfg: &EngineConfig) -> Result<RunResult> {
    if cfg.n_chains != 1 {
        return Err(Error::config(
            "n_chains",
            format!(
                "the sequential engine runs exactly one chain, got {}",
                cfg.n_chains
            ),
        ));
    }
    cfg.validate(f)?;
    let started = Instant::now();
    let ladder = ladder(&cfg.schedule);
    let acc = anneal_chain(f, cfg, &ladder, 0)?;
    let trace = trace_from_level_minima(&acc.level_min, 1, cfg.schedule.sweep_length);
    finish(acc, trace, started)
}

/// Independent full-ladder chains with one reduce at the end (V1). The trace
/// is diagnostic: at each level it records the best current value across
/// chains.
pub fn run_asynchronous(f: &ObjectiveFunction, cfg: &EngineConfig) -> Result<RunResult> {
    cfg.validate(f)?;
    let pool = worker_pool(cfg.workers)?;
    let started = Instant::now();
    let ladder = ladder(&cfg.schedule);
    let levels = ladder.levels;
    let acc = pool.install(|| {
        (0..cfg.n_chains)
            .into_par_iter()
            .map(|chain| anneal_chain(f, cfg, &ladder, chain))
            .try_reduce(|| Accum::empty(levels), |a, b| Ok(a.merge(b)))
    })?;
    let trace = trace_from_level_minima(&acc.level_min, cfg.n_chains, cfg.schedule.sweep_length);
    finish(acc, trace, started)
}

/// Chains sweep one level from a shared point, then all restart from the
/// reduce-min winner (V2). Level `l` of chain `c` uses stream `(seed, c, l)`.
pub fn run_synchronous(f: &ObjectiveFunction, cfg: &EngineConfig) -> Result<RunResult> {
    cfg.validate(f)?;
    let pool = worker_pool(cfg.workers)?;
    let started = Instant::now();
    let ladder = ladder(&cfg.schedule);
    let sweep_length = cfg.schedule.sweep_length;

    let mut shared: Option<Candidate> = None;
    let mut evaluations = 0u64;
    let mut draws = 0u64;
    let mut level_min = Vec::with_capacity(ladder.levels);

    for (level, &t) in ladder.temperatures.iter().enumerate() {
        let current = shared.as_ref();
        let acc = pool.install(|| {
            (0..cfg.n_chains)
                .into_par_iter()
                .map(|chain| {
                    let mut objective = CountingObjective::new(f, cfg.precision);
                    let stream = make_stream(StreamKey::new(cfg.seed, chain as u64, level as u64));
                    let mut state = match current {
                        None => {
                            ChainState::start(start_point(f, cfg, chain), &mut objective, stream)?
                        }
                        Some(c) => ChainState {
                            x: c.x.clone(),
                            energy: c.value,
                            stream,
                        },
                    };
                    metropolis_sweep(&mut state, &mut objective, t, sweep_length)?;
                    Ok::<_, Error>(Accum {
                        level_min: Vec::new(),
                        best: Some(Candidate {
                            x: state.x,
                            value: state.energy,
                            chain_index: chain,
                        }),
                        evaluations: objective.evaluations(),
                        draws: state.stream.counter(),
                    })
                })
                .try_reduce(|| Accum::empty(0), |a, b| Ok(a.merge(b)))
        })?;
        evaluations += acc.evaluations;
        draws += acc.draws;
        let winner = acc.best.ok_or(Error::EmptyCandidates)?;
        level_min.push(winner.value);
        shared = Some(winner);
    }

    let acc = Accum {
        best: shared,
        level_min,
        evaluations,
        draws,
    };
    let trace = trace_from_level_minima(&acc.level_min, cfg.n_chains, sweep_length);
    finish(acc, trace, started)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective_bench::{registry_get, BoxDomain, ReferenceOptimum};

    fn cand(value: f64, chain_index: usize) -> Candidate {
        Candidate {
            x: vec![chain_index as f64],
            value,
            chain_index,
        }
    }

    #[test]
    fn reduce_min_examples() {
        let list = vec![cand(3.0, 0), cand(1.0, 1), cand(2.0, 2)];
        assert_eq!(reduce_min(&list).unwrap(), &cand(1.0, 1));

        let ties = vec![cand(5.0, 2), cand(5.0, 0), cand(5.0, 1)];
        assert_eq!(reduce_min(&ties).unwrap().chain_index, 0);

        assert!(matches!(reduce_min(&[]), Err(Error::EmptyCandidates)));
    }

    #[test]
    fn reduce_min_is_order_invariant() {
        let list = vec![cand(2.0, 3), cand(1.0, 4), cand(1.0, 1), cand(7.0, 0)];
        let expected = reduce_min(&list).unwrap().clone();
        let mut perm = list.clone();
        for _ in 0..4 {
            perm.rotate_left(1);
            assert_eq!(reduce_min(&perm).unwrap(), &expected);
            perm.reverse();
            assert_eq!(reduce_min(&perm).unwrap(), &expected);
        }
    }

    fn bowl_1d() -> ObjectiveFunction {
        ObjectiveFunction::custom(
            "bowl",
            BoxDomain::cube(1, -1.0, 1.0).unwrap(),
            ReferenceOptimum::at_origin(0.0, 1),
            |x| x[0] * x[0],
        )
    }

    #[test]
    fn sequential_on_constant_objective() {
        let f = ObjectiveFunction::custom(
            "three",
            BoxDomain::cube(3, 0.0, 1.0).unwrap(),
            ReferenceOptimum::value_only(3.0),
            |_| 3.0,
        );
        let sched = AnnealSchedule::new(2.0, 0.1, 0.5, 7).unwrap();
        let r = run_sequential(&f, &EngineConfig::new(sched, 1)).unwrap();
        assert_eq!(r.best_f, 3.0);
        assert_eq!(r.evaluations, expected_evaluations(&sched, 1));
    }

    #[test]
    fn sequential_bowl_gets_close() {
        let sched = AnnealSchedule::new(1.0, 1e-3, 0.9, 200).unwrap();
        let r = run_sequential(&bowl_1d(), &EngineConfig::new(sched, 1)).unwrap();
        assert!(r.best_f <= 1e-2, "{}", r.best_f);
        assert_eq!(r.evaluations, expected_evaluations(&sched, 1));
    }

    #[test]
    fn sequential_requires_one_chain() {
        let sched = AnnealSchedule::new(1.0, 0.5, 0.9, 2).unwrap();
        assert!(matches!(
            run_sequential(&bowl_1d(), &EngineConfig::new(sched, 2)),
            Err(Error::InvalidConfig {
                field: "n_chains",
                ..
            })
        ));
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let sched = AnnealSchedule::new(1.0, 0.5, 0.9, 2).unwrap();
        let cfg = EngineConfig::new(sched, 4).with_start(StartMode::Point(vec![3.0]));
        assert!(matches!(
            run_asynchronous(&bowl_1d(), &cfg),
            Err(Error::InfeasibleStart)
        ));
        assert!(matches!(
            run_synchronous(&bowl_1d(), &cfg),
            Err(Error::InfeasibleStart)
        ));
    }

    #[test]
    fn asynchronous_with_one_chain_equals_sequential() {
        let f = registry_get("F9").unwrap();
        let sched = AnnealSchedule::new(10.0, 0.1, 0.8, 30).unwrap();
        let cfg = EngineConfig::new(sched, 1).with_seed(17);
        let a = run_sequential(f, &cfg).unwrap();
        let b = run_asynchronous(f, &cfg).unwrap();
        assert!(a.same_outcome(&b));
    }

    #[test]
    fn synchronous_single_chain_structure() {
        let f = registry_get("F9").unwrap();
        let sched = AnnealSchedule::new(10.0, 0.1, 0.8, 30).unwrap();
        let cfg = EngineConfig::new(sched, 1).with_seed(17);
        let seq = run_sequential(f, &cfg).unwrap();
        let sync = run_synchronous(f, &cfg).unwrap();
        assert_eq!(seq.evaluations, sync.evaluations);
        assert_eq!(sync.trace.len(), sched.ladder().levels);
        assert!(sync
            .trace
            .windows(2)
            .all(|w| w[1].best_so_far <= w[0].best_so_far));
    }

    #[test]
    fn random_starts_are_feasible_and_distinct() {
        let f = registry_get("F0_a").unwrap();
        let sched = AnnealSchedule::new(1.0, 0.5, 0.9, 1).unwrap();
        let cfg = EngineConfig::new(sched, 3).with_start(StartMode::RandomPerChain);
        let a = start_point(f, &cfg, 0);
        let b = start_point(f, &cfg, 1);
        assert_ne!(a, b);
        assert!(f.domain().contains(&a).unwrap());
        assert_eq!(a, start_point(f, &cfg, 0));
    }

    #[test]
    fn budgets_match_between_parallel_engines() {
        let f = registry_get("F2").unwrap();
        let sched = AnnealSchedule::new(5.0, 0.5, 0.7, 5).unwrap();
        let cfg = EngineConfig::new(sched, 24).with_seed(1);
        let a = run_asynchronous(f, &cfg).unwrap();
        let s = run_synchronous(f, &cfg).unwrap();
        assert_eq!(a.evaluations, s.evaluations);
        assert_eq!(a.evaluations, expected_evaluations(&sched, 24));
        assert_eq!(a.draws, 3 * 5 * 7 * 24);
        assert_eq!(s.draws, a.draws);
    }
}
