//! Multi-chain simulated annealing for box-constrained global minimisation.
//!
//! * [`objective_bench`]: benchmark objectives and their reference optima.
//! * [`rng_streams`]: keyed counter-based uniform streams.
//! * [`sa_core`]: cooling ladder, neighbour move, Metropolis test, sweeps.
//! * [`engines`]: sequential, asynchronous and synchronous drivers.
//! * [`local_refine`]: Nelder-Mead and the hybrid anneal-then-polish driver.
//! * [`bench_harness`]: replicated experiments, CSV/JSON reports, traces.

// `!(a < b)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench_harness;
pub mod engines;
pub mod error;
pub mod local_refine;
pub mod objective_bench;
pub mod rng_streams;
pub mod sa_core;

pub use engines::{
    reduce_min, run_asynchronous, run_sequential, run_synchronous, Candidate, EngineConfig,
    RunResult, StartMode, TraceRecord,
};
pub use error::{Error, Result};
pub use local_refine::{hybrid_run, nelder_mead_minimize, NelderMeadConfig};
pub use objective_bench::{registry, registry_get, BoxDomain, ObjectiveFunction, ReferenceOptimum};
pub use sa_core::{expected_evaluations, AnnealSchedule, Precision};
