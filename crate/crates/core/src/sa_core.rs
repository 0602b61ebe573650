//! Single-chain building blocks: cooling ladder, neighbour move, Metropolis
//! test and the fixed-length sweep at one temperature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective_bench::{BoxDomain, ObjectiveFunction};
use crate::rng_streams::UniformStream;

/// Geometric cooling `T_{k+1} = rho * T_k` from `t0` while `T > t_min`,
/// with `sweep_length` Metropolis steps per temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub t0: f64,
    pub t_min: f64,
    pub rho: f64,
    pub sweep_length: usize,
}

impl AnnealSchedule {
    pub fn new(t0: f64, t_min: f64, rho: f64, sweep_length: usize) -> Result<Self> {
        let sched = Self {
            t0,
            t_min,
            rho,
            sweep_length,
        };
        sched.validate()?;
        Ok(sched)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::config(
                "t0",
                format!("must be positive, got {}", self.t0),
            ));
        }
        if !(self.t_min > 0.0) {
            return Err(Error::config(
                "t_min",
                format!("must be positive, got {}", self.t_min),
            ));
        }
        if !(self.t_min < self.t0) {
            return Err(Error::config(
                "t_min",
                format!("must be below t0 ({} >= {})", self.t_min, self.t0),
            ));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::config(
                "rho",
                format!("must lie in (0, 1), got {}", self.rho),
            ));
        }
        if self.sweep_length == 0 {
            return Err(Error::config("sweep_length", "must be at least 1"));
        }
        Ok(())
    }

    pub fn ladder(&self) -> LadderInfo {
        ladder(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderInfo {
    pub levels: usize,
    pub temperatures: Vec<f64>,
}

/// Temperatures visited by the do-while loop: sweep at `T`, cool, continue
/// while `T > t_min`. Counted by iteration, not by the closed form.
pub fn ladder(sched: &AnnealSchedule) -> LadderInfo {
    let mut temperatures = Vec::new();
    let mut t = sched.t0;
    loop {
        temperatures.push(t);
        t *= sched.rho;
        if !(t > sched.t_min) {
            break;
        }
    }
    LadderInfo {
        levels: temperatures.len(),
        temperatures,
    }
}

/// One initial evaluation per chain plus `N` per temperature level.
pub fn expected_evaluations(sched: &AnnealSchedule, n_chains: usize) -> u64 {
    let levels = ladder(sched).levels as u64;
    n_chains as u64 * (1 + sched.sweep_length as u64 * levels)
}

/// Arithmetic used for objective values and the acceptance test.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Double,
    Single,
}

impl std::str::FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "double" => Ok(Precision::Double),
            "single" => Ok(Precision::Single),
            other => Err(format!("unknown precision `{other}` (double|single)")),
        }
    }
}

/// Objective wrapper that counts evaluations and applies the precision mode.
pub struct CountingObjective<'a> {
    f: &'a ObjectiveFunction,
    precision: Precision,
    scratch: Vec<f32>,
    evaluations: u64,
}

impl<'a> CountingObjective<'a> {
    pub fn new(f: &'a ObjectiveFunction, precision: Precision) -> Self {
        let scratch = match precision {
            Precision::Double => Vec::new(),
            Precision::Single => vec![0.0; f.dim()],
        };
        Self {
            f,
            precision,
            scratch,
            evaluations: 0,
        }
    }

    pub fn function(&self) -> &'a ObjectiveFunction {
        self.f
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// `x.len()` must equal the objective's dimension.
    #[inline]
    pub fn eval(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        match self.precision {
            Precision::Double => self.f.value(x),
            Precision::Single => {
                for (s, &v) in self.scratch.iter_mut().zip(x) {
                    *s = v as f32;
                }
                self.f.value_f32(&self.scratch) as f64
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChainState {
    pub x: Vec<f64>,
    pub energy: f64,
    pub stream: UniformStream,
}

impl ChainState {
    /// Evaluates the start point (one counted evaluation).
    pub fn start(
        x: Vec<f64>,
        objective: &mut CountingObjective<'_>,
        stream: UniformStream,
    ) -> Result<Self> {
        let domain = objective.function().domain();
        if !domain.contains(&x)? {
            return Err(Error::InfeasibleStart);
        }
        let energy = objective.eval(&x);
        Ok(Self { x, energy, stream })
    }
}

/// Picks a coordinate and a uniform replacement value inside its interval.
/// Consumes two draws.
#[inline]
pub fn propose_move(domain: &BoxDomain, stream: &mut UniformStream) -> (usize, f64) {
    let d = stream.next_coordinate_index(domain.dim());
    let u = stream.next_uniform();
    let lo = domain.lower()[d];
    let hi = domain.upper()[d];
    // u < 1 keeps the value inside [lo, hi); min() guards the rounding edge.
    let v = (lo + u * (hi - lo)).min(hi);
    (d, v)
}

/// `x` with one coordinate resampled uniformly over its whole interval.
pub fn compute_neighbour(x: &[f64], domain: &BoxDomain, stream: &mut UniformStream) -> Vec<f64> {
    let (d, v) = propose_move(domain, stream);
    let mut out = x.to_vec();
    out[d] = v;
    out
}

/// Metropolis test. Always consumes exactly one draw; downhill and flat
/// moves are accepted without evaluating the exponential.
#[inline]
pub fn metropolis_accept(delta_e: f64, temperature: f64, stream: &mut UniformStream) -> bool {
    let u = stream.next_uniform();
    delta_e <= 0.0 || u <= (-delta_e / temperature).exp()
}

#[inline]
fn metropolis_accept_f32(delta_e: f32, temperature: f32, stream: &mut UniformStream) -> bool {
    let u = stream.next_uniform() as f32;
    delta_e <= 0.0 || u <= (-delta_e / temperature).exp()
}

/// `n_steps` Metropolis steps at a fixed temperature. Uses exactly `n_steps`
/// objective evaluations and `3 * n_steps` draws.
pub fn metropolis_sweep(
    state: &mut ChainState,
    objective: &mut CountingObjective<'_>,
    temperature: f64,
    n_steps: usize,
) -> Result<()> {
    if !(temperature > 0.0) {
        return Err(Error::config("temperature", "must be positive"));
    }
    if n_steps == 0 {
        return Err(Error::config("n_steps", "must be at least 1"));
    }
    let f = objective.function();
    if state.x.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: state.x.len(),
        });
    }
    let domain = f.domain();
    let precision = objective.precision();
    let t32 = temperature as f32;
    for _ in 0..n_steps {
        let (d, v) = propose_move(domain, &mut state.stream);
        let old = state.x[d];
        state.x[d] = v;
        let candidate = objective.eval(&state.x);
        let accepted = match precision {
            Precision::Double => {
                metropolis_accept(candidate - state.energy, temperature, &mut state.stream)
            }
            Precision::Single => {
                let delta = candidate as f32 - state.energy as f32;
                metropolis_accept_f32(delta, t32, &mut state.stream)
            }
        };
        if accepted {
            state.energy = candidate;
        } else {
            state.x[d] = old;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective_bench::ReferenceOptimum;
    use crate::rng_streams::{make_stream, StreamKey};

    fn brute_force_levels(t0: f64, t_min: f64, rho: f64) -> usize {
        let mut t = t0;
        let mut count = 0;
        loop {
            count += 1;
            t *= rho;
            if t <= t_min {
                return count;
            }
        }
    }

    #[test]
    fn ladder_examples() {
        let l = AnnealSchedule::new(5.0, 0.5, 0.7, 5).unwrap().ladder();
        assert_eq!(l.levels, 7);
        let expected = [5.0, 3.5, 2.45, 1.715, 1.2005, 0.84035, 0.588245];
        for (t, e) in l.temperatures.iter().zip(expected) {
            assert!((t - e).abs() < 1e-12);
        }
        assert_eq!(
            AnnealSchedule::new(1000.0, 0.01, 0.99, 100)
                .unwrap()
                .ladder()
                .levels,
            1146
        );
        assert_eq!(
            AnnealSchedule::new(1.0, 0.9, 0.5, 1)
                .unwrap()
                .ladder()
                .levels,
            1
        );
        assert_eq!(brute_force_levels(1000.0, 0.01, 0.99), 1146);
    }

    #[test]
    fn ladder_is_consistent() {
        let sched = AnnealSchedule::new(100.0, 0.01, 0.95, 1).unwrap();
        let l = sched.ladder();
        assert!(l.temperatures.windows(2).all(|w| w[1] < w[0]));
        assert!(*l.temperatures.last().unwrap() > sched.t_min);
        assert!(l.temperatures.last().unwrap() * sched.rho <= sched.t_min);
        for (i, t) in l.temperatures.iter().enumerate() {
            let closed = sched.t0 * sched.rho.powi(i as i32);
            assert!((t - closed).abs() <= 1e-12 * closed.max(1.0));
        }
    }

    #[test]
    fn schedule_validation() {
        assert!(AnnealSchedule::new(1.0, 2.0, 0.9, 1).is_err());
        assert!(AnnealSchedule::new(1.0, 0.1, 1.0, 1).is_err());
        assert!(AnnealSchedule::new(1.0, 0.1, 0.0, 1).is_err());
        assert!(AnnealSchedule::new(1.0, 0.1, 0.9, 0).is_err());
        assert!(AnnealSchedule::new(-1.0, 0.1, 0.9, 1).is_err());
    }

    #[test]
    fn expected_evaluation_examples() {
        let small = AnnealSchedule::new(5.0, 0.5, 0.7, 5).unwrap();
        assert_eq!(expected_evaluations(&small, 768), 27_648);
        assert_eq!(expected_evaluations(&small, 76_800), 2_764_800);
        let big = AnnealSchedule::new(1000.0, 0.01, 0.99, 100).unwrap();
        assert_eq!(expected_evaluations(&big, 16_384), 1_877_622_784);
    }

    fn unit_interval() -> BoxDomain {
        BoxDomain::cube(1, 0.0, 1.0).unwrap()
    }

    #[test]
    fn neighbour_in_one_dimension_is_the_draw() {
        let key = StreamKey::new(3, 1, 0);
        let mut probe = make_stream(key);
        probe.next_uniform();
        let u = probe.next_uniform();
        let mut s = make_stream(key);
        let x2 = compute_neighbour(&[0.9], &unit_interval(), &mut s);
        assert_eq!(x2, vec![u]);
        assert_eq!(s.counter(), 2);
    }

    #[test]
    fn neighbour_changes_one_coordinate_and_stays_inside() {
        let domain = BoxDomain::cube(8, -512.0, 512.0).unwrap();
        let x = vec![100.0; 8];
        let mut s = make_stream(StreamKey::new(1, 0, 0));
        let n = 100_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let y = compute_neighbour(&x, &domain, &mut s);
            let changed: Vec<_> = (0..8).filter(|&k| y[k] != x[k]).collect();
            assert!(changed.len() <= 1);
            assert!(domain.contains(&y).unwrap());
            if let Some(&k) = changed.first() {
                sum += y[k];
                sum_sq += y[k] * y[k];
            }
        }
        let mean = sum / n as f64;
        let sd = (sum_sq / n as f64 - mean * mean).sqrt();
        let stderr = sd / (n as f64).sqrt();
        assert!(mean.abs() < 5.0 * stderr, "mean {mean}, stderr {stderr}");
    }

    #[test]
    fn accept_rules() {
        let mut s = make_stream(StreamKey::new(0, 0, 0));
        for _ in 0..1000 {
            assert!(metropolis_accept(-1.0, 0.5, &mut s));
            assert!(metropolis_accept(0.0, 1e-9, &mut s));
        }
        assert_eq!(s.counter(), 2000);
        // No overflow for huge downhill steps.
        assert!(metropolis_accept(-1e308, 1e-300, &mut s));
        assert!(!metropolis_accept(1e6, 1e-6, &mut s));
    }

    #[test]
    fn acceptance_frequency_matches_boltzmann() {
        let mut s = make_stream(StreamKey::new(11, 0, 0));
        let t = 2.5;
        let trials = 1_000_000;
        let hits = (0..trials)
            .filter(|_| metropolis_accept(t * std::f64::consts::LN_2, t, &mut s))
            .count();
        let freq = hits as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.0015, "{freq}");
    }

    fn constant(c: f64, n: usize) -> ObjectiveFunction {
        ObjectiveFunction::custom(
            "const",
            BoxDomain::cube(n, -1.0, 1.0).unwrap(),
            ReferenceOptimum::value_only(c),
            move |_| c,
        )
    }

    #[test]
    fn sweep_on_constant_objective_moves_and_keeps_energy() {
        let f = constant(3.0, 2);
        let mut obj = CountingObjective::new(&f, Precision::Double);
        let key = StreamKey::new(0, 0, 0);
        let mut state = ChainState::start(vec![0.5, 0.5], &mut obj, make_stream(key)).unwrap();
        let mut probe = make_stream(key);
        let expected = compute_neighbour(&state.x, f.domain(), &mut probe);
        metropolis_sweep(&mut state, &mut obj, 1.0, 1).unwrap();
        assert_eq!(state.x, expected);
        assert_eq!(state.energy, 3.0);
        assert_eq!(obj.evaluations(), 2);
        assert_eq!(state.stream.counter(), 3);
    }

    #[test]
    fn sweep_at_minimum_of_bowl_stays_put_when_cold() {
        let f = ObjectiveFunction::custom(
            "bowl",
            BoxDomain::cube(3, -1.0, 1.0).unwrap(),
            ReferenceOptimum::at_origin(0.0, 3),
            |x| x.iter().map(|v| v * v).sum(),
        );
        let mut obj = CountingObjective::new(&f, Precision::Double);
        let mut state =
            ChainState::start(vec![0.0; 3], &mut obj, make_stream(StreamKey::new(5, 0, 0)))
                .unwrap();
        metropolis_sweep(&mut state, &mut obj, 1e-12, 500).unwrap();
        assert_eq!(state.x, vec![0.0; 3]);
        assert_eq!(obj.evaluations(), 501);
        assert_eq!(state.stream.counter(), 1500);
    }

    #[test]
    fn sweep_rejects_bad_arguments() {
        let f = constant(1.0, 1);
        let mut obj = CountingObjective::new(&f, Precision::Double);
        let mut state =
            ChainState::start(vec![0.0], &mut obj, make_stream(StreamKey::new(0, 0, 0))).unwrap();
        assert!(metropolis_sweep(&mut state, &mut obj, 1.0, 0).is_err());
        assert!(metropolis_sweep(&mut state, &mut obj, 0.0, 1).is_err());
        assert!(matches!(
            ChainState::start(vec![2.0], &mut obj, make_stream(StreamKey::new(0, 0, 0))),
            Err(Error::InfeasibleStart)
        ));
    }

    #[test]
    fn single_precision_rounds_energies() {
        let f = crate::objective_bench::registry_get("F0_a").unwrap();
        let mut obj = CountingObjective::new(f, Precision::Single);
        let x = vec![1.234_567_891_234; 8];
        let e = obj.eval(&x);
        assert_eq!(e, e as f32 as f64);
    }
}
