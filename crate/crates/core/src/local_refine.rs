//! Bound-constrained Nelder-Mead and the hybrid anneal-then-polish driver.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::engines::{run_synchronous, EngineConfig, Phase, RefineSummary, RunResult, TraceRecord};
use crate::error::{Error, Result};
use crate::objective_bench::{BoxDomain, ObjectiveFunction};
use crate::sa_core::AnnealSchedule;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NelderMeadConfig {
    pub reflect: f64,
    pub expand: f64,
    pub contract: f64,
    pub shrink: f64,
    /// Stop when `f(worst) - f(best) <= f_tol`.
    pub f_tol: f64,
    /// Stop when every vertex is within `x_tol` (max-norm) of the best one.
    pub x_tol: f64,
    /// Iteration cap; `None` means `50000 * n`.
    pub max_iters: Option<usize>,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            reflect: 1.0,
            expand: 2.0,
            contract: 0.5,
            shrink: 0.5,
            f_tol: 1e-12,
            x_tol: 1e-10,
            max_iters: None,
        }
    }
}

impl NelderMeadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.reflect > 0.0) {
            return Err(Error::config("reflect", "must be positive"));
        }
        if !(self.expand > 1.0) {
            return Err(Error::config("expand", "must exceed 1"));
        }
        if !(self.contract > 0.0 && self.contract < 1.0) {
            return Err(Error::config("contract", "must lie in (0, 1)"));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::config("shrink", "must lie in (0, 1)"));
        }
        if !(self.f_tol >= 0.0) || !(self.x_tol >= 0.0) {
            return Err(Error::config("f_tol", "tolerances must be non-negative"));
        }
        Ok(())
    }

    fn iteration_cap(&self, n: usize) -> usize {
        self.max_iters.unwrap_or(50_000 * n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub x: Vec<f64>,
    pub value: f64,
}

/// `n + 1` vertices kept sorted by ascending value.
#[derive(Debug, Clone)]
pub struct Simplex {
    vertices: Vec<Vertex>,
}

impl Simplex {
    /// Vertex 0 is `start`; vertex `k` moves coordinate `k-1` by 5% of the box
    /// width, towards the interior if the forward step would leave the box.
    fn initial(start: &[f64], domain: &BoxDomain, eval: impl FnMut(&[f64]) -> f64) -> Self {
        Self::around(start, f64::INFINITY, domain, eval)
    }

    /// Axis simplex around `start` with steps `min(step, 5% of the width)`.
    fn around(
        start: &[f64],
        step: f64,
        domain: &BoxDomain,
        mut eval: impl FnMut(&[f64]) -> f64,
    ) -> Self {
        let n = start.len();
        let mut vertices = Vec::with_capacity(n + 1);
        vertices.push(Vertex {
            x: start.to_vec(),
            value: eval(start),
        });
        for k in 0..n {
            let mut x = start.to_vec();
            let h = step.min(0.05 * domain.width(k));
            x[k] = if x[k] + h <= domain.upper()[k] {
                x[k] + h
            } else {
                x[k] - h
            };
            let value = eval(&x);
            vertices.push(Vertex { x, value });
        }
        let mut s = Self { vertices };
        s.sort();
        s
    }

    /// True when some coordinate is identical across all vertices, which
    /// happens once clamping has flattened the simplex onto a face of the box.
    fn is_flat(&self) -> bool {
        let first = &self.vertices[0].x;
        (0..first.len()).any(|k| self.vertices[1..].iter().all(|v| v.x[k] == first[k]))
    }

    fn sort(&mut self) {
        self.vertices.sort_by(|a, b| a.value.total_cmp(&b.value));
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn best(&self) -> &Vertex {
        &self.vertices[0]
    }

    fn worst(&self) -> &Vertex {
        &self.vertices[self.vertices.len() - 1]
    }

    fn value_spread(&self) -> f64 {
        self.worst().value - self.best().value
    }

    fn diameter(&self) -> f64 {
        let best = &self.best().x;
        self.vertices[1..]
            .iter()
            .flat_map(|v| v.x.iter().zip(best).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }

    /// Centroid of all vertices except the worst.
    fn centroid(&self) -> Vec<f64> {
        let n = self.vertices.len() - 1;
        let mut c = vec![0.0; self.vertices[0].x.len()];
        for v in &self.vertices[..n] {
            for (ci, xi) in c.iter_mut().zip(&v.x) {
                *ci += xi;
            }
        }
        for ci in &mut c {
            *ci /= n as f64;
        }
        c
    }

    /// Replaces the worst vertex and restores the ordering. Inserting after
    /// equal values keeps the incumbent best in place.
    fn replace_worst(&mut self, vertex: Vertex) {
        self.vertices.pop();
        let pos = self
            .vertices
            .partition_point(|v| v.value.total_cmp(&vertex.value).is_le());
        self.vertices.insert(pos, vertex);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadOutcome {
    pub x_best: Vec<f64>,
    pub f_best: f64,
    pub iterations: usize,
    pub evaluations: u64,
}

/// `centroid + t * (towards - centroid)`, projected onto the box.
fn affine(centroid: &[f64], towards: &[f64], t: f64, domain: &BoxDomain) -> Vec<f64> {
    let mut x: Vec<f64> = centroid
        .iter()
        .zip(towards)
        .map(|(c, w)| c + t * (w - c))
        .collect();
    domain.clamp(&mut x);
    x
}

pub fn nelder_mead_minimize(
    f: &ObjectiveFunction,
    x_start: &[f64],
    cfg: &NelderMeadConfig,
) -> Result<NelderMeadOutcome> {
    cfg.validate()?;
    let domain = f.domain();
    if !domain.contains(x_start)? {
        return Err(Error::InfeasibleStart);
    }
    let mut evaluations = 0u64;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        f.value(x)
    };

    let mut simplex = Simplex::initial(x_start, domain, &mut eval);
    let cap = cfg.iteration_cap(f.dim());
    let mut iterations = 0;

    while iterations < cap {
        let diameter = simplex.diameter();
        if simplex.value_spread() <= cfg.f_tol || diameter <= cfg.x_tol {
            break;
        }
        iterations += 1;

        if simplex.is_flat() {
            let best = simplex.best().x.clone();
            simplex = Simplex::around(&best, diameter, domain, &mut eval);
            continue;
        }

        let centroid = simplex.centroid();
        let worst = simplex.worst().clone();
        let second_worst = simplex.vertices[simplex.vertices.len() - 2].value;
        let best = simplex.best().value;

        let xr = affine(&centroid, &worst.x, -cfg.reflect, domain);
        let fr = eval(&xr);

        if fr < best {
            let xe = affine(&centroid, &worst.x, -cfg.reflect * cfg.expand, domain);
            let fe = eval(&xe);
            let next = if fe < fr {
                Vertex { x: xe, value: fe }
            } else {
                Vertex { x: xr, value: fr }
            };
            simplex.replace_worst(next);
            continue;
        }
        if fr < second_worst {
            simplex.replace_worst(Vertex { x: xr, value: fr });
            continue;
        }
        let contracted = if fr < worst.value {
            // Outside contraction, towards the reflected point.
            let xc = affine(&centroid, &xr, cfg.contract, domain);
            let fc = eval(&xc);
            (fc <= fr).then_some(Vertex { x: xc, value: fc })
        } else {
            let xc = affine(&centroid, &worst.x, cfg.contract, domain);
            let fc = eval(&xc);
            (fc < worst.value).then_some(Vertex { x: xc, value: fc })
        };
        match contracted {
            Some(v) => simplex.replace_worst(v),
            None => {
                let anchor = simplex.best().x.clone();
                for v in simplex.vertices.iter_mut().skip(1) {
                    v.x = affine(&anchor, &v.x, cfg.shrink, domain);
                    v.value = eval(&v.x);
                }
                simplex.sort();
            }
        }
    }

    let best = simplex.best();
    Ok(NelderMeadOutcome {
        x_best: best.x.clone(),
        f_best: best.value,
        iterations,
        evaluations,
    })
}

/// Synchronous annealing on `truncated_sched` followed by Nelder-Mead from
/// the annealing result. The trace gets one extra `Refine` record.
pub fn hybrid_run(
    f: &ObjectiveFunction,
    cfg: &EngineConfig,
    truncated_sched: &AnnealSchedule,
    nm_cfg: &NelderMeadConfig,
) -> Result<RunResult> {
    nm_cfg.validate()?;
    let started = Instant::now();
    let mut anneal_cfg = cfg.clone();
    anneal_cfg.schedule = *truncated_sched;
    let mut result = run_synchronous(f, &anneal_cfg)?;

    let refine_started = Instant::now();
    let nm = nelder_mead_minimize(f, &result.best_x, nm_cfg)?;
    let refine_time = refine_started.elapsed();

    let start_f = result.best_f;
    let total = result.anneal_evaluations + nm.evaluations;
    let best_so_far = result
        .trace
        .last()
        .map_or(nm.f_best, |r| r.best_so_far.min(nm.f_best));
    result.trace.push(TraceRecord {
        level: result.trace.len(),
        cumulative_evaluations: total,
        best_so_far,
        phase: Phase::Refine,
    });
    // NM's best vertex is never worse than its start vertex, which is the
    // annealing result re-evaluated in double precision.
    result.best_x = nm.x_best;
    result.best_f = nm.f_best;
    result.evaluations = total;
    result.refine = Some(RefineSummary {
        start_f,
        f_best: nm.f_best,
        iterations: nm.iterations,
        evaluations: nm.evaluations,
        wall_time: refine_time,
    });
    result.wall_time = started.elapsed();
    Ok(result)
}
