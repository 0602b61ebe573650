//! Benchmark objectives: box domains, reference optima and the registry of
//! the 41 test problems (`F0_a` … `F19_b`).

mod data;
pub mod formulas;

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
pub use data::SHUBERT_MINIMIZERS;
pub use formulas::Formula;

/// Axis-aligned box `[l_1,u_1] × … × [l_n,u_n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidDomain("dimension must be at least 1".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for (k, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l < u) || !l.is_finite() || !u.is_finite() {
                return Err(Error::InvalidDomain(format!(
                    "bounds of coordinate {k} are not an interval: [{l}, {u}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The cube `[lo, hi]^n`.
    pub fn cube(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; n], vec![hi; n])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, k: usize) -> f64 {
        self.upper[k] - self.lower[k]
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }

    /// Inclusive membership test.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self.contains_unchecked(x))
    }

    pub(crate) fn contains_unchecked(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(xi, (l, u))| l <= xi && xi <= u)
    }

    /// Coordinate-wise projection onto the box.
    pub fn clamp(&self, x: &mut [f64]) {
        for (xi, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *xi = xi.clamp(*l, *u);
        }
    }

    pub(crate) fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// Known global minimum of a benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceOptimum {
    pub f_star: f64,
    pub minimizers: Vec<Vec<f64>>,
    pub location_known: bool,
    /// Location error is absolute when the minimiser is the origin and
    /// relative otherwise.
    pub location_at_origin: bool,
}

impl ReferenceOptimum {
    pub fn value_only(f_star: f64) -> Self {
        Self {
            f_star,
            minimizers: Vec::new(),
            location_known: false,
            location_at_origin: false,
        }
    }

    pub fn at(f_star: f64, minimizers: Vec<Vec<f64>>) -> Self {
        Self {
            f_star,
            minimizers,
            location_known: true,
            location_at_origin: false,
        }
    }

    pub fn at_origin(f_star: f64, n: usize) -> Self {
        Self {
            f_star,
            minimizers: vec![vec![0.0; n]],
            location_known: true,
            location_at_origin: true,
        }
    }
}

pub type CustomEval = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Evaluator {
    Builtin(Formula),
    Custom(CustomEval),
}

/// A box-constrained objective together with its reference optimum.
#[derive(Clone)]
pub struct ObjectiveFunction {
    id: String,
    name: String,
    domain: BoxDomain,
    eval: Evaluator,
    reference: ReferenceOptimum,
}

impl fmt::Debug for ObjectiveFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObjectiveFunction")
            .field("id", &self.id)
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("reference", &self.reference)
            .finish_non_exhaustive()
    }
}

impl ObjectiveFunction {
    fn builtin(
        id: &str,
        name: &str,
        formula: Formula,
        domain: BoxDomain,
        reference: ReferenceOptimum,
    ) -> Self {
        Self {
            id: id.to_owned(),
            name: name.to_owned(),
            domain,
            eval: Evaluator::Builtin(formula),
            reference,
        }
    }

    /// Wraps an arbitrary closure. Single-precision runs evaluate it in
    /// double precision and round the result.
    pub fn custom<F>(id: &str, domain: BoxDomain, reference: ReferenceOptimum, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            id: id.to_owned(),
            name: id.to_owned(),
            domain,
            eval: Evaluator::Custom(Arc::new(f)),
            reference,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn reference(&self) -> &ReferenceOptimum {
        &self.reference
    }

    pub fn formula(&self) -> Option<Formula> {
        match self.eval {
            Evaluator::Builtin(formula) => Some(formula),
            Evaluator::Custom(_) => None,
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.domain.check_dim(x)?;
        Ok(self.value(x))
    }

    /// Evaluation without the dimension check; `x.len()` must equal `dim()`.
    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.eval {
            Evaluator::Builtin(formula) => formula.value(x),
            Evaluator::Custom(f) => f(x),
        }
    }

    #[inline]
    pub fn value_f32(&self, x: &[f32]) -> f32 {
        match &self.eval {
            Evaluator::Builtin(formula) => formula.value(x),
            Evaluator::Custom(f) => {
                let wide: Vec<f64> = x.iter().map(|&v| v as f64).collect();
                f(&wide) as f32
            }
        }
    }

    /// Distance to the nearest listed minimiser: relative in the 2-norm, or
    /// absolute when the minimiser is the origin.
    pub fn location_error(&self, x: &[f64]) -> Result<f64> {
        self.domain.check_dim(x)?;
        let reference = &self.reference;
        if !reference.location_known || reference.minimizers.is_empty() {
            return Err(Error::LocationUnknown {
                id: self.id.clone(),
            });
        }
        let err = reference
            .minimizers
            .iter()
            .map(|m| {
                let dist = l2_distance(x, m);
                if reference.location_at_origin {
                    dist
                } else {
                    dist / l2_norm(m)
                }
            })
            .fold(f64::INFINITY, f64::min);
        Ok(err)
    }

    /// `|f_a - f_r|`.
    pub fn value_error(&self, f_a: f64) -> f64 {
        (f_a - self.reference.f_star).abs()
    }
}

fn l2_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

/// Schwefel minimiser coordinate.
pub const SCHWEFEL_ARGMIN: f64 = 420.968746;

fn cube(n: usize, lo: f64, hi: f64) -> BoxDomain {
    BoxDomain::cube(n, lo, hi).expect("static domain")
}

fn build_registry() -> Vec<ObjectiveFunction> {
    use std::f64::consts::PI;
    use Formula::*;

    let mut out = Vec::with_capacity(41);
    let mut push = |id: &str, name: &str, formula, domain, reference| {
        out.push(ObjectiveFunction::builtin(
            id, name, formula, domain, reference,
        ));
    };

    for (id, n) in [
        ("F0_a", 8),
        ("F0_b", 16),
        ("F0_c", 32),
        ("F0_d", 64),
        ("F0_e", 128),
        ("F0_f", 256),
        ("F0_g", 512),
    ] {
        push(
            id,
            "Schwefel",
            Schwefel,
            cube(n, -512.0, 512.0),
            ReferenceOptimum::at(-418.982887, vec![vec![SCHWEFEL_ARGMIN; n]]),
        );
    }
    for (id, n) in [("F1_a", 30), ("F1_b", 100), ("F1_c", 200), ("F1_d", 400)] {
        push(
            id,
            "Ackley",
            Ackley,
            cube(n, -30.0, 30.0),
            ReferenceOptimum::at_origin(0.0, n),
        );
    }
    push(
        "F2",
        "Branin",
        Branin,
        cube(2, -20.0, 20.0),
        ReferenceOptimum::at(
            0.397887,
            vec![vec![-PI, 12.275], vec![PI, 2.275], vec![9.425, 2.475]],
        ),
    );
    push(
        "F3_a",
        "Cosine mixture",
        CosineMixture,
        cube(2, -1.0, 1.0),
        ReferenceOptimum::at_origin(-0.2, 2),
    );
    push(
        "F3_b",
        "Cosine mixture",
        CosineMixture,
        cube(4, -1.0, 1.0),
        ReferenceOptimum::at_origin(-0.4, 4),
    );
    push(
        "F4",
        "Dekkers and Aarts",
        DekkersAarts,
        cube(2, -20.0, 20.0),
        ReferenceOptimum::at(-24776.518, vec![vec![0.0, -14.945], vec![0.0, 14.945]]),
    );
    push(
        "F5",
        "Easom",
        Easom,
        cube(2, -10.0, 10.0),
        ReferenceOptimum::at(-1.0, vec![vec![PI, PI]]),
    );
    push(
        "F6",
        "Exponential",
        Exponential,
        cube(4, -1.0, 1.0),
        ReferenceOptimum::at_origin(-1.0, 4),
    );
    push(
        "F7",
        "Goldstein and Price",
        GoldsteinPrice,
        cube(2, -2.0, 2.0),
        ReferenceOptimum::at(3.0, vec![vec![0.0, -1.0]]),
    );
    for (id, n) in [("F8_a", 100), ("F8_b", 200), ("F8_c", 400)] {
        push(
            id,
            "Griewank",
            Griewank,
            cube(n, -600.0, 600.0),
            ReferenceOptimum::at_origin(0.0, n),
        );
    }
    push(
        "F9",
        "Himmelblau",
        Himmelblau,
        cube(2, -6.0, 6.0),
        ReferenceOptimum::at(
            0.0,
            vec![
                vec![3.0, 2.0],
                vec![-2.805118, 3.131312],
                vec![-3.779310, -3.283186],
                vec![3.584428, -1.848126],
            ],
        ),
    );
    for (id, n) in [("F10_a", 2), ("F10_b", 5), ("F10_c", 10)] {
        push(
            id,
            "Levy and Montalvo",
            LevyMontalvo,
            cube(n, -10.0, 10.0),
            ReferenceOptimum::at(0.0, vec![vec![-1.0; n]]),
        );
    }
    push(
        "F11_a",
        "Modified Langerman",
        ModifiedLangerman,
        cube(2, 0.0, 10.0),
        ReferenceOptimum::at(-1.080938, vec![vec![9.6810707, 0.6666515]]),
    );
    push(
        "F11_b",
        "Modified Langerman",
        ModifiedLangerman,
        cube(5, 0.0, 10.0),
        ReferenceOptimum::at(
            -0.964999,
            vec![vec![8.074000, 8.777001, 3.467004, 1.863013, 6.707995]],
        ),
    );
    for (id, n, f_star) in [
        ("F12_a", 2, -1.8013),
        ("F12_b", 5, -4.6877),
        ("F12_c", 10, -9.6602),
    ] {
        push(
            id,
            "Michalewicz",
            Michalewicz,
            cube(n, 0.0, PI),
            ReferenceOptimum::value_only(f_star),
        );
    }
    for (id, n) in [("F13_a", 100), ("F13_b", 400)] {
        push(
            id,
            "Rastrigin",
            Rastrigin,
            cube(n, -5.12, 5.12),
            ReferenceOptimum::at_origin(0.0, n),
        );
    }
    push(
        "F14",
        "Generalized Rosenbrock",
        Rosenbrock,
        cube(4, -2.048, 2.048),
        ReferenceOptimum::at(0.0, vec![vec![1.0; 4]]),
    );
    push(
        "F15",
        "Salomon",
        Salomon,
        cube(10, -100.0, 100.0),
        ReferenceOptimum::at_origin(0.0, 10),
    );
    push(
        "F16",
        "Six-Hump Camel Back",
        SixHumpCamel,
        BoxDomain::new(vec![-3.0, -2.0], vec![3.0, 2.0]).expect("static domain"),
        ReferenceOptimum::at(-1.0316, vec![vec![-0.0898, 0.7126], vec![0.0898, -0.7126]]),
    );
    push(
        "F17",
        "Shubert",
        Shubert,
        cube(2, -10.0, 10.0),
        ReferenceOptimum::at(
            -186.7309,
            SHUBERT_MINIMIZERS.iter().map(|p| p.to_vec()).collect(),
        ),
    );
    for (id, m, f_star) in [
        ("F18_a", 5, -10.1532),
        ("F18_b", 7, -10.4029),
        ("F18_c", 10, -10.5364),
    ] {
        push(
            id,
            &format!("Shekel m={m}"),
            Shekel { m },
            cube(4, 0.0, 10.0),
            ReferenceOptimum::at(f_star, vec![vec![4.0; 4]]),
        );
    }
    push(
        "F19_a",
        "Modified Shekel Foxholes",
        ModifiedFoxholes,
        cube(2, -5.0, 15.0),
        ReferenceOptimum::at(-12.1190, vec![vec![8.024, 9.146]]),
    );
    push(
        "F19_b",
        "Modified Shekel Foxholes",
        ModifiedFoxholes,
        cube(5, -5.0, 15.0),
        ReferenceOptimum::at(-10.4056, vec![vec![8.025, 9.152, 5.114, 7.621, 4.564]]),
    );
    out
}

/// All 41 benchmark problems, in table order.
pub fn registry() -> &'static [ObjectiveFunction] {
    static REGISTRY: OnceLock<Vec<ObjectiveFunction>> = OnceLock::new();
    REGISTRY.get_or_init(build_registry)
}

pub fn registry_ids() -> impl Iterator<Item = &'static str> {
    registry().iter().map(|f| f.id.as_str())
}

pub fn registry_get(id: &str) -> Result<&'static ObjectiveFunction> {
    registry()
        .iter()
        .find(|f| f.id == id)
        .ok_or_else(|| Error::UnknownFunction {
            id: id.to_owned(),
            valid: registry_ids().collect::<Vec<_>>().join(", "),
        })
}
