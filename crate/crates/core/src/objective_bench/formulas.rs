//! Closed-form test objectives, generic over the floating-point type so the
//! engines can evaluate them in single or double precision.

use num_traits::{Float, FloatConst};

use super::data::{FOXHOLES_A, FOXHOLES_C, LANGERMAN_A, LANGERMAN_C, SHEKEL_A, SHEKEL_C};

/// Exponent `m` of the Michalewicz function.
pub const MICHALEWICZ_STEEPNESS: i32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formula {
    Schwefel,
    Ackley,
    Branin,
    CosineMixture,
    DekkersAarts,
    Easom,
    Exponential,
    GoldsteinPrice,
    Griewank,
    Himmelblau,
    LevyMontalvo,
    ModifiedLangerman,
    Michalewicz,
    Rastrigin,
    Rosenbrock,
    Salomon,
    SixHumpCamel,
    Shubert,
    /// Shekel with the first `m` centres.
    Shekel {
        m: usize,
    },
    ModifiedFoxholes,
}

#[inline]
fn k<T: Float>(v: f64) -> T {
    T::from(v).unwrap()
}

impl Formula {
    pub fn value<T: Float + FloatConst>(self, x: &[T]) -> T {
        match self {
            Formula::Schwefel => schwefel(x),
            Formula::Ackley => ackley(x),
            Formula::Branin => branin(x),
            Formula::CosineMixture => cosine_mixture(x),
            Formula::DekkersAarts => dekkers_aarts(x),
            Formula::Easom => easom(x),
            Formula::Exponential => exponential(x),
            Formula::GoldsteinPrice => goldstein_price(x),
            Formula::Griewank => griewank(x),
            Formula::Himmelblau => himmelblau(x),
            Formula::LevyMontalvo => levy_montalvo(x),
            Formula::ModifiedLangerman => modified_langerman(x),
            Formula::Michalewicz => michalewicz(x),
            Formula::Rastrigin => rastrigin(x),
            Formula::Rosenbrock => rosenbrock(x),
            Formula::Salomon => salomon(x),
            Formula::SixHumpCamel => six_hump_camel(x),
            Formula::Shubert => shubert(x),
            Formula::Shekel { m } => shekel(x, m),
            Formula::ModifiedFoxholes => modified_foxholes(x),
        }
    }
}

fn sum_sq<T: Float>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |acc, &xi| acc + xi * xi)
}

fn dim<T: Float>(x: &[T]) -> T {
    T::from(x.len()).unwrap()
}

pub fn schwefel<T: Float>(x: &[T]) -> T {
    let s = x
        .iter()
        .fold(T::zero(), |acc, &xi| acc + xi * xi.abs().sqrt().sin());
    -s / dim(x)
}

pub fn ackley<T: Float + FloatConst>(x: &[T]) -> T {
    let n = dim(x);
    let two_pi = T::PI() + T::PI();
    let cos_sum = x
        .iter()
        .fold(T::zero(), |acc, &xi| acc + (two_pi * xi).cos());
    -k::<T>(20.0) * (-k::<T>(0.2) * (sum_sq(x) / n).sqrt()).exp() - (cos_sum / n).exp()
        + k(20.0)
        + T::E()
}

pub fn branin<T: Float + FloatConst>(x: &[T]) -> T {
    let pi = T::PI();
    let (x1, x2) = (x[0], x[1]);
    let a = x2 - k::<T>(5.1) / (k::<T>(4.0) * pi * pi) * x1 * x1 + k::<T>(5.0) / pi * x1 - k(6.0);
    a * a + k::<T>(10.0) * (T::one() - T::one() / (k::<T>(8.0) * pi)) * x1.cos() + k(10.0)
}

/// `0.1·Σcos(5πx) - Σx²` written for minimisation, so the origin is the
/// global minimiser with value `-0.1·n`.
pub fn cosine_mixture<T: Float + FloatConst>(x: &[T]) -> T {
    let five_pi = k::<T>(5.0) * T::PI();
    let cos_sum = x
        .iter()
        .fold(T::zero(), |acc, &xi| acc + (five_pi * xi).cos());
    -k::<T>(0.1) * cos_sum + sum_sq(x)
}

pub fn dekkers_aarts<T: Float>(x: &[T]) -> T {
    let (x1, x2) = (x[0], x[1]);
    let r = x1 * x1 + x2 * x2;
    let r2 = r * r;
    k::<T>(1e5) * x1 * x1 + x2 * x2 - r2 + k::<T>(1e-5) * r2 * r2
}

pub fn easom<T: Float + FloatConst>(x: &[T]) -> T {
    let pi = T::PI();
    let (x1, x2) = (x[0], x[1]);
    let d1 = x1 - pi;
    let d2 = x2 - pi;
    -x1.cos() * x2.cos() * (-d1 * d1 - d2 * d2).exp()
}

pub fn exponential<T: Float>(x: &[T]) -> T {
    -(-k::<T>(0.5) * sum_sq(x)).exp()
}

pub fn goldstein_price<T: Float>(x: &[T]) -> T {
    let (x1, x2) = (x[0], x[1]);
    let s = x1 + x2 + T::one();
    let a = T::one()
        + s * s
            * (k::<T>(19.0) - k::<T>(14.0) * x1 + k::<T>(3.0) * x1 * x1 - k::<T>(14.0) * x2
                + k::<T>(6.0) * x1 * x2
                + k::<T>(3.0) * x2 * x2);
    let d = k::<T>(2.0) * x1 - k::<T>(3.0) * x2;
    let b = k::<T>(30.0)
        + d * d
            * (k::<T>(18.0) - k::<T>(32.0) * x1 + k::<T>(12.0) * x1 * x1 + k::<T>(48.0) * x2
                - k::<T>(36.0) * x1 * x2
                + k::<T>(27.0) * x2 * x2);
    a * b
}

/// `1 + Σx²/4000 - Π cos(x_i/√i)`, zero at the origin.
pub fn griewank<T: Float>(x: &[T]) -> T {
    let mut prod = T::one();
    for (i, &xi) in x.iter().enumerate() {
        prod = prod * (xi / T::from(i + 1).unwrap().sqrt()).cos();
    }
    T::one() + sum_sq(x) / k(4000.0) - prod
}

pub fn himmelblau<T: Float>(x: &[T]) -> T {
    let (x1, x2) = (x[0], x[1]);
    let a = x1 * x1 + x2 - k(11.0);
    let b = x1 + x2 * x2 - k(7.0);
    a * a + b * b
}

pub fn levy_montalvo<T: Float + FloatConst>(x: &[T]) -> T {
    let pi = T::PI();
    let quarter = k::<T>(0.25);
    let y = |xi: T| T::one() + quarter * (xi + T::one());
    let n = x.len();
    let s1 = (pi * y(x[0])).sin();
    let mut total = k::<T>(10.0) * s1 * s1;
    for i in 0..n - 1 {
        let yi = y(x[i]) - T::one();
        let s = (pi * y(x[i + 1])).sin();
        total = total + yi * yi * (T::one() + k::<T>(10.0) * s * s);
    }
    let yn = y(x[n - 1]) - T::one();
    total = total + yn * yn;
    pi / dim(x) * total
}

/// Uses the first `n` columns of the centre matrix.
pub fn modified_langerman<T: Float + FloatConst>(x: &[T]) -> T {
    let pi = T::PI();
    let mut total = T::zero();
    for (row, &c) in LANGERMAN_A.iter().zip(LANGERMAN_C.iter()) {
        let d = sq_dist(x, row);
        total = total + k::<T>(c) * (-d / pi).exp() * (pi * d).cos();
    }
    -total
}

fn sq_dist<T: Float>(x: &[T], row: &[f64]) -> T {
    x.iter().zip(row.iter()).fold(T::zero(), |acc, (&xi, &a)| {
        let d = xi - k(a);
        acc + d * d
    })
}

pub fn michalewicz<T: Float + FloatConst>(x: &[T]) -> T {
    let pi = T::PI();
    let mut total = T::zero();
    for (i, &xi) in x.iter().enumerate() {
        let idx = T::from(i + 1).unwrap();
        let s = (idx * xi * xi / pi).sin();
        total = total + xi.sin() * s.powi(2 * MICHALEWICZ_STEEPNESS);
    }
    -total
}

pub fn rastrigin<T: Float + FloatConst>(x: &[T]) -> T {
    let two_pi = T::PI() + T::PI();
    let s = x.iter().fold(T::zero(), |acc, &xi| {
        acc + xi * xi - k::<T>(10.0) * (two_pi * xi).cos()
    });
    k::<T>(10.0) * dim(x) + s
}

pub fn rosenbrock<T: Float>(x: &[T]) -> T {
    x.windows(2).fold(T::zero(), |acc, w| {
        let a = w[1] - w[0] * w[0];
        let b = T::one() - w[0];
        acc + k::<T>(100.0) * a * a + b * b
    })
}

pub fn salomon<T: Float + FloatConst>(x: &[T]) -> T {
    let r = sum_sq(x).sqrt();
    T::one() - (k::<T>(2.0) * T::PI() * r).cos() + k::<T>(0.1) * r
}

pub fn six_hump_camel<T: Float>(x: &[T]) -> T {
    let (x1, x2) = (x[0], x[1]);
    let x1s = x1 * x1;
    let x2s = x2 * x2;
    (k::<T>(4.0) - k::<T>(2.1) * x1s + x1s * x1s / k(3.0)) * x1s
        + x1 * x2
        + (k::<T>(-4.0) + k::<T>(4.0) * x2s) * x2s
}

pub fn shubert<T: Float>(x: &[T]) -> T {
    x.iter().fold(T::one(), |acc, &xi| {
        let mut s = T::zero();
        for j in 1..=5 {
            let jf = T::from(j).unwrap();
            s = s + jf * ((jf + T::one()) * xi + jf).cos();
        }
        acc * s
    })
}

pub fn shekel<T: Float>(x: &[T], m: usize) -> T {
    let mut total = T::zero();
    for (row, &c) in SHEKEL_A.iter().zip(SHEKEL_C.iter()).take(m) {
        total = total + T::one() / (sq_dist(x, row) + k(c));
    }
    -total
}

/// Uses the first `n` columns of the centre matrix.
pub fn modified_foxholes<T: Float>(x: &[T]) -> T {
    let mut total = T::zero();
    for (row, &c) in FOXHOLES_A.iter().zip(FOXHOLES_C.iter()) {
        total = total + T::one() / (sq_dist(x, row) + k(c));
    }
    -total
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ackley_origin_is_zero() {
        let x = vec![0.0; 30];
        assert!(ackley(&x).abs() < 1e-12);
    }

    #[test]
    fn easom_at_pi_pi() {
        assert_eq!(easom(&[PI, PI]), -1.0);
    }

    #[test]
    fn schwefel_optimum() {
        let x = vec![420.968746; 8];
        assert!((schwefel(&x) + 418.982887).abs() < 1e-4);
    }

    #[test]
    fn shekel_five_hand_sum() {
        // 1/0.1 + 1/36.2 + 1/64.2 + 1/16.4 + 1/20.4
        let hand = -(1.0 / 0.1 + 1.0 / 36.2 + 1.0 / 64.2 + 1.0 / 16.4 + 1.0 / 20.4);
        let v = shekel(&[4.0, 4.0, 4.0, 4.0], 5);
        assert!((v - hand).abs() < 1e-12);
        assert!((v + 10.1532).abs() < 5e-3);
    }

    #[test]
    fn griewank_origin_is_zero_for_any_dim() {
        for n in [1, 2, 50, 400] {
            assert_eq!(griewank(&vec![0.0; n]), 0.0);
        }
    }

    #[test]
    fn cosine_mixture_origin_beats_corners() {
        let origin = cosine_mixture(&[0.0, 0.0]);
        assert!((origin + 0.2).abs() < 1e-15);
        assert!(cosine_mixture(&[1.0, 1.0]) > origin);
    }

    #[test]
    fn single_precision_tracks_double() {
        let x64 = [420.968746f64; 4];
        let x32 = [420.96875f32; 4];
        let d = schwefel(&x64);
        let s = schwefel(&x32) as f64;
        assert!((d - s).abs() < 1e-3);
    }
}
