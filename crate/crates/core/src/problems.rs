//! Benchmark problems: ZDT3, DTLZ5, DTLZ7 and the RE21/RE33/RE36/RE37
//! engineering problems, with analytic Jacobians and reference fronts.
//!
//! Sources of the formulas:
//! - ZDT3: Zitzler, Deb & Thiele (2000), "Comparison of multiobjective evolutionary
//!   algorithms: empirical results".
//! - DTLZ5, DTLZ7: Deb, Thiele, Laumanns & Zitzler (2005), "Scalable test problems
//!   for evolutionary multiobjective optimization".
//! - RE21 (four bar truss), RE33 (disc brake), RE36 (gear train), RE37 (rocket
//!   injector): Tanabe & Ishibuchi (2020), "An easy-to-use real-world multi-objective
//!   optimization problem suite", matching the reference `reproblem.py` definitions.
//!   Reformulated constraint terms use `max(0, -g)`. RE36 variables are treated as
//!   continuous (the reference code rounds them to integers).
//!
//! Non-smooth terms (`abs`, `max`) differentiate along the active branch; ties go
//! to the lowest branch index (`abs(u)` at `u = 0` uses `+u`, `max(0, v)` at `v = 0`
//! uses `0`, `max(x1..x4)` uses the first maximal variable).

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use crate::domain::{nondominated_indices, ObjectiveVector};
use crate::error::{check_len, Error, Result};
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// Problem dimensions and box bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec<F> {
    pub name: &'static str,
    pub n_objectives: usize,
    pub n_variables: usize,
    pub lower_bounds: Vec<F>,
    pub upper_bounds: Vec<F>,
}

impl<F: Scalar> ProblemSpec<F> {
    pub fn midpoint(&self) -> Vec<F> {
        self.lower_bounds
            .iter()
            .zip(&self.upper_bounds)
            .map(|(&l, &u)| (l + u) / F::lit(2.0))
            .collect()
    }

    pub fn check_bounds(&self, x: &[F]) -> Result<()> {
        check_len(self.n_variables, x.len())?;
        for (index, ((&v, &lo), &hi)) in x
            .iter()
            .zip(&self.lower_bounds)
            .zip(&self.upper_bounds)
            .enumerate()
        {
            if !(v >= lo && v <= hi) {
                return Err(Error::OutOfBounds {
                    index,
                    value: v.to_f64_lossy(),
                    lower: lo.to_f64_lossy(),
                    upper: hi.to_f64_lossy(),
                });
            }
        }
        Ok(())
    }
}

/// Dense row-major `m x d` matrix of partial derivatives `d f_i / d x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Scalar> Jacobian<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// A differentiable box-constrained multi-objective problem.
pub trait Problem<F: Scalar>: Sync {
    fn spec(&self) -> &ProblemSpec<F>;

    /// Objective values at `x`. Inputs outside the box are rejected, never clamped.
    fn evaluate(&self, x: &[F]) -> Result<ObjectiveVector<F>>;

    /// Analytic Jacobian at an interior point.
    fn jacobian(&self, x: &[F]) -> Result<Jacobian<F>>;
}

impl<F: Scalar, P: Problem<F> + ?Sized> Problem<F> for &P {
    fn spec(&self) -> &ProblemSpec<F> {
        (**self).spec()
    }

    fn evaluate(&self, x: &[F]) -> Result<ObjectiveVector<F>> {
        (**self).evaluate(x)
    }

    fn jacobian(&self, x: &[F]) -> Result<Jacobian<F>> {
        (**self).jacobian(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Benchmark {
    Zdt3,
    Dtlz5,
    Dtlz7,
    Re21,
    Re33,
    Re36,
    Re37,
}

impl Benchmark {
    pub const ALL: [Benchmark; 7] = [
        Benchmark::Zdt3,
        Benchmark::Dtlz5,
        Benchmark::Dtlz7,
        Benchmark::Re21,
        Benchmark::Re33,
        Benchmark::Re36,
        Benchmark::Re37,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Zdt3 => "ZDT3",
            Benchmark::Dtlz5 => "DTLZ5",
            Benchmark::Dtlz7 => "DTLZ7",
            Benchmark::Re21 => "RE21",
            Benchmark::Re33 => "RE33",
            Benchmark::Re36 => "RE36",
            Benchmark::Re37 => "RE37",
        }
    }

    /// `(m, d)`.
    pub fn dims(self) -> (usize, usize) {
        match self {
            Benchmark::Zdt3 => (2, 10),
            Benchmark::Dtlz5 | Benchmark::Dtlz7 => (3, 10),
            Benchmark::Re21 => (2, 4),
            Benchmark::Re33 | Benchmark::Re36 | Benchmark::Re37 => (3, 4),
        }
    }

    fn bounds(self) -> (Vec<f64>, Vec<f64>) {
        let (_, d) = self.dims();
        match self {
            Benchmark::Zdt3 | Benchmark::Dtlz5 | Benchmark::Dtlz7 | Benchmark::Re37 => {
                (vec![0.0; d], vec![1.0; d])
            }
            // a = F / sigma = 1
            Benchmark::Re21 => (vec![1.0, SQRT_2, SQRT_2, 1.0], vec![3.0; 4]),
            Benchmark::Re33 => (
                vec![55.0, 75.0, 1000.0, 11.0],
                vec![80.0, 110.0, 3000.0, 20.0],
            ),
            Benchmark::Re36 => (vec![12.0; 4], vec![60.0; 4]),
        }
    }

    pub fn spec<F: Scalar>(self) -> ProblemSpec<F> {
        let (m, d) = self.dims();
        let (lo, hi) = self.bounds();
        let spec = ProblemSpec {
            name: self.name(),
            n_objectives: m,
            n_variables: d,
            lower_bounds: lo.into_iter().map(F::lit).collect(),
            upper_bounds: hi.into_iter().map(F::lit).collect(),
        };
        assert_eq!(spec.lower_bounds.len(), d);
        assert!(spec
            .lower_bounds
            .iter()
            .zip(&spec.upper_bounds)
            .all(|(l, u)| l < u));
        spec
    }

    pub fn problem<F: Scalar>(self) -> BenchmarkProblem<F> {
        BenchmarkProblem {
            kind: self,
            spec: self.spec(),
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Benchmark::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown problem `{s}`")))
    }
}

/// A registered benchmark bound to a scalar type.
#[derive(Debug, Clone)]
pub struct BenchmarkProblem<F> {
    kind: Benchmark,
    spec: ProblemSpec<F>,
}

impl<F: Scalar> BenchmarkProblem<F> {
    pub fn kind(&self) -> Benchmark {
        self.kind
    }
}

impl<F: Scalar> Problem<F> for BenchmarkProblem<F> {
    fn spec(&self) -> &ProblemSpec<F> {
        &self.spec
    }

    fn evaluate(&self, x: &[F]) -> Result<ObjectiveVector<F>> {
        self.spec.check_bounds(x)?;
        let f = match self.kind {
            Benchmark::Zdt3 => zdt3(x),
            Benchmark::Dtlz5 => dtlz5(x),
            Benchmark::Dtlz7 => dtlz7(x),
            Benchmark::Re21 => re21(x),
            Benchmark::Re33 => re33(x),
            Benchmark::Re36 => re36(x),
            Benchmark::Re37 => re37(x),
        };
        ObjectiveVector::new(f)
    }

    fn jacobian(&self, x: &[F]) -> Result<Jacobian<F>> {
        self.spec.check_bounds(x)?;
        let j = match self.kind {
            Benchmark::Zdt3 => zdt3_jacobian(x),
            Benchmark::Dtlz5 => dtlz5_jacobian(x),
            Benchmark::Dtlz7 => dtlz7_jacobian(x),
            Benchmark::Re21 => re21_jacobian(x),
            Benchmark::Re33 => re33_jacobian(x),
            Benchmark::Re36 => re36_jacobian(x),
            Benchmark::Re37 => re37_jacobian(x),
        };
        if j.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericState(format!(
                "{} jacobian is not finite at {x:?}",
                self.kind
            )));
        }
        Ok(j)
    }
}

#[inline]
fn c<F: Scalar>(v: f64) -> F {
    F::lit(v)
}

// ZDT3: f1 = x1, g = 1 + 9/(n-1) sum x2..xn, f2 = g - sqrt(f1 g) - f1 sin(10 pi f1).

fn zdt3<F: Scalar>(x: &[F]) -> Vec<F> {
    let n = x.len();
    let f1 = x[0];
    let g = F::one() + c::<F>(9.0) / F::from_usize_lossy(n - 1) * x[1..].iter().copied().sum();
    let f2 = g - (f1 * g).sqrt() - f1 * (c::<F>(10.0 * PI) * f1).sin();
    vec![f1, f2]
}

fn zdt3_jacobian<F: Scalar>(x: &[F]) -> Jacobian<F> {
    let n = x.len();
    let mut j = Jacobian::zeros(2, n);
    let f1 = x[0];
    let scale = c::<F>(9.0) / F::from_usize_lossy(n - 1);
    let g = F::one() + scale * x[1..].iter().copied().sum();
    let half = c::<F>(0.5);
    let w = c::<F>(10.0 * PI);
    j.set(0, 0, F::one());
    j.set(
        1,
        0,
        -half * (g / f1).sqrt() - (w * f1).sin() - w * f1 * (w * f1).cos(),
    );
    let dg = (F::one() - half * (f1 / g).sqrt()) * scale;
    for k in 1..n {
        j.set(1, k, dg);
    }
    j
}

// DTLZ5 (m = 3): g = sum over x3.. of (x - 0.5)^2,
// theta1 = pi/2 x1, theta2 = pi / (4 (1 + g)) (1 + 2 g x2),
// f = (1+g) (cos t1 cos t2, cos t1 sin t2, sin t1).

fn dtlz5<F: Scalar>(x: &[F]) -> Vec<F> {
    let half = c::<F>(0.5);
    let g: F = x[2..].iter().map(|&v| (v - half) * (v - half)).sum();
    let big_g = F::one() + g;
    let t1 = c::<F>(FRAC_PI_2) * x[0];
    let t2 = c::<F>(PI / 4.0) / big_g * (F::one() + c::<F>(2.0) * g * x[1]);
    vec![
        big_g * t1.cos() * t2.cos(),
        big_g * t1.cos() * t2.sin(),
        big_g * t1.sin(),
    ]
}

fn dtlz5_jacobian<F: Scalar>(x: &[F]) -> Jacobian<F> {
    let d = x.len();
    let mut j = Jacobian::zeros(3, d);
    let half = c::<F>(0.5);
    let two = c::<F>(2.0);
    let g: F = x[2..].iter().map(|&v| (v - half) * (v - half)).sum();
    let big_g = F::one() + g;
    let t1 = c::<F>(FRAC_PI_2) * x[0];
    let t2 = c::<F>(PI / 4.0) / big_g * (F::one() + two * g * x[1]);
    let (s1, c1) = t1.sin_cos();
    let (s2, c2) = t2.sin_cos();
    let dt1 = c::<F>(FRAC_PI_2);
    let dt2_dx2 = c::<F>(PI / 2.0) * g / big_g;
    // d t2 / d g
    let dt2_dg = c::<F>(PI / 4.0) * (two * x[1] - F::one()) / (big_g * big_g);

    j.set(0, 0, -big_g * s1 * c2 * dt1);
    j.set(1, 0, -big_g * s1 * s2 * dt1);
    j.set(2, 0, big_g * c1 * dt1);

    j.set(0, 1, -big_g * c1 * s2 * dt2_dx2);
    j.set(1, 1, big_g * c1 * c2 * dt2_dx2);

    for k in 2..d {
        let dg = two * (x[k] - half);
        let dt2 = dt2_dg * dg;
        j.set(0, k, dg * c1 * c2 - big_g * c1 * s2 * dt2);
        j.set(1, k, dg * c1 * s2 + big_g * c1 * c2 * dt2);
        j.set(2, k, dg * s1);
    }
    j
}

// DTLZ7 (m = 3): f1 = x1, f2 = x2, g = 1 + 9/k sum x3..,
// f3 = (1+g) (m - sum_i f_i / (1+g) (1 + sin 3 pi f_i)) = m (1+g) - sum_i f_i (1 + sin 3 pi f_i).

fn dtlz7<F: Scalar>(x: &[F]) -> Vec<F> {
    let m = 3;
    let k = x.len() - m + 1;
    let g = F::one() + c::<F>(9.0) / F::from_usize_lossy(k) * x[m - 1..].iter().copied().sum();
    let w = c::<F>(3.0 * PI);
    let hump: F = x[..m - 1]
        .iter()
        .map(|&f| f * (F::one() + (w * f).sin()))
        .sum();
    let f3 = F::from_usize_lossy(m) * (F::one() + g) - hump;
    vec![x[0], x[1], f3]
}

fn dtlz7_jacobian<F: Scalar>(x: &[F]) -> Jacobian<F> {
    let m = 3;
    let d = x.len();
    let k = d - m + 1;
    let mut j = Jacobian::zeros(3, d);
    let w = c::<F>(3.0 * PI);
    j.set(0, 0, F::one());
    j.set(1, 1, F::one());
    for i in 0..m - 1 {
        let f = x[i];
        j.set(2, i, -(F::one() + (w * f).sin() + w * f * (w * f).cos()));
    }
    let dg = F::from_usize_lossy(m) * c::<F>(9.0) / F::from_usize_lossy(k);
    for col in m - 1..d {
        j.set(2, col, dg);
    }
    j
}

// RE21, four bar truss: F = 10, sigma = 10, E = 2e5, L = 200.

const RE21_L: f64 = 200.0;
const RE21_FL_OVER_E: f64 = 10.0 * 200.0 / 2.0e5;

fn re21<F: Scalar>(x: &[F]) -> Vec<F> {
    let two = c::<F>(2.0);
    let r2 = c::<F>(SQRT_2);
    let f1 = c::<F>(RE21_L) * (two * x[0] + r2 * x[1] + x[2].sqrt() + x[3]);
    let f2 = c::<F>(RE21_FL_OVER_E)
        * (two / x[0] + two * r2 / x[1] - two * r2 / x[2] + two / x[3]);
    vec![f1, f2]
}

fn re21_jacobian<F: Scalar>(x: &[F]) -> Jacobian<F> {
    let mut j = Jacobian::zeros(2, 4);
    let two = c::<F>(2.0);
    let r2 = c::<F>(SQRT_2);
    let l = c::<F>(RE21_L);
    let k = c::<F>(RE21_FL_OVER_E);
    j.set(0, 0, l * two);
    j.set(0, 1, l * r2);
    j.set(0, 2, l / (two * x[2].sqrt()));
    j.set(0, 3, l);
    j.set(1, 0, -k * two / (x[0] * x[0]));
    j.set(1, 1, -k * two * r2 / (x[1] * x[1]));
    j.set(1, 2, k * two * r2 / (x[2] * x[2]));
    j.set(1, 3, -k * two / (x[3] * x[3]));
    j
}

// RE33, disc brake. D2 = x2^2 - x1^2, D3 = x2^3 - x1^3.
// f1 = 4.9e-5 D2 (x4 - 1), f2 = 9.82e6 D2 / (x3 x4 D3), f3 = sum max(0, -g_i) with
// g1 = (x2 - x1) - 20, g2 = 0.4 - x3 / (3.14 D2),
// g3 = 1 - 2.22e-3 x3 D3 / D2^2, g4 = 2.66e-2 x3 x4 D3 / D2 - 900.

fn re33_constraints<F: Scalar>(x: &[F]) -> [F; 4] {
    let (x1, x2, x3, x4) = (x[0], x[1], x[2], x[3]);
    let d2 = x2 * x2 - x1 * x1;
    let d3 = x2 * x2 * x2 - x1 * x1 * x1;
    [
        (x2 - x1) - c::<F>(20.0),
        c::<F>(0.4) - x3 / (c::<F>(3.14) * d2),
        F::one() - c::<F>(2.22e-3) * x3 * d3 / (d2 * d2),
        c::<F>(2.66e-2) * x3 * x4 * d3 / d2 - c::<F>(900.0),
    ]
}

fn re33<F: Scalar>(x: &[F]) -> Vec<F> {
    let (x1, x2, x3, x4) = (x[0], x[1], x[2], x[3]);
    let d2 = x2 * x2 - x1 * x1;
    let d3 = x2 * x2 * x2 - x1 * x1 * x1;
    let f1 = c::<F>(4.9e-5) * d2 * (x4 - F::one());
    let f2 = c::<F>(9.82e6) * d2 / (x3 * x4 * d3);
    let f3 = re33_constraints(x)
        .iter()
        .map(|&g| if g < F::zero() { -g } else { F::zero() })
        .sum();
    vec![f1, f2, f3]
}

fn re33_jacobian<F: Scalar>(x: &[F]) -> Jacobian<F> {
    let mut j = Jacobian::zeros(3, 4);
    let (x1, x2, x3, x4) = (x[0], x[1], x[2], x[3]);
    let two = c::<F>(2.0);
    let three = c::<F>(3.0);
    let d2 = x2 * x2 - x1 * x1;
    let d3 = x2 * x2 * x2 - x1 * x1 * x1;
    let dd2 = [-two * x1, two * x2];
    let dd3 = [-three * x1 * x1, three * x2 * x2];

    let a = c::<F>(4.9e-5);
    j.set(0, 0, a * dd2[0] * (x4 - F::one()));
    j.set(0, 1, a * dd2[1] * (x4 - F::one()));
    j.set(0, 3, a * d2);

    let b = c::<F>(9.82e6);
    let q = x3 * x4 * d3;
    let f2 = b * d2 / q;
    for v in 0..2 {
        let dq = x3 * x4 * dd3[v];
        j.set(1, v, b * (dd2[v] * q - d2 * dq) / (q * q));
    }
    j.set(1, 2, -f2 / x3);
    j.set(1, 3, -f2 / x4);

    // Gradients of g1..g4 with respect to x1..x4.
    let mut dg = [[F::zero(); 4]; 4];
    dg[0] = [-F::one(), F::one(), F::zero(), F::zero()];
    let k2 = c::<F>(3.14);
    for v in 0..2 {
        dg[1][v] = x3 / (k2 * d2 * d2) * dd2[v];
    }
    dg[1][2] = -F::one() / (k2 * d2);
    let k3 = c::<F>(2.22e-3);
    let r = d3 / (d2 * d2);
    for v in 0..2 {
        let dr = (dd3[v] * d2 - two * d3 * dd2[v]) / (d2 * d2 * d2);
        dg[2][v] = -k3 * x3 * dr;
    }
    dg[2][2] = -k3 * r;
    let k4 = c::<F>(2.66e-2);
    let s = d3 / d2;
    for v in 0..2 {
        let ds = (dd3[v] * d2 - d3 * dd2[v]) / (d2 * d2);
        dg[3][v] = k4 * x3 * x4 * ds;
    }
    dg[3][2] = k4 * x4 * s;
    dg[3][3] = k4 * x3 * s;

    let g = re33_constraints(x);
    for (gi, row) in g.iter().zip(&dg) {
        // max(0, -g): the zero branch wins ties.
        if *gi < F::zero() {
            for v in 0..4 {
                j.set(2, v, j.get(2, v) - row[v]);
            }
        }
    }
    j
}

// RE36, gear train: u = 6.931 - (x3 / x1)(x4 / x2), f1 = |u|, f2 = max(x1..x4),
// f3 = max(0, f1 / 6.931 - 0.5).

const RE36_RATIO: f64 = 6.931;

fn re36<F: Scalar>(x: &[F]) -> Vec<F> {
    let u = c::<F>(RE36_RATIO) - (x[2] / x[0]) * (x[3] / x[1]);
    let f1 = u.abs();
    let f2 = x.iter().copied().fold(F::neg_infinity(), F::max);
    let v = f1 / c::<F>(RE36_RATIO) - c::<F>(0.5);
    let f3 = if v > F::zero() { v } else { F::zero() };
    vec![f1, f2, f3]
}

fn re36_jacobian<F: Scalar>(x: &[F]) -> Jacobian<F> {
    let mut j = Jacobian::zeros(3, 4);
    let (x1, x2, x3, x4) = (x[0], x[1], x[2], x[3]);
    let u = c::<F>(RE36_RATIO) - (x3 / x1) * (x4 / x2);
    let du = [
        x3 * x4 / (x1 * x1 * x2),
        x3 * x4 / (x1 * x2 * x2),
        -x4 / (x1 * x2),
        -x3 / (x1 * x2),
    ];
    let sign = if u >= F::zero() { F::one() } else { -F::one() };
    for v in 0..4 {
        j.set(0, v, sign * du[v]);
    }
    let mut arg = 0;
    for v in 1..4 {
        if x[v] > x[arg] {
            arg = v;
        }
    }
    j.set(1, arg, F::one());
    let f1 = u.abs();
    if f1 / c::<F>(RE36_RATIO) - c::<F>(0.5) > F::zero() {
        for v in 0..4 {
            j.set(2, v, j.get(0, v) / c::<F>(RE36_RATIO));
        }
    }
    j
}

// RE37, rocket injector: three response-surface polynomials in
// (alpha, HA, OA, OPTT) = (x1, x2, x3, x4). Each monomial is (coefficient, exponents).

type Monomial = (f64, [u8; 4]);

const RE37_TF_MAX: &[Monomial] = &[
    (0.692, [0, 0, 0, 0]),
    (0.477, [1, 0, 0, 0]),
    (-0.687, [0, 1, 0, 0]),
    (-0.080, [0, 0, 1, 0]),
    (-0.0650, [0, 0, 0, 1]),
    (-0.167, [2, 0, 0, 0]),
    (-0.0129, [1, 1, 0, 0]),
    (0.0796, [0, 2, 0, 0]),
    (-0.0634, [1, 0, 1, 0]),
    (-0.0257, [0, 1, 1, 0]),
    (0.0877, [0, 0, 2, 0]),
    (-0.0521, [1, 0, 0, 1]),
    (0.00156, [0, 1, 0, 1]),
    (0.00198, [0, 0, 1, 1]),
    (0.0184, [0, 0, 0, 2]),
];

const RE37_X_CC: &[Monomial] = &[
    (0.153, [0, 0, 0, 0]),
    (-0.322, [1, 0, 0, 0]),
    (0.396, [0, 1, 0, 0]),
    (0.424, [0, 0, 1, 0]),
    (0.0226, [0, 0, 0, 1]),
    (0.175, [2, 0, 0, 0]),
    (0.0185, [1, 1, 0, 0]),
    (-0.0701, [0, 2, 0, 0]),
    (-0.251, [1, 0, 1, 0]),
    (0.179, [0, 1, 1, 0]),
    (0.0150, [0, 0, 2, 0]),
    (0.0134, [1, 0, 0, 1]),
    (0.0296, [0, 1, 0, 1]),
    (0.0752, [0, 0, 1, 1]),
    (0.0192, [0, 0, 0, 2]),
];

const RE37_TT_MAX: &[Monomial] = &[
    (0.370, [0, 0, 0, 0]),
    (-0.205, [1, 0, 0, 0]),
    (0.0307, [0, 1, 0, 0]),
    (0.108, [0, 0, 1, 0]),
    (1.019, [0, 0, 0, 1]),
    (-0.135, [2, 0, 0, 0]),
    (0.0141, [1, 1, 0, 0]),
    (0.0998, [0, 2, 0, 0]),
    (0.208, [1, 0, 1, 0]),
    (-0.0301, [0, 1, 1, 0]),
    (-0.226, [0, 0, 2, 0]),
    (0.353, [1, 0, 0, 1]),
    (-0.0497, [0, 0, 1, 1]),
    (-0.423, [0, 0, 0, 2]),
    (0.202, [2, 1, 0, 0]),
    (-0.281, [2, 0, 1, 0]),
    (-0.342, [1, 2, 0, 0]),
    (-0.245, [0, 2, 1, 0]),
    (0.281, [0, 1, 2, 0]),
    (-0.184, [1, 0, 0, 2]),
    (-0.281, [1, 1, 1, 0]),
];

fn polynomial<F: Scalar>(terms: &[Monomial], x: &[F]) -> F {
    terms
        .iter()
        .map(|&(coef, exps)| {
            exps.iter()
                .zip(x)
                .fold(c::<F>(coef), |acc, (&e, &v)| acc * v.powi(i32::from(e)))
        })
        .sum()
}

fn polynomial_partial<F: Scalar>(terms: &[Monomial], x: &[F], wrt: usize) -> F {
    terms
        .iter()
        .filter(|(_, exps)| exps[wrt] > 0)
        .map(|&(coef, exps)| {
            let mut acc = c::<F>(coef) * F::from_usize_lossy(usize::from(exps[wrt]));
            for (k, (&e, &v)) in exps.iter().zip(x).enumerate() {
                let e = if k == wrt { e - 1 } else { e };
                acc *= v.powi(i32::from(e));
            }
            acc
        })
        .sum()
}

fn re37<F: Scalar>(x: &[F]) -> Vec<F> {
    vec![
        polynomial(RE37_TF_MAX, x),
        polynomial(RE37_X_CC, x),
        polynomial(RE37_TT_MAX, x),
    ]
}

fn re37_jacobian<F: Scalar>(x: &[F]) -> Jacobian<F> {
    let mut j = Jacobian::zeros(3, 4);
    for (i, terms) in [RE37_TF_MAX, RE37_X_CC, RE37_TT_MAX].iter().enumerate() {
        for v in 0..4 {
            j.set(i, v, polynomial_partial(terms, x, v));
        }
    }
    j
}

/// Where the points of a [`FrontSample`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrontSource {
    Analytic,
    DenseSearch,
}

impl fmt::Display for FrontSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrontSource::Analytic => "analytic",
            FrontSource::DenseSearch => "dense-search",
        })
    }
}

/// A mutually non-dominated approximation of a Pareto front.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontSample<F> {
    pub points: Vec<ObjectiveVector<F>>,
    pub source: FrontSource,
}

impl<F: Scalar> FrontSample<F> {
    pub fn n_objectives(&self) -> usize {
        self.points.first().map_or(0, |p| p.len())
    }

    /// Componentwise minimum and maximum over the sample.
    pub fn ideal_and_nadir(&self) -> (Vec<F>, Vec<F>) {
        let m = self.n_objectives();
        let mut ideal = vec![F::infinity(); m];
        let mut nadir = vec![F::neg_infinity(); m];
        for p in &self.points {
            for k in 0..m {
                ideal[k] = ideal[k].min(p[k]);
                nadir[k] = nadir[k].max(p[k]);
            }
        }
        (ideal, nadir)
    }

    /// CSV with header `f1,...,fm` and one objective vector per row.
    pub fn to_csv(&self) -> String {
        let m = self.n_objectives();
        let mut out = (1..=m).map(|k| format!("f{k}")).collect::<Vec<_>>().join(",");
        out.push('\n');
        for p in &self.points {
            let row: Vec<String> = p.iter().map(|v| v.to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Uniform random decision samples used by the dense-search oracle.
pub const DENSE_SEARCH_SAMPLES: usize = 1_000_000;
pub const DENSE_SEARCH_SEED: u64 = 0;

/// Samples `n` points from a problem's Pareto front, or approximates it by dense search.
pub fn reference_front<F: Scalar>(kind: Benchmark, n: usize) -> Result<FrontSample<F>> {
    if n < 100 {
        return Err(Error::Config(format!(
            "reference front needs at least 100 points, got {n}"
        )));
    }
    let (raw, source): (Vec<Vec<f64>>, FrontSource) = match kind {
        Benchmark::Zdt3 => (zdt3_front(n), FrontSource::Analytic),
        Benchmark::Dtlz5 => (dtlz5_front(n), FrontSource::Analytic),
        Benchmark::Dtlz7 => (dtlz7_front(n), FrontSource::Analytic),
        _ => (
            dense_search_front(kind, n.max(DENSE_SEARCH_SAMPLES))?,
            FrontSource::DenseSearch,
        ),
    };
    let keep = nondominated_indices(&raw);
    let points = keep
        .into_iter()
        .map(|i| ObjectiveVector::new(raw[i].iter().map(|&v| F::lit(v)).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok(FrontSample { points, source })
}

fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    (a + b) / 2.0
}

/// Root of `f` in `[a, b]` assuming a sign change.
fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let mid = (a + b) / 2.0;
        if (f(mid) > 0.0) == (fa > 0.0) {
            a = mid;
        } else {
            b = mid;
        }
    }
    (a + b) / 2.0
}

// Segment starts sit exactly level with the previous segment's minimum, which makes
// them weakly dominated; start a hair inside.
const SEGMENT_NUDGE: f64 = 1e-9;

fn zdt3_front_f2(x: f64) -> f64 {
    1.0 - x.sqrt() - x * (10.0 * PI * x).sin()
}

/// The five `x1` intervals of the ZDT3 front, refined from their published approximations.
pub fn zdt3_front_segments() -> Vec<(f64, f64)> {
    let approx_ends = [0.0830015349, 0.2577623634, 0.4538821041, 0.6525117038, 0.8518328654];
    let approx_starts = [0.0, 0.1822287280, 0.4093136748, 0.6183967944, 0.8233317983];
    let ends: Vec<f64> = approx_ends
        .iter()
        .map(|&e| golden_section_min(zdt3_front_f2, e - 0.01, e + 0.01))
        .collect();
    let mut segments = vec![(0.0, ends[0])];
    for k in 1..5 {
        let level = zdt3_front_f2(ends[k - 1]);
        let s = approx_starts[k];
        let start = bisect(|x| zdt3_front_f2(x) - level, s - 0.01, s + 0.01);
        segments.push((start + SEGMENT_NUDGE, ends[k]));
    }
    segments
}

/// Spreads `n` points over the intervals proportionally to their lengths, endpoints included.
fn spread_over(segments: &[(f64, f64)], n: usize) -> Vec<f64> {
    let total: f64 = segments.iter().map(|(a, b)| b - a).sum();
    let mut out = Vec::with_capacity(n);
    let mut remaining = n;
    for (k, &(a, b)) in segments.iter().enumerate() {
        let count = if k + 1 == segments.len() {
            remaining
        } else {
            (((b - a) / total) * n as f64).round().max(2.0) as usize
        }
        .min(remaining);
        remaining -= count;
        for i in 0..count {
            let t = if count == 1 { 0.0 } else { i as f64 / (count - 1) as f64 };
            out.push(a + t * (b - a));
        }
    }
    out
}

fn zdt3_front(n: usize) -> Vec<Vec<f64>> {
    spread_over(&zdt3_front_segments(), n)
        .into_iter()
        .map(|x| vec![x, zdt3_front_f2(x)])
        .collect()
}

fn dtlz5_front(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let t = FRAC_PI_2 * i as f64 / (n - 1) as f64;
            let a = t.cos() / SQRT_2;
            vec![a, a, t.sin()]
        })
        .collect()
}

fn dtlz7_hump(x: f64) -> f64 {
    x * (1.0 + (3.0 * PI * x).sin())
}

/// The two per-coordinate intervals whose product forms the four DTLZ7 front regions.
pub fn dtlz7_front_segments() -> Vec<(f64, f64)> {
    let neg = |x: f64| -dtlz7_hump(x);
    let first_peak = golden_section_min(neg, 0.15, 0.35);
    let second_peak = golden_section_min(neg, 0.75, 0.95);
    let level = dtlz7_hump(first_peak);
    let start = bisect(|x| dtlz7_hump(x) - level, 0.55, 0.7);
    vec![(0.0, first_peak), (start + SEGMENT_NUDGE, second_peak)]
}

fn dtlz7_front(n: usize) -> Vec<Vec<f64>> {
    let per_axis = (n as f64).sqrt().ceil() as usize;
    let axis = spread_over(&dtlz7_front_segments(), per_axis);
    let mut out = Vec::with_capacity(per_axis * per_axis);
    for &a in &axis {
        for &b in &axis {
            out.push(vec![a, b, 6.0 - dtlz7_hump(a) - dtlz7_hump(b)]);
        }
    }
    out
}

fn dense_search_front(kind: Benchmark, samples: usize) -> Result<Vec<Vec<f64>>> {
    let problem = kind.problem::<f64>();
    let spec = problem.spec();
    let mut rng = RngStream::new(DENSE_SEARCH_SEED);
    let mut x = vec![0.0; spec.n_variables];
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        for (k, v) in x.iter_mut().enumerate() {
            *v = rng.uniform_in(spec.lower_bounds[k], spec.upper_bounds[k]);
        }
        out.push(problem.evaluate(&x)?.0);
    }
    let keep = nondominated_indices(&out);
    Ok(keep.into_iter().map(|i| out[i].clone()).collect())
}
