//! Hypervolume and the log hypervolume difference.
//!
//! Exact hypervolume is supported for two and three objectives. It is computed on
//! the non-dominated subset of the points that lie strictly inside the reference
//! box, taken in a canonical order, so the result depends only on that subset.

use std::sync::{Arc, OnceLock};

use crate::domain::{nondominated_indices, ObjectiveVector, PreferenceVector};
use crate::error::{check_len, Error, Result};
use crate::model::ParetoSetModel;
use crate::problems::{reference_front, Benchmark, FrontSample, FrontSource, Problem};
use crate::rng::RngStream;
use crate::scalar::Scalar;

pub const DEFAULT_LOG_HV_EPSILON: f64 = 1e-6;
/// The reference point sits this fraction of the front's extent beyond its nadir.
pub const REFERENCE_MARGIN: f64 = 0.1;
pub const FRONT_POINTS_2D: usize = 2_000;
pub const FRONT_POINTS_3D: usize = 10_000;
/// Lattice resolution for three-objective evaluation preferences (105 points).
pub const LATTICE_DIVISIONS_3D: usize = 13;
pub const LATTICE_POINTS_2D: usize = 100;

fn inside_box<F: Scalar, V: AsRef<[F]>>(points: &[V], reference: &[F]) -> Result<Vec<Vec<F>>> {
    let mut kept = Vec::with_capacity(points.len());
    for p in points {
        let p = p.as_ref();
        check_len(reference.len(), p.len())?;
        if p.iter().zip(reference).all(|(v, r)| v < r) {
            kept.push(p.to_vec());
        }
    }
    Ok(kept)
}

/// Area dominated by a staircase sorted by ascending `x` (hence descending `y`).
fn staircase_area<F: Scalar>(stairs: &[(F, F)], rx: F, ry: F) -> F {
    let mut area = F::zero();
    for (w, &(x, y)) in stairs.iter().enumerate() {
        let next_x = stairs.get(w + 1).map_or(rx, |s| s.0);
        area += (next_x - x) * (ry - y);
    }
    area
}

/// Inserts `(x, y)` into a 2-D non-dominated staircase, dropping what it dominates.
fn staircase_insert<F: Scalar>(stairs: &mut Vec<(F, F)>, x: F, y: F) {
    let pos = stairs.partition_point(|s| s.0 < x);
    // Weakly dominated by the predecessor, or by an equal-x member.
    if pos > 0 && stairs[pos - 1].1 <= y {
        return;
    }
    if pos < stairs.len() && stairs[pos].0 == x && stairs[pos].1 <= y {
        return;
    }
    let end = pos + stairs[pos..].iter().take_while(|s| s.1 >= y).count();
    stairs.splice(pos..end, [(x, y)]);
}

/// Exact hypervolume for two or three objectives.
pub fn hypervolume_exact<F: Scalar, V: AsRef<[F]>>(points: &[V], reference: &[F]) -> Result<F> {
    let m = reference.len();
    if m != 2 && m != 3 {
        return Err(Error::UnsupportedDimension(m));
    }
    let kept = inside_box(points, reference)?;
    let front: Vec<&Vec<F>> = nondominated_indices(&kept).into_iter().map(|i| &kept[i]).collect();
    if front.is_empty() {
        return Ok(F::zero());
    }
    if m == 2 {
        let stairs: Vec<(F, F)> = front.iter().map(|p| (p[0], p[1])).collect();
        return Ok(staircase_area(&stairs, reference[0], reference[1]));
    }
    let mut layers = front;
    // Stable sort keeps the lexicographic order among equal heights.
    layers.sort_by(|a, b| a[2].partial_cmp(&b[2]).expect("finite objectives"));
    let mut stairs: Vec<(F, F)> = Vec::new();
    let mut volume = F::zero();
    let mut w = 0;
    while w < layers.len() {
        let z = layers[w][2];
        while w < layers.len() && layers[w][2] == z {
            staircase_insert(&mut stairs, layers[w][0], layers[w][1]);
            w += 1;
        }
        let next_z = layers.get(w).map_or(reference[2], |p| p[2]);
        volume += staircase_area(&stairs, reference[0], reference[1]) * (next_z - z);
    }
    Ok(volume)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub standard_error: f64,
}

/// Monte Carlo hypervolume over the box between the points' componentwise minimum
/// and the reference point. Weak dominance counts.
pub fn hypervolume_mc<F: Scalar, V: AsRef<[F]>>(
    points: &[V],
    reference: &[F],
    n_samples: usize,
    rng: &mut RngStream,
) -> Result<McEstimate> {
    let r: Vec<f64> = reference.iter().map(|v| v.to_f64_lossy()).collect();
    let pts: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            check_len(r.len(), p.as_ref().len())?;
            Ok(p.as_ref().iter().map(|v| v.to_f64_lossy()).collect())
        })
        .collect::<Result<_>>()?;
    let zero = McEstimate {
        value: 0.0,
        standard_error: 0.0,
    };
    if pts.is_empty() || n_samples == 0 {
        return Ok(zero);
    }
    let lower: Vec<f64> = (0..r.len())
        .map(|k| pts.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min))
        .collect();
    if lower.iter().zip(&r).any(|(l, r)| l >= r) {
        return Ok(zero);
    }
    let volume: f64 = lower.iter().zip(&r).map(|(l, r)| r - l).product();
    let mut sample = vec![0.0; r.len()];
    let mut hits = 0usize;
    for _ in 0..n_samples {
        for ((s, l), hi) in sample.iter_mut().zip(&lower).zip(&r) {
            *s = rng.uniform_in(*l, *hi);
        }
        if pts.iter().any(|p| p.iter().zip(&sample).all(|(a, b)| a <= b)) {
            hits += 1;
        }
    }
    let frac = hits as f64 / n_samples as f64;
    Ok(McEstimate {
        value: volume * frac,
        standard_error: volume * (frac * (1.0 - frac) / n_samples as f64).sqrt(),
    })
}

/// `nadir + margin * (nadir - ideal)` of a front sample.
pub fn reference_point<F: Scalar>(front: &FrontSample<F>) -> Vec<F> {
    let (ideal, nadir) = front.ideal_and_nadir();
    let margin = F::lit(REFERENCE_MARGIN);
    nadir.iter().zip(&ideal).map(|(&n, &i)| n + margin * (n - i)).collect()
}

/// Evaluation preferences: `i / 99` for two objectives, the `H = 13` simplex lattice for three.
pub fn evaluation_preferences<F: Scalar>(m: usize) -> Result<Vec<PreferenceVector<F>>> {
    let weights: Vec<Vec<f64>> = match m {
        2 => {
            let last = (LATTICE_POINTS_2D - 1) as f64;
            (0..LATTICE_POINTS_2D)
                .map(|i| {
                    let a = i as f64 / last;
                    vec![a, 1.0 - a]
                })
                .collect()
        }
        3 => {
            let h = LATTICE_DIVISIONS_3D;
            let mut out = Vec::new();
            for i in 0..=h {
                for j in 0..=h - i {
                    let k = h - i - j;
                    out.push(vec![i as f64 / h as f64, j as f64 / h as f64, k as f64 / h as f64]);
                }
            }
            out
        }
        _ => return Err(Error::UnsupportedDimension(m)),
    };
    weights
        .into_iter()
        .map(|w| PreferenceVector::new(w.into_iter().map(F::lit).collect()))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HvReport<F> {
    pub reference_point: Vec<F>,
    pub hv_true: F,
    pub hv_estimate: F,
    pub epsilon: F,
    /// `-inf` when the estimate beats the reference front by more than `epsilon`.
    pub log_hv_diff: F,
    pub exceeded_reference: bool,
    pub source: FrontSource,
    pub n_points: usize,
}

/// `log(hv_true + eps - hv_estimate)` given a precomputed `hv_true`.
pub fn log_hv_report<F: Scalar, V: AsRef<[F]>>(
    hv_true: F,
    source: FrontSource,
    approx: &[V],
    reference: &[F],
    epsilon: F,
) -> Result<HvReport<F>> {
    if !(epsilon > F::zero()) {
        return Err(Error::Config(format!("log hv epsilon must be positive, got {epsilon}")));
    }
    let hv_estimate = hypervolume_exact(approx, reference)?;
    let arg = hv_true + epsilon - hv_estimate;
    let exceeded = !(arg > F::zero());
    Ok(HvReport {
        reference_point: reference.to_vec(),
        hv_true,
        hv_estimate,
        epsilon,
        log_hv_diff: if exceeded { F::neg_infinity() } else { arg.ln() },
        exceeded_reference: exceeded,
        source,
        n_points: approx.len(),
    })
}

pub fn log_hv_difference<F: Scalar, V: AsRef<[F]>>(
    front: &FrontSample<F>,
    approx: &[V],
    reference: &[F],
    epsilon: F,
) -> Result<HvReport<F>> {
    let hv_true = hypervolume_exact(&front.points, reference)?;
    log_hv_report(hv_true, front.source, approx, reference, epsilon)
}

/// A problem's reference front with its reference point and hypervolume.
#[derive(Debug, Clone)]
pub struct ReferenceSet<F> {
    pub kind: Benchmark,
    pub front: FrontSample<F>,
    pub reference_point: Vec<F>,
    pub hv_true: F,
}

impl<F: Scalar> ReferenceSet<F> {
    pub fn new(kind: Benchmark) -> Result<Self> {
        let n = if kind.dims().0 == 2 { FRONT_POINTS_2D } else { FRONT_POINTS_3D };
        let front = reference_front::<F>(kind, n)?;
        let reference_point = reference_point(&front);
        let hv_true = hypervolume_exact(&front.points, &reference_point)?;
        Ok(Self {
            kind,
            front,
            reference_point,
            hv_true,
        })
    }

    pub fn report<V: AsRef<[F]>>(&self, approx: &[V], epsilon: F) -> Result<HvReport<F>> {
        log_hv_report(self.hv_true, self.front.source, approx, &self.reference_point, epsilon)
    }

    /// Scores a model on the fixed evaluation preferences.
    pub fn evaluate_model<P: Problem<F> + ?Sized>(
        &self,
        model: &ParetoSetModel<F>,
        problem: &P,
        epsilon: F,
    ) -> Result<HvReport<F>> {
        let objectives = model_front(model, problem)?;
        self.report(&objectives, epsilon)
    }
}

/// Objective vectors of the model's outputs on the evaluation preferences.
pub fn model_front<F: Scalar, P: Problem<F> + ?Sized>(
    model: &ParetoSetModel<F>,
    problem: &P,
) -> Result<Vec<ObjectiveVector<F>>> {
    let prefs = evaluation_preferences::<F>(problem.spec().n_objectives)?;
    model
        .forward(&prefs, problem.spec())?
        .iter()
        .map(|x| problem.evaluate(x))
        .collect()
}

type CachedSet = std::result::Result<Arc<ReferenceSet<f64>>, Error>;

/// Process-wide reference sets, built once per benchmark on first use.
pub fn cached_reference_set(kind: Benchmark) -> Result<Arc<ReferenceSet<f64>>> {
    static CELLS: [OnceLock<CachedSet>; Benchmark::ALL.len()] = [const { OnceLock::new() }; Benchmark::ALL.len()];
    let slot = Benchmark::ALL.iter().position(|&b| b == kind).expect("registered benchmark");
    CELLS[slot]
        .get_or_init(|| ReferenceSet::new(kind).map(Arc::new))
        .clone()
}
