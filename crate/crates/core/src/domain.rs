//! Value types shared across the crate and the Pareto dominance relation.
//!
//! All objectives are minimized.

use std::cmp::Ordering;
use std::ops::Deref;

use crate::error::{check_len, Error, Result};
use crate::scalar::Scalar;

/// Absolute tolerance on the component sum of a preference vector.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

fn simplex_tolerance<F: Scalar>(m: usize) -> F {
    // f32 cannot hold a 1e-9 sum tolerance; widen to a few ulps per component.
    let ulps = F::epsilon() * F::from_usize_lossy(8 * m.max(1));
    F::lit(SIMPLEX_TOLERANCE).max(ulps)
}

/// A point on the probability simplex: nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceVector<F>(Vec<F>);

impl<F: Scalar> PreferenceVector<F> {
    /// Validates `weights` against the simplex invariants without modifying them.
    pub fn new(weights: Vec<F>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::InvalidPreference(format!(
                "need at least 2 components, got {}",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < F::zero()) {
            return Err(Error::InvalidPreference(format!(
                "component {w} is negative or non-finite"
            )));
        }
        let sum: F = weights.iter().copied().sum();
        if (sum - F::one()).abs() > simplex_tolerance::<F>(weights.len()) {
            return Err(Error::InvalidPreference(format!(
                "components sum to {sum}, not 1"
            )));
        }
        Ok(Self(weights))
    }

    pub fn weights(&self) -> &[F] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<F> {
        self.0
    }

    /// Raises every component to at least `floor`, then renormalizes onto the simplex.
    pub fn floored(&self, floor: F) -> Self {
        let raised: Vec<F> = self.0.iter().map(|&w| w.max(floor)).collect();
        simplex_project(&raised).expect("floored weights have a positive sum")
    }
}

impl<F> Deref for PreferenceVector<F> {
    type Target = [F];

    fn deref(&self) -> &[F] {
        &self.0
    }
}

/// A decision vector `x` in the box of some problem. Bounds are checked by the problem.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionVector<F>(pub Vec<F>);

impl<F> Deref for DecisionVector<F> {
    type Target = [F];

    fn deref(&self) -> &[F] {
        &self.0
    }
}

/// An objective vector `f(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveVector<F>(pub Vec<F>);

impl<F: Scalar> ObjectiveVector<F> {
    pub fn new(values: Vec<F>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericState(format!(
                "objective vector has non-finite component: {values:?}"
            )));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[F] {
        &self.0
    }

    pub fn dominates(&self, other: &Self) -> Result<bool> {
        dominates(&self.0, &other.0)
    }
}

impl<F> Deref for ObjectiveVector<F> {
    type Target = [F];

    fn deref(&self) -> &[F] {
        &self.0
    }
}

impl<F> AsRef<[F]> for ObjectiveVector<F> {
    fn as_ref(&self) -> &[F] {
        &self.0
    }
}

/// A preference together with the objectives its model output had when it was
/// evaluated. The objectives are a record and are never recomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatedPreference<F> {
    pub preference: PreferenceVector<F>,
    pub objectives: ObjectiveVector<F>,
}

/// Pareto dominance for minimization: `a` is no worse everywhere and strictly better somewhere.
pub fn dominates<F: Scalar>(a: &[F], b: &[F]) -> Result<bool> {
    check_len(a.len(), b.len())?;
    Ok(dominates_unchecked(a, b))
}

/// [`dominates`] for callers that already guarantee equal lengths.
#[inline]
pub fn dominates_unchecked<F: PartialOrd + Copy>(a: &[F], b: &[F]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strictly_better = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly_better = true;
        }
    }
    strictly_better
}

/// Clamps negative components to zero and divides by the component sum.
pub fn simplex_project<F: Scalar>(raw: &[F]) -> Result<PreferenceVector<F>> {
    if raw.len() < 2 {
        return Err(Error::InvalidPreference(format!(
            "need at least 2 components, got {}",
            raw.len()
        )));
    }
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate(format!("non-finite component in {raw:?}")));
    }
    let clamped: Vec<F> = raw.iter().map(|&v| v.max(F::zero())).collect();
    let sum: F = clamped.iter().copied().sum();
    if sum <= F::zero() {
        return Err(Error::Degenerate(
            "all components are zero after clamping".into(),
        ));
    }
    Ok(PreferenceVector(clamped.into_iter().map(|v| v / sum).collect()))
}

fn lex_cmp<F: PartialOrd>(a: &[F], b: &[F]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    Ordering::Equal
}

/// Indices of the mutually non-dominated points, with exact duplicates kept once.
///
/// Returned in lexicographic order of the points. Two and three objectives use a
/// sort-and-sweep (`O(n log n)` and `O(n s)` for a staircase of size `s`); other
/// dimensions fall back to pairwise comparison.
pub fn nondominated_indices<F: PartialOrd + Copy, V: AsRef<[F]>>(points: &[V]) -> Vec<usize> {
    if points.is_empty() {
        return Vec::new();
    }
    let m = points[0].as_ref().len();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| lex_cmp(points[i].as_ref(), points[j].as_ref()).then(i.cmp(&j)));
    order.dedup_by(|j, i| lex_cmp(points[*i].as_ref(), points[*j].as_ref()) == Ordering::Equal);

    match m {
        2 => {
            let mut best: Option<F> = None;
            order
                .into_iter()
                .filter(|&i| {
                    let y = points[i].as_ref()[1];
                    match best {
                        Some(b) if y >= b => false,
                        _ => {
                            best = Some(y);
                            true
                        }
                    }
                })
                .collect()
        }
        3 => {
            // (f2, f3) staircase of everything kept so far: f2 ascending, f3 descending.
            let mut stair: Vec<(F, F)> = Vec::new();
            let mut keep = Vec::new();
            for i in order {
                let p = points[i].as_ref();
                let (y, z) = (p[1], p[2]);
                let at = stair.partition_point(|e| e.0 <= y);
                if at > 0 && stair[at - 1].1 <= z {
                    continue;
                }
                let start = stair.partition_point(|e| e.0 < y);
                let mut end = start;
                while end < stair.len() && stair[end].1 >= z {
                    end += 1;
                }
                stair.splice(start..end, std::iter::once((y, z)));
                keep.push(i);
            }
            keep
        }
        _ => {
            let kept: Vec<usize> = order
                .iter()
                .copied()
                .filter(|&i| {
                    !order
                        .iter()
                        .any(|&j| dominates_unchecked(points[j].as_ref(), points[i].as_ref()))
                })
                .collect();
            kept
        }
    }
}
