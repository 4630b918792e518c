//! Where sampled preferences land: simplex coverage and closeness to the front's preimage.

use crate::run::RunRecord;

pub const CONCENTRATION_RADIUS: f64 = 0.05;
/// Offset below the front's ideal point used when projecting objectives onto the simplex.
pub const PROJECTION_OFFSET: f64 = 0.1;
pub const COVERAGE_RESOLUTION: f64 = 0.1;

/// Maps each front point to the preference that aims at it from just below the ideal point:
/// `lambda ∝ f - (z - offset)`, with `z` the componentwise minimum of `front`.
pub fn project_front<V: AsRef<[f64]>>(front: &[V], offset: f64) -> Vec<Vec<f64>> {
    let Some(first) = front.first() else {
        return Vec::new();
    };
    let m = first.as_ref().len();
    let mut z = vec![f64::INFINITY; m];
    for p in front {
        for (zk, &v) in z.iter_mut().zip(p.as_ref()) {
            *zk = zk.min(v);
        }
    }
    front
        .iter()
        .map(|p| {
            let raw: Vec<f64> = p.as_ref().iter().zip(&z).map(|(v, zk)| v - (zk - offset)).collect();
            let s: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / s).collect()
        })
        .collect()
}

/// Fraction of `samples` within Euclidean distance `radius` of some point of `targets`.
pub fn concentration_fraction<S: AsRef<[f64]>, T: AsRef<[f64]>>(samples: &[S], targets: &[T], radius: f64) -> f64 {
    if samples.is_empty() {
        return f64::NAN;
    }
    let r2 = radius * radius;
    let near = samples
        .iter()
        .filter(|s| {
            targets.iter().any(|t| {
                let d2: f64 = s.as_ref().iter().zip(t.as_ref()).map(|(a, b)| (a - b) * (a - b)).sum();
                d2 <= r2
            })
        })
        .count();
    near as f64 / samples.len() as f64
}

/// Logged preferences from the final `period` iterations of a run.
pub fn last_period_preferences(record: &RunRecord, period: usize) -> Vec<Vec<f64>> {
    let last = record.config.optimizer.max_iterations;
    let start = last.saturating_sub(period);
    record
        .preferences
        .iter()
        .filter(|e| e.iteration > start)
        .map(|e| e.weights.clone())
        .collect()
}

/// Number of empty cells in a grid of side `resolution` over the first `m - 1` coordinates,
/// counting only cells that meet the simplex.
pub fn empty_cells<V: AsRef<[f64]>>(samples: &[V], m: usize, resolution: f64) -> usize {
    let per_axis = (1.0 / resolution).round() as usize;
    let cell_of = |w: &[f64]| -> Vec<usize> {
        w[..m - 1]
            .iter()
            .map(|&v| ((v / resolution).floor() as usize).min(per_axis - 1))
            .collect()
    };
    let mut seen = std::collections::HashSet::new();
    for s in samples {
        seen.insert(cell_of(s.as_ref()));
    }
    let mut total = 0;
    let mut idx = vec![0usize; m - 1];
    loop {
        if idx.iter().sum::<usize>() < per_axis {
            total += usize::from(!seen.contains(&idx));
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return total;
            }
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}
