//! Evolutionary preference sampling.
//!
//! Training runs in periods of `T` iterations. Every evaluated preference of the
//! current period goes into an archive. At the end of a period the archive is
//! ranked by non-dominated sorting and crowding distance on the recorded
//! objectives, a fraction `sp` of it survives as the population, and the archive
//! is cleared. From then on every training batch is bred from the population by
//! simulated binary crossover, polynomial mutation and a simplex repair.
//! The first period samples uniformly from the simplex.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use crate::domain::{dominates_unchecked, simplex_project, EvaluatedPreference, ObjectiveVector, PreferenceVector};
use crate::error::{Error, Result};
use crate::model::{OptimizerConfig, ParetoSetModel};
use crate::problems::{Jacobian, Problem, ProblemSpec};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::scalarize::{IdealPoint, ScalarizationKind};

#[derive(Debug, Clone, PartialEq)]
pub struct EpsConfig {
    pub period_length: usize,
    pub select_fraction: f64,
    pub crossover_prob: f64,
    /// Per-component polynomial mutation probability.
    pub mutation_prob: f64,
    pub sbx_index: f64,
    pub pm_index: f64,
}

impl Default for EpsConfig {
    fn default() -> Self {
        Self {
            period_length: 100,
            select_fraction: 0.1,
            crossover_prob: 0.9,
            mutation_prob: 0.9,
            sbx_index: 15.0,
            pm_index: 20.0,
        }
    }
}

impl EpsConfig {
    pub fn validate(&self, max_iterations: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.period_length == 0 || max_iterations % self.period_length != 0 {
            return bad(format!(
                "period length {} must divide the iteration budget {max_iterations}",
                self.period_length
            ));
        }
        if !(self.select_fraction > 0.0 && self.select_fraction <= 1.0) {
            return bad(format!("select fraction {} outside (0, 1]", self.select_fraction));
        }
        for (name, p) in [("crossover", self.crossover_prob), ("mutation", self.mutation_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} probability {p} outside [0, 1]"));
            }
        }
        for (name, eta) in [("sbx", self.sbx_index), ("pm", self.pm_index)] {
            if !(eta > 0.0 && eta.is_finite()) {
                return bad(format!("{name} distribution index must be positive, got {eta}"));
            }
        }
        Ok(())
    }
}

/// Uniform samples from the simplex: normalized i.i.d. standard exponentials.
pub fn sample_uniform<F: Scalar>(rng: &mut RngStream, count: usize, m: usize) -> Vec<PreferenceVector<F>> {
    assert!(m >= 2, "preferences need at least two components");
    let mut out = Vec::with_capacity(count);
    let mut raw = vec![F::zero(); m];
    while out.len() < count {
        for r in raw.iter_mut() {
            *r = F::lit(rng.exponential());
        }
        if let Ok(p) = simplex_project(&raw) {
            out.push(p);
        }
    }
    out
}

/// Deb's fast non-dominated sort. Indices inside each front are ascending.
pub fn fast_nondominated_sort<F: PartialOrd + Copy, V: AsRef<[F]>>(points: &[V]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (points[i].as_ref(), points[j].as_ref());
            if dominates_unchecked(a, b) {
                dominates_list[i].push(j);
                dominated_by_count[j] += 1;
            } else if dominates_unchecked(b, a) {
                dominates_list[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each member of a front.
pub fn crowding_distance<F: Scalar, V: AsRef<[F]>>(front: &[V]) -> Vec<F> {
    let n = front.len();
    if n == 0 {
        return Vec::new();
    }
    let m = front[0].as_ref().len();
    let mut dist = vec![F::zero(); n];
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..m {
        let key = |i: usize| front[i].as_ref()[k];
        order.sort_by(|&a, &b| key(a).partial_cmp(&key(b)).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
        let (lo, hi) = (key(order[0]), key(order[n - 1]));
        dist[order[0]] = F::infinity();
        dist[order[n - 1]] = F::infinity();
        let range = hi - lo;
        if range <= F::zero() {
            continue;
        }
        for w in 1..n.saturating_sub(1) {
            let i = order[w];
            dist[i] += (key(order[w + 1]) - key(order[w - 1])) / range;
        }
    }
    dist
}

/// Evaluated preferences collected during the current period.
#[derive(Debug, Clone, Default)]
pub struct Archive<F> {
    entries: Vec<EvaluatedPreference<F>>,
}

impl<F: Scalar> Archive<F> {
    pub fn new() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn push(&mut self, entry: EvaluatedPreference<F>) {
        self.entries.push(entry);
    }

    pub fn entries(&self) -> &[EvaluatedPreference<F>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population<F> {
    pub members: Vec<EvaluatedPreference<F>>,
}

impl<F> Population<F> {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// `ceil(sp * n)`, at least one. Products within 1e-9 of an integer count as that integer.
pub fn selection_size(sp: f64, n: usize) -> usize {
    let raw = sp * n as f64;
    let k = if (raw - raw.round()).abs() < 1e-9 {
        raw.round()
    } else {
        raw.ceil()
    };
    (k as usize).clamp(1, n.max(1))
}

/// Elitist selection of `ceil(sp * |archive|)` entries: whole fronts first, then the
/// overflowing front by descending crowding distance, ties to the lower index.
pub fn select_subset<F: Scalar>(archive: &Archive<F>, sp: f64) -> Result<Population<F>> {
    if archive.is_empty() {
        return Err(Error::Config("cannot select from an empty archive".into()));
    }
    let entries = archive.entries();
    let k = selection_size(sp, entries.len());
    let objectives: Vec<&[F]> = entries.iter().map(|e| e.objectives.values()).collect();
    let mut chosen = Vec::with_capacity(k);
    for front in fast_nondominated_sort(&objectives) {
        if chosen.len() + front.len() <= k {
            chosen.extend_from_slice(&front);
        } else {
            let members: Vec<&[F]> = front.iter().map(|&i| objectives[i]).collect();
            let dist = crowding_distance(&members);
            let mut order: Vec<usize> = (0..front.len()).collect();
            order.sort_by(|&a, &b| {
                dist[b]
                    .partial_cmp(&dist[a])
                    .unwrap_or(Ordering::Equal)
                    .then(front[a].cmp(&front[b]))
            });
            let room = k - chosen.len();
            chosen.extend(order.into_iter().take(room).map(|w| front[w]));
        }
        if chosen.len() == k {
            break;
        }
    }
    Ok(Population {
        members: chosen.into_iter().map(|i| entries[i].clone()).collect(),
    })
}

/// SBX children for `y1 < y2` given the two spread factors.
pub fn sbx_blend(y1: f64, y2: f64, beta_low: f64, beta_high: f64) -> (f64, f64) {
    let c1 = 0.5 * ((y1 + y2) - beta_low * (y2 - y1));
    let c2 = 0.5 * ((y1 + y2) + beta_high * (y2 - y1));
    (c1, c2)
}

/// Bounded spread factor from Deb's SBX on `[0, 1]`.
fn sbx_beta(u: f64, gap_to_bound: f64, span: f64, eta: f64) -> f64 {
    let beta = 1.0 + 2.0 * gap_to_bound / span;
    let alpha = 2.0 - beta.powf(-(eta + 1.0));
    if u <= 1.0 / alpha {
        (u * alpha).powf(1.0 / (eta + 1.0))
    } else {
        (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
    }
}

fn sbx(a: &mut [f64], b: &mut [f64], eta: f64, rng: &mut RngStream) -> bool {
    let mut changed = false;
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        if (*x - *y).abs() <= 1e-14 {
            continue;
        }
        let (lo, hi) = if *x < *y { (*x, *y) } else { (*y, *x) };
        let u = rng.uniform();
        let span = hi - lo;
        let (c1, c2) = sbx_blend(
            lo,
            hi,
            sbx_beta(u, lo, span, eta),
            sbx_beta(u, 1.0 - hi, span, eta),
        );
        let (c1, c2) = (c1.clamp(0.0, 1.0), c2.clamp(0.0, 1.0));
        if *x < *y {
            (*x, *y) = (c1, c2);
        } else {
            (*x, *y) = (c2, c1);
        }
        changed = true;
    }
    changed
}

/// Deb's bounded polynomial mutation on `[0, 1]`, applied per component with probability `p`.
fn polynomial_mutation(genes: &mut [f64], p: f64, eta: f64, rng: &mut RngStream) -> bool {
    let mut changed = false;
    let pow = 1.0 / (eta + 1.0);
    for y in genes.iter_mut() {
        if !rng.bernoulli(p) {
            continue;
        }
        let (d1, d2) = (*y, 1.0 - *y);
        let u = rng.uniform();
        let dq = if u < 0.5 {
            let v = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta + 1.0);
            v.powf(pow) - 1.0
        } else {
            let v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta + 1.0);
            1.0 - v.powf(pow)
        };
        *y = (*y + dq).clamp(0.0, 1.0);
        changed = true;
    }
    changed
}

fn finish_child<F: Scalar>(genes: &[f64], changed: bool, parent: &PreferenceVector<F>) -> PreferenceVector<F> {
    if !changed {
        return parent.clone();
    }
    let raw: Vec<F> = genes.iter().map(|&g| F::lit(g)).collect();
    // An all-zero child cannot be repaired; keep its parent instead.
    simplex_project(&raw).unwrap_or_else(|_| parent.clone())
}

/// Breeds `count` preferences from the population.
///
/// A population of one member has no distinct pair, so its children come from
/// mutation alone.
pub fn generate_offspring<F: Scalar>(
    pop: &Population<F>,
    rng: &mut RngStream,
    count: usize,
    config: &EpsConfig,
) -> Result<Vec<PreferenceVector<F>>> {
    if pop.is_empty() {
        return Err(Error::Config("cannot breed from an empty population".into()));
    }
    let n = pop.len();
    let genes_of = |p: &PreferenceVector<F>| -> Vec<f64> { p.iter().map(|v| v.to_f64_lossy()).collect() };
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        if n == 1 {
            let parent = &pop.members[0].preference;
            let mut g = genes_of(parent);
            let changed = polynomial_mutation(&mut g, config.mutation_prob, config.pm_index, rng);
            out.push(finish_child(&g, changed, parent));
            continue;
        }
        let i = rng.below(n);
        let mut j = rng.below(n - 1);
        if j >= i {
            j += 1;
        }
        let (pa, pb) = (&pop.members[i].preference, &pop.members[j].preference);
        let (mut a, mut b) = (genes_of(pa), genes_of(pb));
        let crossed = rng.bernoulli(config.crossover_prob) && sbx(&mut a, &mut b, config.sbx_index, rng);
        let ma = polynomial_mutation(&mut a, config.mutation_prob, config.pm_index, rng);
        let mb = polynomial_mutation(&mut b, config.mutation_prob, config.pm_index, rng);
        out.push(finish_child(&a, crossed || ma, pa));
        if out.len() < count {
            out.push(finish_child(&b, crossed || mb, pb));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sampler {
    Uniform,
    Eps(EpsConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchSource {
    Uniform,
    Population,
}

#[derive(Debug, Clone)]
pub struct IterationRecord<F> {
    /// 1-based.
    pub iteration: usize,
    pub loss: F,
    pub source: BatchSource,
    pub preferences: Vec<PreferenceVector<F>>,
    pub objectives: Vec<ObjectiveVector<F>>,
}

/// Per-iteration state of the preference sampler.
#[derive(Debug, Clone)]
pub struct PreferenceSampler<F> {
    sampler: Sampler,
    archive: Archive<F>,
    population: Option<Population<F>>,
}

impl<F: Scalar> PreferenceSampler<F> {
    pub fn new(sampler: Sampler) -> Self {
        Self {
            sampler,
            archive: Archive::new(),
            population: None,
        }
    }

    pub fn population(&self) -> Option<&Population<F>> {
        self.population.as_ref()
    }

    pub fn archive(&self) -> &Archive<F> {
        &self.archive
    }

    pub fn next_batch(
        &self,
        rng: &mut RngStream,
        batch_size: usize,
        m: usize,
    ) -> Result<(Vec<PreferenceVector<F>>, BatchSource)> {
        match (&self.sampler, &self.population) {
            (Sampler::Eps(cfg), Some(pop)) => Ok((
                generate_offspring(pop, rng, batch_size, cfg)?,
                BatchSource::Population,
            )),
            _ => Ok((sample_uniform(rng, batch_size, m), BatchSource::Uniform)),
        }
    }

    /// Records the evaluated batch of iteration `t` and refreshes the population at period ends.
    pub fn observe(
        &mut self,
        t: usize,
        preferences: &[PreferenceVector<F>],
        objectives: &[ObjectiveVector<F>],
    ) -> Result<()> {
        let Sampler::Eps(cfg) = &self.sampler else {
            return Ok(());
        };
        for (p, f) in preferences.iter().zip(objectives) {
            self.archive.push(EvaluatedPreference {
                preference: p.clone(),
                objectives: f.clone(),
            });
        }
        if t % cfg.period_length == 0 {
            self.population = Some(select_subset(&self.archive, cfg.select_fraction)?);
            self.archive.clear();
        }
        Ok(())
    }
}

/// Trains `model` for `optimizer.max_iterations` iterations.
///
/// `monitor` sees the model after every update together with that iteration's
/// record; an error from it stops the run.
#[allow(clippy::too_many_arguments)]
pub fn run_training<F, P, M>(
    problem: &P,
    model: &mut ParetoSetModel<F>,
    scalarization: ScalarizationKind,
    optimizer: &OptimizerConfig,
    sampler: &Sampler,
    ideal_epsilon: F,
    rng: &mut RngStream,
    mut monitor: M,
) -> Result<Vec<IterationRecord<F>>>
where
    F: Scalar,
    P: Problem<F> + ?Sized,
    M: FnMut(&ParetoSetModel<F>, &IterationRecord<F>) -> Result<()>,
{
    optimizer.validate()?;
    if let Sampler::Eps(cfg) = sampler {
        cfg.validate(optimizer.max_iterations)?;
    }
    let m = problem.spec().n_objectives;
    let mut ideal = IdealPoint::unobserved(m, ideal_epsilon)?;
    let mut state = PreferenceSampler::new(sampler.clone());
    let mut trace = Vec::with_capacity(optimizer.max_iterations);
    for t in 1..=optimizer.max_iterations {
        let (batch, source) = state.next_batch(rng, optimizer.batch_size, m)?;
        let step = model.training_step(&batch, problem, scalarization, &mut ideal, optimizer)?;
        state.observe(t, &batch, &step.objectives)?;
        let record = IterationRecord {
            iteration: t,
            loss: step.loss,
            source,
            preferences: batch,
            objectives: step.objectives,
        };
        monitor(model, &record)?;
        trace.push(record);
    }
    Ok(trace)
}

/// [`run_training`] with the evolutionary sampler and no monitor.
pub fn run_eps_training<F: Scalar, P: Problem<F> + ?Sized>(
    problem: &P,
    model: &mut ParetoSetModel<F>,
    scalarization: ScalarizationKind,
    optimizer: &OptimizerConfig,
    eps: &EpsConfig,
    ideal_epsilon: F,
    rng: &mut RngStream,
) -> Result<Vec<IterationRecord<F>>> {
    run_training(
        problem,
        model,
        scalarization,
        optimizer,
        &Sampler::Eps(eps.clone()),
        ideal_epsilon,
        rng,
        |_, _| Ok(()),
    )
}

/// Wraps a problem and counts objective evaluations.
#[derive(Debug)]
pub struct CountingProblem<P> {
    inner: P,
    evaluations: AtomicUsize,
}

impl<P> CountingProblem<P> {
    pub fn new(inner: P) -> Self {
        Self {
            inner,
            evaluations: AtomicUsize::new(0),
        }
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations.load(AtomicOrdering::Relaxed)
    }
}

impl<F: Scalar, P: Problem<F>> Problem<F> for CountingProblem<P> {
    fn spec(&self) -> &ProblemSpec<F> {
        self.inner.spec()
    }

    fn evaluate(&self, x: &[F]) -> Result<ObjectiveVector<F>> {
        self.evaluations.fetch_add(1, AtomicOrdering::Relaxed);
        self.inner.evaluate(x)
    }

    fn jacobian(&self, x: &[F]) -> Result<Jacobian<F>> {
        self.inner.jacobian(x)
    }
}
