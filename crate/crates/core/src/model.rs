//! The Pareto set model: a feed-forward network from preference vectors to
//! decision vectors, trained end to end through the problem Jacobian.
//!
//! Architecture: `m -> h1 -> ... -> d` dense layers, rectifier activations on the
//! hidden layers and a sigmoid on the output, which is then mapped affinely onto
//! the problem box: `x = lb + (ub - lb) * sigmoid(a)`.
//!
//! Parameters live in one flat vector. Each layer contributes its weights
//! (`out x in`, row-major) followed by its biases. The optimizer is Adam and its
//! moment estimates are stored alongside the parameters.

use std::fmt::Write as _;

use crate::domain::{DecisionVector, ObjectiveVector, PreferenceVector};
use crate::error::{check_len, Error, Result};
use crate::problems::{Problem, ProblemSpec};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::scalarize::{IdealPoint, ScalarizationKind};

pub const DEFAULT_HIDDEN: [usize; 2] = [64, 64];

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_iterations: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub stabilizer: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            batch_size: 8,
            max_iterations: 1000,
            beta1: 0.9,
            beta2: 0.999,
            stabilizer: 1e-8,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive");
        }
        if self.max_iterations == 0 {
            return bad("max iterations must be positive");
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0 && self.beta2 > 0.0 && self.beta2 < 1.0) {
            return bad("moment decay rates must lie in (0, 1)");
        }
        if !(self.stabilizer > 0.0) {
            return bad("stabilizer must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct AdamState<F> {
    first: Vec<F>,
    second: Vec<F>,
    steps: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoSetModel<F> {
    layer_sizes: Vec<usize>,
    params: Vec<F>,
    adam: AdamState<F>,
}

/// Per-sample activations kept for the backward pass.
struct Trace<F> {
    /// Inputs to every layer; `inputs[0]` is the preference.
    inputs: Vec<Vec<F>>,
    /// Sigmoid outputs of the last layer.
    squashed: Vec<F>,
}

/// Result of one optimizer update.
#[derive(Debug, Clone)]
pub struct StepOutcome<F> {
    /// Mean scalarized loss before the update.
    pub loss: F,
    pub decisions: Vec<DecisionVector<F>>,
    pub objectives: Vec<ObjectiveVector<F>>,
}

#[derive(Debug, Clone)]
pub struct LossGradient<F> {
    pub loss: F,
    pub gradient: Vec<F>,
    pub objectives: Vec<ObjectiveVector<F>>,
}

#[inline]
fn sigmoid<F: Scalar>(a: F) -> F {
    if a >= F::zero() {
        F::one() / (F::one() + (-a).exp())
    } else {
        let e = a.exp();
        e / (F::one() + e)
    }
}

fn parameter_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl<F: Scalar> ParetoSetModel<F> {
    /// Hidden layers get uniform fan-in initialization `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`;
    /// the output layer starts at zero so every preference initially maps to the box midpoint.
    pub fn new(m: usize, hidden: &[usize], d: usize, rng: &mut RngStream) -> Result<Self> {
        if m < 2 || d == 0 || hidden.contains(&0) {
            return Err(Error::Config(format!(
                "invalid layer sizes m={m}, hidden={hidden:?}, d={d}"
            )));
        }
        let mut sizes = vec![m];
        sizes.extend_from_slice(hidden);
        sizes.push(d);
        let mut params = Vec::with_capacity(parameter_count(&sizes));
        let last = sizes.len() - 2;
        for (l, w) in sizes.windows(2).enumerate() {
            let (fan_in, fan_out) = (w[0], w[1]);
            if l == last {
                params.extend(std::iter::repeat_n(F::zero(), fan_in * fan_out + fan_out));
            } else {
                let bound = 1.0 / (fan_in as f64).sqrt();
                params.extend(
                    (0..fan_in * fan_out + fan_out).map(|_| F::lit(rng.uniform_in(-bound, bound))),
                );
            }
        }
        Ok(Self::from_parameters(sizes, params))
    }

    pub fn for_problem(spec: &ProblemSpec<F>, hidden: &[usize], rng: &mut RngStream) -> Result<Self> {
        Self::new(spec.n_objectives, hidden, spec.n_variables, rng)
    }

    fn from_parameters(layer_sizes: Vec<usize>, params: Vec<F>) -> Self {
        let n = params.len();
        Self {
            layer_sizes,
            params,
            adam: AdamState {
                first: vec![F::zero(); n],
                second: vec![F::zero(); n],
                steps: 0,
            },
        }
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn parameters(&self) -> &[F] {
        &self.params
    }

    /// Direct parameter access. Resets nothing; the optimizer moments stay as they are.
    pub fn parameters_mut(&mut self) -> &mut [F] {
        &mut self.params
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().expect("at least two layers")
    }

    fn check_spec(&self, spec: &ProblemSpec<F>) -> Result<()> {
        check_len(spec.n_objectives, self.input_dim())?;
        check_len(spec.n_variables, self.output_dim())
    }

    fn check_finite(&self) -> Result<()> {
        match self.params.iter().position(|p| !p.is_finite()) {
            Some(i) => Err(Error::NumericState(format!("parameter {i} is not finite"))),
            None => Ok(()),
        }
    }

    fn forward_one(&self, lambda: &[F], spec: &ProblemSpec<F>) -> (Trace<F>, Vec<F>) {
        let mut inputs = vec![lambda.to_vec()];
        let mut offset = 0;
        let n_layers = self.layer_sizes.len() - 1;
        let mut out = Vec::new();
        for l in 0..n_layers {
            let (fan_in, fan_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            let w = &self.params[offset..offset + fan_in * fan_out];
            let b = &self.params[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
            offset += fan_in * fan_out + fan_out;
            let h = inputs.last().expect("layer input");
            out = (0..fan_out)
                .map(|o| {
                    let row = &w[o * fan_in..(o + 1) * fan_in];
                    row.iter().zip(h).map(|(&a, &x)| a * x).sum::<F>() + b[o]
                })
                .collect();
            if l + 1 < n_layers {
                let relu: Vec<F> = out.iter().map(|&z| z.max(F::zero())).collect();
                inputs.push(relu);
            }
        }
        let squashed: Vec<F> = out.into_iter().map(sigmoid).collect();
        let x = squashed
            .iter()
            .zip(spec.lower_bounds.iter().zip(&spec.upper_bounds))
            .map(|(&s, (&lo, &hi))| lo + (hi - lo) * s)
            .collect();
        (Trace { inputs, squashed }, x)
    }

    /// Maps each preference into the problem box.
    pub fn forward(
        &self,
        batch: &[PreferenceVector<F>],
        spec: &ProblemSpec<F>,
    ) -> Result<Vec<DecisionVector<F>>> {
        self.check_spec(spec)?;
        self.check_finite()?;
        batch
            .iter()
            .map(|p| {
                check_len(self.input_dim(), p.dim())?;
                Ok(DecisionVector(self.forward_one(p, spec).1))
            })
            .collect()
    }

    /// Accumulates `d loss / d theta` for one sample, given `d loss / d x`.
    fn backward_one(&self, trace: &Trace<F>, spec: &ProblemSpec<F>, dx: &[F], grad: &mut [F]) {
        let n_layers = self.layer_sizes.len() - 1;
        // Through the bound mapping and the sigmoid.
        let mut delta: Vec<F> = dx
            .iter()
            .zip(&trace.squashed)
            .zip(spec.lower_bounds.iter().zip(&spec.upper_bounds))
            .map(|((&g, &s), (&lo, &hi))| g * (hi - lo) * s * (F::one() - s))
            .collect();
        let mut offset = self.params.len();
        for l in (0..n_layers).rev() {
            let (fan_in, fan_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            offset -= fan_in * fan_out + fan_out;
            let h = &trace.inputs[l];
            let (gw, gb) = grad[offset..offset + fan_in * fan_out + fan_out].split_at_mut(fan_in * fan_out);
            for o in 0..fan_out {
                let d = delta[o];
                if d == F::zero() {
                    continue;
                }
                gb[o] += d;
                for (g, &x) in gw[o * fan_in..(o + 1) * fan_in].iter_mut().zip(h) {
                    *g += d * x;
                }
            }
            if l == 0 {
                break;
            }
            let w = &self.params[offset..offset + fan_in * fan_out];
            let mut prev = vec![F::zero(); fan_in];
            for o in 0..fan_out {
                let d = delta[o];
                if d == F::zero() {
                    continue;
                }
                for (p, &a) in prev.iter_mut().zip(&w[o * fan_in..(o + 1) * fan_in]) {
                    *p += a * d;
                }
            }
            // Rectifier derivative: active where the layer output is positive.
            for (p, &x) in prev.iter_mut().zip(h) {
                if x <= F::zero() {
                    *p = F::zero();
                }
            }
            delta = prev;
        }
    }

    fn evaluate_batch<P: Problem<F> + ?Sized>(
        &self,
        batch: &[PreferenceVector<F>],
        problem: &P,
    ) -> Result<(Vec<Trace<F>>, Vec<Vec<F>>, Vec<ObjectiveVector<F>>)> {
        if batch.is_empty() {
            return Err(Error::Config("empty batch".into()));
        }
        let spec = problem.spec();
        self.check_spec(spec)?;
        self.check_finite()?;
        let mut traces = Vec::with_capacity(batch.len());
        let mut xs = Vec::with_capacity(batch.len());
        let mut fs = Vec::with_capacity(batch.len());
        for p in batch {
            check_len(self.input_dim(), p.dim())?;
            let (trace, x) = self.forward_one(p, spec);
            fs.push(problem.evaluate(&x)?);
            traces.push(trace);
            xs.push(x);
        }
        Ok((traces, xs, fs))
    }

    fn gradient_from<P: Problem<F> + ?Sized>(
        &self,
        batch: &[PreferenceVector<F>],
        problem: &P,
        scalarization: ScalarizationKind,
        ideal: &IdealPoint<F>,
        traces: &[Trace<F>],
        xs: &[Vec<F>],
        fs: &[ObjectiveVector<F>],
    ) -> Result<(F, Vec<F>)> {
        let spec = problem.spec();
        let n = F::from_usize_lossy(batch.len());
        let mut grad = vec![F::zero(); self.params.len()];
        let mut total = F::zero();
        for (((lambda, trace), x), f) in batch.iter().zip(traces).zip(xs).zip(fs) {
            let (s, ds_df) = scalarization.gradient(f, lambda, ideal)?;
            total += s;
            let jac = problem.jacobian(x)?;
            let mut dx = vec![F::zero(); spec.n_variables];
            for (i, &g) in ds_df.iter().enumerate() {
                if g == F::zero() {
                    continue;
                }
                for (d, &j) in dx.iter_mut().zip(jac.row(i)) {
                    *d += g * j / n;
                }
            }
            self.backward_one(trace, spec, &dx, &mut grad);
        }
        let loss = total / n;
        if !loss.is_finite() {
            return Err(Error::NumericState(format!("batch loss is {loss}")));
        }
        if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::NumericState(format!("gradient component {i} is not finite")));
        }
        Ok((loss, grad))
    }

    /// Mean scalarized loss over the batch with a fixed ideal point. Forward pass only.
    pub fn batch_loss<P: Problem<F> + ?Sized>(
        &self,
        batch: &[PreferenceVector<F>],
        problem: &P,
        scalarization: ScalarizationKind,
        ideal: &IdealPoint<F>,
    ) -> Result<F> {
        let (_, _, fs) = self.evaluate_batch(batch, problem)?;
        let mut total = F::zero();
        for (lambda, f) in batch.iter().zip(&fs) {
            total += scalarization.value(f, lambda, ideal)?;
        }
        Ok(total / F::from_usize_lossy(batch.len()))
    }

    /// Loss and its gradient with respect to every parameter, ideal point held fixed.
    pub fn loss_and_gradient<P: Problem<F> + ?Sized>(
        &self,
        batch: &[PreferenceVector<F>],
        problem: &P,
        scalarization: ScalarizationKind,
        ideal: &IdealPoint<F>,
    ) -> Result<LossGradient<F>> {
        let (traces, xs, fs) = self.evaluate_batch(batch, problem)?;
        let (loss, gradient) = self.gradient_from(batch, problem, scalarization, ideal, &traces, &xs, &fs)?;
        Ok(LossGradient {
            loss,
            gradient,
            objectives: fs,
        })
    }

    /// One training iteration: evaluate the batch once, fold it into the ideal point,
    /// backpropagate the mean scalarized loss and apply an Adam update.
    pub fn training_step<P: Problem<F> + ?Sized>(
        &mut self,
        batch: &[PreferenceVector<F>],
        problem: &P,
        scalarization: ScalarizationKind,
        ideal: &mut IdealPoint<F>,
        config: &OptimizerConfig,
    ) -> Result<StepOutcome<F>> {
        let (traces, xs, fs) = self.evaluate_batch(batch, problem)?;
        ideal.update(&fs)?;
        let (loss, grad) = self.gradient_from(batch, problem, scalarization, ideal, &traces, &xs, &fs)?;
        self.adam_update(&grad, config);
        self.check_finite()?;
        Ok(StepOutcome {
            loss,
            decisions: xs.into_iter().map(DecisionVector).collect(),
            objectives: fs,
        })
    }

    fn adam_update(&mut self, grad: &[F], config: &OptimizerConfig) {
        let (b1, b2) = (F::lit(config.beta1), F::lit(config.beta2));
        let lr = F::lit(config.learning_rate);
        let eps = F::lit(config.stabilizer);
        let state = &mut self.adam;
        state.steps += 1;
        let c1 = F::one() - b1.powi(state.steps);
        let c2 = F::one() - b2.powi(state.steps);
        for (((p, &g), m), v) in self
            .params
            .iter_mut()
            .zip(grad)
            .zip(state.first.iter_mut())
            .zip(state.second.iter_mut())
        {
            *m = b1 * *m + (F::one() - b1) * g;
            *v = b2 * *v + (F::one() - b2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }

    /// Text checkpoint:
    ///
    /// ```text
    /// psl-model 1
    /// layers <m> <h1> ... <d>
    /// parameters <count>
    /// <one parameter per line, 17 significant digits>
    /// ```
    pub fn to_checkpoint(&self) -> String {
        let mut out = String::from("psl-model 1\nlayers");
        for s in &self.layer_sizes {
            let _ = write!(out, " {s}");
        }
        let _ = writeln!(out, "\nparameters {}", self.params.len());
        for p in &self.params {
            let _ = writeln!(out, "{p:.16e}");
        }
        out
    }

    /// Parses a checkpoint written by [`Self::to_checkpoint`]. Optimizer moments start at zero.
    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Checkpoint(msg.to_string());
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("psl-model 1") {
            return Err(bad("missing `psl-model 1` header"));
        }
        let sizes: Vec<usize> = lines
            .next()
            .and_then(|l| l.strip_prefix("layers"))
            .ok_or_else(|| bad("missing layers line"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("bad layer size")))
            .collect::<Result<_>>()?;
        if sizes.len() < 2 {
            return Err(bad("need at least two layer sizes"));
        }
        let count: usize = lines
            .next()
            .and_then(|l| l.strip_prefix("parameters"))
            .ok_or_else(|| bad("missing parameters line"))?
            .trim()
            .parse()
            .map_err(|_| bad("bad parameter count"))?;
        if count != parameter_count(&sizes) {
            return Err(bad("parameter count does not match layer sizes"));
        }
        let params: Vec<F> = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.trim().parse::<F>().map_err(|_| bad("bad parameter value")))
            .collect::<Result<_>>()?;
        if params.len() != count {
            return Err(bad("wrong number of parameter lines"));
        }
        Ok(Self::from_parameters(sizes, params))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::simplex_project;
    use crate::problems::{Benchmark, Jacobian};

    /// f1 = |x|^2, f2 = |x - 1|^2 on [-2, 2]^d.
    struct ConvexToy {
        spec: ProblemSpec<f64>,
    }

    impl ConvexToy {
        fn new(d: usize) -> Self {
            Self {
                spec: ProblemSpec {
                    name: "toy",
                    n_objectives: 2,
                    n_variables: d,
                    lower_bounds: vec![-2.0; d],
                    upper_bounds: vec![2.0; d],
                },
            }
        }
    }

    impl Problem<f64> for ConvexToy {
        fn spec(&self) -> &ProblemSpec<f64> {
            &self.spec
        }

        fn evaluate(&self, x: &[f64]) -> Result<ObjectiveVector<f64>> {
            self.spec.check_bounds(x)?;
            let f1 = x.iter().map(|v| v * v).sum();
            let f2 = x.iter().map(|v| (v - 1.0) * (v - 1.0)).sum();
            ObjectiveVector::new(vec![f1, f2])
        }

        fn jacobian(&self, x: &[f64]) -> Result<Jacobian<f64>> {
            let mut j = Jacobian::zeros(2, x.len());
            for (k, &v) in x.iter().enumerate() {
                j.set(0, k, 2.0 * v);
                j.set(1, k, 2.0 * (v - 1.0));
            }
            Ok(j)
        }
    }

    fn prefs(rows: &[&[f64]]) -> Vec<PreferenceVector<f64>> {
        rows.iter().map(|r| simplex_project(r).unwrap()).collect()
    }

    #[test]
    fn zero_output_layer_maps_to_midpoint() {
        let spec = Benchmark::Re33.spec::<f64>();
        let mut rng = RngStream::new(1);
        let model = ParetoSetModel::for_problem(&spec, &DEFAULT_HIDDEN, &mut rng).unwrap();
        let out = model.forward(&prefs(&[&[0.2, 0.3, 0.5], &[1.0, 0.0, 0.0]]), &spec).unwrap();
        for x in out {
            assert_eq!(x.0, spec.midpoint());
        }
    }

    #[test]
    fn forward_is_deterministic_and_in_bounds() {
        let spec = Benchmark::Zdt3.spec::<f64>();
        let mut rng = RngStream::new(2);
        let mut model = ParetoSetModel::for_problem(&spec, &[16, 16], &mut rng).unwrap();
        for p in model.parameters_mut() {
            *p = rng.uniform_in(-3.0, 3.0);
        }
        let batch = prefs(&[&[0.3, 0.7], &[0.3, 0.7], &[0.9, 0.1]]);
        let out = model.forward(&batch, &spec).unwrap();
        assert_eq!(out[0], out[1]);
        for x in &out {
            spec.check_bounds(x).unwrap();
        }
    }

    #[test]
    fn forward_rejects_wrong_dimensions() {
        let spec = Benchmark::Zdt3.spec::<f64>();
        let mut rng = RngStream::new(2);
        let model = ParetoSetModel::for_problem(&spec, &[8], &mut rng).unwrap();
        assert!(model.forward(&prefs(&[&[0.2, 0.3, 0.5]]), &spec).is_err());
        let other = Benchmark::Dtlz5.spec::<f64>();
        assert!(model.forward(&prefs(&[&[0.5, 0.5]]), &other).is_err());
    }

    #[test]
    fn non_finite_parameters_are_a_numeric_error() {
        let spec = Benchmark::Zdt3.spec::<f64>();
        let mut rng = RngStream::new(2);
        let mut model = ParetoSetModel::for_problem(&spec, &[8], &mut rng).unwrap();
        model.parameters_mut()[3] = f64::NAN;
        assert!(matches!(
            model.forward(&prefs(&[&[0.5, 0.5]]), &spec),
            Err(Error::NumericState(_))
        ));
    }

    fn gradient_check(problem: &dyn Problem<f64>, kind: ScalarizationKind, seed: u64) {
        let spec = problem.spec();
        let mut rng = RngStream::new(seed);
        let mut model = ParetoSetModel::for_problem(spec, &[12, 12], &mut rng).unwrap();
        for p in model.parameters_mut() {
            *p = rng.uniform_in(-0.5, 0.5);
        }
        let batch: Vec<_> = (0..4)
            .map(|_| {
                let raw: Vec<f64> = (0..spec.n_objectives).map(|_| rng.uniform_in(0.05, 1.0)).collect();
                simplex_project(&raw).unwrap()
            })
            .collect();
        let ideal = IdealPoint::new(vec![-0.5; spec.n_objectives], 0.1).unwrap();
        let lg = model.loss_and_gradient(&batch, &problem, kind, &ideal).unwrap();
        let scale = lg.gradient.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        for k in 0..model.parameters().len() {
            let theta = model.parameters()[k];
            let h = 1e-6 * theta.abs().max(1e-2);
            model.parameters_mut()[k] = theta + h;
            let up = model.batch_loss(&batch, &problem, kind, &ideal).unwrap();
            model.parameters_mut()[k] = theta - h;
            let down = model.batch_loss(&batch, &problem, kind, &ideal).unwrap();
            model.parameters_mut()[k] = theta;
            let fd = (up - down) / (2.0 * h);
            let g = lg.gradient[k];
            let denom = g.abs().max(fd.abs()).max(1e-6 * scale).max(1e-12);
            assert!((g - fd).abs() / denom < 1e-3, "param {k}: backprop {g} vs fd {fd}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences_on_toy() {
        let toy = ConvexToy::new(3);
        gradient_check(&toy, ScalarizationKind::Ls, 1);
        gradient_check(&toy, ScalarizationKind::Mtch, 2);
        gradient_check(&toy, ScalarizationKind::Cosmos { mu: 1.0 }, 3);
    }

    #[test]
    fn gradient_matches_finite_differences_on_dtlz5() {
        gradient_check(&Benchmark::Dtlz5.problem::<f64>(), ScalarizationKind::Ls, 4);
    }

    #[test]
    fn one_step_decreases_loss_on_convex_toy() {
        let toy = ConvexToy::new(3);
        let mut rng = RngStream::new(9);
        let mut model = ParetoSetModel::for_problem(toy.spec(), &[16, 16], &mut rng).unwrap();
        for p in model.parameters_mut() {
            *p = rng.uniform_in(-0.3, 0.3);
        }
        let batch = prefs(&[&[0.2, 0.8], &[0.5, 0.5], &[0.9, 0.1]]);
        let ideal = IdealPoint::new(vec![0.0, 0.0], 0.1).unwrap();
        let before = model.batch_loss(&batch, &toy, ScalarizationKind::Ls, &ideal).unwrap();
        let lg = model.loss_and_gradient(&batch, &toy, ScalarizationKind::Ls, &ideal).unwrap();
        // Plain gradient step with a tiny rate.
        for (p, g) in model.parameters_mut().iter_mut().zip(&lg.gradient) {
            *p -= 1e-4 * g;
        }
        let after = model.batch_loss(&batch, &toy, ScalarizationKind::Ls, &ideal).unwrap();
        assert!(after < before, "{after} !< {before}");

        let mut ideal = ideal;
        let out = model
            .training_step(&batch, &toy, ScalarizationKind::Ls, &mut ideal, &OptimizerConfig::default())
            .unwrap();
        assert_eq!(out.loss, after);
        let after_adam = model.batch_loss(&batch, &toy, ScalarizationKind::Ls, &ideal).unwrap();
        assert!(after_adam < after);
    }

    #[test]
    fn tchebycheff_gradient_only_touches_active_objective() {
        // With lambda = (1, 0) the active term is objective 0, so the gradient equals
        // that of the single-objective loss f1.
        let toy = ConvexToy::new(2);
        let mut rng = RngStream::new(4);
        let mut model = ParetoSetModel::for_problem(toy.spec(), &[8], &mut rng).unwrap();
        for p in model.parameters_mut() {
            *p = rng.uniform_in(-0.5, 0.5);
        }
        let batch = prefs(&[&[1.0, 0.0]]);
        let ideal = IdealPoint::new(vec![0.0, 0.0], 0.0).unwrap();
        let tch = model.loss_and_gradient(&batch, &toy, ScalarizationKind::Tch, &ideal).unwrap();
        let ls = model.loss_and_gradient(&batch, &toy, ScalarizationKind::Ls, &ideal).unwrap();
        assert_eq!(tch.gradient, ls.gradient);
    }

    #[test]
    fn parameters_stay_finite_over_training() {
        let problem = Benchmark::Zdt3.problem::<f64>();
        let mut rng = RngStream::new(5);
        let mut model = ParetoSetModel::for_problem(problem.spec(), &[16, 16], &mut rng).unwrap();
        let mut ideal = IdealPoint::unobserved(2, 0.1).unwrap();
        let cfg = OptimizerConfig {
            learning_rate: 0.01,
            ..OptimizerConfig::default()
        };
        for i in 0..200 {
            let w = (i % 10) as f64 / 9.0;
            let batch = prefs(&[&[w, 1.0 - w], &[1.0 - w, w]]);
            model
                .training_step(&batch, &problem, ScalarizationKind::Mtch, &mut ideal, &cfg)
                .unwrap();
        }
        assert!(model.parameters().iter().all(|p| p.is_finite()));
    }

    #[test]
    fn checkpoint_round_trip_is_bitwise() {
        let mut rng = RngStream::new(6);
        let mut model = ParetoSetModel::<f64>::new(3, &[5, 4], 7, &mut rng).unwrap();
        for p in model.parameters_mut() {
            *p = rng.uniform_in(-1.0, 1.0) * 1e-3 / 3.0;
        }
        let text = model.to_checkpoint();
        assert!(text.starts_with("psl-model 1\nlayers 3 5 4 7\nparameters "));
        let back = ParetoSetModel::<f64>::from_checkpoint(&text).unwrap();
        assert_eq!(back.layer_sizes(), model.layer_sizes());
        assert!(back
            .parameters()
            .iter()
            .zip(model.parameters())
            .all(|(a, b)| a.to_bits() == b.to_bits()));

        let small = ParetoSetModel::<f32>::new(2, &[3], 2, &mut rng).unwrap();
        let back = ParetoSetModel::<f32>::from_checkpoint(&small.to_checkpoint()).unwrap();
        assert_eq!(back.parameters(), small.parameters());
    }

    #[test]
    fn checkpoint_rejects_garbage() {
        assert!(ParetoSetModel::<f64>::from_checkpoint("nope").is_err());
        assert!(ParetoSetModel::<f64>::from_checkpoint("psl-model 1\nlayers 2 2\nparameters 5\n").is_err());
    }

    #[test]
    fn optimizer_defaults() {
        let cfg = OptimizerConfig::default();
        assert_eq!((cfg.learning_rate, cfg.batch_size, cfg.max_iterations), (0.001, 8, 1000));
        cfg.validate().unwrap();
        assert!(OptimizerConfig { beta1: 1.0, ..cfg }.validate().is_err());
    }
}
