//! Run configuration, the flat `key = value` config file format, and config hashing.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use psl_eps::eps::{EpsConfig, Sampler};
use psl_eps::indicators::DEFAULT_LOG_HV_EPSILON;
use psl_eps::scalarize::{DEFAULT_COSMOS_MU, DEFAULT_IDEAL_EPSILON};
use psl_eps::{Benchmark, OptimizerConfig, ScalarizationKind, DEFAULT_HIDDEN};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SamplerKind {
    Uniform,
    Eps,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 2] = [SamplerKind::Uniform, SamplerKind::Eps];

    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::Uniform => "uniform",
            SamplerKind::Eps => "eps",
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplerKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(SamplerKind::Uniform),
            "eps" => Ok(SamplerKind::Eps),
            other => Err(HarnessError::Config(format!("unknown sampler `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: Benchmark,
    pub scalarization: ScalarizationKind,
    pub sampler: SamplerKind,
    pub optimizer: OptimizerConfig,
    pub eps: EpsConfig,
    pub seed: u64,
    pub hv_eval_stride: usize,
    /// Offset subtracted from the ideal point in the Tchebycheff forms.
    pub ideal_epsilon: f64,
    pub log_hv_epsilon: f64,
    /// COSMOS penalty weight; ignored by the other scalarizations.
    pub mu: f64,
    pub hidden: Vec<usize>,
    /// Keep every sampled preference for plotting.
    pub log_preferences: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: Benchmark::Zdt3,
            scalarization: ScalarizationKind::Mtch,
            sampler: SamplerKind::Uniform,
            optimizer: OptimizerConfig::default(),
            eps: EpsConfig::default(),
            seed: 0,
            hv_eval_stride: 20,
            ideal_epsilon: DEFAULT_IDEAL_EPSILON,
            log_hv_epsilon: DEFAULT_LOG_HV_EPSILON,
            mu: DEFAULT_COSMOS_MU,
            hidden: DEFAULT_HIDDEN.to_vec(),
            log_preferences: false,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| HarnessError::Config(format!("bad value `{value}` for `{key}`")))
}

/// Keys accepted by [`RunConfig::set`]. Underscores and hyphens are interchangeable.
pub const CONFIG_KEYS: [&str; 21] = [
    "problem",
    "scalarization",
    "sampler",
    "seed",
    "iters",
    "batch",
    "lr",
    "beta1",
    "beta2",
    "period",
    "sp",
    "cp",
    "mp",
    "eta-c",
    "eta-m",
    "mu",
    "epsilon",
    "log-hv-epsilon",
    "hv-stride",
    "hidden",
    "log-preferences",
];

impl RunConfig {
    pub fn sampler(&self) -> Sampler {
        match self.sampler {
            SamplerKind::Uniform => Sampler::Uniform,
            SamplerKind::Eps => Sampler::Eps(self.eps.clone()),
        }
    }

    /// The scalarization with `mu` filled in for COSMOS.
    pub fn scalarization(&self) -> ScalarizationKind {
        match self.scalarization {
            ScalarizationKind::Cosmos { .. } => ScalarizationKind::Cosmos { mu: self.mu },
            other => other,
        }
    }

    /// Sets one field from its textual key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        match key.as_str() {
            "problem" => {
                self.problem = value
                    .parse()
                    .map_err(|e: psl_eps::Error| HarnessError::Config(e.to_string()))?
            }
            "scalarization" => {
                self.scalarization = value
                    .parse()
                    .map_err(|e: psl_eps::Error| HarnessError::Config(e.to_string()))?
            }
            "sampler" => self.sampler = value.parse()?,
            "seed" => self.seed = parse(&key, value)?,
            "iters" => self.optimizer.max_iterations = parse(&key, value)?,
            "batch" => self.optimizer.batch_size = parse(&key, value)?,
            "lr" => self.optimizer.learning_rate = parse(&key, value)?,
            "beta1" => self.optimizer.beta1 = parse(&key, value)?,
            "beta2" => self.optimizer.beta2 = parse(&key, value)?,
            "period" => self.eps.period_length = parse(&key, value)?,
            "sp" => self.eps.select_fraction = parse(&key, value)?,
            "cp" => self.eps.crossover_prob = parse(&key, value)?,
            "mp" => self.eps.mutation_prob = parse(&key, value)?,
            "eta-c" => self.eps.sbx_index = parse(&key, value)?,
            "eta-m" => self.eps.pm_index = parse(&key, value)?,
            "mu" => self.mu = parse(&key, value)?,
            "epsilon" => self.ideal_epsilon = parse(&key, value)?,
            "log-hv-epsilon" => self.log_hv_epsilon = parse(&key, value)?,
            "hv-stride" => self.hv_eval_stride = parse(&key, value)?,
            "hidden" => {
                self.hidden = value
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|t| !t.is_empty())
                    .map(|t| parse(&key, t))
                    .collect::<Result<_>>()?
            }
            "log-preferences" => self.log_preferences = parse(&key, value)?,
            _ => return Err(HarnessError::Config(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines. Blank lines and `#` comments are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.optimizer.validate()?;
        if self.sampler == SamplerKind::Eps {
            self.eps.validate(self.optimizer.max_iterations)?;
        }
        if self.hv_eval_stride == 0 {
            return Err(HarnessError::Config("hv stride must be positive".into()));
        }
        if !(self.ideal_epsilon >= 0.0 && self.ideal_epsilon.is_finite()) {
            return Err(HarnessError::Config("epsilon must be finite and nonnegative".into()));
        }
        if !(self.log_hv_epsilon > 0.0) {
            return Err(HarnessError::Config("log hv epsilon must be positive".into()));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(HarnessError::Config("mu must be finite and nonnegative".into()));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(HarnessError::Config("hidden layer sizes must be positive".into()));
        }
        Ok(())
    }

    /// Every field as sorted `key=value` lines; parsing it back gives the same config.
    pub fn canonical(&self) -> String {
        let mut kv = BTreeMap::new();
        let hidden: Vec<String> = self.hidden.iter().map(|h| h.to_string()).collect();
        kv.insert("problem", self.problem.name().to_string());
        kv.insert("scalarization", self.scalarization.name().to_string());
        kv.insert("sampler", self.sampler.name().to_string());
        kv.insert("seed", self.seed.to_string());
        kv.insert("iters", self.optimizer.max_iterations.to_string());
        kv.insert("batch", self.optimizer.batch_size.to_string());
        kv.insert("lr", self.optimizer.learning_rate.to_string());
        kv.insert("beta1", self.optimizer.beta1.to_string());
        kv.insert("beta2", self.optimizer.beta2.to_string());
        kv.insert("period", self.eps.period_length.to_string());
        kv.insert("sp", self.eps.select_fraction.to_string());
        kv.insert("cp", self.eps.crossover_prob.to_string());
        kv.insert("mp", self.eps.mutation_prob.to_string());
        kv.insert("eta-c", self.eps.sbx_index.to_string());
        kv.insert("eta-m", self.eps.pm_index.to_string());
        kv.insert("mu", self.mu.to_string());
        kv.insert("epsilon", self.ideal_epsilon.to_string());
        kv.insert("log-hv-epsilon", self.log_hv_epsilon.to_string());
        kv.insert("hv-stride", self.hv_eval_stride.to_string());
        kv.insert("hidden", hidden.join(","));
        kv.insert("log-preferences", self.log_preferences.to_string());
        kv.into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// Hex SHA-256 of [`Self::canonical`].
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Output directory name: the first 16 hex digits of the config hash.
    pub fn dir_name(&self) -> String {
        format!("run-{}", &self.hash()[..16])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let mut c = RunConfig::default();
        c.apply_text("# demo\nproblem = dtlz7\nscalarization=tch\nsp = 0.2\n\nseed=4\n").unwrap();
        assert_eq!(c.problem, Benchmark::Dtlz7);
        assert_eq!(c.scalarization, ScalarizationKind::Tch);
        assert_eq!(c.eps.select_fraction, 0.2);
        c.set("seed", "9").unwrap();
        assert_eq!(c.seed, 9);
        c.set("eta_c", "10").unwrap();
        assert_eq!(c.eps.sbx_index, 10.0);
    }

    #[test]
    fn mu_order_does_not_matter() {
        let mut a = RunConfig::default();
        a.apply_text("mu = 0.5\nscalarization = cosmos\n").unwrap();
        let mut b = RunConfig::default();
        b.apply_text("scalarization = cosmos\nmu = 0.5\n").unwrap();
        assert_eq!(a.scalarization(), ScalarizationKind::Cosmos { mu: 0.5 });
        assert_eq!(a, b);
    }

    #[test]
    fn bad_input_is_a_config_error() {
        let mut c = RunConfig::default();
        for (k, v) in [("problem", "zdt9"), ("sampler", "sobol"), ("iters", "-1"), ("colour", "red")] {
            let err = c.set(k, v).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{k}");
        }
        assert!(c.apply_text("no equals sign").is_err());
        c.set("period", "30").unwrap();
        c.set("sampler", "eps").unwrap();
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn canonical_round_trip_and_hash() {
        let mut c = RunConfig::default();
        c.apply_text("problem=re33\nscalarization=cosmos\nmu=0.25\nsampler=eps\nhidden=32,16\n").unwrap();
        let mut back = RunConfig::default();
        back.apply_text(&c.canonical()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        assert_eq!(c.hash().len(), 64);
        let mut d = c.clone();
        d.seed = 1;
        assert_ne!(d.dir_name(), c.dir_name());
    }
}
