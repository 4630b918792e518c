//! Scalarization functions and the online ideal point.
//!
//! Every function returns the scalar value; the `gradient` entry point on
//! [`ScalarizationKind`] also returns `d s / d f`, which the model backpropagates.

use std::fmt;
use std::str::FromStr;

use crate::domain::{ObjectiveVector, PreferenceVector};
use crate::error::{check_len, Error, Result};
use crate::scalar::Scalar;

/// Default offset subtracted from the ideal point in the Tchebycheff forms.
pub const DEFAULT_IDEAL_EPSILON: f64 = 0.1;
/// Preferences are floored to this before dividing by their components.
pub const PREFERENCE_FLOOR: f64 = 1e-6;
pub const DEFAULT_COSMOS_MU: f64 = 1.0;

/// Running componentwise minimum of observed objectives, plus the offset `epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealPoint<F> {
    z: Vec<F>,
    epsilon: F,
}

impl<F: Scalar> IdealPoint<F> {
    /// An ideal point that has observed nothing yet (all components `+inf`).
    pub fn unobserved(m: usize, epsilon: F) -> Result<Self> {
        Self::new(vec![F::infinity(); m], epsilon)
    }

    pub fn new(z: Vec<F>, epsilon: F) -> Result<Self> {
        if !(epsilon >= F::zero()) || !epsilon.is_finite() {
            return Err(Error::Config(format!(
                "ideal point offset must be finite and nonnegative, got {epsilon}"
            )));
        }
        Ok(Self { z, epsilon })
    }

    pub fn z(&self) -> &[F] {
        &self.z
    }

    pub fn epsilon(&self) -> F {
        self.epsilon
    }

    /// Folds a batch into the running minimum. Never increases a component.
    pub fn update<'a, I>(&mut self, batch: I) -> Result<()>
    where
        I: IntoIterator<Item = &'a ObjectiveVector<F>>,
    {
        for f in batch {
            check_len(self.z.len(), f.len())?;
            for (z, &v) in self.z.iter_mut().zip(f.iter()) {
                if v < *z {
                    *z = v;
                }
            }
        }
        Ok(())
    }

    /// `z_i - epsilon`, the utopian point used by the Tchebycheff forms.
    fn utopia(&self, i: usize) -> F {
        self.z[i] - self.epsilon
    }
}

/// Weighted sum `sum_i lambda_i f_i`.
pub fn s_ls<F: Scalar>(f: &[F], lambda: &PreferenceVector<F>) -> Result<F> {
    check_len(lambda.dim(), f.len())?;
    Ok(f.iter().zip(lambda.iter()).map(|(&fi, &li)| li * fi).sum())
}

/// Index of the largest term; the first one wins ties.
fn argmax<F: Scalar>(terms: impl Iterator<Item = F>) -> (F, usize) {
    let mut best = (F::neg_infinity(), 0);
    for (i, t) in terms.enumerate() {
        if i == 0 || t > best.0 {
            best = (t, i);
        }
    }
    best
}

/// Tchebycheff `max_i lambda_i (f_i - (z_i - eps))` with its active index.
pub fn s_tch<F: Scalar>(
    f: &[F],
    lambda: &PreferenceVector<F>,
    ideal: &IdealPoint<F>,
) -> Result<(F, usize)> {
    check_len(lambda.dim(), f.len())?;
    check_len(ideal.z.len(), f.len())?;
    Ok(argmax(
        (0..f.len()).map(|i| lambda[i] * (f[i] - ideal.utopia(i))),
    ))
}

/// Modified Tchebycheff `max_i (f_i - (z_i - eps)) / lambda_i` with its active index.
///
/// `lambda` is floored at [`PREFERENCE_FLOOR`] and renormalized first.
pub fn s_mtch<F: Scalar>(
    f: &[F],
    lambda: &PreferenceVector<F>,
    ideal: &IdealPoint<F>,
) -> Result<(F, usize)> {
    check_len(lambda.dim(), f.len())?;
    check_len(ideal.z.len(), f.len())?;
    let floored = lambda.floored(F::lit(PREFERENCE_FLOOR));
    Ok(argmax(
        (0..f.len()).map(|i| (f[i] - ideal.utopia(i)) / floored[i]),
    ))
}

fn norm<F: Scalar>(v: &[F]) -> F {
    v.iter().map(|&x| x * x).sum::<F>().sqrt()
}

/// Weighted sum minus `mu` times the cosine similarity of `f` and `lambda`.
/// A zero `f` skips the penalty.
pub fn s_cosmos<F: Scalar>(f: &[F], lambda: &PreferenceVector<F>, mu: F) -> Result<F> {
    let ls = s_ls(f, lambda)?;
    if mu == F::zero() {
        return Ok(ls);
    }
    let (nf, nl) = (norm(f), norm(lambda));
    if nf == F::zero() {
        return Ok(ls);
    }
    Ok(ls - mu * ls / (nf * nl))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarizationKind {
    Ls,
    Tch,
    Mtch,
    Cosmos { mu: f64 },
}

impl ScalarizationKind {
    pub const ALL_DEFAULT: [ScalarizationKind; 4] = [
        ScalarizationKind::Ls,
        ScalarizationKind::Tch,
        ScalarizationKind::Mtch,
        ScalarizationKind::Cosmos {
            mu: DEFAULT_COSMOS_MU,
        },
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScalarizationKind::Ls => "LS",
            ScalarizationKind::Tch => "TCH",
            ScalarizationKind::Mtch => "MTCH",
            ScalarizationKind::Cosmos { .. } => "COSMOS",
        }
    }

    pub fn value<F: Scalar>(
        &self,
        f: &[F],
        lambda: &PreferenceVector<F>,
        ideal: &IdealPoint<F>,
    ) -> Result<F> {
        Ok(match *self {
            ScalarizationKind::Ls => s_ls(f, lambda)?,
            ScalarizationKind::Tch => s_tch(f, lambda, ideal)?.0,
            ScalarizationKind::Mtch => s_mtch(f, lambda, ideal)?.0,
            ScalarizationKind::Cosmos { mu } => s_cosmos(f, lambda, F::lit(mu))?,
        })
    }

    /// The value and its (sub)gradient with respect to `f`. The ideal point is a constant.
    pub fn gradient<F: Scalar>(
        &self,
        f: &[F],
        lambda: &PreferenceVector<F>,
        ideal: &IdealPoint<F>,
    ) -> Result<(F, Vec<F>)> {
        let m = f.len();
        let mut grad = vec![F::zero(); m];
        let value = match *self {
            ScalarizationKind::Ls => {
                let v = s_ls(f, lambda)?;
                grad.copy_from_slice(lambda);
                v
            }
            ScalarizationKind::Tch => {
                let (v, k) = s_tch(f, lambda, ideal)?;
                grad[k] = lambda[k];
                v
            }
            ScalarizationKind::Mtch => {
                let (v, k) = s_mtch(f, lambda, ideal)?;
                let floored = lambda.floored(F::lit(PREFERENCE_FLOOR));
                grad[k] = F::one() / floored[k];
                v
            }
            ScalarizationKind::Cosmos { mu } => {
                let mu = F::lit(mu);
                let v = s_cosmos(f, lambda, mu)?;
                grad.copy_from_slice(lambda);
                let (nf, nl) = (norm(f), norm(lambda));
                if mu != F::zero() && nf != F::zero() {
                    // d cos / d f = lambda / (|f||l|) - (f.l) f / (|f|^3 |l|)
                    let dot = s_ls(f, lambda)?;
                    for i in 0..m {
                        let dcos = lambda[i] / (nf * nl) - dot * f[i] / (nf * nf * nf * nl);
                        grad[i] -= mu * dcos;
                    }
                }
                v
            }
        };
        Ok((value, grad))
    }
}

impl fmt::Display for ScalarizationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScalarizationKind {
    type Err = Error;

    /// Accepts `ls`, `tch`, `mtch`, `cosmos` with or without a `psl-` prefix.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.strip_prefix("psl-").unwrap_or(&lower) {
            "ls" => Ok(ScalarizationKind::Ls),
            "tch" => Ok(ScalarizationKind::Tch),
            "mtch" => Ok(ScalarizationKind::Mtch),
            "cosmos" => Ok(ScalarizationKind::Cosmos {
                mu: DEFAULT_COSMOS_MU,
            }),
            _ => Err(Error::Config(format!("unknown scalarization `{s}`"))),
        }
    }
}
