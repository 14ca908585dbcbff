//! Probability and entropy primitives and the binary source–channel model.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};

/// Unit in which a rate or entropy is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Bits,
    Nats,
}

impl LogBase {
    /// Convert a quantity in nats to this base.
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            LogBase::Bits => nats / std::f64::consts::LN_2,
            LogBase::Nats => nats,
        }
    }

    /// Convert a quantity in this base to nats.
    pub fn to_nats(self, value: f64) -> f64 {
        match self {
            LogBase::Bits => value * std::f64::consts::LN_2,
            LogBase::Nats => value,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LogBase::Bits => "bits",
            LogBase::Nats => "nats",
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bits" => Ok(LogBase::Bits),
            "nats" => Ok(LogBase::Nats),
            other => Err(Error::Invalid(format!(
                "unknown log base '{other}' (bits|nats)"
            ))),
        }
    }
}

/// A point `(D, R)` on a rate-distortion curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub distortion: f64,
    pub rate: f64,
    pub base: LogBase,
}

/// Binary entropy in nats, `0·ln 0 ≡ 0`. Caller guarantees `q ∈ [0, 1]`.
pub(crate) fn entropy_nats(q: f64) -> f64 {
    if q <= 0.0 || q >= 1.0 {
        return 0.0;
    }
    -q * q.ln() - (1.0 - q) * (-q).ln_1p()
}

/// Binary entropy `h(q) = −q log q − (1−q) log(1−q)` in the requested base.
pub fn binary_entropy(q: f64, base: LogBase) -> Result<f64> {
    check_probability("q", q)?;
    Ok(base.from_nats(entropy_nats(q)))
}

pub(crate) fn star_unchecked(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + b * (1.0 - a)
}

/// Binary convolution `a ⋆ b = a(1−b) + b(1−a)`: the probability that the XOR
/// of independent Bernoulli(a) and Bernoulli(b) variables is 1.
pub fn star(a: f64, b: f64) -> Result<f64> {
    check_probability("a", a)?;
    check_probability("b", b)?;
    Ok(star_unchecked(a, b))
}

/// Which symbol relabelings were applied to reach the canonical region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Complements {
    /// Source and reconstruction symbols were swapped (`α ↦ 1 − α`).
    pub source: bool,
    /// Observation symbols were swapped (`p ↦ 1 − p`).
    pub observation: bool,
}

/// Bernoulli(α) source seen through BSC(p), in canonical form `α, p ≤ 1/2`.
///
/// Only [`canonicalize`] constructs one, so the invariants always hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceModel {
    alpha: f64,
    p: f64,
    beta: f64,
    complements: Complements,
}

impl SourceModel {
    /// `P(X = 1)`, at most 1/2.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// BSC crossover probability, at most 1/2.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// `P(Y = 1) = α ⋆ p`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn beta_bar(&self) -> f64 {
        1.0 - self.beta
    }

    pub fn complements(&self) -> Complements {
        self.complements
    }

    /// `p < α`: the observation is informative and the iRDF has a non-trivial
    /// branch on `(p, α)`.
    pub fn is_informative(&self) -> bool {
        self.p < self.alpha
    }

    /// Entropy of the observation, `h(β)`, in the requested base.
    pub fn observation_entropy(&self, base: LogBase) -> f64 {
        base.from_nats(entropy_nats(self.beta))
    }
}

/// Map arbitrary `(α, p) ∈ [0, 1]²` to the canonical region `α, p ≤ 1/2`.
///
/// Swapping the source and reconstruction labels sends `α ↦ 1 − α`; swapping
/// the observation labels sends `p ↦ 1 − p`. Neither changes the iRDF.
pub fn canonicalize(alpha_raw: f64, p_raw: f64) -> Result<SourceModel> {
    check_probability("alpha", alpha_raw)?;
    check_probability("p", p_raw)?;
    let mut complements = Complements::default();
    let mut alpha = alpha_raw;
    let mut p = p_raw;
    if alpha > 0.5 {
        alpha = 1.0 - alpha;
        complements.source = true;
    }
    if p > 0.5 {
        p = 1.0 - p;
        complements.observation = true;
    }
    Ok(SourceModel {
        alpha,
        p,
        beta: star_unchecked(alpha, p),
        complements,
    })
}
