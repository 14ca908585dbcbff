//! Amended distortion on the observation alphabet.
//!
//! `d̂(y, x̂) = P(X ≠ x̂ | Y = y)`. Under this measure the indirect problem for
//! `X` becomes an ordinary rate-distortion problem for `Y`, because
//! `E[d(X, X̂)] = E[d̂(Y, X̂)]` whenever `X̂` depends on `X` only through `Y`.

use std::fmt;
use std::str::FromStr;

use rand::distributions::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SourceModel;

/// Name of the generator behind [`simulate_reduction`], reported alongside
/// the seed.
pub const RNG_NAME: &str = "ChaCha8 (rand_chacha 0.3, seed_from_u64)";

/// The 2×2 table `d̂(y, x̂)`, indexed `[y][x̂]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistortionTable {
    pub entries: [[f64; 2]; 2],
    pub model: SourceModel,
}

impl DistortionTable {
    pub fn get(&self, y: usize, x_hat: usize) -> f64 {
        self.entries[y][x_hat]
    }
}

/// Build `d̂` for a canonical model.
///
/// Fails when `β ∈ {0, 1}`: the observation is then constant and one row of
/// the table is a conditional probability given an impossible event.
pub fn distortion_table(model: &SourceModel) -> Result<DistortionTable> {
    let (a, p, b) = (model.alpha(), model.p(), model.beta());
    let (a_bar, p_bar, b_bar) = (1.0 - a, 1.0 - p, 1.0 - b);
    if b <= 0.0 || b_bar <= 0.0 {
        return Err(Error::DegenerateObservation { beta: b });
    }
    Ok(DistortionTable {
        entries: [
            [a * p / b_bar, a_bar * p_bar / b_bar],
            [a * p_bar / b, a_bar * p / b],
        ],
        model: *model,
    })
}

/// Smallest achievable distortion, `min{p, α}`.
pub fn min_distortion(model: &SourceModel) -> f64 {
    model.p().min(model.alpha())
}

/// Smallest distortion at which the iRDF vanishes: `α`, reached by the
/// constant reconstruction `x̂ ≡ 0`.
pub fn zero_rate_distortion(model: &SourceModel) -> f64 {
    model.alpha()
}

/// A deterministic symbol map `y ↦ x̂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Identity,
    Zero,
    One,
    Flip,
}

impl Estimator {
    pub const ALL: [Estimator; 4] = [
        Estimator::Identity,
        Estimator::Zero,
        Estimator::One,
        Estimator::Flip,
    ];

    pub fn apply(self, y: usize) -> usize {
        match self {
            Estimator::Identity => y,
            Estimator::Zero => 0,
            Estimator::One => 1,
            Estimator::Flip => 1 - y,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Identity => "identity",
            Estimator::Zero => "zero",
            Estimator::One => "one",
            Estimator::Flip => "flip",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Estimator::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| {
                Error::Invalid(format!("unknown estimator '{s}' (identity|zero|one|flip)"))
            })
    }
}

/// Symbol-wise estimator achieving [`min_distortion`].
pub fn optimal_estimator(model: &SourceModel) -> Estimator {
    if model.p() <= model.alpha() {
        Estimator::Identity
    } else {
        Estimator::Zero
    }
}

/// `E[d(X, x̂(Y))]` computed from the joint law of `(X, Y)`, without going
/// through `d̂`.
pub fn expected_hamming(model: &SourceModel, estimator: Estimator) -> f64 {
    let (a, p) = (model.alpha(), model.p());
    let mut total = 0.0;
    for x in 0..2 {
        let px = if x == 1 { a } else { 1.0 - a };
        for y in 0..2 {
            let py_given_x = if x == y { 1.0 - p } else { p };
            if estimator.apply(y) != x {
                total += px * py_given_x;
            }
        }
    }
    total
}

/// `E[d̂(Y, x̂(Y))]` from the table.
pub fn expected_amended(table: &DistortionTable, estimator: Estimator) -> f64 {
    let b = table.model.beta();
    (1.0 - b) * table.get(0, estimator.apply(0)) + b * table.get(1, estimator.apply(1))
}

/// Result of [`simulate_reduction`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReductionSample {
    pub empirical_d: f64,
    pub empirical_dhat: f64,
    pub analytic: f64,
    /// Standard deviation of a single-sample Hamming error mean,
    /// `√(analytic·(1 − analytic)/n)`.
    pub sigma: f64,
    pub n: u64,
    pub seed: u64,
}

impl ReductionSample {
    pub fn band(&self) -> f64 {
        3.0 * self.sigma
    }

    pub fn within_band(&self) -> bool {
        let band = self.band();
        (self.empirical_d - self.analytic).abs() <= band
            && (self.empirical_dhat - self.analytic).abs() <= band
    }
}

/// Draw `n` i.i.d. pairs `(X, Z)`, form `Y = X ⊕ Z`, and return the empirical
/// Hamming distortion of `x̂(Y)` against `X` next to the empirical mean of
/// `d̂(Y, x̂(Y))`. Bit-reproducible for a fixed seed.
pub fn simulate_reduction(
    model: &SourceModel,
    estimator: Estimator,
    n: u64,
    seed: u64,
) -> Result<ReductionSample> {
    if n == 0 {
        return Err(Error::Invalid("sample count must be at least 1".into()));
    }
    let table = distortion_table(model)?;
    let source = Bernoulli::new(model.alpha()).map_err(|e| Error::Invalid(e.to_string()))?;
    let noise = Bernoulli::new(model.p()).map_err(|e| Error::Invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut errors: u64 = 0;
    let mut amended = 0.0;
    for _ in 0..n {
        let x = source.sample(&mut rng) as usize;
        let z = noise.sample(&mut rng) as usize;
        let y = x ^ z;
        let x_hat = estimator.apply(y);
        errors += (x != x_hat) as u64;
        amended += table.get(y, x_hat);
    }

    let analytic = expected_hamming(model, estimator);
    let nf = n as f64;
    Ok(ReductionSample {
        empirical_d: errors as f64 / nf,
        empirical_dhat: amended / nf,
        analytic,
        sigma: (analytic * (1.0 - analytic) / nf).sqrt(),
        n,
        seed,
    })
}
