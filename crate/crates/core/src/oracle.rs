//! Blahut–Arimoto rate-distortion solver for arbitrary finite alphabets.
//!
//! Applied to the observation `Y` under the amended distortion it computes
//! the iRDF by a route that shares nothing with [`crate::dual`]: no closed
//! forms, no root of `φ`, just alternating minimisation over test channels.

use serde::Serialize;

use crate::distortion::distortion_table;
use crate::error::{check_positive, Error, Result};
use crate::model::{LogBase, SourceModel};
use crate::special::bisect;

/// Stop when the rate changes by less than this between iterations.
pub const BA_TOL: f64 = 1e-12;
pub const BA_MAX_ITER: usize = 100_000;
/// Tolerance on `|D(s) − D|` when matching a target distortion.
pub const DISTORTION_TOL: f64 = 1e-9;

const SOURCE_SUM_TOL: f64 = 1e-12;
const MAX_SLOPE_DOUBLINGS: usize = 60;
const MAX_SLOPE_BISECTIONS: usize = 200;

/// Source distribution and distortion matrix `d[source][reproduction]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaProblem {
    source: Vec<f64>,
    distortion: Vec<Vec<f64>>,
    source_labels: Vec<String>,
    reproduction_labels: Vec<String>,
}

impl BaProblem {
    pub fn new(source: Vec<f64>, distortion: Vec<Vec<f64>>) -> Result<Self> {
        let n = source.len();
        if n == 0 || distortion.len() != n {
            return Err(Error::Invalid(format!(
                "distortion matrix has {} rows for {n} source letters",
                distortion.len()
            )));
        }
        let m = distortion[0].len();
        if m == 0 || distortion.iter().any(|row| row.len() != m) {
            return Err(Error::Invalid(
                "distortion matrix rows must have equal, non-zero length".into(),
            ));
        }
        if source.iter().any(|&q| !(q >= 0.0 && q.is_finite())) {
            return Err(Error::Invalid(
                "source probabilities must be finite and non-negative".into(),
            ));
        }
        let total: f64 = source.iter().sum();
        if (total - 1.0).abs() > SOURCE_SUM_TOL {
            return Err(Error::Invalid(format!(
                "source distribution sums to {total}"
            )));
        }
        if distortion
            .iter()
            .flatten()
            .any(|&d| !(d >= 0.0 && d.is_finite()))
        {
            return Err(Error::Invalid(
                "distortions must be finite and non-negative".into(),
            ));
        }
        Ok(BaProblem {
            source,
            distortion,
            source_labels: (0..n).map(|i| i.to_string()).collect(),
            reproduction_labels: (0..m).map(|j| j.to_string()).collect(),
        })
    }

    pub fn with_labels(mut self, source: Vec<String>, reproduction: Vec<String>) -> Result<Self> {
        if source.len() != self.source.len() || reproduction.len() != self.reproduction_len() {
            return Err(Error::Invalid(
                "label count does not match alphabet size".into(),
            ));
        }
        self.source_labels = source;
        self.reproduction_labels = reproduction;
        Ok(self)
    }

    pub fn source(&self) -> &[f64] {
        &self.source
    }

    pub fn distortion(&self) -> &[Vec<f64>] {
        &self.distortion
    }

    pub fn source_labels(&self) -> &[String] {
        &self.source_labels
    }

    pub fn reproduction_labels(&self) -> &[String] {
        &self.reproduction_labels
    }

    fn reproduction_len(&self) -> usize {
        self.distortion[0].len()
    }

    /// `E[min_x̂ d(u, x̂)]`, reached as the slope parameter grows without
    /// bound.
    pub fn min_distortion(&self) -> f64 {
        self.source
            .iter()
            .zip(&self.distortion)
            .map(|(q, row)| q * row.iter().cloned().fold(f64::INFINITY, f64::min))
            .sum()
    }

    /// `min_x̂ E[d(U, x̂)]`: the best a constant reproduction can do.
    pub fn zero_rate_distortion(&self) -> f64 {
        (0..self.reproduction_len())
            .map(|j| {
                self.source
                    .iter()
                    .zip(&self.distortion)
                    .map(|(q, row)| q * row[j])
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// The direct problem for `Y` under `d̂`.
pub fn build_reduced_problem(model: &SourceModel) -> Result<BaProblem> {
    let table = distortion_table(model)?;
    let labels = || vec!["0".to_string(), "1".to_string()];
    BaProblem::new(
        vec![model.beta_bar(), model.beta()],
        table.entries.iter().map(|row| row.to_vec()).collect(),
    )?
    .with_labels(labels(), labels())
}

/// A point `(D(s), R(s))` produced by the solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaResult {
    /// Rate in [`BaResult::base`].
    pub rate: f64,
    pub base: LogBase,
    pub distortion: f64,
    /// Slope parameter `s`; `0` for the zero-rate shortcut.
    pub slope_param: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl BaResult {
    pub fn rate_in(&self, base: LogBase) -> f64 {
        base.from_nats(self.base.to_nats(self.rate))
    }
}

/// One iterate of the alternating minimisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaIterate {
    /// Mutual information of the current test channel, nats.
    pub rate: f64,
    pub distortion: f64,
}

impl BaIterate {
    /// `I + s·D`, the functional each update decreases.
    pub fn objective(&self, s: f64) -> f64 {
        self.rate + s * self.distortion
    }
}

/// Iterator over Blahut–Arimoto iterates at a fixed slope, starting from the
/// uniform reproduction distribution.
pub struct BlahutArimoto<'a> {
    problem: &'a BaProblem,
    s: f64,
    output: Vec<f64>,
    channel: Vec<Vec<f64>>,
}

impl<'a> BlahutArimoto<'a> {
    pub fn new(problem: &'a BaProblem, s: f64) -> Result<Self> {
        check_positive("s", s)?;
        let m = problem.reproduction_len();
        Ok(BlahutArimoto {
            problem,
            s,
            output: vec![1.0 / m as f64; m],
            channel: vec![vec![0.0; m]; problem.source.len()],
        })
    }

    /// Current reproduction distribution.
    pub fn output(&self) -> &[f64] {
        &self.output
    }

    fn step(&mut self) -> BaIterate {
        let m = self.output.len();
        // Channel update: P(x̂|u) ∝ q(x̂) e^{−s d(u, x̂)}, shifted by the row
        // minimum over the support of q so that large s cannot underflow.
        for (row, d_row) in self.channel.iter_mut().zip(&self.problem.distortion) {
            let shift = (0..m)
                .filter(|&j| self.output[j] > 0.0)
                .map(|j| d_row[j])
                .fold(f64::INFINITY, f64::min);
            let mut z = 0.0;
            for j in 0..m {
                let w = if self.output[j] > 0.0 {
                    self.output[j] * (-self.s * (d_row[j] - shift)).exp()
                } else {
                    0.0
                };
                row[j] = w;
                z += w;
            }
            for w in row.iter_mut() {
                *w /= z;
            }
        }
        // Output update.
        let mut next = vec![0.0; m];
        for (q, row) in self.problem.source.iter().zip(&self.channel) {
            for (acc, w) in next.iter_mut().zip(row) {
                *acc += q * w;
            }
        }
        let mut rate = 0.0;
        let mut distortion = 0.0;
        for ((q, row), d_row) in self
            .problem
            .source
            .iter()
            .zip(&self.channel)
            .zip(&self.problem.distortion)
        {
            for j in 0..m {
                let w = row[j];
                if w > 0.0 && *q > 0.0 {
                    rate += q * w * (w / next[j]).ln();
                    distortion += q * w * d_row[j];
                }
            }
        }
        self.output = next;
        BaIterate {
            rate: rate.max(0.0),
            distortion,
        }
    }
}

impl Iterator for BlahutArimoto<'_> {
    type Item = BaIterate;

    fn next(&mut self) -> Option<BaIterate> {
        Some(self.step())
    }
}

/// Run Blahut–Arimoto at slope `s` until the rate moves by less than `tol`.
/// Hitting `max_iter` is reported through [`BaResult::converged`], not as an
/// error. The rate is in nats.
pub fn ba_fixed_slope(problem: &BaProblem, s: f64, tol: f64, max_iter: usize) -> Result<BaResult> {
    check_positive("tol", tol)?;
    let mut solver = BlahutArimoto::new(problem, s)?;
    let mut last: Option<BaIterate> = None;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        let it = solver.step();
        iterations += 1;
        if let Some(prev) = last {
            if (it.rate - prev.rate).abs() < tol {
                last = Some(it);
                converged = true;
                break;
            }
        }
        last = Some(it);
    }
    let it = last.ok_or_else(|| Error::Invalid("max_iter must be at least 1".into()))?;
    Ok(BaResult {
        rate: it.rate,
        base: LogBase::Nats,
        distortion: it.distortion,
        slope_param: s,
        iterations,
        converged,
    })
}

/// Rate at a target distortion, found by bisecting the slope parameter until
/// `|D(s) − D| < tol`. The rate is in nats.
pub fn ba_rate_at_distortion(problem: &BaProblem, d: f64, tol: f64) -> Result<BaResult> {
    check_positive("tol", tol)?;
    let d_min = problem.min_distortion();
    let d_max = problem.zero_rate_distortion();
    if d.is_nan() || d < d_min {
        return Err(Error::InfeasibleDistortion {
            distortion: d,
            min: d_min,
        });
    }
    if d >= d_max {
        return Ok(BaResult {
            rate: 0.0,
            base: LogBase::Nats,
            distortion: d_max,
            slope_param: 0.0,
            iterations: 0,
            converged: true,
        });
    }

    let mut total_iterations = 0;
    let mut all_converged = true;
    let mut run = |s: f64| -> Result<BaResult> {
        let r = ba_fixed_slope(problem, s, BA_TOL, BA_MAX_ITER)?;
        total_iterations += r.iterations;
        all_converged &= r.converged;
        Ok(r)
    };

    let mut s_lo = 1.0;
    let mut at_lo = run(s_lo)?;
    let mut s_hi = s_lo;
    let mut at_hi = at_lo;
    let mut doublings = 0;
    while at_hi.distortion > d + tol {
        s_lo = s_hi;
        at_lo = at_hi;
        s_hi *= 2.0;
        at_hi = run(s_hi)?;
        doublings += 1;
        if doublings > MAX_SLOPE_DOUBLINGS {
            return Err(Error::NoConvergence {
                what: "slope bracket (upper)",
                residual: at_hi.distortion - d,
            });
        }
    }
    doublings = 0;
    while at_lo.distortion < d - tol {
        s_hi = s_lo;
        at_hi = at_lo;
        s_lo *= 0.5;
        at_lo = run(s_lo)?;
        doublings += 1;
        if doublings > MAX_SLOPE_DOUBLINGS {
            return Err(Error::NoConvergence {
                what: "slope bracket (lower)",
                residual: at_lo.distortion - d,
            });
        }
    }

    let pick = |r: BaResult, total: usize, conv: bool| BaResult {
        iterations: total,
        converged: conv && (r.distortion - d).abs() < tol,
        ..r
    };
    if (at_hi.distortion - d).abs() < tol {
        return Ok(pick(at_hi, total_iterations, all_converged));
    }
    if (at_lo.distortion - d).abs() < tol {
        return Ok(pick(at_lo, total_iterations, all_converged));
    }

    let mut failure = None;
    let found = bisect(
        |s| match run(s) {
            Ok(r) => r.distortion - d,
            Err(e) => {
                failure = Some(e);
                0.0
            }
        },
        s_lo,
        s_hi,
        tol,
        0.0,
        true,
        MAX_SLOPE_BISECTIONS,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let result = ba_fixed_slope(problem, found.root, BA_TOL, BA_MAX_ITER)?;
    total_iterations += result.iterations;
    all_converged &= result.converged;
    Ok(pick(result, total_iterations, all_converged))
}

#[cfg(test)]
#[allow(clippy::excessive_precision, clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::model::{binary_entropy, canonicalize};

    fn hamming(alpha: f64) -> BaProblem {
        BaProblem::new(
            vec![1.0 - alpha, alpha],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        )
        .unwrap()
    }

    #[test]
    fn problem_validation() {
        assert!(BaProblem::new(vec![0.5, 0.4], vec![vec![0.0], vec![1.0]]).is_err());
        assert!(BaProblem::new(vec![0.5, 0.5], vec![vec![0.0, 1.0]]).is_err());
        assert!(BaProblem::new(vec![0.5, 0.5], vec![vec![0.0, 1.0], vec![1.0]]).is_err());
        assert!(BaProblem::new(vec![0.5, 0.5], vec![vec![0.0, -1.0], vec![1.0, 0.0]]).is_err());
        assert!(BaProblem::new(vec![1.5, -0.5], vec![vec![0.0], vec![1.0]]).is_err());
        assert!(hamming(0.3).with_labels(vec!["a".into()], vec![]).is_err());
    }

    #[test]
    fn reduced_problem_shapes() {
        let p = 0.2;
        let sym = build_reduced_problem(&canonicalize(0.5, p).unwrap()).unwrap();
        assert_eq!(sym.source(), &[0.5, 0.5]);
        assert!((sym.distortion()[0][0] - p).abs() < 1e-15);
        assert!((sym.distortion()[0][1] - (1.0 - p)).abs() < 1e-15);

        let noiseless = build_reduced_problem(&canonicalize(0.3, 0.0).unwrap()).unwrap();
        assert_eq!(noiseless.source(), &[0.7, 0.3]);
        assert_eq!(noiseless.distortion(), &[vec![0.0, 1.0], vec![1.0, 0.0]]);

        let m = canonicalize(0.25, 0.05).unwrap();
        let reduced = build_reduced_problem(&m).unwrap();
        assert!((reduced.source()[0] - 0.725).abs() < 1e-15);
        assert!((reduced.distortion()[1][0] - 0.2375 / 0.275).abs() < 1e-15);
        assert!((reduced.min_distortion() - 0.05).abs() < 1e-15);
        assert!((reduced.zero_rate_distortion() - 0.25).abs() < 1e-15);

        assert!(build_reduced_problem(&canonicalize(0.0, 0.0).unwrap()).is_err());
    }

    #[test]
    fn hamming_parametric_point() {
        let r = ba_fixed_slope(&hamming(0.3), 9.0_f64.ln(), BA_TOL, BA_MAX_ITER).unwrap();
        assert!(r.converged);
        assert!((r.distortion - 0.1).abs() < 1e-9, "{}", r.distortion);
        let want = binary_entropy(0.3, LogBase::Nats).unwrap()
            - binary_entropy(0.1, LogBase::Nats).unwrap();
        assert!((r.rate - want).abs() < 1e-9);
    }

    #[test]
    fn small_slope_gives_zero_rate() {
        let r = ba_fixed_slope(&hamming(0.3), 1e-6, BA_TOL, BA_MAX_ITER).unwrap();
        assert!(r.rate < 1e-9);
    }

    #[test]
    fn symmetric_reduced_problem_at_closed_form_slope() {
        let problem = build_reduced_problem(&canonicalize(0.5, 0.1).unwrap()).unwrap();
        let r = ba_fixed_slope(&problem, 7.0_f64.ln() / 0.8, BA_TOL, BA_MAX_ITER).unwrap();
        assert!((r.distortion - 0.2).abs() < 1e-9);
        assert!((r.rate_in(LogBase::Bits) - 0.456_435_556_800_403_6).abs() < 1e-9);
    }

    #[test]
    fn iteration_cap_is_reported_not_fatal() {
        let r = ba_fixed_slope(&hamming(0.3), 2.0, 1e-300, 3).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
        assert!(ba_fixed_slope(&hamming(0.3), 2.0, 1e-12, 0).is_err());
    }

    #[test]
    fn rate_at_distortion_edges() {
        let problem = build_reduced_problem(&canonicalize(0.25, 0.05).unwrap()).unwrap();
        let at_max = ba_rate_at_distortion(&problem, 0.25, DISTORTION_TOL).unwrap();
        assert_eq!(at_max.rate, 0.0);
        assert!(matches!(
            ba_rate_at_distortion(&problem, 0.04, DISTORTION_TOL),
            Err(Error::InfeasibleDistortion { .. })
        ));
    }

    #[test]
    fn three_letter_alphabet() {
        // Uniform ternary source with Hamming distortion: R(D) = ln 3 − h(D) − D ln 2.
        let d3 = (0..3)
            .map(|i| (0..3).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
            .collect();
        let problem = BaProblem::new(vec![1.0 / 3.0; 3], d3).unwrap();
        let d = 0.2;
        let r = ba_rate_at_distortion(&problem, d, DISTORTION_TOL).unwrap();
        let want = 3.0_f64.ln() - binary_entropy(d, LogBase::Nats).unwrap() - d * 2.0_f64.ln();
        assert!((r.rate - want).abs() < 1e-8, "{} vs {want}", r.rate);
    }
}
