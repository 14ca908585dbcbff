//! Scalar dual characterisation of the binary iRDF.
//!
//! For `p < D < α ≤ 1/2` the rate is `R(D) = h(β) − g(r*)`, where
//!
//! ```text
//! g(r) = r(D − p) + ln(1 − e^{−r(u+v)}) − β̄ ln(1 − e^{−ru}) − β ln(1 − e^{−rv}),
//! u = (α − p)/β,  v = (ᾱ − p)/β̄,
//! ```
//!
//! and `r*` is the unique positive root of `φ(r) = D − p` with
//!
//! ```text
//! φ(r) = β̄u/(e^{ru} − 1) + βv/(e^{rv} − 1) − (u + v)/(e^{r(u+v)} − 1).
//! ```
//!
//! `dg/dr = (D − p) − φ(r)`, and `φ` falls strictly from `1/2 − p` to `0`, so
//! `g` is minimised at `r*` and `h(β) − g(r)` is a lower bound on the rate for
//! every `r > 0`. `r*` is also the magnitude of the slope `−dR/dD` in nats.
//!
//! The optimal dual vector `f` (equality in `Σ_y f_y e^{−r d̂(y,x̂)} ≤ 1`) and
//! the output weights `w` certify optimality; both are exposed here.

use serde::Serialize;

use crate::distortion::distortion_table;
use crate::error::{check_positive, check_probability, Error, Result};
use crate::model::{entropy_nats, LogBase, SourceModel};
use crate::special::{
    bisect, bose_term, bose_term_dr, ln_one_minus_exp_neg, reduced_bose_term, EXP_CUTOFF,
};

/// Residual tolerance on `φ(r*) − (D − p)` used by [`irdf`].
pub const RESIDUAL_TOL: f64 = 1e-12;

const MAX_BRACKET_STEPS: usize = 2_100;
const MAX_BISECTIONS: usize = 400;
const NEWTON_STEPS: usize = 4;

/// The exponents `u = (α − p)/β` and `v = (ᾱ − p)/β̄`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Uv {
    pub u: f64,
    pub v: f64,
}

/// Parameters shared by every dual quantity.
#[derive(Debug, Clone, Copy)]
struct Dual {
    alpha: f64,
    p: f64,
    beta: f64,
    beta_bar: f64,
    u: f64,
    v: f64,
}

impl Dual {
    fn new(model: &SourceModel) -> Result<Self> {
        let (alpha, p) = (model.alpha(), model.p());
        if !model.is_informative() {
            return Err(Error::ZeroInformation { alpha, p });
        }
        let (beta, beta_bar) = (model.beta(), model.beta_bar());
        Ok(Dual {
            alpha,
            p,
            beta,
            beta_bar,
            u: (alpha - p) / beta,
            v: (1.0 - alpha - p) / beta_bar,
        })
    }

    fn phi(&self, r: f64) -> f64 {
        if r * self.u.min(self.v) > 1.0 {
            // Exponentially small tail: the direct form keeps relative accuracy.
            return self.beta_bar * bose_term(self.u, r) + self.beta * bose_term(self.v, r)
                - bose_term(self.u + self.v, r);
        }
        // The 1/r poles carry weights β̄ + β − 1 = 0 and cancel exactly.
        self.beta_bar * reduced_bose_term(self.u, r) + self.beta * reduced_bose_term(self.v, r)
            - reduced_bose_term(self.u + self.v, r)
    }

    fn phi_dr(&self, r: f64) -> f64 {
        self.beta_bar * bose_term_dr(self.u, r) + self.beta * bose_term_dr(self.v, r)
            - bose_term_dr(self.u + self.v, r)
    }

    fn g(&self, r: f64, d: f64) -> f64 {
        r * (d - self.p) + ln_one_minus_exp_neg(r * (self.u + self.v))
            - self.beta_bar * ln_one_minus_exp_neg(r * self.u)
            - self.beta * ln_one_minus_exp_neg(r * self.v)
    }

    fn ln_f(&self, r: f64) -> (f64, f64) {
        let ln_total = ln_one_minus_exp_neg(r * (self.u + self.v));
        let ln_f0 =
            r * self.p * self.alpha / self.beta_bar + ln_one_minus_exp_neg(r * self.u) - ln_total;
        let ln_f1 = r * self.p * (1.0 - self.alpha) / self.beta + ln_one_minus_exp_neg(r * self.v)
            - ln_total;
        (ln_f0, ln_f1)
    }

    /// Output weights solving `f_y Σ_x̂ w(x̂) e^{−r d̂(y,x̂)} = Q(y)`.
    fn w(&self, r: f64) -> (f64, f64) {
        if self.alpha == 0.5 {
            return (0.5, 0.5);
        }
        let inv_u = 1.0 / -(-r * self.u).exp_m1();
        let inv_v = 1.0 / -(-r * self.v).exp_m1();
        let w0 = self.beta_bar * inv_u - bose_term(1.0, r * self.v) * self.beta;
        let w1 = self.beta * inv_v - bose_term(1.0, r * self.u) * self.beta_bar;
        (w0, w1)
    }

    /// `αᾱ(p̄ − p)/(ββ̄)`, the exponent in [`appendix_w_values`].
    fn k(&self) -> f64 {
        self.alpha * (1.0 - self.alpha) * (1.0 - 2.0 * self.p) / (self.beta * self.beta_bar)
    }
}

fn check_r(r: f64) -> Result<f64> {
    check_positive("r", r)
}

fn check_interior(dual: &Dual, d: f64) -> Result<()> {
    check_probability("D", d)?;
    if d <= dual.p {
        return Err(Error::InfeasibleDistortion {
            distortion: d,
            min: dual.p,
        });
    }
    if d >= dual.alpha {
        return Err(Error::domain("D", d, "(p, α)"));
    }
    Ok(())
}

/// `u` and `v` for a model with `p < α`.
pub fn uv(model: &SourceModel) -> Result<Uv> {
    let dual = Dual::new(model)?;
    Ok(Uv {
        u: dual.u,
        v: dual.v,
    })
}

/// Dual objective `g(r)` in nats.
pub fn g(r: f64, model: &SourceModel, d: f64) -> Result<f64> {
    check_r(r)?;
    check_probability("D", d)?;
    Ok(Dual::new(model)?.g(r, d))
}

/// `φ(r)`, the left-hand side of the equation `φ(r*) = D − p`.
pub fn rstar_equation_lhs(r: f64, model: &SourceModel) -> Result<f64> {
    check_r(r)?;
    Ok(Dual::new(model)?.phi(r))
}

/// `dφ/dr`, strictly negative.
pub fn rstar_equation_derivative(r: f64, model: &SourceModel) -> Result<f64> {
    check_r(r)?;
    Ok(Dual::new(model)?.phi_dr(r))
}

/// Dual variables `(f₀, f₁)` making both output-letter constraints tight.
pub fn f_values(r: f64, model: &SourceModel) -> Result<(f64, f64)> {
    check_r(r)?;
    let (ln_f0, ln_f1) = Dual::new(model)?.ln_f(r);
    Ok((ln_f0.exp(), ln_f1.exp()))
}

/// Largest violation of `Σ_y f_y e^{−r d̂(y, x̂)} = 1` over `x̂ ∈ {0, 1}`.
pub fn constraint_residual(r: f64, model: &SourceModel, f: (f64, f64)) -> Result<f64> {
    check_r(r)?;
    let table = distortion_table(model)?;
    let fs = [f.0, f.1];
    let mut worst: f64 = 0.0;
    for x_hat in 0..2 {
        let total: f64 = (0..2)
            .map(|y| fs[y] * (-r * table.get(y, x_hat)).exp())
            .sum();
        worst = worst.max((total - 1.0).abs());
    }
    Ok(worst)
}

/// Output-letter weights `(w₀, w₁)` that, with [`f_values`], satisfy the
/// stationarity condition `f_y Σ_x̂ w(x̂) e^{−r d̂(y,x̂)} = P(Y = y)`:
///
/// ```text
/// w₀ = β̄/(1 − e^{−ru}) − β/(e^{rv} − 1),  w₁ = β/(1 − e^{−rv}) − β̄/(e^{ru} − 1).
/// ```
///
/// They add to 1 for every `r`; at `r*` they are the output distribution of
/// the optimal test channel and both are positive for `p < D < α`. `w₀`
/// decreases to `β̄` and `w₁` increases from `−∞` to `β`. For `α = 1/2` both
/// are exactly 1/2.
pub fn w_values(r: f64, model: &SourceModel) -> Result<(f64, f64)> {
    check_r(r)?;
    Ok(Dual::new(model)?.w(r))
}

/// The weight expressions in the form `β̄/(1 − e^{−ru}) − β e^{−rK}/(1 − e^{−rv})`
/// (and symmetrically for `w₁`) with `K = αᾱ(p̄ − p)/(ββ̄)`.
///
/// This form exchanges the two off-diagonal kernel entries relative to
/// [`w_values`], so it does not satisfy the stationarity condition and the
/// pair does not sum to 1. It shares the limits of [`w_values`] and is also
/// positive at `r*`; it is kept as a diagnostic.
pub fn appendix_w_values(r: f64, model: &SourceModel) -> Result<(f64, f64)> {
    check_r(r)?;
    let dual = Dual::new(model)?;
    let shrink = (-r * dual.k()).exp();
    let inv_u = 1.0 / -(-r * dual.u).exp_m1();
    let inv_v = 1.0 / -(-r * dual.v).exp_m1();
    Ok((
        dual.beta_bar * inv_u - dual.beta * shrink * inv_v,
        dual.beta * inv_v - dual.beta_bar * shrink * inv_u,
    ))
}

/// Largest violation of `f_y Σ_x̂ w(x̂) e^{−r d̂(y,x̂)} = P(Y = y)`, relative
/// to `P(Y = y)`.
pub fn stationarity_residual(
    r: f64,
    model: &SourceModel,
    f: (f64, f64),
    w: (f64, f64),
) -> Result<f64> {
    check_r(r)?;
    let table = distortion_table(model)?;
    let q = [model.beta_bar(), model.beta()];
    let fs = [f.0, f.1];
    let ws = [w.0, w.1];
    let mut worst: f64 = 0.0;
    for y in 0..2 {
        let s: f64 = (0..2)
            .map(|xh| ws[xh] * (-r * table.get(y, xh)).exp())
            .sum();
        worst = worst.max((fs[y] * s / q[y] - 1.0).abs());
    }
    Ok(worst)
}

/// Everything known about the dual optimum at one distortion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualSolution {
    pub r_star: f64,
    /// `h(β) − g(r*)`, in [`DualSolution::base`].
    pub rate: f64,
    pub base: LogBase,
    /// `g(r*)` in nats.
    pub g_value: f64,
    pub f0: f64,
    pub f1: f64,
    pub w0: f64,
    pub w1: f64,
    /// `φ(r*) − (D − p)`.
    pub residual: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
}

impl DualSolution {
    pub fn rate_in(&self, base: LogBase) -> f64 {
        base.from_nats(self.base.to_nats(self.rate))
    }
}

/// Result of [`solve_r_star`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DualOutcome {
    Solved(DualSolution),
    /// `D ≥ α`: the constant reconstruction already meets the target.
    ZeroRate,
}

impl DualOutcome {
    pub fn solution(&self) -> Option<&DualSolution> {
        match self {
            DualOutcome::Solved(s) => Some(s),
            DualOutcome::ZeroRate => None,
        }
    }
}

/// Find `r*` with `φ(r*) = D − p` and assemble the full [`DualSolution`].
///
/// The bracket grows geometrically from `r = 1` until `φ − (D − p)` changes
/// sign, which must happen because `0 < D − p < 1/2 − p` and `φ` falls from
/// `1/2 − p` to 0. Bisection in `ln r` then runs to bracket collapse and a
/// few closed-form Newton steps polish the result. The returned rate is in
/// nats.
pub fn solve_r_star(model: &SourceModel, d: f64, tol: f64) -> Result<DualOutcome> {
    check_positive("tol", tol)?;
    check_probability("D", d)?;
    let dual = Dual::new(model)?;
    if d <= dual.p {
        return Err(Error::InfeasibleDistortion {
            distortion: d,
            min: dual.p,
        });
    }
    if d >= dual.alpha {
        return Ok(DualOutcome::ZeroRate);
    }

    let target = d - dual.p;
    let residual = |r: f64| dual.phi(r) - target;

    let (mut lo, mut hi) = (1.0, 1.0);
    let mut steps = 0;
    if residual(1.0) > 0.0 {
        while residual(hi) > 0.0 {
            lo = hi;
            hi *= 2.0;
            steps += 1;
            if steps > MAX_BRACKET_STEPS {
                return Err(Error::NoConvergence {
                    what: "r* bracket expansion",
                    residual: residual(hi),
                });
            }
        }
    } else {
        while residual(lo) < 0.0 {
            hi = lo;
            lo *= 0.5;
            steps += 1;
            if steps > MAX_BRACKET_STEPS {
                return Err(Error::NoConvergence {
                    what: "r* bracket expansion",
                    residual: residual(lo),
                });
            }
        }
    }
    let bracket = (lo, hi);

    let found = bisect(residual, lo, hi, 0.0, 0.0, true, MAX_BISECTIONS);
    let mut r = found.root;
    let mut res = found.value;
    for _ in 0..NEWTON_STEPS {
        if res == 0.0 {
            break;
        }
        let slope = dual.phi_dr(r);
        if slope >= 0.0 || !slope.is_finite() {
            break;
        }
        let next = r - res / slope;
        if !(next > found.lo.min(found.hi) && next < found.lo.max(found.hi)) {
            break;
        }
        let next_res = residual(next);
        if next_res.abs() >= res.abs() {
            break;
        }
        r = next;
        res = next_res;
    }
    if res.abs() > tol {
        return Err(Error::NoConvergence {
            what: "r* root finding",
            residual: res,
        });
    }

    let g_value = dual.g(r, d);
    let rate = (entropy_nats(dual.beta) - g_value).max(0.0);
    let (ln_f0, ln_f1) = dual.ln_f(r);
    let (w0, w1) = dual.w(r);
    Ok(DualOutcome::Solved(DualSolution {
        r_star: r,
        rate,
        base: LogBase::Nats,
        g_value,
        f0: ln_f0.exp(),
        f1: ln_f1.exp(),
        w0,
        w1,
        residual: res,
        iterations: steps + found.iterations,
        bracket,
    }))
}

/// Which branch of the iRDF a distortion falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `D = p < α`: `Y` must be described losslessly, rate `h(β)`.
    Lossless,
    /// `p < D < α`.
    Interior,
    /// `D ≥ α`.
    ZeroRate,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Lossless => "lossless",
            Regime::Interior => "interior",
            Regime::ZeroRate => "zero-rate",
        }
    }
}

/// Rate at one distortion together with its regime and slope parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IrdfPoint {
    pub rate: f64,
    pub base: LogBase,
    pub regime: Regime,
    /// `r*` in the interior; `None` elsewhere (it diverges at `D = p`).
    pub r_star: Option<f64>,
}

/// Evaluate the iRDF with regime information.
pub fn irdf_point(model: &SourceModel, d: f64, base: LogBase) -> Result<IrdfPoint> {
    check_probability("D", d)?;
    let min = model.p().min(model.alpha());
    if d < min {
        return Err(Error::InfeasibleDistortion { distortion: d, min });
    }
    if d >= model.alpha() {
        return Ok(IrdfPoint {
            rate: 0.0,
            base,
            regime: Regime::ZeroRate,
            r_star: None,
        });
    }
    // Here min{p, α} ≤ D < α, so p < α.
    if d == model.p() {
        return Ok(IrdfPoint {
            rate: model.observation_entropy(base),
            base,
            regime: Regime::Lossless,
            r_star: None,
        });
    }
    match solve_r_star(model, d, RESIDUAL_TOL)? {
        DualOutcome::Solved(s) => Ok(IrdfPoint {
            rate: s.rate_in(base),
            base,
            regime: Regime::Interior,
            r_star: Some(s.r_star),
        }),
        DualOutcome::ZeroRate => unreachable!("D < α was checked above"),
    }
}

/// The indirect rate-distortion function `R_{X|Y}(D)` of a canonical model.
///
/// `0` for `D ≥ α`, `h(β)` at `D = p < α`, `h(β) − g(r*)` in between; an
/// error below `min{p, α}`.
pub fn irdf(model: &SourceModel, d: f64, base: LogBase) -> Result<f64> {
    irdf_point(model, d, base).map(|pt| pt.rate)
}

/// `h(β) − g(r)`: a lower bound on the rate for every `r > 0`, tight exactly
/// at `r = r*`.
pub fn dual_lower_bound(r: f64, model: &SourceModel, d: f64, base: LogBase) -> Result<f64> {
    check_r(r)?;
    let dual = Dual::new(model)?;
    check_interior(&dual, d)?;
    Ok(base.from_nats(entropy_nats(dual.beta) - dual.g(r, d)))
}

/// Auxiliary functions from the positivity argument for `w₁` and from the
/// upper-bound argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AppendixDiagnostics {
    /// `a(r) = p − D + (u+v)/(e^{r(u+v)}−1) − β̄u/(e^{ru}−1) − β̄v/(e^{ru}−1)`.
    pub a: Option<f64>,
    /// `a(r)` with the last term scaled by `e^{−r(K − u)}`,
    /// `K = αᾱ(p̄ − p)/(ββ̄)`.
    pub b: Option<f64>,
    /// `δ(r) = g_α(r) − g_{1/2}(r)`: the gap between the dual objective of
    /// this source and that of the symmetric source with the same `p`.
    pub delta: f64,
}

/// Evaluate `a(r)`, `b(r)` and `δ(r)`.
///
/// `a` and `b` need `p < α`; at `p = α` they are `None` and `δ` is `+∞`
/// (the `ln(1 − e^{−ru})` term diverges with `u = 0`).
pub fn appendix_diagnostics(r: f64, model: &SourceModel, d: f64) -> Result<AppendixDiagnostics> {
    check_r(r)?;
    check_probability("D", d)?;
    let (alpha, p) = (model.alpha(), model.p());
    if p > alpha {
        return Err(Error::ZeroInformation { alpha, p });
    }
    if model.beta() <= 0.0 {
        return Err(Error::DegenerateObservation { beta: model.beta() });
    }
    if p == alpha {
        return Ok(AppendixDiagnostics {
            a: None,
            b: None,
            delta: f64::INFINITY,
        });
    }
    let dual = Dual::new(model)?;
    let (u, v, bb) = (dual.u, dual.v, dual.beta_bar);
    let common = p - d + bose_term(u + v, r) - bb * bose_term(u, r);
    let tail = bb * (v / u) * bose_term(u, r);
    let a = common - tail;
    let b = common - tail * (-r * (dual.k() - u)).exp();

    let s = 1.0 - 2.0 * p;
    let ln_total = ln_one_minus_exp_neg(r * (u + v));
    let ln_sym = if r * s > EXP_CUTOFF {
        0.0
    } else {
        (-r * s).exp().ln_1p()
    };
    let delta = ln_total
        - bb * ln_one_minus_exp_neg(r * u)
        - dual.beta * ln_one_minus_exp_neg(r * v)
        - ln_sym;
    Ok(AppendixDiagnostics {
        a: Some(a),
        b: Some(b),
        delta,
    })
}
