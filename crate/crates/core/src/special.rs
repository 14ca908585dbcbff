//! Stable building blocks for the exponential terms of the dual.

/// Arguments above this make `e^{t}` overflow; terms carrying `1/(e^t − 1)`
/// are taken as exactly zero there.
pub(crate) const EXP_CUTOFF: f64 = 700.0;

const SERIES_CUTOFF: f64 = 0.1;

/// `ln(1 − e^{−x})` for `x > 0`.
pub(crate) fn ln_one_minus_exp_neg(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x > std::f64::consts::LN_2 {
        (-(-x).exp()).ln_1p()
    } else {
        (-(-x).exp_m1()).ln()
    }
}

/// `t / (e^t − 1) − 1`, the Bernoulli generating function minus its constant
/// term. Accurate near `t = 0`, where the naive form cancels.
pub(crate) fn bernoulli_m1(t: f64) -> f64 {
    if t.abs() < SERIES_CUTOFF {
        let t2 = t * t;
        // B_{2k} / (2k)!
        let even = t2
            * (1.0 / 12.0
                + t2 * (-1.0 / 720.0
                    + t2 * (1.0 / 30_240.0 + t2 * (-1.0 / 1_209_600.0 + t2 / 47_900_160.0))));
        -0.5 * t + even
    } else if t > EXP_CUTOFF {
        -1.0
    } else {
        t / t.exp_m1() - 1.0
    }
}

/// `x / (e^{r x} − 1) − 1/r`. The `1/r` pole is removed so that weighted sums
/// whose weights add to zero stay accurate as `r → 0⁺`.
pub(crate) fn reduced_bose_term(x: f64, r: f64) -> f64 {
    bernoulli_m1(r * x) / r
}

/// `x / (e^{r x} − 1)`, zero once `r x` exceeds the exponent range.
pub(crate) fn bose_term(x: f64, r: f64) -> f64 {
    let t = r * x;
    if t > EXP_CUTOFF {
        0.0
    } else {
        x / t.exp_m1()
    }
}

/// `d/dr [x / (e^{r x} − 1)] = −x² / (4 sinh²(r x / 2))`.
pub(crate) fn bose_term_dr(x: f64, r: f64) -> f64 {
    let t = r * x;
    if t > EXP_CUTOFF {
        return 0.0;
    }
    let s = (0.5 * t).sinh();
    -x * x / (4.0 * s * s)
}

/// Outcome of [`bisect`].
#[derive(Debug, Clone, Copy)]
pub(crate) struct Bisection {
    pub root: f64,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

/// Bisection on a bracket `[lo, hi]` where `f(lo)` and `f(hi)` have opposite
/// signs. Stops when `|f| ≤ ftol`, when the bracket is narrower than `xtol`,
/// or when the midpoint no longer moves. `geometric` bisects in `ln x`
/// (requires `lo > 0`), which suits scale parameters spanning decades.
pub(crate) fn bisect<F>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    ftol: f64,
    xtol: f64,
    geometric: bool,
    max_iter: usize,
) -> Bisection
where
    F: FnMut(f64) -> f64,
{
    let mut f_lo = f(lo);
    let mut best = if f_lo.abs() <= f(hi).abs() { lo } else { hi };
    let mut best_val = f(best);
    let mut iterations = 0;
    while iterations < max_iter {
        if best_val.abs() <= ftol || (hi - lo).abs() <= xtol {
            break;
        }
        let mid = if geometric {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        iterations += 1;
        let f_mid = f(mid);
        if f_mid.abs() < best_val.abs() {
            best = mid;
            best_val = f_mid;
        }
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Bisection {
        root: best,
        value: best_val,
        lo,
        hi,
        iterations,
    }
}
