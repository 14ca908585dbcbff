//! Closed-form rates and bounds.

use serde::Serialize;

use crate::dual::irdf;
use crate::error::{check_probability, Error, Result};
use crate::model::{entropy_nats, LogBase, RatePoint, SourceModel};
use crate::special::bisect;

/// Absolute tolerance on the tangency point of the convex closure.
pub const TANGENCY_TOL: f64 = 1e-12;

/// Rate-distortion function of a Bernoulli(α) source observed directly:
/// `h(α) − h(D)` on `[0, min(α, 1−α)]`, zero beyond.
pub fn direct_rdf(alpha: f64, d: f64, base: LogBase) -> Result<f64> {
    check_probability("alpha", alpha)?;
    check_probability("D", d)?;
    let a = alpha.min(1.0 - alpha);
    if d > a {
        return Ok(0.0);
    }
    Ok(base.from_nats(entropy_nats(a) - entropy_nats(d)))
}

/// Normalised distortion `Δ = (D − p)/(1 − 2p)`.
pub fn delta_ratio(d: f64, p: f64) -> Result<f64> {
    check_probability("D", d)?;
    check_probability("p", p)?;
    if p >= 0.5 {
        return Err(Error::ZeroInformation { alpha: 0.5, p });
    }
    Ok((d - p) / (1.0 - 2.0 * p))
}

/// iRDF of the symmetric source: `1 bit − h(Δ)` for `p ≤ D < 1/2`, zero from
/// `D = 1/2` on.
pub fn symmetric_irdf(p: f64, d: f64, base: LogBase) -> Result<f64> {
    check_probability("p", p)?;
    check_probability("D", d)?;
    if p > 0.5 {
        return Err(Error::domain("p", p, "[0, 1/2]"));
    }
    if d < p {
        return Err(Error::InfeasibleDistortion {
            distortion: d,
            min: p,
        });
    }
    if d >= 0.5 {
        return Ok(0.0);
    }
    let delta = (d - p) / (1.0 - 2.0 * p);
    Ok(base.from_nats(std::f64::consts::LN_2 - entropy_nats(delta)))
}

fn upper_bound_nats(model: &SourceModel, d: f64) -> Result<f64> {
    check_probability("D", d)?;
    let p = model.p();
    if d < p {
        return Err(Error::InfeasibleDistortion {
            distortion: d,
            min: p,
        });
    }
    let delta = delta_ratio(d, p)?;
    if delta > 1.0 {
        return Err(Error::domain("D", d, "[p, 1 − p]"));
    }
    Ok(entropy_nats(model.beta()) - entropy_nats(delta))
}

/// Upper bound `h(β) − h(Δ)` on the iRDF, valid for every `D ≥ p`.
///
/// Not clamped: the value turns negative for large `D` and is informative only
/// while non-negative. [`convexified_upper_bound`] is the usable curve.
pub fn upper_bound(model: &SourceModel, d: f64, base: LogBase) -> Result<f64> {
    upper_bound_nats(model, d).map(|v| base.from_nats(v))
}

fn upper_bound_slope_nats(p: f64, d: f64) -> f64 {
    let s = 1.0 - 2.0 * p;
    let delta = (d - p) / s;
    if delta <= 0.0 {
        return f64::NEG_INFINITY;
    }
    -((1.0 - delta) / delta).ln() / s
}

/// Point `D_t ∈ (p, α)` where the tangent to the upper bound passes through
/// `(α, 0)`. `None` when the bound already vanishes at `α` (symmetric or
/// noiseless source) or the observation is uninformative.
pub fn tangency_point(model: &SourceModel) -> Result<Option<f64>> {
    let (alpha, p) = (model.alpha(), model.p());
    if !model.is_informative() {
        return Ok(None);
    }
    let at_alpha = upper_bound_nats(model, alpha)?;
    if at_alpha <= 0.0 {
        return Ok(None);
    }
    // U(D) + U'(D)(α − D) climbs from −∞ at D = p to U(α) > 0 at D = α because
    // U is convex.
    let tangent_at_alpha = |d: f64| {
        let value = upper_bound_nats(model, d).unwrap_or(f64::NAN);
        value + upper_bound_slope_nats(p, d) * (alpha - d)
    };
    let found = bisect(tangent_at_alpha, p, alpha, 0.0, TANGENCY_TOL, false, 200);
    Ok(Some(found.root))
}

/// Lower convex envelope of the upper bound on `[p, α]` together with the
/// zero-rate point `(α, 0)`.
///
/// Equals [`upper_bound`] up to the tangency point, is the straight chord to
/// `(α, 0)` after it, and is zero for `D ≥ α`.
pub fn convexified_upper_bound(model: &SourceModel, d: f64, base: LogBase) -> Result<f64> {
    check_probability("D", d)?;
    if d < model.p() {
        return Err(Error::InfeasibleDistortion {
            distortion: d,
            min: model.p(),
        });
    }
    if d >= model.alpha() {
        return Ok(0.0);
    }
    let nats = match tangency_point(model)? {
        Some(d_t) if d > d_t => {
            let alpha = model.alpha();
            upper_bound_nats(model, d_t)? * (alpha - d) / (alpha - d_t)
        }
        _ => upper_bound_nats(model, d)?.max(0.0),
    };
    Ok(base.from_nats(nats))
}

/// Magnitude of the slope of the symmetric-source iRDF in nats per unit
/// distortion: `ln((p̄ − D)/(D − p)) / (p̄ − p)`.
pub fn slope(p: f64, d: f64) -> Result<f64> {
    check_probability("p", p)?;
    check_probability("D", d)?;
    if p >= 0.5 {
        return Err(Error::ZeroInformation { alpha: 0.5, p });
    }
    let p_bar = 1.0 - p;
    if d <= p || d >= p_bar {
        return Err(Error::domain("D", d, "(p, 1 − p)"));
    }
    Ok(((p_bar - d) / (d - p)).ln() / (p_bar - p))
}

/// Which rate curve a [`BoundCurve`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Irdf,
    DirectRdf,
    SymmetricIrdf,
    UpperBound,
    ConvexifiedUpperBound,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::Irdf => "irdf",
            CurveKind::DirectRdf => "direct_rdf",
            CurveKind::SymmetricIrdf => "symmetric_irdf",
            CurveKind::UpperBound => "upper_bound",
            CurveKind::ConvexifiedUpperBound => "convexified_upper_bound",
        }
    }

    /// Value of this curve at one distortion.
    pub fn evaluate(self, model: &SourceModel, d: f64, base: LogBase) -> Result<f64> {
        match self {
            CurveKind::Irdf => irdf(model, d, base),
            CurveKind::DirectRdf => direct_rdf(model.alpha(), d, base),
            CurveKind::SymmetricIrdf => symmetric_irdf(model.p(), d, base),
            CurveKind::UpperBound => upper_bound(model, d, base),
            CurveKind::ConvexifiedUpperBound => convexified_upper_bound(model, d, base),
        }
    }
}

/// A sampled rate curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCurve {
    pub points: Vec<RatePoint>,
    pub kind: CurveKind,
    pub model: SourceModel,
}

impl BoundCurve {
    /// Sample `kind` on a strictly increasing grid, dropping distortions
    /// outside the curve's domain.
    pub fn sample(
        kind: CurveKind,
        model: &SourceModel,
        grid: &[f64],
        base: LogBase,
    ) -> Result<Self> {
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid(
                "distortion grid must be strictly increasing".into(),
            ));
        }
        let mut points = Vec::with_capacity(grid.len());
        for &d in grid {
            match kind.evaluate(model, d, base) {
                Ok(rate) => points.push(RatePoint {
                    distortion: d,
                    rate,
                    base,
                }),
                Err(Error::InfeasibleDistortion { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Ok(BoundCurve {
            points,
            kind,
            model: *model,
        })
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].rate <= w[0].rate)
    }
}
