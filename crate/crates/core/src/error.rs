use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("distortion below min{{p, α}}: D = {distortion}, minimum {min}")]
    InfeasibleDistortion { distortion: f64, min: f64 },

    #[error("{what} did not converge (residual {residual:e})")]
    NoConvergence { what: &'static str, residual: f64 },

    /// `p ≥ α`: the observation carries no usable information about the
    /// source, the iRDF is 0 on its whole domain `D ≥ α`.
    #[error("zero-information regime: p = {p} ≥ α = {alpha}")]
    ZeroInformation { alpha: f64, p: f64 },

    #[error("constant observation process: β = {beta}")]
    DegenerateObservation { beta: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            expected,
        }
    }
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::domain(name, value, "[0, 1]"))
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::domain(name, value, "(0, ∞)"))
    }
}
