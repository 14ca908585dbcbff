//! Indirect rate-distortion function (iRDF) of a Bernoulli(α) source that the
//! encoder only sees through a binary symmetric channel BSC(p), under Hamming
//! distortion.
//!
//! The crate is organised around the reduction of the indirect problem to a
//! direct one on the observation alphabet:
//!
//! * [`model`]: entropy primitives, binary convolution and the canonical
//!   `(α, p)` parameterisation.
//! * [`distortion`]: the amended distortion `d̂(y, x̂)` and the feasible
//!   distortion interval.
//! * [`dual`]: the scalar dual characterisation: `R(D) = h(β) − g(r*)` with
//!   `r*` the unique root of a monotone equation, plus optimality certificates.
//! * [`bounds`]: closed forms (direct RDF, symmetric source) and the
//!   `h(β) − h(Δ)` upper bound with its convex-closure refinement.
//! * [`oracle`]: a generic finite-alphabet Blahut–Arimoto solver used as an
//!   independent cross-check.
//! * [`cli`]: the `irdf` command-line front end.
//!
//! All internal computation is in nats; every public rate takes or carries a
//! [`LogBase`].
//!
//! ```
//! use irdf::{canonicalize, dual::irdf, LogBase};
//!
//! let model = canonicalize(0.5, 0.1).unwrap();
//! let rate = irdf(&model, 0.2, LogBase::Bits).unwrap();
//! let h = irdf::binary_entropy(0.125, LogBase::Bits).unwrap();
//! assert!((rate - (1.0 - h)).abs() < 1e-9);
//! ```

pub mod bounds;
pub mod cli;
pub mod distortion;
pub mod dual;
pub mod error;
pub mod model;
pub mod oracle;
mod special;

pub use error::{Error, Result};
pub use model::{binary_entropy, canonicalize, star, Complements, LogBase, RatePoint, SourceModel};
