//! Generalized integral-type Hilbert operators on normal-weight Bloch spaces.
//!
//! The crate computes the operator `I_{μ_{α+1}} f(z) = ∫_0^1 f(t) (1-tz)^{-(α+1)} dμ(t)`
//! in coefficient and quadrature form, the Bloch-type norms it acts between,
//! and the measure criteria that decide its boundedness.

pub mod bloch;
pub mod error;
pub mod harness;
pub mod hilbert_op;
pub mod measures;
pub mod quad;
pub mod series;
pub mod trend;
pub mod weights;

pub use error::{Error, Result};
