//! Saturation statistics of the one-dimensional parking process with a
//! truncated exponential placement law.
//!
//! Cars of unit length park on `(0, x)`: the first car's left end is drawn
//! from an exponential law of rate `λ` truncated to `(0, x−1)`, and the two
//! gaps it leaves are filled the same way until no gap longer than one
//! remains. The crate provides
//!
//! * method-of-steps solvers for the mean count `M_λ(x)`, its derivative
//!   and its second moment ([`solver`]),
//! * certified brackets for the slope `C_λ`, intercept `B_λ` and variance
//!   slope `D_λ` of the asymptotic lines ([`constants`], [`tails`]),
//! * window envelopes of `M′_λ` that bound the solution beyond the solved
//!   horizon ([`envelope`]),
//! * an independent Monte Carlo simulator of the process ([`montecarlo`]),
//! * the validation suite run by `parklab validate` ([`validation`]).

pub mod bracket;
pub mod constants;
pub mod envelope;
pub mod error;
pub mod grid;
pub mod model;
pub mod montecarlo;
pub mod params;
pub mod quadrature;
pub mod report;
pub mod solver;
pub mod tails;
pub mod validation;

#[cfg(test)]
mod testutil;

pub use bracket::Bracket;
pub use error::{ParkError, Result};
pub use grid::{GridKind, SegmentedGrid};
pub use montecarlo::{SimConfig, SimStats};
pub use params::Params;
pub use quadrature::QuadratureRule;
pub use report::ConstantsReport;
pub use tails::{TailBound, TailMethod};
