//! Causal time-evolution of probability measures on globally hyperbolic
//! spacetimes, at desk scale.
//!
//! A conserved quantity spread over space is modeled as a family of atomic
//! probability measures, one per time slice of a chosen global time function.
//! The library realizes the three equivalent descriptions of such an
//! evolution being *causal*:
//!
//! 1. **Monotone slice measures** — every earlier slice causally precedes
//!    every later one, witnessed by causal couplings
//!    ([`measures::causal_coupling_feasible`]).
//! 2. **Measures on causal-curve space** — a weighted family of causal
//!    curves whose evaluation pushforwards reproduce the slices
//!    ([`curve_measures::CurveMeasure`], built by
//!    [`curve_measures::dyadic_construct_sigma`]).
//! 3. **A causal vector field** solving the continuity equation in the
//!    distributional sense ([`field::build_field`] and its residual suite).
//!
//! On top of the equivalences, [`observers`] implements the transformation
//! laws between different global time functions and the two
//! observer-independent invariants: the worldline measure and the Radon
//! 4-current pairing.
//!
//! Everything is exact where it can be: weights are arbitrary-precision
//! rationals, coupling feasibility is decided by exact max-flow, and the
//! curve-space constructions reproduce slice marginals bit-for-bit.

pub mod curve_measures;
pub mod curves;
pub mod field;
pub mod fixtures;
pub mod json;
pub mod measures;
pub mod observers;
pub mod rational;
pub mod rng;
pub mod spacetime;
pub mod test_functions;
pub mod transport;

#[cfg(doctest)]
mod book_doctests;

use spacetime::Event;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid event: {0}")]
    InvalidEvent(String),

    #[error("events not causally related: ({},{}) does not precede ({},{})", from.t, from.x, to.t, to.x)]
    NotCausal { from: Event, to: Event },

    #[error("no causal coupling exists{}: blocking set carries surplus mass {deficit}", step_label(step))]
    Infeasible {
        /// Dyadic step `[s, t]` at which the construction failed, if any.
        step: Option<(f64, f64)>,
        /// Up-set certificate: events K with source(J⁺(K)) > target(J⁺(K)).
        certificate: Vec<Event>,
        /// The violated margin source(J⁺(K)) − target(J⁺(K)), as a float.
        deficit: f64,
    },

    #[error("time grid error: {0}")]
    Grid(String),

    #[error("measure slices out of time order: {0}")]
    TimeOrder(String),

    #[error("empty set: {0}")]
    EmptySet(String),

    #[error("marginal mismatch: {0}")]
    MarginalMismatch(String),

    #[error("curve endpoint mismatch: {0}")]
    EndpointMismatch(String),

    #[error("temporal function not monotone along curve: {0}")]
    NonMonotone(String),

    #[error("parameter range error: {0}")]
    Range(String),

    #[error("frame invalid for model: {0}")]
    InvalidFrame(String),

    #[error("partition of unity violated: {0}")]
    Partition(String),

    #[error("test-function contract violated: {0}")]
    TestFunction(String),

    #[error("parse error: {0}")]
    Parse(String),
}

fn step_label(step: &Option<(f64, f64)>) -> String {
    match step {
        Some((a, b)) => format!(" on step [{a}, {b}]"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
