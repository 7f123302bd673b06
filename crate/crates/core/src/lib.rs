//! Bayesian mean-square-error lower bounds for single-parameter optical
//! phase estimation.
//!
//! The crate computes Ziv-Zakai-type bounds (numeric and closed-form),
//! Bayesian Cramér-Rao bounds, and two ceiling-style limits driven by the
//! mean and variance of the photon-number distribution, for coherent,
//! rectangle, and sparse two-level number spectra. A seeded Monte Carlo
//! harness estimates the exactly attainable error of the Gaussian-shift
//! measurement model so the bounds can be checked from above.
//!
//! All floating-point reductions use fixed-order pairwise summation, so any
//! result is a pure function of its inputs: same inputs, same bits, on any
//! thread count.

pub mod bounds;
pub mod classical;
pub mod fidelity;
pub mod numerics;
pub mod spectra;
pub mod verify;

pub use bounds::{BoundMethod, BoundResult, PriorFisherInfo, PriorSpec};
pub use fidelity::FidelityModel;
pub use numerics::{Quadrature, QuadratureConfig};
pub use spectra::{Moments, NumberDistribution, StateFamilySpec};
pub use verify::{run_suite, CheckResult};
