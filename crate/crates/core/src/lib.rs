//! Maximal CHSH correlation for pure and mixed two-qubit states.
//!
//! The correlation matrix `K` of a state maps the Bloch sphere of one qubit
//! onto an ellipsoid. Maximizing the CHSH value then reduces to finding the
//! parallelogram of largest perimeter inscribed in the largest elliptical
//! section of that ellipsoid. Every section admits a one-parameter family of
//! optimal parallelograms, all with half-perimeter `2√(a² + b²)`, where
//! `a ≥ b` are the two largest singular values of `K`.
//!
//! Modules:
//!
//! - [`state`]: pure, Schmidt and mixed two-qubit states, Werner and
//!   two-state mixtures, concurrence, Bloch vectors, PPT test.
//! - [`correlation`]: the correlation matrix, its ordered SVD, and the exact
//!   CHSH expectation for arbitrary measurement directions.
//! - [`geometry`]: ellipse/parallelogram functional and the optimal angle
//!   family.
//! - [`strategy`]: full optimal measurement strategies and closed-form maxima.
//! - [`oracle`]: brute-force maximizer used to certify the closed forms.
//! - [`sampler`]: Born-rule Monte-Carlo estimate of `S`.

#![forbid(unsafe_code)]
#![allow(clippy::needless_range_loop)]

pub mod correlation;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod oracle;
pub mod sampler;
pub mod state;
pub mod strategy;

pub use correlation::{chsh_expectation, correlation_matrix, svd3, CorrelationMatrix, MeasurementVectors, SvdDecomposition};
pub use error::{ChshError, Result};
pub use geometry::{EllipseSection, StrategyParams};
pub use state::{random_density, DensityMatrix, PureState, SchmidtState, TwoQubitState};
pub use strategy::{OptimizationResult, SignBranch};
