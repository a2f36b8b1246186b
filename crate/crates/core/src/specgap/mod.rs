//! Spectral utilities and the square-loss-gap estimators.
//!
//! * [`threshold_eigenvalues`] clips the spectrum of a PSD matrix from below
//!   at `γ`, giving a covariance estimate that is always invertible.
//! * [`ThresholdedCovariance`] bundles the raw sample covariance with its
//!   thresholded form, inverse and square roots, all from one factorization.
//! * [`estimate_residual`] and [`estimate_residual_nested`] are the pairwise
//!   U-statistics for the gap between a simple and a richer model.
//! * [`alpha_threshold`] gives the test threshold each selector compares them to.

mod alpha;
mod covariance;
mod residual;
mod spectral;

pub use alpha::{alpha_terms, alpha_threshold, AlphaInputs, AlphaTerms, ThresholdVariant};
pub use covariance::{CovarianceAccumulator, ThresholdedCovariance};
pub use residual::{
    estimate_residual, estimate_residual_nested, nested_residual_map, GapAccumulator, GapEstimate,
    LabeledSample,
};
pub use spectral::{min_eigenvalue, operator_norm, threshold_eigenvalues, SymmetricSpectrum};
