use nalgebra::DMatrix;

use crate::error::Result;
use crate::specgap::{nested_residual_map, CovarianceAccumulator};

/// Per-order eigenvalue floor `γ_j = (d_j / T)^{1/3}`, or the fixed override.
pub fn order_gammas(dims: &[usize], horizon: usize, fixed: Option<f64>) -> Vec<f64> {
    dims.iter()
        .map(|&d| fixed.unwrap_or_else(|| (d as f64 / horizon as f64).cbrt()))
        .collect()
}

/// Metric `G = R̂ Σ̂ R̂` whose pairwise statistic compares the model on the
/// leading `sub_dim` coordinates against the full model.
pub fn nested_metric(cov: &CovarianceAccumulator, sub_dim: usize, gamma: f64) -> Result<DMatrix<f64>> {
    let full = cov.thresholded(gamma)?;
    let sub = cov.thresholded_leading(sub_dim, gamma)?;
    let map = nested_residual_map(&full, &sub)?;
    Ok(map.transpose() * map)
}
