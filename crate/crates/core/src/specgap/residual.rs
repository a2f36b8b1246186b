use nalgebra::{DMatrix, DVector};

use super::covariance::ThresholdedCovariance;
use crate::error::{Error, Result};

/// A context paired with its de-biased reward.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub x: DVector<f64>,
    pub y: f64,
}

impl LabeledSample {
    pub fn new(x: DVector<f64>, y: f64) -> Self {
        Self { x, y }
    }
}

/// One evaluation of the misspecification statistic against its threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapEstimate {
    /// The U-statistic; may be negative.
    pub value: f64,
    /// Labeled samples used (at least 2).
    pub n: usize,
    pub alpha: f64,
}

impl GapEstimate {
    pub fn exceeds(&self) -> bool {
        self.value > self.alpha
    }
}

/// `Σ_{i<j} ⟨v_i, v_j⟩ / C(n,2)` with `v_i = A x_i y_i`, via
/// `C(n,2)·Ê = ½(‖Σ v_i‖² − Σ ‖v_i‖²)`.
fn pairwise_mean(samples: &[LabeledSample], map: &DMatrix<f64>) -> Result<f64> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, actual: n });
    }
    let d = map.ncols();
    let mut total = DVector::zeros(map.nrows());
    let mut squares = 0.0;
    for s in samples {
        if s.x.len() != d {
            return Err(Error::Dimension {
                context: "labeled sample",
                expected: d,
                actual: s.x.len(),
            });
        }
        let v = map * &s.x * s.y;
        squares += v.norm_squared();
        total += v;
    }
    Ok((total.norm_squared() - squares) / (n as f64 * (n as f64 - 1.0)))
}

/// Square-loss-gap estimate `(1/C(n,2)) Σ_{i<j} ⟨Ω̂^{1/2} x_i y_i, Ω̂^{1/2} x_j y_j⟩`.
pub fn estimate_residual(samples: &[LabeledSample], cov: &ThresholdedCovariance) -> Result<f64> {
    pairwise_mean(samples, cov.inverse_sqrt())
}

/// `Σ̂^{1/2} R̂` with `R̂ = [[Ω̂₁, 0], [0, 0]] − Ω̂`.
pub fn nested_residual_map(
    cov_full: &ThresholdedCovariance,
    cov_sub: &ThresholdedCovariance,
) -> Result<DMatrix<f64>> {
    let (d, d1) = (cov_full.dim(), cov_sub.dim());
    if d1 > d {
        return Err(Error::Dimension {
            context: "nested sub-model",
            expected: d,
            actual: d1,
        });
    }
    let mut r = -cov_full.inverse().clone();
    let mut block = r.view_mut((0, 0), (d1, d1));
    block += cov_sub.inverse();
    Ok(cov_full.sqrt() * r)
}

/// Gap estimate between the model on the leading `d₁` coordinates and the
/// full `d`-dimensional model:
/// `(1/C(n,2)) Σ_{s<t} ⟨Σ̂^{1/2} R̂ x_s y_s, Σ̂^{1/2} R̂ x_t y_t⟩`.
pub fn estimate_residual_nested(
    samples: &[LabeledSample],
    cov_full: &ThresholdedCovariance,
    cov_sub: &ThresholdedCovariance,
) -> Result<f64> {
    pairwise_mean(samples, &nested_residual_map(cov_full, cov_sub)?)
}

/// Streaming form of the pairwise statistic for a metric `G = AᵀA` that may
/// change between queries: keeps `s = Σ x y` and `Q = Σ y² x xᵀ`, so that
/// `n(n−1)·Ê = sᵀ G s − tr(G Q)`.
#[derive(Debug, Clone)]
pub struct GapAccumulator {
    n: usize,
    sum: DVector<f64>,
    second: DMatrix<f64>,
}

impl GapAccumulator {
    pub fn new(dim: usize) -> Self {
        Self {
            n: 0,
            sum: DVector::zeros(dim),
            second: DMatrix::zeros(dim, dim),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn push(&mut self, x: &DVector<f64>, y: f64) {
        self.sum.axpy(y, x, 1.0);
        self.second.ger(y * y, x, x, 1.0);
        self.n += 1;
    }

    /// Estimate under the symmetric metric `metric`; `None` below two samples.
    pub fn estimate(&self, metric: &DMatrix<f64>) -> Option<f64> {
        if self.n < 2 {
            return None;
        }
        let quad = (self.sum.transpose() * metric * &self.sum)[0];
        let trace = metric.component_mul(&self.second).sum();
        let n = self.n as f64;
        Some((quad - trace) / (n * (n - 1.0)))
    }
}
