use nalgebra::DMatrix;

use super::spectral::SymmetricSpectrum;
use crate::environment::ContextSlate;
use crate::error::{Error, Result, SpectralError};

/// Running second-moment matrix over every context of every arm seen so far.
#[derive(Debug, Clone)]
pub struct CovarianceAccumulator {
    sum: DMatrix<f64>,
    vectors: usize,
    rounds: usize,
}

impl CovarianceAccumulator {
    pub fn new(dim: usize) -> Self {
        Self {
            sum: DMatrix::zeros(dim, dim),
            vectors: 0,
            rounds: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.sum.nrows()
    }

    /// Adds all `K` contexts of one round.
    pub fn update(&mut self, slate: &ContextSlate) -> Result<()> {
        if slate.dim() != self.dim() {
            return Err(Error::Dimension {
                context: "covariance accumulator",
                expected: self.dim(),
                actual: slate.dim(),
            });
        }
        for x in slate.rows() {
            self.sum.ger(1.0, x, x, 1.0);
        }
        self.vectors += slate.num_arms();
        self.rounds += 1;
        Ok(())
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Number of context vectors aggregated (`K · rounds`).
    pub fn vectors(&self) -> usize {
        self.vectors
    }

    /// `(1/(K t)) Σ_s Σ_i x_{i,s} x_{i,s}ᵀ`; the zero matrix before any update.
    pub fn sample_covariance(&self) -> DMatrix<f64> {
        if self.vectors == 0 {
            return self.sum.clone();
        }
        &self.sum / self.vectors as f64
    }

    /// Sample covariance of the leading `dim` coordinates.
    pub fn leading_block(&self, dim: usize) -> DMatrix<f64> {
        let block = self.sample_covariance();
        block.view((0, 0), (dim, dim)).into_owned()
    }

    pub fn thresholded(&self, gamma: f64) -> Result<ThresholdedCovariance> {
        Ok(ThresholdedCovariance::new(
            self.sample_covariance(),
            gamma,
            self.vectors,
        )?)
    }

    pub fn thresholded_leading(&self, dim: usize, gamma: f64) -> Result<ThresholdedCovariance> {
        Ok(ThresholdedCovariance::new(
            self.leading_block(dim),
            gamma,
            self.vectors,
        )?)
    }
}

/// A sample covariance together with its `γ`-thresholded form `Σ̂`, the
/// inverse `Ω̂ = Σ̂⁻¹`, and both square roots, from one eigendecomposition.
#[derive(Debug, Clone)]
pub struct ThresholdedCovariance {
    raw: DMatrix<f64>,
    gamma: f64,
    thresholded: DMatrix<f64>,
    sqrt: DMatrix<f64>,
    inverse: DMatrix<f64>,
    inverse_sqrt: DMatrix<f64>,
    sample_count: usize,
}

impl ThresholdedCovariance {
    /// `gamma = 0` is accepted only if `raw` is already positive definite.
    pub fn new(raw: DMatrix<f64>, gamma: f64, sample_count: usize) -> Result<Self, SpectralError> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(SpectralError::InvalidThreshold(gamma));
        }
        let spectrum = SymmetricSpectrum::new(&raw)?.clamp_psd()?;
        let floor = spectrum.min().max(gamma);
        if floor <= 0.0 {
            return Err(SpectralError::Singular);
        }
        let clip = |l: f64| l.max(gamma);
        Ok(Self {
            thresholded: spectrum.map(clip),
            sqrt: spectrum.map(|l| clip(l).sqrt()),
            inverse: spectrum.map(|l| clip(l).recip()),
            inverse_sqrt: spectrum.map(|l| clip(l).sqrt().recip()),
            raw,
            gamma,
            sample_count,
        })
    }

    pub fn dim(&self) -> usize {
        self.raw.nrows()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn raw(&self) -> &DMatrix<f64> {
        &self.raw
    }

    /// `Σ̂ = T_γ(raw)`.
    pub fn thresholded(&self) -> &DMatrix<f64> {
        &self.thresholded
    }

    /// `Σ̂^{1/2}`.
    pub fn sqrt(&self) -> &DMatrix<f64> {
        &self.sqrt
    }

    /// `Ω̂ = Σ̂⁻¹`.
    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    /// `Ω̂^{1/2}`.
    pub fn inverse_sqrt(&self) -> &DMatrix<f64> {
        &self.inverse_sqrt
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }
}
