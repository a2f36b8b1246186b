use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::SpectralError;

/// Absolute asymmetry tolerated before a matrix is rejected, scaled by the
/// largest entry when that exceeds one.
pub(crate) const SYMMETRY_TOL: f64 = 1e-8;
/// Negative eigenvalues down to `-NEGATIVITY_TOL · max(1, λ_max)` are
/// rounding noise and get clamped to zero.
pub(crate) const NEGATIVITY_TOL: f64 = 1e-10;

/// Eigendecomposition `M = U Λ Uᵀ` of a symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymmetricSpectrum {
    values: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl SymmetricSpectrum {
    pub fn new(m: &DMatrix<f64>) -> Result<Self, SpectralError> {
        check_symmetric(m)?;
        let sym = (m + m.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let d = m.nrows();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = DVector::from_iterator(d, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut vectors = DMatrix::zeros(d, d);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        Ok(Self { values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn operator_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, l| acc.max(l.abs()))
    }

    /// `U · diag(f(λ)) · Uᵀ`, symmetrized.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let scaled = DVector::from_iterator(self.dim(), self.values.iter().map(|&l| f(l)));
        let mut left = self.vectors.clone();
        for (j, s) in scaled.iter().enumerate() {
            left.column_mut(j).scale_mut(*s);
        }
        let out = left * self.vectors.transpose();
        (&out + out.transpose()) * 0.5
    }

    /// Rejects materially negative eigenvalues; returns the spectrum with
    /// rounding-level negatives clamped to zero.
    pub fn clamp_psd(mut self) -> Result<Self, SpectralError> {
        let tol = NEGATIVITY_TOL * self.max().max(1.0);
        let lo = self.min();
        if lo < -tol {
            return Err(SpectralError::NegativeEigenvalue { eigenvalue: lo });
        }
        self.values.iter_mut().for_each(|l| *l = l.max(0.0));
        Ok(self)
    }
}

pub(crate) fn check_symmetric(m: &DMatrix<f64>) -> Result<(), SpectralError> {
    if m.nrows() != m.ncols() {
        return Err(SpectralError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(SpectralError::NonFinite);
    }
    let scale = m.amax().max(1.0);
    let d = m.nrows();
    let mut asym: f64 = 0.0;
    for i in 0..d {
        for j in (i + 1)..d {
            asym = asym.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if asym > SYMMETRY_TOL * scale {
        return Err(SpectralError::NotSymmetric { asymmetry: asym });
    }
    Ok(())
}

/// Replaces every eigenvalue `λ` of the PSD matrix `m` by `max(λ, γ)`.
pub fn threshold_eigenvalues(m: &DMatrix<f64>, gamma: f64) -> Result<DMatrix<f64>, SpectralError> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(SpectralError::InvalidThreshold(gamma));
    }
    let spectrum = SymmetricSpectrum::new(m)?.clamp_psd()?;
    Ok(spectrum.map(|l| l.max(gamma)))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> Result<f64, SpectralError> {
    Ok(SymmetricSpectrum::new(m)?.min())
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub fn operator_norm(m: &DMatrix<f64>) -> Result<f64, SpectralError> {
    Ok(SymmetricSpectrum::new(m)?.operator_norm())
}
