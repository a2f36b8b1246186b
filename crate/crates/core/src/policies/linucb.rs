use nalgebra::{DMatrix, DVector};

use crate::environment::ContextSlate;
use crate::error::{Error, Result};

/// Rank-one inverse updates drift; the inverse is refactored this often.
const REFRESH_EVERY: usize = 512;

/// Optimistic ridge regression on de-biased rewards.
///
/// Rewards are modelled as `μ_arm + ⟨x, θ⟩ + noise` where the intercepts come
/// from outside. The regression sees `reward − μ̂_arm`, and arms are ranked
/// by `μ̂_arm + ⟨x, θ̂⟩ + β·‖x‖_{V⁻¹}`.
#[derive(Debug, Clone)]
pub struct LinUcbState {
    ridge: f64,
    param_bound: f64,
    noise_scale: f64,
    confidence: f64,
    gram: DMatrix<f64>,
    gram_inv: DMatrix<f64>,
    moment: DVector<f64>,
    log_det_ratio: f64,
    updates: usize,
}

/// One observed round for [`LinUcbState::step`].
#[derive(Debug, Clone, Copy)]
pub struct LinFeedback<'a> {
    pub context: &'a DVector<f64>,
    pub reward: f64,
    pub bias: f64,
}

impl LinUcbState {
    /// Fresh state with `V = λI`.
    pub fn new(dim: usize, ridge: f64, param_bound: f64, noise_scale: f64, confidence: f64) -> Self {
        Self {
            ridge,
            param_bound,
            noise_scale,
            confidence,
            gram: DMatrix::identity(dim, dim) * ridge,
            gram_inv: DMatrix::identity(dim, dim) / ridge,
            moment: DVector::zeros(dim),
            log_det_ratio: 0.0,
            updates: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.moment.len()
    }

    pub fn updates(&self) -> usize {
        self.updates
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn moment(&self) -> &DVector<f64> {
        &self.moment
    }

    /// `ln(det V / det λI)`.
    pub fn log_det_ratio(&self) -> f64 {
        self.log_det_ratio
    }

    pub fn theta(&self) -> DVector<f64> {
        &self.gram_inv * &self.moment
    }

    /// `√λ·S + σ·sqrt(2 ln(1/δ') + ln(det V / det λI))`.
    pub fn beta(&self) -> f64 {
        self.ridge.sqrt() * self.param_bound
            + self.noise_scale * (2.0 * (1.0 / self.confidence).ln() + self.log_det_ratio).sqrt()
    }

    fn check_dim(&self, actual: usize) -> Result<()> {
        if actual != self.dim() {
            return Err(Error::Dimension {
                context: "linear policy context",
                expected: self.dim(),
                actual,
            });
        }
        Ok(())
    }

    /// Adds `x xᵀ` to `V` and `x·(reward − bias)` to `b`.
    pub fn update(&mut self, x: &DVector<f64>, reward: f64, bias: f64) -> Result<()> {
        self.check_dim(x.len())?;
        let vx = &self.gram_inv * x;
        let quad = x.dot(&vx).max(0.0);
        self.gram.ger(1.0, x, x, 1.0);
        self.moment.axpy(reward - bias, x, 1.0);
        self.log_det_ratio += quad.ln_1p();
        self.updates += 1;
        if self.updates.is_multiple_of(REFRESH_EVERY) {
            self.refresh();
        } else {
            self.gram_inv.ger(-1.0 / (1.0 + quad), &vx, &vx, 1.0);
        }
        Ok(())
    }

    fn refresh(&mut self) {
        let chol = self
            .gram
            .clone()
            .cholesky()
            .expect("ridge-regularized Gram matrix is positive definite");
        self.log_det_ratio = chol.l().diagonal().iter().map(|v| 2.0 * v.ln()).sum::<f64>()
            - self.dim() as f64 * self.ridge.ln();
        self.gram_inv = chol.inverse();
    }

    /// Optimistic index of every arm.
    pub fn indices(&self, slate: &ContextSlate, bias_estimates: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(slate.dim())?;
        if bias_estimates.len() != slate.num_arms() {
            return Err(Error::Dimension {
                context: "bias estimates",
                expected: slate.num_arms(),
                actual: bias_estimates.len(),
            });
        }
        let theta = self.theta();
        let beta = self.beta();
        Ok(slate
            .rows()
            .iter()
            .zip(bias_estimates)
            .map(|(x, mu)| {
                let spread = x.dot(&(&self.gram_inv * x)).max(0.0).sqrt();
                mu + x.dot(&theta) + beta * spread
            })
            .collect())
    }

    /// Arm with the largest optimistic index; ties go to the lowest arm.
    pub fn recommend(&self, slate: &ContextSlate, bias_estimates: &[f64]) -> Result<usize> {
        let idx = self.indices(slate, bias_estimates)?;
        let mut best = 0;
        for (arm, v) in idx.iter().enumerate().skip(1) {
            if *v > idx[best] {
                best = arm;
            }
        }
        Ok(best)
    }

    /// Applies optional feedback, then recommends on `slate`.
    pub fn step(
        &mut self,
        slate: &ContextSlate,
        bias_estimates: &[f64],
        feedback: Option<LinFeedback<'_>>,
    ) -> Result<usize> {
        if let Some(fb) = feedback {
            self.update(fb.context, fb.reward, fb.bias)?;
        }
        self.recommend(slate, bias_estimates)
    }
}
