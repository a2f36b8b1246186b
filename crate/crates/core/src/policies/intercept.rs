use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::environment::ContextSlate;
use crate::error::{Error, Result};

/// Optimistic least squares for `r = μ_arm + ⟨x, θ⟩ + noise` with the
/// intercepts learned jointly.
///
/// The intercepts carry no ridge penalty, so they are eliminated exactly:
/// with per-arm weights `N_a`, context sums `s_a` and reward sums `R_a`,
///
/// `M θ = Σ x r − Σ_a s_a R_a / N_a`,  `M = λI + Σ x xᵀ − Σ_a s_a s_aᵀ / N_a`,
///
/// and `μ_a = (R_a − ⟨s_a, θ⟩) / N_a`. A prior mean enters as `w`
/// pseudo-observations at `x = 0`. The index of arm `a` is
/// `μ_a + ⟨x_a, θ⟩ + β·sqrt(1/N_a + ‖x_a − s_a/N_a‖²_{M⁻¹})`, infinite for
/// arms with no data.
#[derive(Debug, Clone)]
pub struct InterceptLinUcb {
    ridge: f64,
    param_bound: f64,
    noise_scale: f64,
    confidence: f64,
    gram: DMatrix<f64>,
    cross: DVector<f64>,
    weights: Vec<f64>,
    context_sums: Vec<DVector<f64>>,
    reward_sums: Vec<f64>,
    chol: Cholesky<f64, Dyn>,
    theta: DVector<f64>,
    intercepts: Vec<f64>,
    log_det_ratio: f64,
}

impl InterceptLinUcb {
    pub fn new(
        dim: usize,
        num_arms: usize,
        ridge: f64,
        param_bound: f64,
        noise_scale: f64,
        confidence: f64,
    ) -> Self {
        let mut s = Self {
            ridge,
            param_bound,
            noise_scale,
            confidence,
            gram: DMatrix::zeros(dim, dim),
            cross: DVector::zeros(dim),
            weights: vec![0.0; num_arms],
            context_sums: vec![DVector::zeros(dim); num_arms],
            reward_sums: vec![0.0; num_arms],
            chol: Cholesky::new(DMatrix::identity(dim, dim) * ridge).expect("ridge is positive"),
            theta: DVector::zeros(dim),
            intercepts: vec![0.0; num_arms],
            log_det_ratio: 0.0,
        };
        s.refresh();
        s
    }

    /// Adds `weight` pseudo-observations of `mean` for `arm`.
    pub fn with_prior(mut self, arm: usize, mean: f64, weight: f64) -> Self {
        if weight > 0.0 {
            self.weights[arm] += weight;
            self.reward_sums[arm] += weight * mean;
            self.refresh();
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn num_arms(&self) -> usize {
        self.weights.len()
    }

    pub fn theta(&self) -> &DVector<f64> {
        &self.theta
    }

    pub fn intercepts(&self) -> &[f64] {
        &self.intercepts
    }

    /// Observation weight behind each intercept.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `ln(det M / det λI)`.
    pub fn log_det_ratio(&self) -> f64 {
        self.log_det_ratio
    }

    pub fn beta(&self) -> f64 {
        self.ridge.sqrt() * self.param_bound
            + self.noise_scale * (2.0 * (1.0 / self.confidence).ln() + self.log_det_ratio).sqrt()
    }

    fn refresh(&mut self) {
        let d = self.dim();
        let mut m = self.gram.clone();
        for i in 0..d {
            m[(i, i)] += self.ridge;
        }
        let mut rhs = self.cross.clone();
        for ((w, s), r) in self.weights.iter().zip(&self.context_sums).zip(&self.reward_sums) {
            if *w > 0.0 {
                m.ger(-1.0 / w, s, s, 1.0);
                rhs.axpy(-r / w, s, 1.0);
            }
        }
        // Symmetrize against rounding before factoring.
        let m = (&m + m.transpose()) * 0.5;
        self.chol = Cholesky::new(m).expect("centered Gram matrix plus ridge is positive definite");
        self.theta = self.chol.solve(&rhs);
        self.log_det_ratio = self.chol.l_dirty().diagonal().iter().map(|v| 2.0 * v.ln()).sum::<f64>()
            - d as f64 * self.ridge.ln();
        for a in 0..self.num_arms() {
            let w = self.weights[a];
            self.intercepts[a] = if w > 0.0 {
                (self.reward_sums[a] - self.context_sums[a].dot(&self.theta)) / w
            } else {
                0.0
            };
        }
    }

    pub fn update(&mut self, arm: usize, x: &DVector<f64>, reward: f64) -> Result<()> {
        if arm >= self.num_arms() {
            return Err(Error::ArmOutOfRange {
                arm,
                num_arms: self.num_arms(),
            });
        }
        self.check_dim(x.len())?;
        self.gram.ger(1.0, x, x, 1.0);
        self.cross.axpy(reward, x, 1.0);
        self.weights[arm] += 1.0;
        self.context_sums[arm] += x;
        self.reward_sums[arm] += reward;
        self.refresh();
        Ok(())
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

    pub fn indices(&self, slate: &ContextSlate) -> Result<Vec<f64>> {
        self.check_dim(slate.dim())?;
        if slate.num_arms() != self.num_arms() {
            return Err(Error::Dimension {
                context: "slate arms",
                expected: self.num_arms(),
                actual: slate.num_arms(),
            });
        }
        let beta = self.beta();
        Ok(slate
            .rows()
            .iter()
            .enumerate()
            .map(|(a, x)| {
                let w = self.weights[a];
                if w <= 0.0 {
                    return f64::INFINITY;
                }
                let centered = x - &self.context_sums[a] / w;
                let spread = centered.dot(&self.chol.solve(&centered)).max(0.0);
                self.intercepts[a] + x.dot(&self.theta) + beta * (1.0 / w + spread).sqrt()
            })
            .collect())
    }

    /// Largest index; ties go to the lowest arm.
    pub fn recommend(&self, slate: &ContextSlate) -> Result<usize> {
        let idx = self.indices(slate)?;
        let mut best = 0;
        for (arm, v) in idx.iter().enumerate().skip(1) {
            if *v > idx[best] {
                best = arm;
            }
        }
        Ok(best)
    }
}
