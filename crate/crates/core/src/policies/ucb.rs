use crate::error::{Error, Result};

/// Anytime UCB over `K` arms with a self-normalized confidence width.
#[derive(Debug, Clone, PartialEq)]
pub struct UcbState {
    counts: Vec<u64>,
    means: Vec<f64>,
    noise_scale: f64,
    confidence: f64,
}

impl UcbState {
    /// `noise_scale` is the sub-Gaussian scale `σ`, `confidence` is `δ'`.
    pub fn new(num_arms: usize, noise_scale: f64, confidence: f64) -> Self {
        Self {
            counts: vec![0; num_arms],
            means: vec![0.0; num_arms],
            noise_scale,
            confidence,
        }
    }

    pub fn num_arms(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// Rounds credited to this policy.
    pub fn total_pulls(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `σ·sqrt((1+n)/n² · (1 + 2 ln(K·sqrt(1+n)/δ')))`, infinite for `n = 0`.
    pub fn width(&self, count: u64) -> f64 {
        if count == 0 {
            return f64::INFINITY;
        }
        let n = count as f64;
        let k = self.num_arms() as f64;
        let log_term = 1.0 + 2.0 * (k * (1.0 + n).sqrt() / self.confidence).ln();
        self.noise_scale * ((1.0 + n) / (n * n) * log_term).sqrt()
    }

    pub fn index(&self, arm: usize) -> f64 {
        self.means[arm] + self.width(self.counts[arm])
    }

    /// Lowest unpulled arm if any, otherwise the highest index (ties to the lowest arm).
    pub fn recommend(&self) -> usize {
        if let Some(arm) = self.counts.iter().position(|&c| c == 0) {
            return arm;
        }
        let mut best = 0;
        let mut best_index = self.index(0);
        for arm in 1..self.num_arms() {
            let idx = self.index(arm);
            if idx > best_index {
                best = arm;
                best_index = idx;
            }
        }
        best
    }

    pub fn update(&mut self, arm: usize, reward: f64) -> Result<()> {
        if arm >= self.num_arms() {
            return Err(Error::ArmOutOfRange {
                arm,
                num_arms: self.num_arms(),
            });
        }
        self.counts[arm] += 1;
        self.means[arm] += (reward - self.means[arm]) / self.counts[arm] as f64;
        Ok(())
    }

    /// Applies optional feedback, then recommends.
    pub fn step(&mut self, feedback: Option<(usize, f64)>) -> Result<usize> {
        if let Some((arm, reward)) = feedback {
            self.update(arm, reward)?;
        }
        Ok(self.recommend())
    }
}
