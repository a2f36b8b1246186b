use crate::config::{RunConfig, SelectorKind, ThresholdConstants};

/// Which finite-sample bound the misspecification test is calibrated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThresholdVariant {
    /// Inverse of the raw covariance; first term scales with `1/γ²`, no bias floor.
    ModCb,
    /// Thresholded inverse; first term `1/γ`, plus a `c3·γ` truncation floor.
    ModCbU,
    /// Adaptive exploration; first term `1/γ`, no `‖E[xy]‖²` factor, no floor.
    ModCbA,
}

impl From<SelectorKind> for ThresholdVariant {
    fn from(kind: SelectorKind) -> Self {
        match kind {
            SelectorKind::ModCb => ThresholdVariant::ModCb,
            SelectorKind::ModCbU | SelectorKind::Nested => ThresholdVariant::ModCbU,
            SelectorKind::ModCbA => ThresholdVariant::ModCbA,
        }
    }
}

/// Everything except the sample counts that enters the threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaInputs {
    pub dim: usize,
    pub failure_prob: f64,
    pub gamma: f64,
    pub mu_norm_sq: f64,
    pub variance_gamma_exponent: f64,
    pub constants: ThresholdConstants,
}

impl AlphaInputs {
    pub fn from_config(cfg: &RunConfig) -> Self {
        Self {
            dim: cfg.dim,
            failure_prob: cfg.failure_prob,
            gamma: cfg.gamma(),
            mu_norm_sq: cfg.mu_norm_sq,
            variance_gamma_exponent: cfg.variance_gamma_exponent,
            constants: cfg.constants,
        }
    }

    pub fn with_dim_and_gamma(mut self, dim: usize, gamma: f64) -> Self {
        self.dim = dim;
        self.gamma = gamma;
        self
    }

    pub fn terms(&self, variant: ThresholdVariant, n: usize, m: usize) -> AlphaTerms {
        alpha_terms(variant, n, m, self)
    }

    pub fn threshold(&self, variant: ThresholdVariant, n: usize, m: usize) -> f64 {
        self.terms(variant, n, m).combine(&self.constants)
    }
}

/// The three constant-free pieces of the threshold; `α = c1·labeled + c2·unlabeled + c3·truncation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaTerms {
    pub labeled: f64,
    pub unlabeled: f64,
    pub truncation: f64,
}

impl AlphaTerms {
    pub fn combine(&self, c: &ThresholdConstants) -> f64 {
        c.c1 * self.labeled + c.c2 * self.unlabeled + c.c3 * self.truncation
    }
}

/// Constant-free threshold terms. Counts below one are treated as one.
pub fn alpha_terms(variant: ThresholdVariant, n: usize, m: usize, inputs: &AlphaInputs) -> AlphaTerms {
    let d = inputs.dim as f64;
    let delta = inputs.failure_prob;
    let gamma = inputs.gamma;
    let n = n.max(1) as f64;
    let m = m.max(1) as f64;
    let log_dim = (2.0 * d / delta).ln();
    let base = d.sqrt() * log_dim * log_dim / n;
    let unlabeled = (d + (2.0 / delta).ln()) / (gamma.powi(4) * m);
    let variance = gamma.powf(inputs.variance_gamma_exponent);
    match variant {
        ThresholdVariant::ModCbU => AlphaTerms {
            labeled: base / variance,
            unlabeled: inputs.mu_norm_sq * unlabeled,
            truncation: gamma,
        },
        ThresholdVariant::ModCb => AlphaTerms {
            labeled: base / (gamma * gamma),
            unlabeled: inputs.mu_norm_sq * unlabeled,
            truncation: 0.0,
        },
        ThresholdVariant::ModCbA => AlphaTerms {
            labeled: base / gamma,
            unlabeled,
            truncation: 0.0,
        },
    }
}

/// Test threshold for `n` labeled and `m` unlabeled samples under `cfg`.
pub fn alpha_threshold(
    variant: ThresholdVariant,
    n: usize,
    m: usize,
    cfg: &RunConfig,
    mu_norm_sq: f64,
) -> f64 {
    let inputs = AlphaInputs {
        mu_norm_sq,
        ..AlphaInputs::from_config(cfg)
    };
    inputs.threshold(variant, n, m)
}
