//! Run configuration and its validation.
//!
//! A [`RunConfig`] is plain data. Every consumer calls [`RunConfig::validate`]
//! (or goes through [`crate::harness::run_episode`], which does) before using
//! it, and gets back a report that names every violated field at once.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which instantiation of the model-selection meta-algorithm to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectorKind {
    /// Uniform forced exploration at rate `t^{-1/3}`.
    #[serde(rename = "modcb")]
    ModCb,
    /// Thresholded covariance estimator with forced exploration at `t^{-2/9}`.
    #[serde(rename = "modcb_u")]
    ModCbU,
    /// Data-adaptive exploration schedule.
    #[serde(rename = "modcb_a")]
    ModCbA,
    /// Sequential tests over nested linear model orders.
    #[serde(rename = "nested")]
    Nested,
}

impl SelectorKind {
    pub const ALL: [SelectorKind; 4] = [
        SelectorKind::ModCb,
        SelectorKind::ModCbU,
        SelectorKind::ModCbA,
        SelectorKind::Nested,
    ];

    /// Forced-exploration exponent `κ` used when the config leaves it unset.
    pub fn default_exploration_exponent(self) -> f64 {
        match self {
            SelectorKind::ModCb | SelectorKind::ModCbA => 1.0 / 3.0,
            SelectorKind::ModCbU | SelectorKind::Nested => 2.0 / 9.0,
        }
    }

    /// Stable lowercase identifier, identical to the serialized form.
    pub fn as_str(self) -> &'static str {
        match self {
            SelectorKind::ModCb => "modcb",
            SelectorKind::ModCbU => "modcb_u",
            SelectorKind::ModCbA => "modcb_a",
            SelectorKind::Nested => "nested",
        }
    }
}

impl fmt::Display for SelectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectorKind::ModCb => "ModCB",
            SelectorKind::ModCbU => "ModCB.U",
            SelectorKind::ModCbA => "ModCB.A",
            SelectorKind::Nested => "Nested",
        })
    }
}

impl std::str::FromStr for SelectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace(['.', '-'], "_");
        match norm.as_str() {
            "modcb" => Ok(SelectorKind::ModCb),
            "modcb_u" => Ok(SelectorKind::ModCbU),
            "modcb_a" => Ok(SelectorKind::ModCbA),
            "nested" => Ok(SelectorKind::Nested),
            _ => Err(Error::InvalidInput(format!("unknown selector kind {s:?}"))),
        }
    }
}

/// Scale factors for the three terms of the test threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl Default for ThresholdConstants {
    fn default() -> Self {
        Self {
            c1: 1.0,
            c2: 1.0,
            c3: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Number of rounds `T`.
    pub horizon: usize,
    /// Number of arms `K`.
    pub num_arms: usize,
    /// Context dimension `d`.
    pub dim: usize,
    /// Failure probability `δ`.
    pub failure_prob: f64,
    /// Eigenvalue threshold `γ`; `None` resolves to `(d/T)^{1/3}`.
    pub threshold: Option<f64>,
    /// Forced-exploration exponent `κ`; `None` resolves per selector kind.
    pub exploration_exponent: Option<f64>,
    pub selector: SelectorKind,
    pub constants: ThresholdConstants,
    /// Root of every random stream. TOML integers are signed, so seeds above
    /// `i64::MAX` cannot be written to a config file.
    pub master_seed: u64,
    /// Ascending model dimensions for the nested selector; must end at `dim`.
    pub nested_dims: Option<Vec<usize>>,

    /// Plug-in bound on `‖E[xy]‖²` in the threshold's unlabeled-sample term.
    pub mu_norm_sq: f64,
    /// Power of `1/γ` on the labeled-sample term for `ModCB.U`.
    pub variance_gamma_exponent: f64,
    /// Multiplier applied to the threshold at test time.
    pub alpha_inflation: f64,
    /// Hold off the adaptive schedule and the test until `τ_min` (ModCB.A only).
    pub tau_min_gating: bool,
    /// Ridge parameter of the linear policy.
    pub ridge: f64,
    /// Norm bound `S` on the linear parameter.
    pub param_bound: f64,
    /// Sub-Gaussian scale assumed by both base policies.
    pub noise_scale: f64,
    /// Largest dimension accepted by the spectral routines.
    pub max_dim: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            horizon: 1000,
            num_arms: 2,
            dim: 2,
            failure_prob: 0.05,
            threshold: None,
            exploration_exponent: None,
            selector: SelectorKind::ModCbU,
            constants: ThresholdConstants::default(),
            master_seed: 0,
            nested_dims: None,
            mu_norm_sq: 1.0,
            variance_gamma_exponent: 1.0,
            alpha_inflation: 1.0,
            tau_min_gating: false,
            ridge: 1.0,
            param_bound: 1.0,
            noise_scale: 1.0,
            max_dim: 512,
        }
    }
}

impl RunConfig {
    pub fn new(selector: SelectorKind, horizon: usize, num_arms: usize, dim: usize) -> Self {
        Self {
            horizon,
            num_arms,
            dim,
            selector,
            ..Self::default()
        }
    }

    /// Resolved `γ`.
    pub fn gamma(&self) -> f64 {
        self.threshold.unwrap_or_else(|| universal_gamma(self.dim, self.horizon))
    }

    /// Resolved `κ`.
    pub fn kappa(&self) -> f64 {
        self.exploration_exponent
            .unwrap_or_else(|| self.selector.default_exploration_exponent())
    }

    /// Confidence level handed to each base policy (`δ/4`).
    pub fn policy_confidence(&self) -> f64 {
        self.failure_prob / 4.0
    }

    /// Model dimensions seen by the nested selector; `[dim]` when unset.
    pub fn model_dims(&self) -> Vec<usize> {
        self.nested_dims.clone().unwrap_or_else(|| vec![self.dim])
    }

    /// Returns the config unchanged iff every invariant holds.
    pub fn validate(self) -> Result<Self, ConfigError> {
        let mut v = Vec::new();
        let mut bad = |field: &str, message: String| {
            v.push(Violation {
                field: field.to_string(),
                message,
            })
        };

        if self.horizon == 0 {
            bad("horizon", "T must be positive".into());
        }
        if self.num_arms == 0 {
            bad("num_arms", "K must be positive".into());
        }
        if self.dim == 0 {
            bad("dim", "d must be positive".into());
        }
        if self.horizon < self.num_arms {
            bad(
                "horizon",
                format!("T < K ({} < {}): every arm is played once first", self.horizon, self.num_arms),
            );
        }
        if self.dim > self.max_dim {
            bad("dim", format!("d = {} exceeds max_dim = {}", self.dim, self.max_dim));
        }
        if !(self.failure_prob > 0.0 && self.failure_prob < 1.0) {
            bad("failure_prob", format!("δ must lie in (0,1), got {}", self.failure_prob));
        }
        let gamma = self.gamma();
        if !(gamma.is_finite() && gamma > 0.0) {
            bad("threshold", format!("γ must be positive and finite, got {gamma}"));
        }
        let kappa = self.kappa();
        if !(0.0..1.0).contains(&kappa) {
            bad("exploration_exponent", format!("κ must lie in [0,1), got {kappa}"));
        }
        for (name, c) in [
            ("constants.c1", self.constants.c1),
            ("constants.c2", self.constants.c2),
            ("constants.c3", self.constants.c3),
        ] {
            if !(c.is_finite() && c > 0.0) {
                bad(name, format!("must be positive and finite, got {c}"));
            }
        }
        if self.selector == SelectorKind::Nested {
            match &self.nested_dims {
                None => bad("nested_dims", "required for the nested selector".into()),
                Some(dims) if dims.is_empty() => bad("nested_dims", "must not be empty".into()),
                Some(dims) => {
                    if dims[0] == 0 {
                        bad("nested_dims", "dimensions must be positive".into());
                    }
                    if dims.windows(2).any(|w| w[0] >= w[1]) {
                        bad("nested_dims", format!("must be strictly increasing, got {dims:?}"));
                    }
                    if dims.last() != Some(&self.dim) {
                        bad("nested_dims", format!("must end at d = {}, got {dims:?}", self.dim));
                    }
                }
            }
        }
        if !(self.mu_norm_sq.is_finite() && self.mu_norm_sq >= 0.0) {
            bad("mu_norm_sq", format!("must be nonnegative, got {}", self.mu_norm_sq));
        }
        if !(self.variance_gamma_exponent.is_finite() && self.variance_gamma_exponent >= 0.0) {
            bad(
                "variance_gamma_exponent",
                format!("must be nonnegative, got {}", self.variance_gamma_exponent),
            );
        }
        if !(self.alpha_inflation.is_finite() && self.alpha_inflation > 0.0) {
            bad("alpha_inflation", format!("must be positive, got {}", self.alpha_inflation));
        }
        if !(self.ridge.is_finite() && self.ridge > 0.0) {
            bad("ridge", format!("must be positive, got {}", self.ridge));
        }
        if !(self.param_bound.is_finite() && self.param_bound >= 0.0) {
            bad("param_bound", format!("must be nonnegative, got {}", self.param_bound));
        }
        if !(self.noise_scale.is_finite() && self.noise_scale >= 0.0) {
            bad("noise_scale", format!("must be nonnegative, got {}", self.noise_scale));
        }

        if v.is_empty() {
            Ok(self)
        } else {
            Err(ConfigError { violations: v })
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_toml_string()?).map_err(|e| Error::io(path, e))
    }
}

/// `(d/T)^{1/3}`, the threshold that balances estimation and truncation error.
pub fn universal_gamma(dim: usize, horizon: usize) -> f64 {
    (dim as f64 / horizon.max(1) as f64).cbrt()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

/// Every invariant a [`RunConfig`] failed, in check order.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigError {
    pub violations: Vec<Violation>,
}

impl ConfigError {
    pub fn fields(&self) -> impl Iterator<Item = &str> {
        self.violations.iter().map(|v| v.field.as_str())
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration:")?;
        for (i, v) in self.violations.iter().enumerate() {
            let sep = if i == 0 { " " } else { "; " };
            write!(f, "{sep}[{}] {}", v.field, v.message)?;
        }
        Ok(())
    }
}
