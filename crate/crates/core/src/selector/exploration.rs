use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::specgap::min_eigenvalue;

/// How the played arm was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActionSource {
    /// Round-robin initialization, one round per arm.
    Warmup,
    /// The active base policy's recommendation.
    Greedy,
    /// An arm drawn uniformly at random.
    Uniform,
}

impl ActionSource {
    pub fn as_str(self) -> &'static str {
        match self {
            ActionSource::Warmup => "warmup",
            ActionSource::Greedy => "greedy",
            ActionSource::Uniform => "uniform",
        }
    }
}

impl fmt::Display for ActionSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ActionSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "warmup" => Ok(ActionSource::Warmup),
            "greedy" => Ok(ActionSource::Greedy),
            "uniform" => Ok(ActionSource::Uniform),
            _ => Err(Error::Parse(format!("unknown action source {s:?}"))),
        }
    }
}

/// Outcome of the exploration schedule for one simple-phase round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExplorationDecision {
    pub source: ActionSource,
    pub arm: usize,
    /// The round's sample feeds the gap estimator and the intercept means.
    pub include_in_w: bool,
    /// A uniform arm overrode the greedy one.
    pub forced: bool,
    /// Diversity indicator (adaptive schedule only).
    pub y: Option<bool>,
    /// Independent coin (adaptive schedule only).
    pub z: Option<bool>,
}

/// Forced-exploration probability `t^{-κ}` at 1-based round `t`.
pub fn exploration_probability(round: usize, kappa: f64) -> f64 {
    (round.max(1) as f64).powf(-kappa)
}

/// Fixed schedule: `exploit` is the coin that came up "play greedy".
pub fn coin_decision(greedy_arm: usize, exploit: bool, uniform_arm: impl FnOnce() -> usize) -> ExplorationDecision {
    if exploit {
        ExplorationDecision {
            source: ActionSource::Greedy,
            arm: greedy_arm,
            include_in_w: false,
            forced: false,
            y: None,
            z: None,
        }
    } else {
        ExplorationDecision {
            source: ActionSource::Uniform,
            arm: uniform_arm(),
            include_in_w: true,
            forced: true,
            y: None,
            z: None,
        }
    }
}

/// Adaptive schedule: greedy unless both `y` and `z` fail; the sample joins
/// the exploration set iff `y == z`.
pub fn adaptive_decision(
    greedy_arm: usize,
    y: bool,
    z: bool,
    uniform_arm: impl FnOnce() -> usize,
) -> ExplorationDecision {
    let greedy = y || z;
    ExplorationDecision {
        source: if greedy { ActionSource::Greedy } else { ActionSource::Uniform },
        arm: if greedy { greedy_arm } else { uniform_arm() },
        include_in_w: y == z,
        forced: !y && !z,
        y: Some(y),
        z: Some(z),
    }
}

/// `λ_min((M + x xᵀ) / (n + 1)) ≥ γ`.
pub fn diversity_holds(gram: &DMatrix<f64>, count: usize, x: &DVector<f64>, gamma: f64) -> Result<bool> {
    if x.len() != gram.nrows() {
        return Err(Error::Dimension {
            context: "diversity check",
            expected: gram.nrows(),
            actual: x.len(),
        });
    }
    let mut next = gram.clone();
    next.ger(1.0, x, x, 1.0);
    next /= (count + 1) as f64;
    Ok(min_eigenvalue(&next)? >= gamma)
}

/// Per-arm running means of rewards from exploration rounds. Arms never
/// explored report 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasMeans {
    means: Vec<f64>,
    counts: Vec<u64>,
}

impl BiasMeans {
    pub fn new(num_arms: usize) -> Self {
        Self {
            means: vec![0.0; num_arms],
            counts: vec![0; num_arms],
        }
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn get(&self, arm: usize) -> f64 {
        self.means[arm]
    }

    pub fn update(&mut self, arm: usize, reward: f64, was_exploration: bool) -> Result<()> {
        if arm >= self.means.len() {
            return Err(Error::ArmOutOfRange {
                arm,
                num_arms: self.means.len(),
            });
        }
        if was_exploration {
            self.counts[arm] += 1;
            self.means[arm] += (reward - self.means[arm]) / self.counts[arm] as f64;
        }
        Ok(())
    }
}

/// The one-sided test: switch iff at least two samples and `Ê > α`.
pub fn misspecification_detected(estimate: f64, alpha: f64, samples: usize) -> bool {
    samples >= 2 && estimate > alpha
}

/// Round after which the adaptive schedule's matrix concentration applies:
/// `(16/γ² + 8/(3γ))·ln(2dT/δ)`.
pub fn tau_min(gamma: f64, dim: usize, horizon: usize, failure_prob: f64) -> f64 {
    (16.0 / (gamma * gamma) + 8.0 / (3.0 * gamma)) * (2.0 * dim as f64 * horizon as f64 / failure_prob).ln()
}
