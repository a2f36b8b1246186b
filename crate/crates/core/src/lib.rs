//! Online model selection for contextual bandits.
//!
//! A selector starts with a multi-armed bandit policy that ignores contexts
//! and switches to a linear contextual policy once a pairwise U-statistic
//! shows the linear model explains materially more of the reward. The
//! nested selector generalizes this to a chain of linear models on growing
//! prefixes of the context.
//!
//! Modules:
//! * [`environment`] generates synthetic instances and draws contexts and rewards.
//! * [`specgap`] holds the spectral utilities, gap estimators and thresholds.
//! * [`policies`] has the UCB and LinUCB base learners.
//! * [`selector`] implements the model-selection rules.
//! * [`harness`] runs episodes and sweeps, calibrates constants and writes traces.

pub mod config;
pub mod environment;
pub mod error;
pub mod harness;
pub mod policies;
pub mod rng;
pub mod selector;
pub mod specgap;

pub use config::{RunConfig, SelectorKind, ThresholdConstants};
pub use error::{Error, Result};
