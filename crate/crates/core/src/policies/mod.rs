//! Base learners driven by the selectors: anytime UCB for the context-free
//! model and optimistic ridge regression for the linear model, either with
//! externally supplied arm intercepts or with intercepts learned jointly.

mod intercept;
mod linucb;
mod ucb;

pub use intercept::InterceptLinUcb;
pub use linucb::{LinFeedback, LinUcbState};
pub use ucb::UcbState;
