//! The model-selection meta-algorithm.
//!
//! A [`Selector`] starts on the context-free model (UCB over arms) and
//! collects exploration samples `(x, r − μ̂)` in a set `W`. Every round after
//! the warm start it compares the pairwise gap statistic on `W` against the
//! test threshold and, on the first exceedance, switches permanently to
//! LinUCB. The nested kind walks a chain of model orders the same way.
//!
//! A round is split in two so that the environment stays outside:
//! [`Selector::act`] sees the slate and picks an arm, [`Selector::observe`]
//! takes the reward and returns the [`RoundRecord`].

mod exploration;
mod nested;

use std::fmt;

use nalgebra::{DMatrix, DVector};

pub use exploration::{
    adaptive_decision, coin_decision, diversity_holds, exploration_probability,
    misspecification_detected, tau_min, ActionSource, BiasMeans, ExplorationDecision,
};
pub use nested::{nested_metric, order_gammas};

use crate::config::{RunConfig, SelectorKind};
use crate::environment::ContextSlate;
use crate::error::{Error, Result};
use crate::policies::{InterceptLinUcb, UcbState};
use crate::rng::{derive_substream, tags, RngStream};
use crate::specgap::{AlphaInputs, AlphaTerms, CovarianceAccumulator, GapAccumulator, LabeledSample, ThresholdVariant};

/// Which model drives the greedy action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActiveModel {
    Simple,
    Complex,
    /// Nested model order, 1-based.
    Order(usize),
}

impl fmt::Display for ActiveModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActiveModel::Simple => f.write_str("simple"),
            ActiveModel::Complex => f.write_str("complex"),
            ActiveModel::Order(j) => write!(f, "order-{j}"),
        }
    }
}

impl std::str::FromStr for ActiveModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simple" => Ok(ActiveModel::Simple),
            "complex" => Ok(ActiveModel::Complex),
            _ => s
                .strip_prefix("order-")
                .and_then(|j| j.parse().ok())
                .filter(|&j: &usize| j >= 1)
                .map(ActiveModel::Order)
                .ok_or_else(|| Error::Parse(format!("unknown model {s:?}"))),
        }
    }
}

/// Everything that happened in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    /// 1-based.
    pub round: usize,
    pub model: ActiveModel,
    pub arm: usize,
    pub source: ActionSource,
    pub y: Option<bool>,
    pub z: Option<bool>,
    pub in_w: bool,
    pub forced: bool,
    /// Gap statistic evaluated before acting, when a test was due.
    pub gap_est: Option<f64>,
    /// Threshold it was compared against (inflation applied).
    pub alpha: Option<f64>,
    /// Constant-free threshold pieces behind `alpha`.
    pub alpha_terms: Option<AlphaTerms>,
    pub reward: f64,
}

/// The arm chosen by [`Selector::act`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Action {
    pub arm: usize,
    pub source: ActionSource,
    pub model: ActiveModel,
}

#[derive(Debug, Clone)]
struct Pending {
    model: ActiveModel,
    decision: ExplorationDecision,
    context: DVector<f64>,
    gap_est: Option<f64>,
    alpha: Option<f64>,
    alpha_terms: Option<AlphaTerms>,
}

struct TestOutcome {
    estimate: f64,
    alpha: f64,
    terms: AlphaTerms,
}

#[derive(Debug, Clone)]
pub struct Selector {
    cfg: RunConfig,
    variant: ThresholdVariant,
    alpha_inputs: AlphaInputs,
    gamma: f64,
    kappa: f64,
    tau_min: Option<f64>,
    dims: Vec<usize>,
    gammas: Vec<f64>,
    round: usize,
    model: ActiveModel,
    ucb: UcbState,
    linucb: Option<InterceptLinUcb>,
    cov: CovarianceAccumulator,
    gap: GapAccumulator,
    samples: Vec<LabeledSample>,
    exploration_gram: DMatrix<f64>,
    forced: usize,
    bias: BiasMeans,
    switch_time: Option<usize>,
    advances: Vec<usize>,
    testing: bool,
    coins: RngStream,
    uniform: RngStream,
    pending: Option<Pending>,
}

impl Selector {
    /// Validates `cfg` and derives the coin and uniform-arm streams from its seed.
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let cfg = cfg.clone().validate()?;
        let coins = derive_substream(cfg.master_seed, tags::COINS);
        let uniform = derive_substream(cfg.master_seed, tags::UNIFORM_ARM);
        let (k, d) = (cfg.num_arms, cfg.dim);
        let nested = cfg.selector == SelectorKind::Nested;
        let dims = if nested { cfg.model_dims() } else { vec![d] };
        let gammas = if nested {
            order_gammas(&dims, cfg.horizon, cfg.threshold)
        } else {
            vec![cfg.gamma()]
        };
        let gamma = cfg.gamma();
        let tau_min = (cfg.selector == SelectorKind::ModCbA && cfg.tau_min_gating)
            .then(|| tau_min(gamma, d, cfg.horizon, cfg.failure_prob));
        let mut sel = Self {
            variant: cfg.selector.into(),
            alpha_inputs: AlphaInputs::from_config(&cfg),
            gamma,
            kappa: cfg.kappa(),
            tau_min,
            gammas,
            round: 0,
            model: if nested { ActiveModel::Order(1) } else { ActiveModel::Simple },
            ucb: UcbState::new(k, cfg.noise_scale, cfg.policy_confidence()),
            linucb: None,
            cov: CovarianceAccumulator::new(d),
            gap: GapAccumulator::new(d),
            samples: Vec::new(),
            exploration_gram: DMatrix::zeros(d, d),
            forced: 0,
            bias: BiasMeans::new(k),
            switch_time: None,
            advances: Vec::new(),
            testing: true,
            coins,
            uniform,
            pending: None,
            dims,
            cfg,
        };
        if nested {
            sel.linucb = Some(sel.fresh_linucb(sel.dims[0]));
        }
        Ok(sel)
    }

    /// A fresh linear policy whose intercepts start from the exploration means.
    fn fresh_linucb(&self, dim: usize) -> InterceptLinUcb {
        let lin = InterceptLinUcb::new(
            dim,
            self.cfg.num_arms,
            self.cfg.ridge,
            self.cfg.param_bound,
            self.cfg.noise_scale,
            self.cfg.policy_confidence(),
        );
        let bias = &self.bias;
        (0..self.cfg.num_arms).fold(lin, |lin, a| lin.with_prior(a, bias.get(a), bias.counts()[a] as f64))
    }

    /// With testing off the statistic is still computed and recorded, but
    /// the model never changes.
    pub fn set_testing(&mut self, enabled: bool) {
        self.testing = enabled;
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn kind(&self) -> SelectorKind {
        self.cfg.selector
    }

    /// Rounds completed so far.
    pub fn round(&self) -> usize {
        self.round
    }

    pub fn model(&self) -> ActiveModel {
        self.model
    }

    /// Round at which the simple model was abandoned.
    pub fn switch_time(&self) -> Option<usize> {
        self.switch_time
    }

    /// Rounds at which the nested order advanced.
    pub fn advance_times(&self) -> &[usize] {
        &self.advances
    }

    pub fn exploration_size(&self) -> usize {
        self.samples.len()
    }

    pub fn forced_count(&self) -> usize {
        self.forced
    }

    /// `Σ_{s∈W} x_s x_sᵀ` over the played contexts of exploration rounds.
    pub fn exploration_gram(&self) -> &DMatrix<f64> {
        &self.exploration_gram
    }

    pub fn samples(&self) -> &[LabeledSample] {
        &self.samples
    }

    pub fn bias_means(&self) -> &BiasMeans {
        &self.bias
    }

    pub fn ucb(&self) -> &UcbState {
        &self.ucb
    }

    pub fn linucb(&self) -> Option<&InterceptLinUcb> {
        self.linucb.as_ref()
    }

    pub fn covariance(&self) -> &CovarianceAccumulator {
        &self.cov
    }

    pub fn tau_min(&self) -> Option<f64> {
        self.tau_min
    }

    fn gated(&self, t: usize) -> bool {
        self.tau_min.is_some_and(|tm| (t as f64) < tm)
    }

    fn check_slate(&self, slate: &ContextSlate) -> Result<()> {
        if slate.num_arms() != self.cfg.num_arms {
            return Err(Error::Dimension {
                context: "slate arms",
                expected: self.cfg.num_arms,
                actual: slate.num_arms(),
            });
        }
        if slate.dim() != self.cfg.dim {
            return Err(Error::Dimension {
                context: "slate dimension",
                expected: self.cfg.dim,
                actual: slate.dim(),
            });
        }
        Ok(())
    }

    fn simple_test(&self, t: usize) -> Result<Option<TestOutcome>> {
        let n = self.samples.len();
        if n < 2 {
            return Ok(None);
        }
        let cov = self.cov.thresholded(self.gamma)?;
        let estimate = self.gap.estimate(cov.inverse()).expect("at least two samples");
        let terms = self.alpha_inputs.terms(self.variant, n, t);
        let alpha = self.cfg.alpha_inflation * terms.combine(&self.cfg.constants);
        Ok(Some(TestOutcome { estimate, alpha, terms }))
    }

    fn nested_test(&self, order: usize, t: usize) -> Result<Option<TestOutcome>> {
        let n = self.samples.len();
        if n < 2 {
            return Ok(None);
        }
        let gamma = self.gammas[order - 1];
        let metric = nested_metric(&self.cov, self.dims[order - 1], gamma)?;
        let estimate = self.gap.estimate(&metric).expect("at least two samples");
        let inputs = self.alpha_inputs.with_dim_and_gamma(self.cfg.dim, gamma);
        let terms = inputs.terms(ThresholdVariant::ModCbU, n, t);
        let alpha = self.cfg.alpha_inflation * terms.combine(&self.cfg.constants);
        Ok(Some(TestOutcome { estimate, alpha, terms }))
    }

    fn greedy(arm: usize) -> ExplorationDecision {
        ExplorationDecision {
            source: ActionSource::Greedy,
            arm,
            include_in_w: false,
            forced: false,
            y: None,
            z: None,
        }
    }

    fn linucb_arm(&self, slate: &ContextSlate) -> Result<usize> {
        let lin = self.linucb.as_ref().expect("linear policy is active");
        lin.recommend(&slate.truncated(lin.dim()))
    }

    fn explore(&mut self, t: usize, greedy_arm: usize, slate: &ContextSlate) -> Result<ExplorationDecision> {
        let k = self.cfg.num_arms;
        let exploit_p = 1.0 - exploration_probability(t, self.kappa);
        let uniform = &mut self.uniform;
        if self.cfg.selector != SelectorKind::ModCbA {
            let exploit = self.coins.bernoulli(exploit_p);
            return Ok(coin_decision(greedy_arm, exploit, || uniform.index(k)));
        }
        let gated = self.tau_min.is_some_and(|tm| (t as f64) < tm);
        let y = !gated
            && diversity_holds(
                &self.exploration_gram,
                self.samples.len(),
                slate.row(greedy_arm),
                self.gamma,
            )?;
        let z = self.coins.bernoulli(exploit_p);
        let mut decision = adaptive_decision(greedy_arm, y, z, || uniform.index(k));
        if gated {
            decision.y = None;
        }
        Ok(decision)
    }

    /// Chooses the arm for the next round. Must be followed by [`Selector::observe`].
    pub fn act(&mut self, slate: &ContextSlate) -> Result<Action> {
        if self.pending.is_some() {
            return Err(Error::InvalidInput("previous round has not been observed".into()));
        }
        if self.round >= self.cfg.horizon {
            return Err(Error::InvalidInput(format!(
                "horizon of {} rounds exhausted",
                self.cfg.horizon
            )));
        }
        self.check_slate(slate)?;
        let t = self.round + 1;
        self.cov.update(slate)?;

        let mut outcome = None;
        let decision = if t <= self.cfg.num_arms {
            ExplorationDecision {
                source: ActionSource::Warmup,
                ..Self::greedy(t - 1)
            }
        } else {
            match self.model {
                ActiveModel::Simple => {
                    let test = if self.gated(t) { None } else { self.simple_test(t)? };
                    let fire = self.testing
                        && test.as_ref().is_some_and(|o| misspecification_detected(o.estimate, o.alpha, self.samples.len()));
                    outcome = test;
                    if fire {
                        self.model = ActiveModel::Complex;
                        self.switch_time = Some(t);
                        self.linucb = Some(self.fresh_linucb(self.cfg.dim));
                        Self::greedy(self.linucb_arm(slate)?)
                    } else {
                        let i_t = self.ucb.recommend();
                        self.explore(t, i_t, slate)?
                    }
                }
                ActiveModel::Complex => Self::greedy(self.linucb_arm(slate)?),
                ActiveModel::Order(j) if j == self.dims.len() => Self::greedy(self.linucb_arm(slate)?),
                ActiveModel::Order(j) => {
                    let test = self.nested_test(j, t)?;
                    let fire = self.testing
                        && test.as_ref().is_some_and(|o| misspecification_detected(o.estimate, o.alpha, self.samples.len()));
                    outcome = test;
                    if fire {
                        self.model = ActiveModel::Order(j + 1);
                        self.advances.push(t);
                        self.linucb = Some(self.fresh_linucb(self.dims[j]));
                    }
                    let greedy_arm = self.linucb_arm(slate)?;
                    if fire && j + 1 == self.dims.len() {
                        Self::greedy(greedy_arm)
                    } else {
                        self.explore(t, greedy_arm, slate)?
                    }
                }
            }
        };

        let action = Action {
            arm: decision.arm,
            source: decision.source,
            model: self.model,
        };
        self.pending = Some(Pending {
            model: self.model,
            decision,
            context: slate.row(decision.arm).clone(),
            gap_est: outcome.as_ref().map(|o| o.estimate),
            alpha: outcome.as_ref().map(|o| o.alpha),
            alpha_terms: outcome.map(|o| o.terms),
        });
        Ok(action)
    }

    /// Completes the round started by [`Selector::act`].
    pub fn observe(&mut self, reward: f64) -> Result<RoundRecord> {
        let p = self
            .pending
            .take()
            .ok_or_else(|| Error::InvalidInput("observe called without a pending action".into()))?;
        let d = p.decision;
        match (d.source, p.model) {
            (ActionSource::Warmup, ActiveModel::Simple) => self.ucb.update(d.arm, reward)?,
            (ActionSource::Greedy, ActiveModel::Simple) => self.ucb.update(d.arm, reward)?,
            (ActionSource::Greedy, _) => {
                let lin = self.linucb.as_mut().expect("linear policy is active");
                let x = p.context.rows(0, lin.dim()).into_owned();
                lin.update(d.arm, &x, reward)?;
            }
            _ => {}
        }
        if d.include_in_w {
            let label = reward - self.bias.get(d.arm);
            self.gap.push(&p.context, label);
            self.exploration_gram.ger(1.0, &p.context, &p.context, 1.0);
            self.samples.push(LabeledSample::new(p.context, label));
            self.bias.update(d.arm, reward, true)?;
        }
        if d.forced {
            self.forced += 1;
        }
        self.round += 1;
        Ok(RoundRecord {
            round: self.round,
            model: p.model,
            arm: d.arm,
            source: d.source,
            y: d.y,
            z: d.z,
            in_w: d.include_in_w,
            forced: d.forced,
            gap_est: p.gap_est,
            alpha: p.alpha,
            alpha_terms: p.alpha_terms,
            reward,
        })
    }

    /// One full round; `pull` returns the reward of the chosen arm.
    pub fn round_with(
        &mut self,
        slate: &ContextSlate,
        pull: impl FnOnce(usize) -> Result<f64>,
    ) -> Result<RoundRecord> {
        let action = self.act(slate)?;
        let reward = pull(action.arm)?;
        self.observe(reward)
    }
}
