use crate::config::RunConfig;
use crate::environment::{ContextSlate, Instance};
use crate::error::{Error, Result};
use crate::rng::{derive_substream, tags};
use crate::selector::{ActionSource, ActiveModel, RoundRecord, Selector};

/// Anything that can play rounds against an [`Instance`].
pub trait EpisodePolicy {
    /// Plays one round on `slate`; `pull` yields the chosen arm's reward.
    fn play_round(
        &mut self,
        slate: &ContextSlate,
        pull: &mut dyn FnMut(usize) -> Result<f64>,
    ) -> Result<RoundRecord>;
}

impl EpisodePolicy for Selector {
    fn play_round(
        &mut self,
        slate: &ContextSlate,
        pull: &mut dyn FnMut(usize) -> Result<f64>,
    ) -> Result<RoundRecord> {
        self.round_with(slate, pull)
    }
}

/// Always plays the same arm.
#[derive(Debug, Clone)]
pub struct FixedArmPolicy {
    arm: usize,
    round: usize,
}

impl FixedArmPolicy {
    pub fn new(arm: usize) -> Self {
        Self { arm, round: 0 }
    }
}

impl EpisodePolicy for FixedArmPolicy {
    fn play_round(
        &mut self,
        slate: &ContextSlate,
        pull: &mut dyn FnMut(usize) -> Result<f64>,
    ) -> Result<RoundRecord> {
        if self.arm >= slate.num_arms() {
            return Err(Error::ArmOutOfRange {
                arm: self.arm,
                num_arms: slate.num_arms(),
            });
        }
        let reward = pull(self.arm)?;
        self.round += 1;
        Ok(RoundRecord {
            round: self.round,
            model: ActiveModel::Simple,
            arm: self.arm,
            source: ActionSource::Greedy,
            y: None,
            z: None,
            in_w: false,
            forced: false,
            gap_est: None,
            alpha: None,
            alpha_terms: None,
            reward,
        })
    }
}

/// One line of an emitted trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub round: usize,
    pub model: ActiveModel,
    pub arm: usize,
    pub source: ActionSource,
    pub in_w: bool,
    pub forced: bool,
    pub gap_est: Option<f64>,
    pub alpha: Option<f64>,
    /// Cumulative regret against the best fixed arm.
    pub rs_cum: f64,
    /// Cumulative regret against the best arm for each realized slate.
    pub rc_cum: f64,
}

/// Per-round cumulative regrets of one episode. Switch times and set sizes
/// are read off the rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegretTrace {
    pub rows: Vec<TraceRow>,
}

impl RegretTrace {
    pub fn new(rows: Vec<TraceRow>) -> Self {
        Self { rows }
    }

    /// Rounds whose model differs from the previous round's.
    pub fn advance_times(&self) -> Vec<usize> {
        self.rows
            .windows(2)
            .filter(|w| w[0].model != w[1].model)
            .map(|w| w[1].round)
            .collect()
    }

    /// First model change.
    pub fn switch_time(&self) -> Option<usize> {
        self.rows
            .windows(2)
            .find(|w| w[0].model != w[1].model)
            .map(|w| w[1].round)
    }

    /// `|W(T)|`.
    pub fn exploration_size(&self) -> usize {
        self.rows.iter().filter(|r| r.in_w).count()
    }

    /// `|T(T)|`.
    pub fn forced_count(&self) -> usize {
        self.rows.iter().filter(|r| r.forced).count()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn final_rs(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.rs_cum)
    }

    pub fn final_rc(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.rc_cum)
    }

    /// Cumulative `R^C` after `round` rounds (0 before the first).
    pub fn rc_at(&self, round: usize) -> f64 {
        match round.min(self.rows.len()) {
            0 => 0.0,
            r => self.rows[r - 1].rc_cum,
        }
    }

    pub fn rs_at(&self, round: usize) -> f64 {
        match round.min(self.rows.len()) {
            0 => 0.0,
            r => self.rows[r - 1].rs_cum,
        }
    }
}

/// Runs `policy` for `horizon` rounds with contexts and noise drawn from
/// `seed`'s streams. `observer` sees every record and the policy after it.
pub fn run_policy<P: EpisodePolicy>(
    policy: &mut P,
    instance: &Instance,
    horizon: usize,
    seed: u64,
    mut observer: impl FnMut(&RoundRecord, &P),
) -> Result<RegretTrace> {
    let mut contexts = derive_substream(seed, tags::CONTEXTS);
    let mut noise = derive_substream(seed, tags::NOISE);
    let best_fixed = instance.best_mean();
    let (mut rs, mut rc) = (0.0, 0.0);
    let mut rows = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let slate = instance.draw_slate(&mut contexts);
        let rec = policy.play_round(&slate, &mut |arm| instance.sample_reward(&slate, arm, &mut noise))?;
        let values: Vec<f64> = (0..slate.num_arms())
            .map(|i| instance.conditional_mean(&slate, i))
            .collect();
        let best_here = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        rs += best_fixed - instance.biases()[rec.arm];
        rc += best_here - values[rec.arm];
        rows.push(TraceRow {
            round: rec.round,
            model: rec.model,
            arm: rec.arm,
            source: rec.source,
            in_w: rec.in_w,
            forced: rec.forced,
            gap_est: rec.gap_est,
            alpha: rec.alpha,
            rs_cum: rs,
            rc_cum: rc,
        });
        observer(&rec, policy);
    }
    Ok(RegretTrace { rows })
}

/// Drives the selector described by `cfg` over `cfg.horizon` rounds.
/// Deterministic given `(cfg, instance)`.
pub fn run_episode(cfg: &RunConfig, instance: &Instance) -> Result<RegretTrace> {
    run_episode_observed(cfg, instance, |_, _| {})
}

/// [`run_episode`] with a per-round observer.
pub fn run_episode_observed(
    cfg: &RunConfig,
    instance: &Instance,
    observer: impl FnMut(&RoundRecord, &Selector),
) -> Result<RegretTrace> {
    check_instance(cfg, instance)?;
    let mut selector = Selector::new(cfg)?;
    run_policy(&mut selector, instance, cfg.horizon, cfg.master_seed, observer)
}

pub(crate) fn check_instance(cfg: &RunConfig, instance: &Instance) -> Result<()> {
    if instance.num_arms() != cfg.num_arms {
        return Err(Error::Dimension {
            context: "instance arms",
            expected: cfg.num_arms,
            actual: instance.num_arms(),
        });
    }
    if instance.dim() != cfg.dim {
        return Err(Error::Dimension {
            context: "instance dimension",
            expected: cfg.dim,
            actual: instance.dim(),
        });
    }
    Ok(())
}
