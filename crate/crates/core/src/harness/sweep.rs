use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::episode::{run_episode, RegretTrace};
use super::output::build_id;
use crate::config::{RunConfig, SelectorKind};
use crate::environment::{generate_instance, Instance, InstanceKind, InstanceParams, SpectrumSpec};
use crate::error::{Error, Result};
use crate::rng::{derive_substream, tags};

/// A named recipe for generating instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub name: String,
    pub kind: InstanceKind,
    #[serde(default = "identity_spectrum")]
    pub spectrum: SpectrumSpec,
    #[serde(default)]
    pub params: InstanceParams,
}

fn identity_spectrum() -> SpectrumSpec {
    SpectrumSpec::Identity
}

impl InstanceSpec {
    pub fn new(name: impl Into<String>, kind: InstanceKind, spectrum: SpectrumSpec, params: InstanceParams) -> Self {
        Self {
            name: name.into(),
            kind,
            spectrum,
            params,
        }
    }

    /// The instance for `seed`, drawn from its `instance` stream.
    pub fn build(&self, seed: u64) -> Result<Instance> {
        generate_instance(
            self.kind,
            &self.spectrum,
            &self.params,
            &mut derive_substream(seed, tags::INSTANCE),
        )
    }

    /// `base` adapted to this instance's shape and the given cell coordinates.
    pub fn configure(&self, base: &RunConfig, selector: SelectorKind, horizon: usize, seed: u64) -> RunConfig {
        let mut cfg = base.clone();
        cfg.selector = selector;
        cfg.horizon = horizon;
        cfg.master_seed = seed;
        cfg.num_arms = self.params.num_arms;
        cfg.dim = self.params.dim;
        if selector == SelectorKind::Nested && self.params.nested_dims.is_some() {
            cfg.nested_dims = self.params.nested_dims.clone();
        }
        cfg
    }
}

/// The cartesian product `selectors × instances × horizons × seeds` over a base config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub config: RunConfig,
    pub selectors: Vec<SelectorKind>,
    pub instances: Vec<InstanceSpec>,
    pub horizons: Vec<usize>,
    pub seeds: Vec<u64>,
}

impl SweepGrid {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn cell_count(&self) -> usize {
        self.selectors.len() * self.instances.len() * self.horizons.len() * self.seeds.len()
    }

    /// Cells in the canonical order: selector, instance, horizon, seed.
    pub fn cells(&self) -> Vec<CellKey> {
        let mut out = Vec::with_capacity(self.cell_count());
        for &selector in &self.selectors {
            for (instance, _) in self.instances.iter().enumerate() {
                for &horizon in &self.horizons {
                    for &seed in &self.seeds {
                        out.push(CellKey {
                            selector,
                            instance,
                            horizon,
                            seed,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellKey {
    pub selector: SelectorKind,
    /// Index into [`SweepGrid::instances`].
    pub instance: usize,
    pub horizon: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMetrics {
    pub final_rs: f64,
    pub final_rc: f64,
    pub switch_time: Option<usize>,
    pub advance_times: Vec<usize>,
    pub exploration_size: usize,
    pub forced_count: usize,
}

impl CellMetrics {
    pub fn from_trace(trace: &RegretTrace) -> Self {
        Self {
            final_rs: trace.final_rs(),
            final_rc: trace.final_rc(),
            switch_time: trace.switch_time(),
            advance_times: trace.advance_times(),
            exploration_size: trace.exploration_size(),
            forced_count: trace.forced_count(),
        }
    }
}

/// Outcome of a single episode together with the config that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub build: String,
    pub config: RunConfig,
    pub metrics: CellMetrics,
}

impl EpisodeSummary {
    pub fn new(config: &RunConfig, trace: &RegretTrace) -> Self {
        Self {
            build: build_id(),
            config: config.clone(),
            metrics: CellMetrics::from_trace(trace),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub selector: SelectorKind,
    pub instance: String,
    pub horizon: usize,
    pub seed: u64,
    pub metrics: Option<CellMetrics>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub selector: SelectorKind,
    pub instance: String,
    pub horizon: usize,
    pub cells: usize,
    pub failures: usize,
    /// Absent when every cell failed.
    pub mean_rs: Option<f64>,
    pub mean_rc: Option<f64>,
    /// 10%, 50% and 90% quantiles.
    pub rs_quantiles: Option<[f64; 3]>,
    pub rc_quantiles: Option<[f64; 3]>,
    pub switch_rate: f64,
    pub mean_exploration: f64,
    pub mean_forced: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub build: String,
    pub grid: SweepGrid,
    pub cells: Vec<CellResult>,
    pub aggregates: Vec<Aggregate>,
}

impl SweepSummary {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Maps `f` over `items` on a pool of `workers` threads, keeping input order.
pub fn parallel_map<T, R, F>(workers: usize, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("worker pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

fn run_cell(grid: &SweepGrid, key: &CellKey) -> Result<CellMetrics> {
    let spec = &grid.instances[key.instance];
    let cfg = spec.configure(&grid.config, key.selector, key.horizon, key.seed);
    let instance = spec.build(key.seed)?;
    Ok(CellMetrics::from_trace(&run_episode(&cfg, &instance)?))
}

/// Linear-interpolation quantile of an already sorted slice.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn aggregate(grid: &SweepGrid, cells: &[CellResult]) -> Vec<Aggregate> {
    let mut out = Vec::new();
    for chunk in cells.chunks(grid.seeds.len().max(1)) {
        let first = &chunk[0];
        let ok: Vec<&CellMetrics> = chunk.iter().filter_map(|c| c.metrics.as_ref()).collect();
        let sorted = |f: fn(&CellMetrics) -> f64| {
            let mut v: Vec<f64> = ok.iter().map(|m| f(m)).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let rs = sorted(|m| m.final_rs);
        let rc = sorted(|m| m.final_rc);
        let qs = |v: &[f64]| (!v.is_empty()).then(|| [quantile(v, 0.1), quantile(v, 0.5), quantile(v, 0.9)]);
        let n = ok.len().max(1) as f64;
        out.push(Aggregate {
            selector: first.selector,
            instance: first.instance.clone(),
            horizon: first.horizon,
            cells: chunk.len(),
            failures: chunk.len() - ok.len(),
            mean_rs: mean(&rs),
            mean_rc: mean(&rc),
            rs_quantiles: qs(&rs),
            rc_quantiles: qs(&rc),
            switch_rate: ok.iter().filter(|m| m.switch_time.is_some()).count() as f64 / n,
            mean_exploration: ok.iter().map(|m| m.exploration_size as f64).sum::<f64>() / n,
            mean_forced: ok.iter().map(|m| m.forced_count as f64).sum::<f64>() / n,
        });
    }
    out
}

/// Runs every cell of `grid` on `workers` threads. Failed cells are recorded
/// with their error and do not stop the sweep. The summary does not depend on
/// `workers`.
pub fn run_sweep(grid: &SweepGrid, workers: usize) -> Result<SweepSummary> {
    if grid.cell_count() == 0 {
        return Err(Error::InvalidInput("sweep grid is empty".into()));
    }
    let keys = grid.cells();
    let results = parallel_map(workers, &keys, |key| run_cell(grid, key))?;
    let cells: Vec<CellResult> = keys
        .iter()
        .zip(results)
        .map(|(key, res)| {
            let (metrics, error) = match res {
                Ok(m) => (Some(m), None),
                Err(e) => (None, Some(e.to_string())),
            };
            CellResult {
                selector: key.selector,
                instance: grid.instances[key.instance].name.clone(),
                horizon: key.horizon,
                seed: key.seed,
                metrics,
                error,
            }
        })
        .collect();
    let aggregates = aggregate(grid, &cells);
    Ok(SweepSummary {
        build: build_id(),
        grid: grid.clone(),
        cells,
        aggregates,
    })
}
