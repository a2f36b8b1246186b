//! Grid search for the threshold constants `(c1, c2, c3)`.
//!
//! Each null episode is run once with the test disabled, recording the
//! statistic and the constant-free threshold terms `(a, b, c)` at every
//! round. With testing enabled the trajectory is identical up to the first
//! exceedance, so a seed switches under `(c1, c2, c3)` iff
//! `c1 < max_t (Ê_t/ι − c2·b_t − c3·c_t)/a_t` where `ι` is the inflation
//! factor. One pass per seed therefore prices every grid point.

use serde::{Deserialize, Serialize};

use super::episode::{check_instance, run_policy};
use super::sweep::{parallel_map, InstanceSpec};
use crate::config::{RunConfig, ThresholdConstants};
use crate::error::{Error, Result};
use crate::selector::Selector;

/// Powers of two from `2^lo` to `2^hi` inclusive.
pub fn power_of_two_grid(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| 2f64.powi(e)).collect()
}

/// The default search grid, `2^-12 ..= 2^4`.
pub fn default_grid() -> Vec<f64> {
    power_of_two_grid(-12, 4)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub constants: ThresholdConstants,
    /// Fraction of calibration seeds that switch under `constants`.
    pub false_switch_rate: f64,
    pub seeds: usize,
    /// Largest admissible rate (the config's `δ`).
    pub target: f64,
}

impl CalibrationReport {
    pub fn apply(&self, cfg: &mut RunConfig) {
        cfg.constants = self.constants;
    }
}

/// For each `(c2, c3)` pair, the smallest `c1` that does not switch on one seed.
#[derive(Debug, Clone)]
struct SeedNeeds {
    /// Row-major over `(c2 index, c3 index)`.
    needs: Vec<f64>,
}

fn seed_needs(template: &RunConfig, spec: &InstanceSpec, grid: &[f64], seed: u64) -> Result<SeedNeeds> {
    let cfg = spec.configure(template, template.selector, template.horizon, seed);
    let instance = spec.build(seed)?;
    check_instance(&cfg, &instance)?;
    let mut selector = Selector::new(&cfg)?;
    selector.set_testing(false);
    let inflation = cfg.alpha_inflation;
    let g = grid.len();
    let mut needs = vec![f64::NEG_INFINITY; g * g];
    run_policy(&mut selector, &instance, cfg.horizon, seed, |rec, _| {
        if let (Some(est), Some(terms)) = (rec.gap_est, rec.alpha_terms) {
            let scaled = est / inflation;
            for (i2, c2) in grid.iter().enumerate() {
                let rest = scaled - c2 * terms.unlabeled;
                for (i3, c3) in grid.iter().enumerate() {
                    let need = (rest - c3 * terms.truncation) / terms.labeled;
                    let slot = &mut needs[i2 * g + i3];
                    if need > *slot {
                        *slot = need;
                    }
                }
            }
        }
    })?;
    Ok(SeedNeeds { needs })
}

/// Smallest constants on `grid³` whose false-switch rate over `seeds` null
/// episodes of `spec` is at most `template.failure_prob`. Ties in
/// `c1·c2·c3` go to the smaller `c1`, then `c2`.
pub fn calibrate_constants(
    template: &RunConfig,
    spec: &InstanceSpec,
    seeds: &[u64],
    grid: &[f64],
    workers: usize,
) -> Result<CalibrationReport> {
    if seeds.is_empty() {
        return Err(Error::Calibration("no calibration seeds".into()));
    }
    if grid.is_empty() || grid.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Calibration("grid values must be positive and finite".into()));
    }
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let target = template.failure_prob;
    let per_seed = parallel_map(workers, seeds, |&s| seed_needs(template, spec, &grid, s))?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let n = seeds.len();
    let allowed = (target * n as f64 + 1e-9).floor() as usize;

    let g = grid.len();
    let mut best: Option<(f64, usize, usize, usize, usize)> = None;
    for i2 in 0..g {
        for i3 in 0..g {
            let slot = i2 * g + i3;
            let needs: Vec<f64> = per_seed.iter().map(|s| s.needs[slot]).collect();
            // With c1 at index i1, the seeds that switch are those with need > c1.
            let Some(i1) = (0..g).find(|&i1| needs.iter().filter(|&&v| v > grid[i1]).count() <= allowed) else {
                continue;
            };
            let switches = needs.iter().filter(|&&v| v > grid[i1]).count();
            let size = grid[i1].ln() + grid[i2].ln() + grid[i3].ln();
            let better = match best {
                None => true,
                Some(b) if (size - b.0).abs() <= 1e-12 => (i1, i2, i3) < (b.1, b.2, b.3),
                Some(b) => size < b.0,
            };
            if better {
                best = Some((size, i1, i2, i3, switches));
            }
        }
    }
    let (_, i1, i2, i3, switches) = best.ok_or_else(|| {
        Error::Calibration(format!(
            "no constants in [{}, {}] keep the false-switch rate at or below {target}",
            grid[0],
            grid[g - 1]
        ))
    })?;
    Ok(CalibrationReport {
        constants: ThresholdConstants {
            c1: grid[i1],
            c2: grid[i2],
            c3: grid[i3],
        },
        false_switch_rate: switches as f64 / n as f64,
        seeds: n,
        target,
    })
}
