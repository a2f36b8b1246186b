use serde::{Deserialize, Serialize};

use super::sweep::SweepSummary;
use crate::config::SelectorKind;
use crate::error::{Error, Result};

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            actual: points.len(),
        });
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::InvalidInput(format!(
            "log-log fit needs positive finite points, got ({x}, {y})"
        )));
    }
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("all x values coincide".into()));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}

/// Which cumulative regret a fit is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegretMetric {
    Simple,
    Complex,
}

impl std::str::FromStr for RegretMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rs" | "simple" => Ok(RegretMetric::Simple),
            "rc" | "complex" => Ok(RegretMetric::Complex),
            _ => Err(Error::InvalidInput(format!("unknown regret metric {s:?} (use rs or rc)"))),
        }
    }
}

/// Regret exponent of one `(selector, instance)` series across horizons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub selector: SelectorKind,
    pub instance: String,
    pub metric: RegretMetric,
    /// `(horizon, mean regret)` pairs in horizon order.
    pub points: Vec<(f64, f64)>,
    pub slope: Option<f64>,
    pub error: Option<String>,
}

/// Fits `mean regret ∝ T^slope` for every `(selector, instance)` pair of a
/// sweep. Series that cannot be fitted carry the reason instead of a slope.
pub fn fit_exponents(summary: &SweepSummary, metric: RegretMetric) -> Vec<ExponentFit> {
    let mut out: Vec<ExponentFit> = Vec::new();
    for agg in &summary.aggregates {
        let value = match metric {
            RegretMetric::Simple => agg.mean_rs,
            RegretMetric::Complex => agg.mean_rc,
        };
        let idx = match out.iter().position(|f| f.selector == agg.selector && f.instance == agg.instance) {
            Some(i) => i,
            None => {
                out.push(ExponentFit {
                    selector: agg.selector,
                    instance: agg.instance.clone(),
                    metric,
                    points: Vec::new(),
                    slope: None,
                    error: None,
                });
                out.len() - 1
            }
        };
        if let Some(v) = value {
            out[idx].points.push((agg.horizon as f64, v));
        }
    }
    for fit in &mut out {
        fit.points.sort_by(|a, b| a.0.total_cmp(&b.0));
        match fit_slope(&fit.points) {
            Ok(s) => fit.slope = Some(s),
            Err(e) => fit.error = Some(e.to_string()),
        }
    }
    out
}
