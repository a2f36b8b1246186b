//! Problem instances and the stochastic reward model
//! `g = μ_arm + ⟨x_arm, θ*⟩ + w` with Gaussian contexts and noise.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::specgap::SymmetricSpectrum;

const EIG_TOL: f64 = 1e-9;

/// Ground-truth structure of a generated instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    /// `θ* = 0`: rewards depend on the arm only.
    SimpleMab,
    /// `θ*` drawn uniformly on the sphere of the requested norm.
    LinearCb,
    /// `θ*` supported on the first `d_order` coordinates (1-based order).
    NestedCb { order: usize },
}

/// Eigenvalue layout of the per-arm context covariances. All covariances are
/// diagonal in the coordinate basis, which keeps nested instances
/// block-diagonal for every split point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumSpec {
    Identity,
    Scaled(f64),
    Diagonal(Vec<f64>),
    /// Unit variance on the first `rank` coordinates, zero elsewhere.
    RankDeficient { rank: usize },
    /// One spec per arm.
    ArmHeterogeneous(Vec<SpectrumSpec>),
}

impl SpectrumSpec {
    fn arm_diagonals(&self, num_arms: usize, dim: usize) -> Result<Vec<Vec<f64>>> {
        if let SpectrumSpec::ArmHeterogeneous(specs) = self {
            if specs.len() != num_arms {
                return Err(Error::Instance(format!(
                    "{} per-arm spectra for {num_arms} arms",
                    specs.len()
                )));
            }
            return specs
                .iter()
                .map(|s| match s {
                    SpectrumSpec::ArmHeterogeneous(_) => Err(Error::Instance(
                        "per-arm spectra cannot nest".into(),
                    )),
                    s => s.diagonal(dim),
                })
                .collect();
        }
        let diag = self.diagonal(dim)?;
        Ok(vec![diag; num_arms])
    }

    fn diagonal(&self, dim: usize) -> Result<Vec<f64>> {
        let diag = match self {
            SpectrumSpec::Identity => vec![1.0; dim],
            SpectrumSpec::Scaled(s) => vec![*s; dim],
            SpectrumSpec::Diagonal(v) => {
                if v.len() != dim {
                    return Err(Error::Dimension {
                        context: "diagonal spectrum",
                        expected: dim,
                        actual: v.len(),
                    });
                }
                v.clone()
            }
            SpectrumSpec::RankDeficient { rank } => {
                if *rank > dim {
                    return Err(Error::Instance(format!("rank {rank} exceeds dimension {dim}")));
                }
                (0..dim).map(|j| if j < *rank { 1.0 } else { 0.0 }).collect()
            }
            SpectrumSpec::ArmHeterogeneous(_) => unreachable!("handled by arm_diagonals"),
        };
        if let Some(bad) = diag.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(Error::Instance(format!("spectrum eigenvalue {bad} outside [0,1]")));
        }
        Ok(diag)
    }
}

/// Size and signal parameters for [`generate_instance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InstanceParams {
    pub num_arms: usize,
    pub dim: usize,
    /// Top gap `Δ`; biases are `Δ·(K−i)/(K−1)` for `i = 1..K`.
    pub gap: f64,
    /// `‖θ*‖₂` for linear and nested instances.
    pub theta_norm: f64,
    /// Norm of the `θ*` block that only the true order sees (nested, order ≥ 2).
    /// The rest of `theta_norm` goes to the lower-order coordinates.
    pub tail_norm: Option<f64>,
    pub noise_std: f64,
    pub nested_dims: Option<Vec<usize>>,
}

impl Default for InstanceParams {
    fn default() -> Self {
        Self {
            num_arms: 2,
            dim: 2,
            gap: 0.5,
            theta_norm: 1.0,
            tail_norm: None,
            noise_std: 1.0,
            nested_dims: None,
        }
    }
}

#[derive(Debug, Clone)]
enum Factor {
    Diagonal(DVector<f64>),
    Dense(DMatrix<f64>),
}

/// A fully specified stochastic problem.
#[derive(Debug, Clone)]
pub struct Instance {
    biases: Vec<f64>,
    theta: DVector<f64>,
    covariances: Vec<DMatrix<f64>>,
    noise_std: f64,
    factors: Vec<Factor>,
}

impl Instance {
    pub fn new(
        biases: Vec<f64>,
        theta: DVector<f64>,
        covariances: Vec<DMatrix<f64>>,
        noise_std: f64,
    ) -> Result<Self> {
        let k = biases.len();
        let d = theta.len();
        if k == 0 || d == 0 {
            return Err(Error::Instance("need at least one arm and one dimension".into()));
        }
        if covariances.len() != k {
            return Err(Error::Dimension {
                context: "per-arm covariances",
                expected: k,
                actual: covariances.len(),
            });
        }
        if let Some(b) = biases.iter().find(|b| b.is_nan() || b.abs() > 1.0) {
            return Err(Error::Instance(format!("bias {b} outside [-1,1]")));
        }
        let norm = theta.norm();
        if norm.is_nan() || norm > 1.0 + EIG_TOL {
            return Err(Error::Instance(format!("‖θ*‖ = {norm} exceeds 1")));
        }
        if !(0.0..=1.0).contains(&noise_std) {
            return Err(Error::Instance(format!("noise_std {noise_std} outside [0,1]")));
        }
        let mut factors = Vec::with_capacity(k);
        for (i, cov) in covariances.iter().enumerate() {
            if cov.nrows() != d || cov.ncols() != d {
                return Err(Error::Dimension {
                    context: "arm covariance",
                    expected: d,
                    actual: cov.nrows().max(cov.ncols()),
                });
            }
            let spectrum = SymmetricSpectrum::new(cov)?;
            let (lo, hi) = (spectrum.min(), spectrum.max());
            if lo < -EIG_TOL || hi > 1.0 + EIG_TOL {
                return Err(Error::Instance(format!(
                    "arm {i} covariance eigenvalues [{lo}, {hi}] outside [0,1]"
                )));
            }
            factors.push(Self::factor(cov, &spectrum));
        }
        Ok(Self {
            biases,
            theta,
            covariances,
            noise_std,
            factors,
        })
    }

    fn factor(cov: &DMatrix<f64>, spectrum: &SymmetricSpectrum) -> Factor {
        let d = cov.nrows();
        let is_diagonal = (0..d).all(|i| (0..d).all(|j| i == j || cov[(i, j)] == 0.0));
        if is_diagonal {
            Factor::Diagonal(DVector::from_iterator(
                d,
                (0..d).map(|i| cov[(i, i)].max(0.0).sqrt()),
            ))
        } else {
            let scales = spectrum.eigenvalues().map(|l| l.max(0.0).sqrt());
            Factor::Dense(spectrum.eigenvectors() * DMatrix::from_diagonal(&scales))
        }
    }

    pub fn num_arms(&self) -> usize {
        self.biases.len()
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn theta(&self) -> &DVector<f64> {
        &self.theta
    }

    pub fn covariances(&self) -> &[DMatrix<f64>] {
        &self.covariances
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }

    /// `(1/K) Σᵢ Σᵢ`, the covariance of a uniformly chosen arm's context.
    pub fn averaged_covariance(&self) -> DMatrix<f64> {
        let d = self.dim();
        let sum = self
            .covariances
            .iter()
            .fold(DMatrix::zeros(d, d), |acc, c| acc + c);
        sum / self.num_arms() as f64
    }

    pub fn best_mean(&self) -> f64 {
        self.biases.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Expected reward of `arm` given the revealed slate.
    pub fn conditional_mean(&self, slate: &ContextSlate, arm: usize) -> f64 {
        self.biases[arm] + slate.row(arm).dot(&self.theta)
    }

    /// Draws one context per arm. Consumes exactly `K·d` normals.
    pub fn draw_slate(&self, rng: &mut RngStream) -> ContextSlate {
        let d = self.dim();
        let rows = self
            .factors
            .iter()
            .map(|f| {
                let z = DVector::from_iterator(d, (0..d).map(|_| rng.standard_normal()));
                match f {
                    Factor::Diagonal(s) => z.component_mul(s),
                    Factor::Dense(l) => l * z,
                }
            })
            .collect();
        ContextSlate { rows }
    }

    /// Reward for pulling `arm`. Consumes exactly one normal even when `σ = 0`.
    pub fn sample_reward(&self, slate: &ContextSlate, arm: usize, rng: &mut RngStream) -> Result<f64> {
        if arm >= self.num_arms() {
            return Err(Error::ArmOutOfRange {
                arm,
                num_arms: self.num_arms(),
            });
        }
        let w = rng.standard_normal();
        Ok(self.conditional_mean(slate, arm) + self.noise_std * w)
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            biases: self.biases.clone(),
            theta: self.theta.iter().copied().collect(),
            noise_std: self.noise_std,
            covariances: self
                .covariances
                .iter()
                .map(|c| c.row_iter().map(|r| r.iter().copied().collect()).collect())
                .collect(),
        }
    }

    pub fn from_file(file: InstanceFile) -> Result<Self> {
        let d = file.theta.len();
        let covariances = file
            .covariances
            .into_iter()
            .map(|rows| {
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    return Err(Error::Dimension {
                        context: "serialized covariance",
                        expected: d,
                        actual: rows.len(),
                    });
                }
                Ok(DMatrix::from_row_iterator(d, d, rows.into_iter().flatten()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(file.biases, DVector::from_vec(file.theta), covariances, file.noise_std)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.to_file()).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }
}

/// On-disk instance layout: covariances are row-major `d×d` arrays, one per arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub biases: Vec<f64>,
    pub theta: Vec<f64>,
    pub noise_std: f64,
    pub covariances: Vec<Vec<Vec<f64>>>,
}

/// The `K` contexts revealed at one round; row `i` belongs to arm `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextSlate {
    rows: Vec<DVector<f64>>,
}

impl ContextSlate {
    pub fn new(rows: Vec<DVector<f64>>) -> Result<Self> {
        let d = rows.first().map(|r| r.len()).ok_or(Error::TooFewSamples {
            needed: 1,
            actual: 0,
        })?;
        if let Some(r) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::Dimension {
                context: "slate row",
                expected: d,
                actual: r.len(),
            });
        }
        Ok(Self { rows })
    }

    pub fn num_arms(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, arm: usize) -> &DVector<f64> {
        &self.rows[arm]
    }

    pub fn rows(&self) -> &[DVector<f64>] {
        &self.rows
    }

    /// The slate restricted to its leading `dim` coordinates.
    pub fn truncated(&self, dim: usize) -> ContextSlate {
        if dim >= self.dim() {
            return self.clone();
        }
        ContextSlate {
            rows: self.rows.iter().map(|r| r.rows(0, dim).into_owned()).collect(),
        }
    }
}

/// Builds an instance of the requested kind. `rng` is only used to draw the
/// direction of `θ*`.
pub fn generate_instance(
    kind: InstanceKind,
    spectrum: &SpectrumSpec,
    params: &InstanceParams,
    rng: &mut RngStream,
) -> Result<Instance> {
    let (k, d) = (params.num_arms, params.dim);
    if k == 0 || d == 0 {
        return Err(Error::Instance("need at least one arm and one dimension".into()));
    }
    if !(0.0..=1.0).contains(&params.gap) {
        return Err(Error::Instance(format!("gap {} outside [0,1]", params.gap)));
    }
    if !(0.0..=1.0).contains(&params.theta_norm) {
        return Err(Error::Instance(format!("theta_norm {} outside [0,1]", params.theta_norm)));
    }
    let biases: Vec<f64> = (0..k)
        .map(|i| {
            if k == 1 {
                params.gap
            } else {
                params.gap * (k - 1 - i) as f64 / (k - 1) as f64
            }
        })
        .collect();
    let covariances = spectrum
        .arm_diagonals(k, d)?
        .into_iter()
        .map(|diag| DMatrix::from_diagonal(&DVector::from_vec(diag)))
        .collect();

    let theta = match kind {
        InstanceKind::SimpleMab => DVector::zeros(d),
        InstanceKind::LinearCb => random_direction(d, rng) * params.theta_norm,
        InstanceKind::NestedCb { order } => {
            let dims = params
                .nested_dims
                .as_ref()
                .ok_or_else(|| Error::Instance("nested instance without nested_dims".into()))?;
            if order == 0 || order > dims.len() {
                return Err(Error::Instance(format!(
                    "model order {order} outside 1..={}",
                    dims.len()
                )));
            }
            if dims.windows(2).any(|w| w[0] >= w[1]) || dims.last() != Some(&d) || dims[0] == 0 {
                return Err(Error::Instance(format!(
                    "nested_dims {dims:?} must increase strictly and end at {d}"
                )));
            }
            nested_theta(dims, order, params, rng)?
        }
    };
    Instance::new(biases, theta, covariances, params.noise_std)
}

fn nested_theta(
    dims: &[usize],
    order: usize,
    params: &InstanceParams,
    rng: &mut RngStream,
) -> Result<DVector<f64>> {
    let d = *dims.last().unwrap();
    let hi = dims[order - 1];
    let lo = if order == 1 { 0 } else { dims[order - 2] };
    let mut theta = DVector::zeros(d);
    let tail_norm = if order == 1 {
        params.theta_norm
    } else {
        params.tail_norm.unwrap_or(params.theta_norm)
    };
    if tail_norm > params.theta_norm {
        return Err(Error::Instance(format!(
            "tail_norm {tail_norm} exceeds theta_norm {}",
            params.theta_norm
        )));
    }
    let head_norm = (params.theta_norm.powi(2) - tail_norm.powi(2)).max(0.0).sqrt();
    let tail = random_direction(hi - lo, rng) * tail_norm;
    theta.rows_mut(lo, hi - lo).copy_from(&tail);
    if lo > 0 {
        let head = random_direction(lo, rng) * head_norm;
        theta.rows_mut(0, lo).copy_from(&head);
    }
    Ok(theta)
}

fn random_direction(d: usize, rng: &mut RngStream) -> DVector<f64> {
    loop {
        let v = DVector::from_iterator(d, (0..d).map(|_| rng.standard_normal()));
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}
