use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use modsel::environment::{Instance, InstanceKind, InstanceParams, SpectrumSpec};
use modsel::harness::{
    calibrate_constants, fit_exponents, format_float, load_json, power_of_two_grid, run_episode, run_sweep,
    save_json, save_trace_csv, to_json_string, write_trace_csv, EpisodeSummary, InstanceSpec, RegretMetric, SweepGrid,
    SweepSummary,
};
use modsel::{Error, Result, RunConfig, SelectorKind};

/// Model selection for contextual bandits: simulate episodes, run sweeps,
/// calibrate test constants and fit regret exponents.
#[derive(Parser)]
#[command(name = "modsel", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and write its per-round trace as CSV.
    Simulate(SimulateArgs),
    /// Run every cell of a grid file and write a JSON summary.
    Sweep(SweepArgs),
    /// Search powers of two for the smallest threshold constants that keep
    /// the false-switch rate on null instances at or below the failure probability.
    Calibrate(CalibrateArgs),
    /// Fit log-log regret exponents across the horizons of a sweep summary.
    Fit(FitArgs),
}

/// One flag per `RunConfig` field. Flags override the config file.
#[derive(Args, Default)]
struct ConfigArgs {
    /// TOML run config used as the base for the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    num_arms: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    failure_prob: Option<f64>,
    /// Eigenvalue threshold γ (default (d/T)^{1/3}).
    #[arg(long)]
    threshold: Option<f64>,
    /// Forced-exploration exponent κ.
    #[arg(long)]
    exploration_exponent: Option<f64>,
    /// modcb, modcb_u, modcb_a or nested.
    #[arg(long)]
    selector: Option<SelectorKind>,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
    #[arg(long)]
    c3: Option<f64>,
    #[arg(long)]
    master_seed: Option<u64>,
    /// Comma-separated ascending model dimensions, ending at the context dimension.
    #[arg(long, value_delimiter = ',')]
    nested_dims: Option<Vec<usize>>,
    #[arg(long)]
    mu_norm_sq: Option<f64>,
    #[arg(long)]
    variance_gamma_exponent: Option<f64>,
    #[arg(long)]
    alpha_inflation: Option<f64>,
    #[arg(long)]
    tau_min_gating: Option<bool>,
    #[arg(long)]
    ridge: Option<f64>,
    #[arg(long)]
    param_bound: Option<f64>,
    #[arg(long)]
    noise_scale: Option<f64>,
    #[arg(long)]
    max_dim: Option<usize>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field.clone() { cfg.$field = v; })*
            };
        }
        set!(
            horizon,
            num_arms,
            dim,
            failure_prob,
            selector,
            master_seed,
            mu_norm_sq,
            variance_gamma_exponent,
            alpha_inflation,
            tau_min_gating,
            ridge,
            param_bound,
            noise_scale,
            max_dim
        );
        if self.threshold.is_some() {
            cfg.threshold = self.threshold;
        }
        if self.exploration_exponent.is_some() {
            cfg.exploration_exponent = self.exploration_exponent;
        }
        if self.nested_dims.is_some() {
            cfg.nested_dims = self.nested_dims.clone();
        }
        if let Some(c) = self.c1 {
            cfg.constants.c1 = c;
        }
        if let Some(c) = self.c2 {
            cfg.constants.c2 = c;
        }
        if let Some(c) = self.c3 {
            cfg.constants.c3 = c;
        }
        Ok(cfg)
    }
}

/// How the instance is generated. Arm count and dimension come from the run config.
#[derive(Args)]
struct InstanceArgs {
    /// simple, linear or nested:<order>.
    #[arg(long, default_value = "simple")]
    kind: String,
    /// identity, scaled:<s>, rank:<r> or diag:<v1>,<v2>,...
    #[arg(long, default_value = "identity")]
    spectrum: String,
    /// Top gap Δ between arm biases.
    #[arg(long, default_value_t = 0.5)]
    gap: f64,
    #[arg(long, default_value_t = 1.0)]
    theta_norm: f64,
    #[arg(long)]
    tail_norm: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    noise_std: f64,
}

fn parse_kind(text: &str) -> Result<InstanceKind> {
    match text.split_once(':') {
        Some(("nested", order)) => order
            .parse()
            .map(|order| InstanceKind::NestedCb { order })
            .map_err(|_| Error::InvalidInput(format!("bad nested order {order:?}"))),
        None if text == "simple" => Ok(InstanceKind::SimpleMab),
        None if text == "linear" => Ok(InstanceKind::LinearCb),
        _ => Err(Error::InvalidInput(format!(
            "unknown instance kind {text:?} (simple, linear or nested:<order>)"
        ))),
    }
}

fn parse_spectrum(text: &str) -> Result<SpectrumSpec> {
    let bad = || Error::InvalidInput(format!("bad spectrum {text:?}"));
    match text.split_once(':') {
        None if text == "identity" => Ok(SpectrumSpec::Identity),
        Some(("scaled", s)) => s.parse().map(SpectrumSpec::Scaled).map_err(|_| bad()),
        Some(("rank", r)) => r.parse().map(|rank| SpectrumSpec::RankDeficient { rank }).map_err(|_| bad()),
        Some(("diag", list)) => list
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()
            .map(SpectrumSpec::Diagonal),
        _ => Err(bad()),
    }
}

impl InstanceArgs {
    fn spec(&self, cfg: &RunConfig) -> Result<InstanceSpec> {
        Ok(InstanceSpec::new(
            self.kind.clone(),
            parse_kind(&self.kind)?,
            parse_spectrum(&self.spectrum)?,
            InstanceParams {
                num_arms: cfg.num_arms,
                dim: cfg.dim,
                gap: self.gap,
                theta_norm: self.theta_norm,
                tail_norm: self.tail_norm,
                noise_std: self.noise_std,
                nested_dims: cfg.nested_dims.clone(),
            },
        ))
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    instance: InstanceArgs,
    /// Load the instance from JSON instead of generating it.
    #[arg(long)]
    instance_file: Option<PathBuf>,
    /// Write the instance used to this JSON file.
    #[arg(long)]
    save_instance: Option<PathBuf>,
    /// Trace CSV destination (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Episode summary JSON destination.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML grid: a base config, selectors, instances, horizons and seeds.
    #[arg(long)]
    grid: PathBuf,
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
    /// Summary JSON destination (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    instance: InstanceArgs,
    /// First calibration seed.
    #[arg(long, default_value_t = 1000)]
    first_seed: u64,
    #[arg(long, default_value_t = 200)]
    seeds: u64,
    /// Smallest grid exponent e in 2^e.
    #[arg(long, default_value_t = -12, allow_hyphen_values = true)]
    grid_min_exp: i32,
    #[arg(long, default_value_t = 4, allow_hyphen_values = true)]
    grid_max_exp: i32,
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
    /// Report JSON destination (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the run config with the calibrated constants to this TOML file.
    #[arg(long)]
    write_config: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Sweep summary JSON.
    #[arg(long)]
    summary: PathBuf,
    /// rs (best fixed arm) or rc (per-round optimum).
    #[arg(long, default_value = "rc")]
    metric: RegretMetric,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn stdout_write(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io("<stdout>", e))
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let instance = match &args.instance_file {
        Some(path) => Instance::load(path)?,
        None => args.instance.spec(&cfg)?.build(cfg.master_seed)?,
    };
    if let Some(path) = &args.save_instance {
        instance.save(path)?;
    }
    let trace = run_episode(&cfg, &instance)?;
    match &args.out {
        Some(path) => save_trace_csv(&trace, path)?,
        None => write_trace_csv(&trace, std::io::stdout().lock())?,
    }
    if let Some(path) = &args.summary {
        save_json(&EpisodeSummary::new(&cfg, &trace), path)?;
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let grid = SweepGrid::load(&args.grid)?;
    let summary = run_sweep(&grid, args.workers)?;
    let failed = summary.cells.iter().filter(|c| c.error.is_some()).count();
    if failed > 0 {
        eprintln!("{failed} of {} cells failed; see the summary for details", summary.cells.len());
    }
    match &args.out {
        Some(path) => save_json(&summary, path),
        None => stdout_write(&(summary.to_json()? + "\n")),
    }
}

fn calibrate(args: CalibrateArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let spec = args.instance.spec(&cfg)?;
    let seeds: Vec<u64> = (args.first_seed..args.first_seed.saturating_add(args.seeds)).collect();
    let grid = power_of_two_grid(args.grid_min_exp, args.grid_max_exp);
    let report = calibrate_constants(&cfg, &spec, &seeds, &grid, args.workers)?;
    if let Some(path) = &args.write_config {
        let mut tuned = cfg.clone();
        report.apply(&mut tuned);
        tuned.save(path)?;
    }
    match &args.out {
        Some(path) => save_json(&report, path),
        None => stdout_write(&(to_json_string(&report)? + "\n")),
    }
}

fn fit(args: FitArgs) -> Result<()> {
    let summary: SweepSummary = load_json(&args.summary)?;
    let mut text = String::from("selector,instance,points,slope,error\n");
    for f in fit_exponents(&summary, args.metric) {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            f.selector.as_str(),
            f.instance,
            f.points.len(),
            f.slope.map(format_float).unwrap_or_default(),
            f.error.unwrap_or_default().replace(',', ";")
        ));
    }
    stdout_write(&text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::Calibrate(a) => calibrate(a),
        Command::Fit(a) => fit(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("modsel: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
