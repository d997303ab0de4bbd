//! Command-line front end.
//!
//! Physical inputs are SI with unit-suffixed aliases (`--sigma`/`--sigma-m`,
//! `--lambda`/`--lambda-per-s`, ...). `--config` reads the shared key-value
//! format; flags override file values. Exit status: 0 success, 1 invalid
//! input, 2 I/O failure, 3 numerical failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::config::{stability_from_config, KeyValues, ParamSource};
use crate::error::{Error, Result};
use crate::kernels::{kernel_shape, kernel_smeared};
use crate::noise_sim::{decoherence_mc, decoherence_rate, sample_drift_ensemble, write_drift_csv, DecoherenceSetup};
use crate::params::{standard_params, ModelKind, ModelParams, PhysicalConstants};
use crate::rng::DEFAULT_SEED;
use crate::scan::{
    format_headline, format_sci, headline_numbers, params_json, scan_tau_vs_radius, scan_uncertainty_vs_time,
    table_json, write_csv, write_json, BandBounds, LogGrid, Metadata, ScanSpec, DEFAULT_DP_SIGMA_MAX,
};
use crate::stability::{clock_delta_t, collapse_tau_for_clock, crossover_time, StabilityModel};
use crate::tau::{
    tau_asymptotic_large, tau_asymptotic_small, tau_max, tau_monte_carlo, tau_quadrature, ClockGeometry, TauResult,
    LARGE_CLOCK_MIN_RATIO, SMALL_CLOCK_MAX_RATIO,
};

#[derive(Debug, Parser)]
#[command(
    name = "chrono-collapse",
    version,
    about = "Clock-time uncertainty from CSL and Diosi-Penrose collapse noise",
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the smeared correlation D(r) and its shape f(r/sigma).
    Kernel(KernelArgs),
    /// Fluctuation strength tau for a spherical clock.
    Tau(TauArgs),
    /// Simulate clock-time drift trajectories.
    Drift(DriftArgs),
    /// Decoherence rate of two point masses and its Monte Carlo check.
    Decohere(DecohereArgs),
    /// Compare collapse drift with a clock stability model.
    Stability(StabilityArgs),
    /// Parameter sweeps: tau vs R/sigma or Delta_t vs t.
    Scan(ScanArgs),
    /// One-year time uncertainty for the reference parameters.
    Headline(HeadlineArgs),
    /// Print the physical constants in use.
    Constants(OutputArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// Key-value config file (keys: model, lambda_per_s, sigma_m, m0_kg, segments[i].*).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Collapse model.
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    /// CSL collapse rate lambda in s^-1 [default: 1e-16].
    #[arg(long, allow_hyphen_values = true, visible_alias = "lambda-per-s")]
    pub lambda: Option<f64>,
    /// Smearing length sigma in m [default: 1e-7 for CSL, 1e-9 for DP].
    #[arg(long, allow_hyphen_values = true, visible_alias = "sigma-m")]
    pub sigma: Option<f64>,
    /// Reference mass m0 in kg [default: proton mass 1.67262192369e-27].
    #[arg(long, allow_hyphen_values = true, visible_alias = "m0-kg")]
    pub m0: Option<f64>,
    /// Treat parameters outside the experimentally allowed region as errors.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Csl,
    Dp,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Csl => ModelKind::Csl,
            ModelArg::Dp => ModelKind::Dp,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format [default: json for *.json paths, csv otherwise].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct SeedArgs {
    /// Random seed.
    #[arg(long, env = crate::rng::SEED_ENV, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct KernelArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Smallest separation in m [default: 0.01 sigma].
    #[arg(long, allow_hyphen_values = true, visible_alias = "r-min-m")]
    pub r_min: Option<f64>,
    /// Largest separation in m [default: 100 sigma].
    #[arg(long, allow_hyphen_values = true, visible_alias = "r-max-m")]
    pub r_max: Option<f64>,
    /// Number of log-spaced separations.
    #[arg(long, default_value_t = 41)]
    pub count: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TauMethodArg {
    Quadrature,
    MonteCarlo,
    Asymptotic,
    All,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct TauArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Clock radius R in m.
    #[arg(long, allow_hyphen_values = true, visible_alias = "radius-m")]
    pub radius: f64,
    /// Evaluation method.
    #[arg(long, value_enum, default_value_t = TauMethodArg::Quadrature)]
    pub method: TauMethodArg,
    /// Monte Carlo sample pairs.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct DriftArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Fluctuation strength tau in s; overrides the model.
    #[arg(long, allow_hyphen_values = true, visible_alias = "tau-s")]
    pub tau: Option<f64>,
    /// Clock radius in m [default: optimal clock, tau = tau_max].
    #[arg(long, allow_hyphen_values = true, visible_alias = "radius-m")]
    pub radius: Option<f64>,
    /// Final time in s [default: one Julian year].
    #[arg(long, allow_hyphen_values = true, visible_alias = "t-max-s")]
    pub t_max: Option<f64>,
    /// Number of equal time steps.
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// Number of independent trajectories.
    #[arg(long, default_value_t = 10)]
    pub realizations: usize,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct DecohereArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Mass of each point mass in kg.
    #[arg(long, allow_hyphen_values = true, visible_alias = "mass-kg")]
    pub mass: f64,
    /// Separation between the two positions in m.
    #[arg(long, allow_hyphen_values = true, visible_alias = "separation-m")]
    pub separation: f64,
    /// Evolution time in s [default: 1/Gamma].
    #[arg(long, allow_hyphen_values = true, visible_alias = "time-s")]
    pub time: Option<f64>,
    /// Monte Carlo realizations.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Stability preset: optical-lattice, optical-lattice-floor, millisecond-pulsar.
    /// Ignored when the config file defines segments.
    #[arg(long, default_value = "optical-lattice")]
    pub preset: String,
    /// Single averaging time in s [default: log grid over the model range].
    #[arg(long, allow_hyphen_values = true, visible_alias = "t-s")]
    pub t: Option<f64>,
    /// Grid points when --t is absent.
    #[arg(long, default_value_t = 13)]
    pub count: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanKind {
    /// tau against R/sigma.
    Radius,
    /// Delta_t against elapsed time with allowed bands.
    Time,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ScanArgs {
    #[arg(value_enum)]
    pub kind: ScanKind,
    /// Restrict the scan to one model (with optional parameters) instead of both references.
    #[command(flatten)]
    pub model: ModelArgs,
    /// Grid minimum (R/sigma or s) [default: 0.01 or 1 s].
    #[arg(long, allow_hyphen_values = true)]
    pub min: Option<f64>,
    /// Grid maximum (R/sigma or s) [default: 1000 or the age of the universe].
    #[arg(long, allow_hyphen_values = true)]
    pub max: Option<f64>,
    /// Grid points [default: 51 or 61].
    #[arg(long)]
    pub count: Option<usize>,
    /// Lower DP band edge, largest sigma in m (time scans).
    #[arg(long, allow_hyphen_values = true, visible_alias = "dp-sigma-max-m", default_value_t = DEFAULT_DP_SIGMA_MAX)]
    pub dp_sigma_max: f64,
    /// Finite clock radius in m for time scans [default: optimal clock].
    #[arg(long, allow_hyphen_values = true, visible_alias = "clock-radius-m")]
    pub clock_radius: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct HeadlineArgs {
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parses `args` and runs the command; returns the process exit status.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return 1;
            }
            let _ = write!(stdout, "{}", e.render());
            return 0;
        }
    };
    match run(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Kernel(a) => run_kernel(a, stdout, stderr),
        Command::Tau(a) => run_tau(a, stdout, stderr),
        Command::Drift(a) => run_drift(a, stdout, stderr),
        Command::Decohere(a) => run_decohere(a, stdout, stderr),
        Command::Stability(a) => run_stability(a, stdout, stderr),
        Command::Scan(a) => run_scan(a, stdout, stderr),
        Command::Headline(a) => run_headline(a, stdout),
        Command::Constants(a) => run_constants(a, stdout),
    }
}

fn load_config(args: &ModelArgs) -> Result<KeyValues> {
    match &args.config {
        Some(path) => KeyValues::load(path),
        None => Ok(KeyValues::default()),
    }
}

fn flag_source(args: &ModelArgs) -> ParamSource {
    ParamSource {
        model: args.model.map(Into::into),
        lambda: args.lambda,
        sigma: args.sigma,
        m0: args.m0,
    }
}

fn resolve_model(args: &ModelArgs, stderr: &mut dyn Write) -> Result<ModelParams> {
    let kv = load_config(args)?;
    let params = ParamSource::from_config(&kv)?.overridden_by(flag_source(args)).resolve()?;
    check_region(&params, args.strict, stderr)?;
    Ok(params)
}

/// Like [`resolve_model`] but `None` when neither flags nor config name a model.
fn optional_model(args: &ModelArgs, stderr: &mut dyn Write) -> Result<Option<ModelParams>> {
    let kv = load_config(args)?;
    let source = ParamSource::from_config(&kv)?.overridden_by(flag_source(args));
    if source.model.is_none() {
        if source.lambda.is_some() || source.sigma.is_some() {
            return Err(Error::invalid("model parameters given without --model"));
        }
        return Ok(None);
    }
    let params = source.resolve()?;
    check_region(&params, args.strict, stderr)?;
    Ok(Some(params))
}

fn check_region(params: &ModelParams, strict: bool, stderr: &mut dyn Write) -> Result<()> {
    let report = params.validate_bounds(strict)?;
    for m in &report.messages {
        let _ = writeln!(stderr, "warning: {m}");
    }
    Ok(())
}

fn resolve_format(output: &OutputArgs) -> Format {
    output.format.unwrap_or_else(|| match &output.out {
        Some(p) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) => Format::Json,
        _ => Format::Csv,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    Ok(BufWriter::new(file))
}

/// Sends CSV or JSON to `--out` or to standard output.
fn emit(
    output: &OutputArgs,
    stdout: &mut dyn Write,
    csv: impl FnOnce(&mut dyn Write) -> Result<()>,
    json: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    let format = resolve_format(output);
    let run = |w: &mut dyn Write| match format {
        Format::Csv => csv(w),
        Format::Json => json(w),
    };
    match &output.out {
        Some(path) => {
            let mut file = create(path)?;
            run(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => run(stdout),
    }
}

fn run_kernel(a: KernelArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let model = resolve_model(&a.model, stderr)?;
    let sigma = model.sigma();
    let grid = LogGrid::new(a.r_min.unwrap_or(0.01 * sigma), a.r_max.unwrap_or(100.0 * sigma), a.count)?;
    let rows = grid
        .values()
        .into_iter()
        .map(|r| Ok((r, kernel_smeared(&model, r)?, kernel_shape(model.kind(), r / sigma)?)))
        .collect::<Result<Vec<_>>>()?;
    let meta = Metadata::new("kernel", &[model]);
    emit(
        &a.output,
        stdout,
        |w| {
            writeln!(w, "r_m,kernel_si,shape")?;
            for (r, d, f) in &rows {
                writeln!(w, "{},{},{}", format_sci(*r), format_sci(*d), format_sci(*f))?;
            }
            Ok(())
        },
        |w| {
            let rows = rows
                .iter()
                .map(|(r, d, f)| json!({"r_m": r, "kernel_si": d, "shape": f}))
                .collect();
            write_json(w, &meta, Value::Array(rows))
        },
    )
}

fn tau_row(name: &str, r: &TauResult, tau_max: f64) -> Value {
    json!({
        "method": name,
        "tau_s": r.tau,
        "stderr_s": r.stderr,
        "n_samples": r.n_samples,
        "tau_over_tau_max": r.tau / tau_max,
    })
}

fn run_tau(a: TauArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let model = resolve_model(&a.model, stderr)?;
    let geom = ClockGeometry::sphere(a.radius)?;
    let rho = geom.ratio(&model);
    let mut results: Vec<(&str, TauResult)> = Vec::new();
    let wants = |m: TauMethodArg| a.method == m || a.method == TauMethodArg::All;
    if wants(TauMethodArg::Quadrature) {
        results.push(("quadrature", tau_quadrature(&model, &geom)?));
    }
    if wants(TauMethodArg::MonteCarlo) {
        results.push(("monte_carlo", tau_monte_carlo(&model, &geom, a.samples, a.seed.seed)?));
    }
    if wants(TauMethodArg::Asymptotic) {
        if rho <= SMALL_CLOCK_MAX_RATIO {
            results.push(("asymptotic_small", tau_asymptotic_small(&model, &geom)?));
        } else if rho >= LARGE_CLOCK_MIN_RATIO || a.method == TauMethodArg::Asymptotic {
            results.push(("asymptotic_large", tau_asymptotic_large(&model, &geom)?));
        }
    }
    let tmax = tau_max(&model);
    let mut meta = Metadata::new("tau", &[model]);
    meta.seed = wants(TauMethodArg::MonteCarlo).then_some(a.seed.seed);
    meta.notes.push(format!("clock radius {} m, R/sigma = {}", format_sci(a.radius), format_sci(rho)));
    emit(
        &a.output,
        stdout,
        |w| {
            writeln!(w, "method,radius_m,r_over_sigma,tau_s,stderr_s,n_samples,tau_max_s,tau_over_tau_max")?;
            for (name, r) in &results {
                writeln!(
                    w,
                    "{name},{},{},{},{},{},{},{}",
                    format_sci(a.radius),
                    format_sci(rho),
                    format_sci(r.tau),
                    format_sci(r.stderr),
                    r.n_samples.map(|n| n.to_string()).unwrap_or_default(),
                    format_sci(tmax),
                    format_sci(r.tau / tmax)
                )?;
            }
            Ok(())
        },
        |w| {
            let rows = results.iter().map(|(n, r)| tau_row(n, r, tmax)).collect();
            write_json(w, &meta, Value::Array(rows))
        },
    )
}

fn run_drift(a: DriftArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let model = optional_model(&a.model, stderr)?;
    let tau = match (a.tau, model) {
        (Some(t), _) => t,
        (None, Some(m)) => match a.radius {
            Some(r) => tau_quadrature(&m, &ClockGeometry::sphere(r)?)?.tau,
            None => tau_max(&m),
        },
        (None, None) => return Err(Error::invalid("drift needs --tau or a model")),
    };
    let t_max = a.t_max.unwrap_or(PhysicalConstants::default().seconds_per_year);
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::invalid(format!("t-max must be positive, got {t_max}")));
    }
    if a.steps == 0 || a.realizations == 0 {
        return Err(Error::invalid("steps and realizations must be at least 1"));
    }
    let grid: Vec<f64> = (0..=a.steps).map(|i| t_max * i as f64 / a.steps as f64).collect();
    let ens = sample_drift_ensemble(tau, &grid, a.realizations, a.seed.seed)?;
    let mut meta = Metadata::new("drift", model.as_slice());
    meta.seed = Some(a.seed.seed);
    meta.notes.push(format!("tau = {} s", format_sci(tau)));
    emit(
        &a.output,
        stdout,
        |w| write_drift_csv(w, &ens),
        |w| {
            let rows = ens
                .iter()
                .flat_map(|t| {
                    t.t_grid
                        .iter()
                        .zip(&t.delta_t_values)
                        .map(move |(ts, d)| json!({"t_s": ts, "delta_t_s": d, "realization_id": t.realization}))
                })
                .collect();
            write_json(w, &meta, Value::Array(rows))
        },
    )
}

fn run_decohere(a: DecohereArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let model = resolve_model(&a.model, stderr)?;
    let setup = DecoherenceSetup::new(a.mass, a.separation, model)?;
    let gamma = decoherence_rate(&setup);
    let t = match a.time {
        Some(t) => t,
        None if gamma > 0.0 => 1.0 / gamma,
        None => return Err(Error::invalid("Gamma is zero; pass --time explicitly")),
    };
    let est = decoherence_mc(&setup, t, a.samples, a.seed.seed)?;
    let expected = (-gamma * t).exp();
    let mut meta = Metadata::new("decohere", &[model]);
    meta.seed = Some(a.seed.seed);
    emit(
        &a.output,
        stdout,
        |w| {
            writeln!(w, "mass_kg,separation_m,time_s,gamma_per_s,expected_modulus,mc_modulus,mc_stderr,mc_re,mc_im,n_samples")?;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                format_sci(a.mass),
                format_sci(a.separation),
                format_sci(t),
                format_sci(gamma),
                format_sci(expected),
                format_sci(est.modulus),
                format_sci(est.stderr),
                format_sci(est.re),
                format_sci(est.im),
                est.n_samples
            )?;
            Ok(())
        },
        |w| {
            let row = json!({
                "mass_kg": a.mass, "separation_m": a.separation, "time_s": t,
                "gamma_per_s": gamma, "expected_modulus": expected, "estimate": est,
            });
            write_json(w, &meta, Value::Array(vec![row]))
        },
    )
}

fn run_stability(a: StabilityArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let kv = load_config(&a.model)?;
    let clock = match stability_from_config(&kv)? {
        Some(m) => m,
        None => StabilityModel::preset(&a.preset)?,
    };
    let model = if a.model.model.is_none() && kv.get(crate::config::KEY_MODEL).is_none() {
        standard_params(ModelKind::Csl)
    } else {
        resolve_model(&a.model, stderr)?
    };
    let tau = collapse_tau_for_clock(&model, &clock)?;
    let times = match a.t {
        Some(t) => vec![t],
        None => {
            let (lo, hi) = clock.t_range();
            LogGrid::new(lo, hi, a.count)?.values()
        }
    };
    let rows = times
        .iter()
        .map(|&t| {
            let clock_dt = clock_delta_t(&clock, t)?;
            let collapse_dt = (tau * t).sqrt();
            Ok((t, clock.sigma_y(t)?, clock_dt, collapse_dt, collapse_dt / clock_dt))
        })
        .collect::<Result<Vec<_>>>()?;
    let crossover = crossover_time(tau, &clock)?;
    let mut meta = Metadata::new("stability", &[model]);
    meta.notes.push(format!("clock model: {}", clock.name));
    meta.notes.push(format!("collapse tau = {} s", format_sci(tau)));
    meta.notes.push(match crossover {
        Some(t) => format!("crossover at t = {} s", format_sci(t)),
        None => "no crossover inside the clock model range".into(),
    });
    emit(
        &a.output,
        stdout,
        |w| {
            writeln!(w, "t_s,sigma_y,clock_delta_t_s,collapse_delta_t_s,collapse_to_clock_ratio")?;
            for (t, sy, c, d, r) in &rows {
                writeln!(w, "{},{},{},{},{}", format_sci(*t), format_sci(*sy), format_sci(*c), format_sci(*d), format_sci(*r))?;
            }
            Ok(())
        },
        |w| {
            let rows = rows
                .iter()
                .map(|(t, sy, c, d, r)| {
                    json!({"t_s": t, "sigma_y": sy, "clock_delta_t_s": c, "collapse_delta_t_s": d, "collapse_to_clock_ratio": r})
                })
                .collect();
            let mut meta = meta.clone();
            meta.parameters.push(json!({ "stability": clock, "crossover_s": crossover }));
            write_json(w, &meta, Value::Array(rows))
        },
    )
}

fn run_scan(a: ScanArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let models = match optional_model(&a.model, stderr)? {
        Some(m) => vec![m],
        None => vec![standard_params(ModelKind::Csl), standard_params(ModelKind::Dp)],
    };
    let mut spec = match a.kind {
        ScanKind::Radius => ScanSpec::radius_default(),
        ScanKind::Time => ScanSpec::time_default(),
    };
    spec.models = models;
    spec.grid = LogGrid::new(
        a.min.unwrap_or(spec.grid.min),
        a.max.unwrap_or(spec.grid.max),
        a.count.unwrap_or(spec.grid.count),
    )?;
    let mut meta = Metadata::new(
        match a.kind {
            ScanKind::Radius => "scan radius",
            ScanKind::Time => "scan time",
        },
        &spec.models,
    );
    let table = match a.kind {
        ScanKind::Radius => scan_tau_vs_radius(&spec)?,
        ScanKind::Time => {
            let bounds = BandBounds {
                dp_sigma_max: a.dp_sigma_max,
                ..BandBounds::default()
            };
            spec.bands = Some(bounds);
            spec.clock_radius = a.clock_radius;
            meta.parameters.push(json!({ "band_bounds": bounds }));
            meta.notes.push(format!(
                "dp_band lower edge uses sigma_max = {} m, a display choice rather than an experimental bound",
                format_sci(bounds.dp_sigma_max)
            ));
            meta.notes.push(match a.clock_radius {
                Some(r) => format!("finite clock radius {} m", format_sci(r)),
                None => "optimal clocks (tau = tau_max)".into(),
            });
            scan_uncertainty_vs_time(&spec)?
        }
    };
    emit(&a.output, stdout, |w| write_csv(w, &table), |w| write_json(w, &meta, table_json(&table)))
}

fn run_headline(a: HeadlineArgs, stdout: &mut dyn Write) -> Result<()> {
    let report = headline_numbers();
    let models = [standard_params(ModelKind::Csl), standard_params(ModelKind::Dp)];
    let meta = Metadata::new("headline", &models);
    emit(
        &a.output,
        stdout,
        |w| Ok(w.write_all(format_headline(&report).as_bytes())?),
        |w| write_json(w, &meta, serde_json::to_value(&report)?),
    )
}

fn run_constants(a: OutputArgs, stdout: &mut dyn Write) -> Result<()> {
    let c = PhysicalConstants::default();
    let models = [standard_params(ModelKind::Csl), standard_params(ModelKind::Dp)];
    let meta = Metadata::new("constants", &models);
    let entries = [
        ("hbar", "J s", c.hbar),
        ("G", "m^3 kg^-1 s^-2", c.g),
        ("c", "m s^-1", c.c),
        ("m0", "kg", c.m0),
        ("seconds_per_year", "s", c.seconds_per_year),
        ("age_of_universe", "s", c.age_of_universe),
    ];
    emit(
        &a,
        stdout,
        |w| {
            writeln!(w, "name,unit,value")?;
            for (n, u, v) in entries {
                writeln!(w, "{n},{u},{}", format_sci(v))?;
            }
            Ok(())
        },
        |w| {
            let mut rows: Vec<Value> = entries
                .iter()
                .map(|(n, u, v)| json!({"name": n, "unit": u, "value": v}))
                .collect();
            rows.extend(models.iter().map(params_json));
            write_json(w, &meta, Value::Array(rows))
        },
    )
}
