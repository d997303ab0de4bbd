//! Parameter sweeps producing plot-ready tables: τ against R/σ and clock
//! time uncertainty against elapsed time with experimentally allowed bands.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::params::{
    standard_params, ModelKind, ModelParams, PhysicalConstants, CSL_LAMBDA_BOUNDS, DP_SIGMA_MIN, SECONDS_PER_YEAR,
};
use crate::tau::{delta_t, tau_for_clock, tau_max, tau_quadrature, ClockGeometry};

/// Default lower edge of the DP band, in σ (m). Not fixed by any
/// experiment; reported in output metadata.
pub const DEFAULT_DP_SIGMA_MAX: f64 = 1e-6;

/// Allowed |log₁₀ Δ_t − expected exponent| for the headline values.
pub const HEADLINE_LOG_TOLERANCE: f64 = 0.7;

/// Scientific notation with 9 significant digits.
pub fn format_sci(x: f64) -> String {
    format!("{x:.8e}")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl LogGrid {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min > 0.0 && max.is_finite() && min < max) {
            return Err(Error::invalid(format!("log grid needs 0 < min < max, got [{min}, {max}]")));
        }
        if count < 2 {
            return Err(Error::invalid(format!("log grid needs at least 2 points, got {count}")));
        }
        Ok(Self { min, max, count })
    }

    pub fn values(&self) -> Vec<f64> {
        let ratio = self.max / self.min;
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| match i {
                0 => self.min,
                i if i == self.count - 1 => self.max,
                i => self.min * ratio.powf(i as f64 / last),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScanVariable {
    RadiusRatio,
    Time,
}

/// Parameter ranges that delimit the Δ_t bands of a time scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandBounds {
    pub csl_lambda_min: f64,
    pub csl_lambda_max: f64,
    pub csl_sigma: f64,
    pub dp_sigma_min: f64,
    pub dp_sigma_max: f64,
}

impl Default for BandBounds {
    fn default() -> Self {
        Self {
            csl_lambda_min: CSL_LAMBDA_BOUNDS.0,
            csl_lambda_max: CSL_LAMBDA_BOUNDS.1,
            csl_sigma: 1e-7,
            dp_sigma_min: DP_SIGMA_MIN,
            dp_sigma_max: DEFAULT_DP_SIGMA_MAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub variable: ScanVariable,
    pub grid: LogGrid,
    pub models: Vec<ModelParams>,
    pub bands: Option<BandBounds>,
    /// Time scans only: evaluate τ for a sphere of this radius instead of
    /// the optimal-clock τ^max.
    pub clock_radius: Option<f64>,
}

impl ScanSpec {
    /// Radius scan of both reference models.
    pub fn radius_default() -> Self {
        Self {
            variable: ScanVariable::RadiusRatio,
            grid: LogGrid::new(0.01, 1000.0, 51).expect("valid grid"),
            models: vec![standard_params(ModelKind::Csl), standard_params(ModelKind::Dp)],
            bands: None,
            clock_radius: None,
        }
    }

    /// Time scan from 1 s to the age of the universe with default bands.
    pub fn time_default() -> Self {
        let constants = PhysicalConstants::default();
        Self {
            variable: ScanVariable::Time,
            grid: LogGrid::new(1.0, constants.age_of_universe, 61).expect("valid grid"),
            models: vec![standard_params(ModelKind::Csl), standard_params(ModelKind::Dp)],
            bands: Some(BandBounds::default()),
            clock_radius: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub x: f64,
    pub values: Vec<Option<f64>>,
    pub bands: Vec<Band>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanTable {
    pub x_name: String,
    pub columns: Vec<String>,
    pub band_names: Vec<String>,
    pub rows: Vec<ScanRow>,
}

fn column_labels(models: &[ModelParams], prefix: &str) -> Vec<String> {
    models
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let duplicate = models.iter().filter(|o| o.kind() == m.kind()).count() > 1;
            if duplicate {
                format!("{prefix}_{}_{i}_s", m.kind())
            } else {
                format!("{prefix}_{}_s", m.kind())
            }
        })
        .collect()
}

/// τ for every model at each ρ = R/σ of the grid.
pub fn scan_tau_vs_radius(spec: &ScanSpec) -> Result<ScanTable> {
    if spec.variable != ScanVariable::RadiusRatio {
        return Err(Error::invalid("radius scan needs variable = RadiusRatio"));
    }
    if spec.models.is_empty() {
        return Err(Error::invalid("scan needs at least one model"));
    }
    let rows = spec
        .grid
        .values()
        .into_par_iter()
        .map(|rho| {
            let mut notes = Vec::new();
            let values = spec
                .models
                .iter()
                .map(|m| {
                    let geom = ClockGeometry::sphere(rho * m.sigma()).and_then(|g| tau_quadrature(m, &g));
                    match geom {
                        Ok(t) => Some(t.tau),
                        Err(e) => {
                            notes.push(format!("{}: {e}", m.kind()));
                            None
                        }
                    }
                })
                .collect();
            ScanRow {
                x: rho,
                values,
                bands: Vec::new(),
                notes,
            }
        })
        .collect();
    Ok(ScanTable {
        x_name: "r_over_sigma".into(),
        columns: column_labels(&spec.models, "tau"),
        band_names: Vec::new(),
        rows,
    })
}

fn clock_tau(model: &ModelParams, radius: Option<f64>) -> Result<f64> {
    match radius {
        None => Ok(tau_max(model)),
        Some(r) => Ok(tau_for_clock(model, &ClockGeometry::sphere(r)?)?.tau),
    }
}

/// Δ_t = √(τ·t) for each model plus the CSL and DP allowed bands.
pub fn scan_uncertainty_vs_time(spec: &ScanSpec) -> Result<ScanTable> {
    if spec.variable != ScanVariable::Time {
        return Err(Error::invalid("time scan needs variable = Time"));
    }
    let bounds = spec
        .bands
        .ok_or_else(|| Error::invalid("time scan needs band bounds"))?;
    if !(bounds.csl_lambda_min < bounds.csl_lambda_max) || !(bounds.dp_sigma_min < bounds.dp_sigma_max) {
        return Err(Error::invalid("band bounds must satisfy min < max"));
    }
    let constants = spec
        .models
        .first()
        .map(|m| *m.constants())
        .unwrap_or_default();
    let csl = |lambda| ModelParams::csl_with(lambda, bounds.csl_sigma, constants);
    let dp = |sigma| ModelParams::dp_with(sigma, constants);
    let r = spec.clock_radius;
    let csl_low = clock_tau(&csl(bounds.csl_lambda_min)?, r)?;
    let csl_high = clock_tau(&csl(bounds.csl_lambda_max)?, r)?;
    let dp_low = clock_tau(&dp(bounds.dp_sigma_max)?, r)?;
    let dp_high = clock_tau(&dp(bounds.dp_sigma_min)?, r)?;
    let model_taus = spec
        .models
        .iter()
        .map(|m| clock_tau(m, r))
        .collect::<Result<Vec<_>>>()?;

    let rows = spec
        .grid
        .values()
        .into_iter()
        .map(|t| {
            let dt = |tau: f64| delta_t(tau, t);
            Ok(ScanRow {
                x: t,
                values: model_taus.iter().map(|&tau| dt(tau).map(Some)).collect::<Result<_>>()?,
                bands: vec![
                    Band {
                        low: dt(csl_low)?,
                        high: dt(csl_high)?,
                    },
                    Band {
                        low: dt(dp_low)?,
                        high: dt(dp_high)?,
                    },
                ],
                notes: Vec::new(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ScanTable {
        x_name: "t_s".into(),
        columns: column_labels(&spec.models, "delta_t"),
        band_names: vec!["csl_band".into(), "dp_band".into()],
        rows,
    })
}

pub fn write_csv<W: Write>(mut out: W, table: &ScanTable) -> Result<()> {
    let mut header = vec![table.x_name.clone()];
    header.extend(table.columns.iter().cloned());
    for b in &table.band_names {
        header.push(format!("{b}_low_s"));
        header.push(format!("{b}_high_s"));
    }
    header.push("note".into());
    writeln!(out, "{}", header.join(","))?;
    for row in &table.rows {
        let mut fields = vec![format_sci(row.x)];
        fields.extend(row.values.iter().map(|v| v.map(format_sci).unwrap_or_default()));
        for b in &row.bands {
            fields.push(format_sci(b.low));
            fields.push(format_sci(b.high));
        }
        fields.push(row.notes.join("; ").replace([',', '\n'], " "));
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

/// Provenance block written alongside JSON output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub parameters: Vec<Value>,
    pub constants: PhysicalConstants,
    pub seed: Option<u64>,
    pub notes: Vec<String>,
}

impl Metadata {
    pub fn new(command: impl Into<String>, models: &[ModelParams]) -> Self {
        let constants = models.first().map(|m| *m.constants()).unwrap_or_default();
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            parameters: models.iter().map(params_json).collect(),
            constants,
            seed: None,
            notes: Vec::new(),
        }
    }
}

pub fn params_json(m: &ModelParams) -> Value {
    json!({
        "model": m.kind().name(),
        "lambda_per_s": m.lambda(),
        "sigma_m": m.sigma(),
        "tau_max_s": tau_max(m),
    })
}

pub fn table_json(table: &ScanTable) -> Value {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            obj.insert(table.x_name.clone(), json!(row.x));
            for (name, v) in table.columns.iter().zip(&row.values) {
                obj.insert(name.clone(), json!(v));
            }
            for (name, b) in table.band_names.iter().zip(&row.bands) {
                obj.insert(format!("{name}_low_s"), json!(b.low));
                obj.insert(format!("{name}_high_s"), json!(b.high));
            }
            if !row.notes.is_empty() {
                obj.insert("notes".into(), json!(row.notes));
            }
            Value::Object(obj)
        })
        .collect();
    Value::Array(rows)
}

pub fn write_json<W: Write>(mut out: W, metadata: &Metadata, rows: Value) -> Result<()> {
    let doc = json!({ "metadata": metadata, "rows": rows });
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeadlineEntry {
    pub label: String,
    pub model: ModelKind,
    pub lambda_per_s: Option<f64>,
    pub sigma_m: f64,
    pub tau_max_s: f64,
    pub t_s: f64,
    pub delta_t_s: f64,
    pub log10_delta_t: f64,
    pub expected_exponent: f64,
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeadlineReport {
    pub log_tolerance: f64,
    /// Reference CSL and DP values at one year.
    pub reference: Vec<HeadlineEntry>,
    /// CSL values at one year at both ends of the allowed λ interval.
    pub csl_bound_range: Vec<HeadlineEntry>,
}

impl HeadlineReport {
    pub fn all_within(&self) -> bool {
        self.reference.iter().chain(&self.csl_bound_range).all(|e| e.within_tolerance)
    }
}

fn headline_entry(label: &str, model: ModelParams, expected_exponent: f64) -> HeadlineEntry {
    let t = model.constants().seconds_per_year;
    let tau = tau_max(&model);
    let dt = (tau * t).sqrt();
    let log10 = dt.log10();
    HeadlineEntry {
        label: label.into(),
        model: model.kind(),
        lambda_per_s: model.lambda(),
        sigma_m: model.sigma(),
        tau_max_s: tau,
        t_s: t,
        delta_t_s: dt,
        log10_delta_t: log10,
        expected_exponent,
        within_tolerance: (log10 - expected_exponent).abs() <= HEADLINE_LOG_TOLERANCE,
    }
}

/// One-year optimal-clock uncertainties for the reference models and for
/// the ends of the CSL collapse-rate interval.
pub fn headline_numbers() -> HeadlineReport {
    let (lo, hi) = CSL_LAMBDA_BOUNDS;
    let sigma = standard_params(ModelKind::Csl).sigma();
    debug_assert_eq!(PhysicalConstants::default().seconds_per_year, SECONDS_PER_YEAR);
    HeadlineReport {
        log_tolerance: HEADLINE_LOG_TOLERANCE,
        reference: vec![
            headline_entry("csl_reference", standard_params(ModelKind::Csl), -28.0),
            headline_entry("dp_reference", standard_params(ModelKind::Dp), -31.0),
        ],
        csl_bound_range: vec![
            headline_entry("csl_lambda_min", ModelParams::csl(lo, sigma).expect("valid"), -31.0),
            headline_entry("csl_lambda_max", ModelParams::csl(hi, sigma).expect("valid"), -26.0),
        ],
    }
}

pub fn format_headline(report: &HeadlineReport) -> String {
    let mut s = String::from("label,delta_t_1yr_s,log10,expected_exponent,within_tolerance\n");
    for e in report.reference.iter().chain(&report.csl_bound_range) {
        s.push_str(&format!(
            "{},{},{:.3},{},{}\n",
            e.label,
            format_sci(e.delta_t_s),
            e.log10_delta_t,
            e.expected_exponent,
            e.within_tolerance
        ));
    }
    s
}
