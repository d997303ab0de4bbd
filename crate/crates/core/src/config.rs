//! Flat `key = value` configuration files shared by every CLI command.
//!
//! ```text
//! # collapse model
//! model = csl
//! lambda_per_s = 1e-16
//! sigma_m = 1e-7
//! m0_kg = 1.67262192369e-27      # optional reference mass
//!
//! # clock stability, one block per power-law segment
//! stability_name = my-clock
//! clock_radius_m = 0.01          # optional
//! segments[0].A = 1e-17
//! segments[0].p = -0.5
//! segments[0].t_min_s = 1
//! segments[0].t_max_s = 1e6
//! ```
//!
//! Blank lines and `#` comments are ignored; keys may appear once.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::params::{standard_params, ModelKind, ModelParams, PhysicalConstants};
use crate::stability::{Segment, StabilityModel};

pub const KEY_MODEL: &str = "model";
pub const KEY_LAMBDA: &str = "lambda_per_s";
pub const KEY_SIGMA: &str = "sigma_m";
pub const KEY_M0: &str = "m0_kg";
pub const KEY_STABILITY_NAME: &str = "stability_name";
pub const KEY_CLOCK_RADIUS: &str = "clock_radius_m";

const SEGMENT_FIELDS: [&str; 4] = ["A", "p", "t_min_s", "t_max_s"];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, (String, usize)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config {
                    line: line_no,
                    message: format!("expected 'key = value', got '{line}'"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            check_key(key).map_err(|message| Error::Config { line: line_no, message })?;
            if value.is_empty() {
                return Err(Error::Config {
                    line: line_no,
                    message: format!("empty value for '{key}'"),
                });
            }
            if entries.insert(key.to_string(), (value.to_string(), line_no)).is_some() {
                return Err(Error::Config {
                    line: line_no,
                    message: format!("duplicate key '{key}'"),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<f64>().map(Some).map_err(|_| Error::Config {
                line: *line,
                message: format!("'{key}' is not a number: '{v}'"),
            }),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn check_key(key: &str) -> std::result::Result<(), String> {
    const PLAIN: [&str; 6] = [KEY_MODEL, KEY_LAMBDA, KEY_SIGMA, KEY_M0, KEY_STABILITY_NAME, KEY_CLOCK_RADIUS];
    if PLAIN.contains(&key) || parse_segment_key(key).is_some() {
        Ok(())
    } else {
        Err(format!("unknown key '{key}'"))
    }
}

fn parse_segment_key(key: &str) -> Option<(usize, &str)> {
    let rest = key.strip_prefix("segments[")?;
    let (index, field) = rest.split_once("].")?;
    let index = index.parse().ok()?;
    SEGMENT_FIELDS.contains(&field).then_some((index, field))
}

/// Model parameters assembled from a config file and command-line flags.
/// Flags win over file values; missing values fall back to the model's
/// reference parameters.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ParamSource {
    pub model: Option<ModelKind>,
    pub lambda: Option<f64>,
    pub sigma: Option<f64>,
    pub m0: Option<f64>,
}

impl ParamSource {
    pub fn from_config(kv: &KeyValues) -> Result<Self> {
        Ok(Self {
            model: kv.get(KEY_MODEL).map(str::parse).transpose()?,
            lambda: kv.get_f64(KEY_LAMBDA)?,
            sigma: kv.get_f64(KEY_SIGMA)?,
            m0: kv.get_f64(KEY_M0)?,
        })
    }

    /// `self` overridden by any value present in `flags`.
    pub fn overridden_by(self, flags: ParamSource) -> Self {
        Self {
            model: flags.model.or(self.model),
            lambda: flags.lambda.or(self.lambda),
            sigma: flags.sigma.or(self.sigma),
            m0: flags.m0.or(self.m0),
        }
    }

    pub fn resolve(&self) -> Result<ModelParams> {
        let kind = self
            .model
            .ok_or_else(|| Error::invalid("no model given (use --model csl|dp or 'model' in the config)"))?;
        let reference = standard_params(kind);
        let constants = match self.m0 {
            Some(m0) => PhysicalConstants::with_reference_mass(m0)?,
            None => PhysicalConstants::default(),
        };
        let sigma = self.sigma.unwrap_or(reference.sigma());
        match kind {
            ModelKind::Csl => {
                let lambda = self.lambda.or(reference.lambda()).expect("CSL reference has lambda");
                ModelParams::csl_with(lambda, sigma, constants)
            }
            ModelKind::Dp => {
                if self.lambda.is_some() {
                    return Err(Error::invalid("the DP model takes no collapse rate"));
                }
                ModelParams::dp_with(sigma, constants)
            }
        }
    }
}

pub fn params_to_config(params: &ModelParams) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{KEY_MODEL} = {}", params.kind());
    if let Some(lambda) = params.lambda() {
        let _ = writeln!(out, "{KEY_LAMBDA} = {lambda:e}");
    }
    let _ = writeln!(out, "{KEY_SIGMA} = {:e}", params.sigma());
    if params.constants().m0 != PhysicalConstants::default().m0 {
        let _ = writeln!(out, "{KEY_M0} = {:e}", params.constants().m0);
    }
    out
}

/// Stability model from `segments[i].*` keys, if any are present.
pub fn stability_from_config(kv: &KeyValues) -> Result<Option<StabilityModel>> {
    let mut fields: BTreeMap<usize, BTreeMap<&str, f64>> = BTreeMap::new();
    for (key, (value, line)) in &kv.entries {
        if let Some((index, field)) = parse_segment_key(key) {
            let v = value.parse::<f64>().map_err(|_| Error::Config {
                line: *line,
                message: format!("'{key}' is not a number: '{value}'"),
            })?;
            fields.entry(index).or_default().insert(field, v);
        }
    }
    if fields.is_empty() {
        return Ok(None);
    }
    let mut segments = Vec::with_capacity(fields.len());
    for (expected, (index, f)) in fields.iter().enumerate() {
        if *index != expected {
            return Err(Error::invalid(format!("segment indices must run 0..n without gaps, missing {expected}")));
        }
        let get = |name: &str| {
            f.get(name)
                .copied()
                .ok_or_else(|| Error::invalid(format!("segments[{index}].{name} is missing")))
        };
        segments.push(Segment {
            amplitude: get("A")?,
            exponent: get("p")?,
            t_min: get("t_min_s")?,
            t_max: get("t_max_s")?,
        });
    }
    let name = kv.get(KEY_STABILITY_NAME).unwrap_or("custom");
    let model = StabilityModel::new(name, segments)?;
    match kv.get_f64(KEY_CLOCK_RADIUS)? {
        Some(r) => Ok(Some(model.with_clock_radius(r)?)),
        None => Ok(Some(model)),
    }
}

pub fn stability_to_config(model: &StabilityModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{KEY_STABILITY_NAME} = {}", model.name);
    if let Some(r) = model.clock_radius {
        let _ = writeln!(out, "{KEY_CLOCK_RADIUS} = {r:e}");
    }
    for (i, s) in model.segments.iter().enumerate() {
        let _ = writeln!(out, "segments[{i}].A = {:e}", s.amplitude);
        let _ = writeln!(out, "segments[{i}].p = {:e}", s.exponent);
        let _ = writeln!(out, "segments[{i}].t_min_s = {:e}", s.t_min);
        let _ = writeln!(out, "segments[{i}].t_max_s = {:e}", s.t_max);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_model_block() {
        let kv = KeyValues::parse("# comment\nmodel = csl\nlambda_per_s = 1e-17 # inline\n\nsigma_m=2e-7\n").unwrap();
        let p = ParamSource::from_config(&kv).unwrap().resolve().unwrap();
        assert_eq!(p, ModelParams::csl(1e-17, 2e-7).unwrap());
    }

    #[test]
    fn flags_override_file() {
        let kv = KeyValues::parse("model = csl\nlambda_per_s = 1e-17\n").unwrap();
        let file = ParamSource::from_config(&kv).unwrap();
        let flags = ParamSource {
            lambda: Some(1e-18),
            ..Default::default()
        };
        let p = file.overridden_by(flags).resolve().unwrap();
        assert_eq!(p.lambda(), Some(1e-18));
        assert_eq!(p.sigma(), 1e-7);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(matches!(KeyValues::parse("model csl"), Err(Error::Config { line: 1, .. })));
        assert!(matches!(KeyValues::parse("model = csl\nmodel = dp"), Err(Error::Config { line: 2, .. })));
        assert!(matches!(KeyValues::parse("colour = red"), Err(Error::Config { .. })));
        assert!(matches!(KeyValues::parse("segments[0].q = 1"), Err(Error::Config { .. })));
        assert!(matches!(KeyValues::parse("sigma_m ="), Err(Error::Config { .. })));
        let kv = KeyValues::parse("model = dp\nsigma_m = abc").unwrap();
        assert!(ParamSource::from_config(&kv).is_err());
        let kv = KeyValues::parse("model = dp\nlambda_per_s = 1e-16").unwrap();
        assert!(ParamSource::from_config(&kv).unwrap().resolve().is_err());
        assert!(ParamSource::default().resolve().is_err());
    }

    #[test]
    fn params_round_trip() {
        for p in [
            ModelParams::csl(3.3e-17, 1.5e-7).unwrap(),
            ModelParams::dp(4.94e-10).unwrap(),
            ModelParams::dp_with(1e-9, PhysicalConstants::with_reference_mass(crate::params::NEUTRON_MASS).unwrap()).unwrap(),
        ] {
            let text = params_to_config(&p);
            let back = ParamSource::from_config(&KeyValues::parse(&text).unwrap()).unwrap().resolve().unwrap();
            assert_eq!(back, p);
        }
    }

    #[test]
    fn stability_round_trip() {
        for m in [StabilityModel::optical_lattice_with_floor(), StabilityModel::millisecond_pulsar()] {
            let text = stability_to_config(&m);
            let back = stability_from_config(&KeyValues::parse(&text).unwrap()).unwrap().unwrap();
            assert_eq!(back, m);
        }
        assert_eq!(stability_from_config(&KeyValues::parse("model = dp").unwrap()).unwrap(), None);
    }

    #[test]
    fn stability_segments_must_be_complete() {
        let kv = KeyValues::parse("segments[0].A = 1e-17\nsegments[0].p = -0.5\nsegments[0].t_min_s = 1").unwrap();
        assert!(stability_from_config(&kv).is_err());
        let kv = KeyValues::parse("segments[1].A = 1e-17\nsegments[1].p = -0.5\nsegments[1].t_min_s = 1\nsegments[1].t_max_s = 2").unwrap();
        assert!(stability_from_config(&kv).is_err());
    }
}
