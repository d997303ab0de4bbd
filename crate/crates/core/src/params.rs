//! Physical constants, collapse-model parameter sets and the conversions
//! between their equivalent parametrizations.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054571817e-34;
/// Newtonian gravitational constant (m³·kg⁻¹·s⁻²).
pub const G: f64 = 6.67430e-11;
/// Speed of light (m/s).
pub const C: f64 = 299_792_458.0;
/// Proton mass (kg), the default reference mass m₀.
pub const PROTON_MASS: f64 = 1.672_621_923_69e-27;
/// Neutron mass (kg).
pub const NEUTRON_MASS: f64 = 1.674_927_498_04e-27;
/// Unified atomic mass unit (kg).
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Julian year (s).
pub const SECONDS_PER_YEAR: f64 = 3.155_76e7;
/// Age of the universe (s), used as the far end of time scans.
pub const AGE_OF_UNIVERSE: f64 = 4.35e17;

/// Open CSL interval for the collapse rate λ (s⁻¹), both ends excluded.
pub const CSL_LAMBDA_BOUNDS: (f64, f64) = (1e-20, 1e-11);
/// Lower bound on the DP smearing length (m), inclusive.
pub const DP_SIGMA_MIN: f64 = 4.94e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub g: f64,
    pub c: f64,
    /// Reference mass m₀ of the CSL kernel.
    pub m0: f64,
    pub seconds_per_year: f64,
    pub age_of_universe: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            hbar: HBAR,
            g: G,
            c: C,
            m0: PROTON_MASS,
            seconds_per_year: SECONDS_PER_YEAR,
            age_of_universe: AGE_OF_UNIVERSE,
        }
    }
}

impl PhysicalConstants {
    /// Default constants with a different reference mass (e.g. [`NEUTRON_MASS`]).
    pub fn with_reference_mass(m0: f64) -> Result<Self> {
        let constants = Self {
            m0,
            ..Self::default()
        };
        constants.validate()?;
        Ok(constants)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("hbar", self.hbar),
            ("G", self.g),
            ("c", self.c),
            ("m0", self.m0),
            ("seconds_per_year", self.seconds_per_year),
            ("age_of_universe", self.age_of_universe),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(format!("constant {name} must be positive, got {value}")));
            }
        }
        Ok(())
    }

    pub fn c4(&self) -> f64 {
        self.c.powi(4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Csl,
    Dp,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Csl => "csl",
            ModelKind::Dp => "dp",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csl" => Ok(ModelKind::Csl),
            "dp" => Ok(ModelKind::Dp),
            other => Err(Error::invalid(format!("unknown model '{other}' (expected csl or dp)"))),
        }
    }
}

/// Collapse-model parameters.
///
/// CSL carries a collapse rate λ (s⁻¹) and a smearing length σ (m); DP is
/// fixed by G and has σ as its only free parameter. Both carry the
/// constants they are evaluated with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelParams {
    Csl {
        lambda: f64,
        sigma: f64,
        constants: PhysicalConstants,
    },
    Dp {
        sigma: f64,
        constants: PhysicalConstants,
    },
}

impl ModelParams {
    pub fn csl(lambda: f64, sigma: f64) -> Result<Self> {
        Self::csl_with(lambda, sigma, PhysicalConstants::default())
    }

    pub fn csl_with(lambda: f64, sigma: f64, constants: PhysicalConstants) -> Result<Self> {
        check_positive("lambda", lambda)?;
        check_positive("sigma", sigma)?;
        constants.validate()?;
        Ok(ModelParams::Csl {
            lambda,
            sigma,
            constants,
        })
    }

    pub fn dp(sigma: f64) -> Result<Self> {
        Self::dp_with(sigma, PhysicalConstants::default())
    }

    pub fn dp_with(sigma: f64, constants: PhysicalConstants) -> Result<Self> {
        check_positive("sigma", sigma)?;
        constants.validate()?;
        Ok(ModelParams::Dp { sigma, constants })
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Csl { .. } => ModelKind::Csl,
            ModelParams::Dp { .. } => ModelKind::Dp,
        }
    }

    pub fn sigma(&self) -> f64 {
        match *self {
            ModelParams::Csl { sigma, .. } | ModelParams::Dp { sigma, .. } => sigma,
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match *self {
            ModelParams::Csl { lambda, .. } => Some(lambda),
            ModelParams::Dp { .. } => None,
        }
    }

    pub fn constants(&self) -> &PhysicalConstants {
        match self {
            ModelParams::Csl { constants, .. } | ModelParams::Dp { constants, .. } => constants,
        }
    }

    /// CSL collapse strength γ = λ·(4πσ²)^{3/2} (m³·s⁻¹).
    pub fn gamma(&self) -> Option<f64> {
        match *self {
            ModelParams::Csl { lambda, sigma, .. } => Some(gamma_unchecked(lambda, sigma)),
            ModelParams::Dp { .. } => None,
        }
    }

    /// α = σ⁻² (m⁻²).
    pub fn alpha(&self) -> f64 {
        self.sigma().powi(-2)
    }

    /// Same model with a different smearing length.
    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        match *self {
            ModelParams::Csl {
                lambda, constants, ..
            } => Self::csl_with(lambda, sigma, constants),
            ModelParams::Dp { constants, .. } => Self::dp_with(sigma, constants),
        }
    }

    /// Same model with a different collapse rate; DP has none and is rejected.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        match *self {
            ModelParams::Csl {
                sigma, constants, ..
            } => Self::csl_with(lambda, sigma, constants),
            ModelParams::Dp { .. } => Err(Error::invalid("the DP model has no collapse rate")),
        }
    }

    /// Fails on any parameter outside the experimentally allowed region
    /// when `strict`, otherwise returns the diagnostics.
    pub fn validate_bounds(&self, strict: bool) -> Result<BoundsReport> {
        let report = check_bounds(self);
        if strict && !report.within_experimental_region {
            return Err(Error::invalid(report.messages.join("; ")));
        }
        Ok(report)
    }
}

/// Reference parameter sets: GRW values for CSL, σ = 1 nm for DP.
pub fn standard_params(kind: ModelKind) -> ModelParams {
    let constants = PhysicalConstants::default();
    match kind {
        ModelKind::Csl => ModelParams::Csl {
            lambda: 1e-16,
            sigma: 1e-7,
            constants,
        },
        ModelKind::Dp => ModelParams::Dp {
            sigma: 1e-9,
            constants,
        },
    }
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {value}")))
    }
}

fn smearing_volume(sigma: f64) -> f64 {
    (4.0 * PI * sigma * sigma).powf(1.5)
}

fn gamma_unchecked(lambda: f64, sigma: f64) -> f64 {
    lambda * smearing_volume(sigma)
}

/// γ = λ·(4πσ²)^{3/2}.
pub fn gamma_from_lambda(lambda: f64, sigma: f64) -> Result<f64> {
    check_positive("lambda", lambda)?;
    check_positive("sigma", sigma)?;
    Ok(gamma_unchecked(lambda, sigma))
}

/// λ = γ/(4πσ²)^{3/2}.
pub fn lambda_from_gamma(gamma: f64, sigma: f64) -> Result<f64> {
    check_positive("gamma", gamma)?;
    check_positive("sigma", sigma)?;
    Ok(gamma / smearing_volume(sigma))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub within_experimental_region: bool,
    pub messages: Vec<String>,
}

/// Compares parameters with the experimental constraints: the CSL rate must
/// lie strictly inside (10⁻²⁰, 10⁻¹¹) s⁻¹ and the DP smearing length must
/// be at least 4.94×10⁻¹⁰ m.
pub fn check_bounds(params: &ModelParams) -> BoundsReport {
    let mut messages = Vec::new();
    match *params {
        ModelParams::Csl { lambda, .. } => {
            let (lo, hi) = CSL_LAMBDA_BOUNDS;
            if lambda <= lo {
                messages.push(format!("CSL lambda {lambda:e} s^-1 is at or below the lower bound {lo:e} s^-1"));
            } else if lambda >= hi {
                messages.push(format!("CSL lambda {lambda:e} s^-1 is at or above the excluded bound {hi:e} s^-1"));
            }
        }
        ModelParams::Dp { sigma, .. } => {
            if sigma < DP_SIGMA_MIN {
                messages.push(format!("DP sigma {sigma:e} m is below the lower bound {DP_SIGMA_MIN:e} m"));
            }
        }
    }
    BoundsReport {
        within_experimental_region: messages.is_empty(),
        messages,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn reference_parameter_sets() {
        let csl = standard_params(ModelKind::Csl);
        assert_eq!(csl.lambda(), Some(1e-16));
        assert_eq!(csl.sigma(), 1e-7);
        let dp = standard_params(ModelKind::Dp);
        assert_eq!(dp.sigma(), 1e-9);
        assert_eq!(dp.lambda(), None);

        let expected = 1e-16 * (4.0 * PI * 1e-14_f64).powf(1.5);
        assert!(rel(csl.gamma().unwrap(), expected) < 1e-15);
        assert!(rel(csl.alpha(), 1e14) < 1e-15);
    }

    #[test]
    fn gamma_matches_high_precision_value() {
        // 1e-16·(4π·1e-14)^{3/2} evaluated at 40 digits.
        let gamma = gamma_from_lambda(1e-16, 1e-7).unwrap();
        assert!(rel(gamma, 4.454_662_397_465_366e-36) < 1e-13, "{gamma:e}");
    }

    #[test]
    fn non_positive_inputs_rejected() {
        assert!(gamma_from_lambda(0.0, 1e-7).is_err());
        assert!(gamma_from_lambda(1e-16, -1e-7).is_err());
        assert!(lambda_from_gamma(f64::NAN, 1e-7).is_err());
        assert!(ModelParams::csl(1e-16, 0.0).is_err());
        assert!(ModelParams::dp(-1e-9).is_err());
        assert!(PhysicalConstants::with_reference_mass(0.0).is_err());
    }

    #[test]
    fn bounds_edges() {
        assert!(check_bounds(&standard_params(ModelKind::Csl)).within_experimental_region);
        assert!(check_bounds(&standard_params(ModelKind::Dp)).within_experimental_region);
        assert!(check_bounds(&ModelParams::dp(4.94e-10).unwrap()).within_experimental_region);
        let below = check_bounds(&ModelParams::dp(1e-10).unwrap());
        assert!(!below.within_experimental_region);
        assert_eq!(below.messages.len(), 1);
        // CSL edges are excluded.
        assert!(!check_bounds(&ModelParams::csl(1e-20, 1e-7).unwrap()).within_experimental_region);
        assert!(!check_bounds(&ModelParams::csl(1e-11, 1e-7).unwrap()).within_experimental_region);
        assert!(check_bounds(&ModelParams::csl(2e-20, 1e-7).unwrap()).within_experimental_region);
    }

    #[test]
    fn strict_validation_upgrades_warnings() {
        let p = ModelParams::csl(1e-5, 1e-7).unwrap();
        assert!(!p.validate_bounds(false).unwrap().within_experimental_region);
        assert!(p.validate_bounds(true).is_err());
    }

    #[test]
    fn default_constants_are_fixed() {
        let c = PhysicalConstants::default();
        assert_eq!(c, PhysicalConstants::default());
        assert_eq!(c.hbar, 1.054571817e-34);
        assert_eq!(c.g, 6.67430e-11);
        assert_eq!(c.c, 299792458.0);
        assert_eq!(c.m0, 1.67262192369e-27);
        assert_eq!(c.seconds_per_year, 3.15576e7);
        c.validate().unwrap();
    }

    #[test]
    fn model_kind_parsing() {
        assert_eq!("CSL".parse::<ModelKind>().unwrap(), ModelKind::Csl);
        assert_eq!(" dp ".parse::<ModelKind>().unwrap(), ModelKind::Dp);
        assert!("grw".parse::<ModelKind>().is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn gamma_round_trip(log_lambda in -25.0f64..-5.0, log_sigma in -12.0f64..-5.0) {
                let lambda = 10f64.powf(log_lambda);
                let sigma = 10f64.powf(log_sigma);
                let gamma = gamma_from_lambda(lambda, sigma).unwrap();
                let back = lambda_from_gamma(gamma, sigma).unwrap();
                prop_assert!(((back - lambda) / lambda).abs() < 1e-12);
            }
        }
    }
}
