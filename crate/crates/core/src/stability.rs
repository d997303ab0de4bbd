//! Piecewise power-law clock stability envelopes σ_y(t) and their
//! comparison with collapse-induced drift.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{ModelParams, SECONDS_PER_YEAR};
use crate::tau::{tau_for_clock, ClockGeometry};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Relative mismatch tolerated between adjacent segments at a junction.
pub const JUNCTION_TOLERANCE: f64 = 1e-9;

/// σ_y(t) = amplitude·(t/1 s)^exponent on [t_min, t_max].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub amplitude: f64,
    pub exponent: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl Segment {
    pub fn sigma_y(&self, t: f64) -> f64 {
        self.amplitude * t.powf(self.exponent)
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_min && t <= self.t_max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityModel {
    pub name: String,
    pub segments: Vec<Segment>,
    /// Physical clock radius (m) when the collapse side should include
    /// finite-size suppression.
    pub clock_radius: Option<f64>,
}

impl StabilityModel {
    pub fn new(name: impl Into<String>, segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::invalid("stability model needs at least one segment"));
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.amplitude.is_finite() && s.amplitude > 0.0) {
                return Err(Error::invalid(format!("segment {i}: amplitude must be positive, got {}", s.amplitude)));
            }
            if !s.exponent.is_finite() {
                return Err(Error::invalid(format!("segment {i}: exponent must be finite")));
            }
            if !(s.t_min > 0.0 && s.t_max > s.t_min && s.t_max.is_finite()) {
                return Err(Error::invalid(format!(
                    "segment {i}: need 0 < t_min < t_max, got [{}, {}]",
                    s.t_min, s.t_max
                )));
            }
        }
        for (i, w) in segments.windows(2).enumerate() {
            let (a, b) = (&w[0], &w[1]);
            if a.t_max != b.t_min {
                return Err(Error::invalid(format!(
                    "segments {i} and {} are not contiguous: {} vs {}",
                    i + 1,
                    a.t_max,
                    b.t_min
                )));
            }
            let (left, right) = (a.sigma_y(a.t_max), b.sigma_y(b.t_min));
            if ((left - right) / left).abs() > JUNCTION_TOLERANCE {
                return Err(Error::invalid(format!(
                    "sigma_y jumps at t = {} s between segments {i} and {}: {left:e} vs {right:e}",
                    a.t_max,
                    i + 1
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            segments,
            clock_radius: None,
        })
    }

    pub fn with_clock_radius(mut self, radius: f64) -> Result<Self> {
        ClockGeometry::sphere(radius)?;
        self.clock_radius = Some(radius);
        Ok(self)
    }

    /// Strontium/ytterbium optical lattice clock, 10⁻¹⁷/√(t/1 s) from 1 s to
    /// 10⁶ s.
    pub fn optical_lattice() -> Self {
        Self::new(
            "optical-lattice",
            vec![Segment {
                amplitude: 1e-17,
                exponent: -0.5,
                t_min: 1.0,
                t_max: 1e6,
            }],
        )
        .expect("valid preset")
    }

    /// Optical lattice clock whose white-frequency-noise regime hits a
    /// flicker floor of 10⁻¹⁹ at 10⁴ s, flat out to 10⁸ s.
    pub fn optical_lattice_with_floor() -> Self {
        Self::new(
            "optical-lattice-floor",
            vec![
                Segment {
                    amplitude: 1e-17,
                    exponent: -0.5,
                    t_min: 1.0,
                    t_max: 1e4,
                },
                Segment {
                    amplitude: 1e-19,
                    exponent: 0.0,
                    t_min: 1e4,
                    t_max: 1e8,
                },
            ],
        )
        .expect("valid preset")
    }

    /// Millisecond-pulsar timing over 1 to 100 years (σ_y ≈ 1.8×10⁻¹⁵ at one
    /// year), tagged with a neutron-star radius of 10 km.
    pub fn millisecond_pulsar() -> Self {
        Self::new(
            "millisecond-pulsar",
            vec![Segment {
                amplitude: 1e-11,
                exponent: -0.5,
                t_min: SECONDS_PER_YEAR,
                t_max: 100.0 * SECONDS_PER_YEAR,
            }],
        )
        .expect("valid preset")
        .with_clock_radius(1e4)
        .expect("valid radius")
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "optical-lattice" => Ok(Self::optical_lattice()),
            "optical-lattice-floor" => Ok(Self::optical_lattice_with_floor()),
            "millisecond-pulsar" => Ok(Self::millisecond_pulsar()),
            other => Err(Error::invalid(format!(
                "unknown stability preset '{other}' (expected optical-lattice, optical-lattice-floor or millisecond-pulsar)"
            ))),
        }
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.segments[0].t_min, self.segments[self.segments.len() - 1].t_max)
    }

    pub fn segment_at(&self, t: f64) -> Result<&Segment> {
        self.segments.iter().find(|s| s.contains(t)).ok_or_else(|| {
            let (lo, hi) = self.t_range();
            Error::invalid(format!("t = {t} s is outside the model range [{lo}, {hi}] s"))
        })
    }

    pub fn sigma_y(&self, t: f64) -> Result<f64> {
        Ok(self.segment_at(t)?.sigma_y(t))
    }
}

/// Clock time fluctuation Δ_t = σ_y(t)·t/√3.
pub fn clock_delta_t(model: &StabilityModel, t: f64) -> Result<f64> {
    Ok(model.sigma_y(t)? * t / SQRT_3)
}

/// √(τ·t) divided by the clock's own Δ_t at the same t.
pub fn collapse_to_clock_ratio(tau: f64, model: &StabilityModel, t: f64) -> Result<f64> {
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::invalid(format!("tau must be non-negative, got {tau}")));
    }
    let clock = clock_delta_t(model, t)?;
    Ok((tau * t).sqrt() / clock)
}

/// Earliest t at which √(τ·t) = σ_y(t)·t/√3 inside some segment.
///
/// Per segment the equality gives t^{2p+1} = 3τ/A². A segment with
/// p = −1/2 scales exactly like the collapse drift and never crosses.
pub fn crossover_time(tau: f64, model: &StabilityModel) -> Result<Option<f64>> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::invalid(format!("tau must be positive, got {tau}")));
    }
    let mut earliest: Option<f64> = None;
    for s in &model.segments {
        let power = 2.0 * s.exponent + 1.0;
        if power == 0.0 {
            continue;
        }
        let t = (3.0 * tau / (s.amplitude * s.amplitude)).powf(1.0 / power);
        if t.is_finite() && s.contains(t) {
            earliest = Some(earliest.map_or(t, |e: f64| e.min(t)));
        }
    }
    Ok(earliest)
}

/// τ seen by a clock described by `stability`: τ^max-limited when no radius
/// is attached, otherwise volume-averaged over a sphere of that radius.
pub fn collapse_tau_for_clock(params: &ModelParams, stability: &StabilityModel) -> Result<f64> {
    match stability.clock_radius {
        None => Ok(crate::tau::tau_max(params)),
        Some(r) => Ok(tau_for_clock(params, &ClockGeometry::sphere(r)?)?.tau),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{standard_params, ModelKind};
    use crate::tau::tau_max;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn optical_lattice_delta_t() {
        let m = StabilityModel::optical_lattice();
        assert!(rel(clock_delta_t(&m, 1.0).unwrap(), 1e-17 / 3f64.sqrt()) < 1e-15);
        let at_1e4 = clock_delta_t(&m, 1e4).unwrap();
        assert!(rel(at_1e4, 1e-15 / 3f64.sqrt()) < 1e-14);
        assert!((at_1e4 - 5.8e-16).abs() < 0.05e-16);
        assert!(clock_delta_t(&m, 0.5).is_err());
        assert!(clock_delta_t(&m, 2e6).is_err());
    }

    #[test]
    fn linear_in_amplitude() {
        let seg = |a| Segment {
            amplitude: a,
            exponent: -0.5,
            t_min: 1.0,
            t_max: 1e6,
        };
        let one = StabilityModel::new("a", vec![seg(1e-17)]).unwrap();
        let two = StabilityModel::new("b", vec![seg(2e-17)]).unwrap();
        assert!(rel(clock_delta_t(&two, 300.0).unwrap(), 2.0 * clock_delta_t(&one, 300.0).unwrap()) < 1e-15);
    }

    #[test]
    fn construction_validates_segments() {
        let s = |a, p, lo, hi| Segment {
            amplitude: a,
            exponent: p,
            t_min: lo,
            t_max: hi,
        };
        assert!(StabilityModel::new("x", vec![]).is_err());
        assert!(StabilityModel::new("x", vec![s(0.0, 0.0, 1.0, 2.0)]).is_err());
        assert!(StabilityModel::new("x", vec![s(1.0, 0.0, 2.0, 1.0)]).is_err());
        // Gap between segments.
        assert!(StabilityModel::new("x", vec![s(1.0, 0.0, 1.0, 2.0), s(1.0, 0.0, 3.0, 4.0)]).is_err());
        // Jump at the junction.
        assert!(StabilityModel::new("x", vec![s(1.0, 0.0, 1.0, 2.0), s(2.0, 0.0, 2.0, 4.0)]).is_err());
        StabilityModel::optical_lattice_with_floor();
    }

    #[test]
    fn continuous_at_junctions() {
        let m = StabilityModel::optical_lattice_with_floor();
        let t = 1e4;
        let left = m.segments[0].sigma_y(t) * t / SQRT_3;
        let right = m.segments[1].sigma_y(t) * t / SQRT_3;
        assert!(rel(left, right) < 1e-12);
    }

    #[test]
    fn ratio_examples() {
        let m = StabilityModel::optical_lattice();
        let csl = tau_max(&standard_params(ModelKind::Csl));
        let dp = tau_max(&standard_params(ModelKind::Dp));
        let r1 = collapse_to_clock_ratio(csl, &m, 10.0).unwrap();
        let r2 = collapse_to_clock_ratio(csl, &m, 1e5).unwrap();
        // √3·√τ/1e-17 from 40-digit arithmetic.
        assert!(rel(r1, 1.215_059_645_571_348e-15) < 1e-12);
        assert!(rel(r1, r2) < 1e-12);
        let rd = collapse_to_clock_ratio(dp, &m, 10.0).unwrap();
        assert!(rel(rd, 3.840_366_702_785_296e-18) < 1e-12);
        assert_eq!(collapse_to_clock_ratio(0.0, &m, 10.0).unwrap(), 0.0);
        assert!(collapse_to_clock_ratio(-1.0, &m, 10.0).is_err());
    }

    #[test]
    fn crossover_cases() {
        let csl = tau_max(&standard_params(ModelKind::Csl));
        assert_eq!(crossover_time(csl, &StabilityModel::optical_lattice()).unwrap(), None);

        let floor = |lo, hi| {
            StabilityModel::new(
                "floor",
                vec![Segment {
                    amplitude: 1e-18,
                    exponent: 0.0,
                    t_min: lo,
                    t_max: hi,
                }],
            )
            .unwrap()
        };
        // t = 3τ/A² ≈ 1.5e-28 s, before any realistic segment.
        assert_eq!(crossover_time(csl, &floor(1.0, 1e10)).unwrap(), None);
        let t = crossover_time(csl, &floor(1e-30, 1.0)).unwrap().unwrap();
        assert!(rel(t, 3.0 * csl / 1e-36) < 1e-12);
        assert!((t - 1.5e-28).abs() < 0.05e-28);
        assert!(crossover_time(0.0, &floor(1.0, 2.0)).is_err());
    }

    #[test]
    fn crossover_solves_defining_equation() {
        let tau = 1e-40;
        let m = StabilityModel::new(
            "rising",
            vec![Segment {
                amplitude: 1e-25,
                exponent: 0.5,
                t_min: 1.0,
                t_max: 1e12,
            }],
        )
        .unwrap();
        let t = crossover_time(tau, &m).unwrap().unwrap();
        let lhs = (tau * t).sqrt();
        let rhs = clock_delta_t(&m, t).unwrap();
        assert!(rel(lhs, rhs) < 1e-10);
    }

    #[test]
    fn pulsar_collapse_side_is_suppressed() {
        let pulsar = StabilityModel::millisecond_pulsar();
        let lattice = StabilityModel::optical_lattice();
        for kind in [ModelKind::Csl, ModelKind::Dp] {
            let p = standard_params(kind);
            let suppressed = collapse_tau_for_clock(&p, &pulsar).unwrap();
            let plateau = collapse_tau_for_clock(&p, &lattice).unwrap();
            assert_eq!(plateau, tau_max(&p));
            assert!(suppressed < 1e-6 * plateau);
        }
        assert!(StabilityModel::preset("optical-lattice").is_ok());
        assert!(StabilityModel::preset("sundial").is_err());
    }
}
