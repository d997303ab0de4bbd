//! Clock-volume-averaged fluctuation strength τ.
//!
//! For a spherical clock of radius R the double volume average of
//! 𝒟(x−y)/c⁴ collapses to a single integral over the distance between two
//! uniform points in the ball:
//!
//! τ = τ^max · ∫₀^{2ρ} p(u; ρ)·f(u) du,   ρ = R/σ,
//!
//! with p the pair-distance density and f the kernel shape. Everything is
//! integrated in the dimensionless variable u = r/σ.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{kernel_zero, shape_unchecked};
use crate::params::{ModelKind, ModelParams};
use crate::quadrature::{integrate, Integral, Tolerance};
use crate::rng::{blocks, substream, Moments};

/// Beyond u = 60 the CSL shape is below e^{-900} and is dropped.
pub const CSL_SHAPE_CUTOFF: f64 = 60.0;

/// Smallest R/σ accepted by [`tau_asymptotic_large`].
pub const LARGE_CLOCK_MIN_RATIO: f64 = 10.0;

/// Largest R/σ accepted by [`tau_asymptotic_small`].
pub const SMALL_CLOCK_MAX_RATIO: f64 = 1.0;

/// Above this R/σ [`tau_for_clock`] uses the large-clock closed form; its
/// relative error there is below 1e-5.
pub const QUADRATURE_MAX_RATIO: f64 = 1e6;

pub const MIN_MC_SAMPLES: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClockShape {
    Sphere,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClockGeometry {
    pub radius: f64,
    pub shape: ClockShape,
}

impl ClockGeometry {
    pub fn sphere(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid(format!("clock radius must be positive, got {radius}")));
        }
        Ok(Self {
            radius,
            shape: ClockShape::Sphere,
        })
    }

    pub fn ratio(&self, model: &ModelParams) -> f64 {
        self.radius / model.sigma()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TauMethod {
    Quadrature,
    MonteCarlo,
    AsymptoticSmall,
    AsymptoticLarge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauResult {
    pub tau: f64,
    pub method: TauMethod,
    pub stderr: f64,
    pub n_samples: Option<u64>,
}

impl TauResult {
    fn exact(tau: f64, method: TauMethod) -> Self {
        Self {
            tau,
            method,
            stderr: 0.0,
            n_samples: None,
        }
    }
}

/// Density of |x − y| for x, y independent and uniform in a ball of radius R.
pub fn pair_distance_density(r: f64, radius: f64) -> Result<f64> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::invalid(format!("radius must be positive, got {radius}")));
    }
    if r.is_nan() || r < 0.0 {
        return Err(Error::invalid(format!("distance must be non-negative, got {r}")));
    }
    Ok(pair_density_unchecked(r / radius) / radius)
}

/// Density in units of the radius, s = r/R ∈ [0, 2].
fn pair_density_unchecked(s: f64) -> f64 {
    if s > 2.0 {
        return 0.0;
    }
    3.0 * s * s * (1.0 - 0.75 * s + s * s * s / 16.0)
}

/// τ^max = 𝒟(0)/c⁴: ħ²λ/(m₀²c⁴) for CSL, ħG/(√π·c⁴·σ) for DP.
pub fn tau_max(model: &ModelParams) -> f64 {
    let c = model.constants();
    match *model {
        ModelParams::Csl { lambda, .. } => {
            let ratio = c.hbar / c.m0;
            ratio * ratio * lambda / c.c4()
        }
        ModelParams::Dp { sigma, .. } => c.hbar * c.g / (PI.sqrt() * c.c4() * sigma),
    }
}

/// Dimensionless profile F(ρ) = τ/τ^max for a sphere of radius ρσ.
pub fn profile(kind: ModelKind, rho: f64, tol: Tolerance) -> Result<Integral> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::invalid(format!("R/sigma must be positive, got {rho}")));
    }
    let upper = match kind {
        ModelKind::Csl => (2.0 * rho).min(CSL_SHAPE_CUTOFF),
        ModelKind::Dp => 2.0 * rho,
    };
    integrate(
        |u| pair_density_unchecked(u / rho) / rho * shape_unchecked(kind, u),
        0.0,
        upper,
        tol,
    )
}

pub fn tau_quadrature(model: &ModelParams, geom: &ClockGeometry) -> Result<TauResult> {
    tau_quadrature_with(model, geom, Tolerance::default())
}

pub fn tau_quadrature_with(model: &ModelParams, geom: &ClockGeometry, tol: Tolerance) -> Result<TauResult> {
    let f = profile(model.kind(), geom.ratio(model), tol)?;
    Ok(TauResult::exact(tau_max(model) * f.value, TauMethod::Quadrature))
}

/// Uniform point in the ball of radius `rho`: cube-root radius and an
/// isotropic direction.
fn point_in_ball<R: Rng>(rng: &mut R, rho: f64) -> [f64; 3] {
    let r = rho * rng.random::<f64>().cbrt();
    let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
    let phi = 2.0 * PI * rng.random::<f64>();
    let s = (1.0 - z * z).max(0.0).sqrt();
    [r * s * phi.cos(), r * s * phi.sin(), r * z]
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Draws `n` distances between independent uniform points in a ball of
/// radius `rho`, in block order.
pub fn sample_pair_distances(rho: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    for (block, _, len) in blocks(n) {
        let mut rng = substream(seed, block);
        out.extend((0..len).map(|_| distance(point_in_ball(&mut rng, rho), point_in_ball(&mut rng, rho))));
    }
    out
}

/// Monte Carlo estimate of the double volume average of 𝒟(|x−y|)/c⁴.
///
/// Blocks of samples run in parallel, each on its own substream, and their
/// moments are merged in block order, so the result depends only on
/// `(n, seed)`.
pub fn tau_monte_carlo(model: &ModelParams, geom: &ClockGeometry, n: u64, seed: u64) -> Result<TauResult> {
    if n < MIN_MC_SAMPLES {
        return Err(Error::invalid(format!("need at least {MIN_MC_SAMPLES} samples, got {n}")));
    }
    let rho = geom.ratio(model);
    let kind = model.kind();
    let parts: Vec<(u64, usize, usize)> = blocks(n as usize).collect();
    let moments = parts
        .par_iter()
        .map(|&(block, _, len)| {
            let mut rng = substream(seed, block);
            let mut m = Moments::default();
            for _ in 0..len {
                let u = distance(point_in_ball(&mut rng, rho), point_in_ball(&mut rng, rho));
                m.push(shape_unchecked(kind, u));
            }
            m
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Moments::default(), Moments::merge);

    let scale = kernel_zero(model) / model.constants().c4();
    Ok(TauResult {
        tau: scale * moments.mean,
        method: TauMethod::MonteCarlo,
        stderr: scale * moments.stderr(),
        n_samples: Some(n),
    })
}

/// Large-clock closed forms: 6√π·τ^max/ρ³ (CSL) and 6√π·τ^max/(5ρ) (DP).
pub fn tau_asymptotic_large(model: &ModelParams, geom: &ClockGeometry) -> Result<TauResult> {
    let rho = geom.ratio(model);
    if rho < LARGE_CLOCK_MIN_RATIO {
        return Err(Error::OutOfRegime(format!(
            "large-clock form needs R/sigma >= {LARGE_CLOCK_MIN_RATIO}, got {rho}"
        )));
    }
    let coeff = 6.0 * PI.sqrt() * tau_max(model);
    let tau = match model.kind() {
        ModelKind::Csl => coeff / (rho * rho * rho),
        ModelKind::Dp => coeff / (5.0 * rho),
    };
    Ok(TauResult::exact(tau, TauMethod::AsymptoticLarge))
}

/// Small-clock plateau τ ≈ τ^max.
pub fn tau_asymptotic_small(model: &ModelParams, geom: &ClockGeometry) -> Result<TauResult> {
    let rho = geom.ratio(model);
    if rho > SMALL_CLOCK_MAX_RATIO {
        return Err(Error::OutOfRegime(format!(
            "small-clock plateau needs R/sigma <= {SMALL_CLOCK_MAX_RATIO}, got {rho}"
        )));
    }
    Ok(TauResult::exact(tau_max(model), TauMethod::AsymptoticSmall))
}

/// Quadrature up to R/σ = 10⁶, the large-clock closed form beyond.
pub fn tau_for_clock(model: &ModelParams, geom: &ClockGeometry) -> Result<TauResult> {
    if geom.ratio(model) > QUADRATURE_MAX_RATIO {
        tau_asymptotic_large(model, geom)
    } else {
        tau_quadrature(model, geom)
    }
}

/// Δ_t = √(τ·t).
pub fn delta_t(tau: f64, t: f64) -> Result<f64> {
    if tau.is_nan() || tau < 0.0 || t.is_nan() || t < 0.0 {
        return Err(Error::invalid(format!("tau and t must be non-negative, got tau={tau}, t={t}")));
    }
    Ok((tau * t).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{standard_params, SECONDS_PER_YEAR};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn sphere(model: &ModelParams, rho: f64) -> ClockGeometry {
        ClockGeometry::sphere(rho * model.sigma()).unwrap()
    }

    #[test]
    fn density_edges_and_normalization() {
        let radius = 2.5;
        assert_eq!(pair_distance_density(0.0, radius).unwrap(), 0.0);
        assert!(pair_distance_density(2.0 * radius, radius).unwrap().abs() < 1e-15);
        assert_eq!(pair_distance_density(5.1, radius).unwrap(), 0.0);
        assert!(pair_distance_density(1.0, 0.0).is_err());
        assert!(pair_distance_density(-1.0, 1.0).is_err());
        let norm = integrate(
            |r| pair_distance_density(r, radius).unwrap(),
            0.0,
            2.0 * radius,
            Tolerance::relative(1e-13),
        )
        .unwrap();
        assert!(rel(norm.value, 1.0) < 1e-10);
        for s in 0..=200 {
            assert!(pair_distance_density(s as f64 * 0.025, radius).unwrap() >= 0.0);
        }
    }

    #[test]
    fn mean_pair_distance_by_sampling() {
        // Independent check of the density: E|x−y| = 36R/35 for a unit ball.
        let n = 10_000_000;
        let d = sample_pair_distances(1.0, n, 11);
        let mut m = Moments::default();
        d.iter().for_each(|&x| m.push(x));
        let expected = 36.0 / 35.0;
        assert!((m.mean - expected).abs() < 4.0 * m.stderr(), "{} ± {}", m.mean, m.stderr());
        // Same first moment from the density by quadrature.
        let q = integrate(|r| r * pair_density_unchecked(r), 0.0, 2.0, Tolerance::relative(1e-13)).unwrap();
        assert!(rel(q.value, expected) < 1e-12);
    }

    #[test]
    fn tau_max_reference_values() {
        // 40-digit evaluations with the fixed constants.
        let csl = tau_max(&standard_params(ModelKind::Csl));
        let dp = tau_max(&standard_params(ModelKind::Dp));
        assert!(rel(csl, 4.921_233_140_986_568e-65) < 1e-12, "{csl:e}");
        assert!(rel(dp, 4.916_138_803_954_003e-70) < 1e-12, "{dp:e}");
        let doubled = tau_max(&ModelParams::csl(2e-16, 1e-7).unwrap());
        assert!(rel(doubled, 2.0 * csl) < 1e-15);
    }

    #[test]
    fn kernel_zero_is_c4_tau_max() {
        for kind in [ModelKind::Csl, ModelKind::Dp] {
            let m = standard_params(kind);
            assert!(rel(kernel_zero(&m), m.constants().c4() * tau_max(&m)) < 1e-12);
        }
    }

    #[test]
    fn plateau_for_tiny_clocks() {
        let m = standard_params(ModelKind::Csl);
        let t = tau_quadrature(&m, &sphere(&m, 0.01)).unwrap();
        assert!(rel(t.tau, 4.9e-65) < 0.01);
        assert!(rel(t.tau, tau_max(&m)) < 1e-3);
        assert_eq!(t.stderr, 0.0);
        for kind in [ModelKind::Csl, ModelKind::Dp] {
            let m = standard_params(kind);
            let t = tau_quadrature(&m, &sphere(&m, 0.1)).unwrap();
            assert!(rel(t.tau, tau_max(&m)) < 0.01);
            assert!(t.tau <= tau_max(&m) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn large_clock_closed_forms() {
        for kind in [ModelKind::Csl, ModelKind::Dp] {
            let m = standard_params(kind);
            let g = sphere(&m, 100.0);
            let asym = tau_asymptotic_large(&m, &g).unwrap();
            let quad = tau_quadrature(&m, &g).unwrap();
            assert_eq!(asym.method, TauMethod::AsymptoticLarge);
            assert!(rel(quad.tau, asym.tau) < 0.05, "{kind}: {} vs {}", quad.tau, asym.tau);
        }
        let csl = standard_params(ModelKind::Csl);
        let expected = 6.0 * PI.sqrt() * tau_max(&csl) * 1e-6;
        assert!(rel(tau_asymptotic_large(&csl, &sphere(&csl, 100.0)).unwrap().tau, expected) < 1e-14);
        let dp = standard_params(ModelKind::Dp);
        let expected = 6.0 * PI.sqrt() * tau_max(&dp) / 500.0;
        assert!(rel(tau_asymptotic_large(&dp, &sphere(&dp, 100.0)).unwrap().tau, expected) < 1e-14);
        assert!(matches!(
            tau_asymptotic_large(&dp, &sphere(&dp, 5.0)),
            Err(Error::OutOfRegime(_))
        ));
    }

    #[test]
    fn small_clock_guard() {
        let dp = standard_params(ModelKind::Dp);
        assert_eq!(tau_asymptotic_small(&dp, &sphere(&dp, 0.5)).unwrap().tau, tau_max(&dp));
        assert!(tau_asymptotic_small(&dp, &sphere(&dp, 2.0)).is_err());
    }

    #[test]
    fn strictly_decreasing_in_radius() {
        for kind in [ModelKind::Csl, ModelKind::Dp] {
            let m = standard_params(kind);
            let mut prev = f64::INFINITY;
            for i in 0..=50 {
                let rho = 0.01 * 10f64.powf(5.0 * i as f64 / 50.0);
                let t = tau_quadrature(&m, &sphere(&m, rho)).unwrap().tau;
                assert!(t < prev, "{kind} at rho={rho}");
                assert!(t <= tau_max(&m) * (1.0 + 1e-9));
                prev = t;
            }
        }
    }

    #[test]
    fn profile_independent_of_amplitude() {
        for &rho in &[0.3, 3.0, 30.0] {
            let base = ModelParams::csl(1e-16, 1e-7).unwrap();
            let variants = [
                ModelParams::csl(1e-15, 1e-7).unwrap(),
                ModelParams::csl(1e-16, 1e-6).unwrap(),
            ];
            let f0 = tau_quadrature(&base, &sphere(&base, rho)).unwrap().tau / tau_max(&base);
            for v in variants {
                let f = tau_quadrature(&v, &sphere(&v, rho)).unwrap().tau / tau_max(&v);
                assert!(rel(f, f0) < 1e-12);
            }
            let dp = ModelParams::dp(1e-9).unwrap();
            let dp10 = ModelParams::dp(1e-8).unwrap();
            let a = tau_quadrature(&dp, &sphere(&dp, rho)).unwrap().tau / tau_max(&dp);
            let b = tau_quadrature(&dp10, &sphere(&dp10, rho)).unwrap().tau / tau_max(&dp10);
            assert!(rel(a, b) < 1e-12);
        }
    }

    #[test]
    fn monte_carlo_is_deterministic_and_constant_limit() {
        let m = standard_params(ModelKind::Csl);
        let g = sphere(&m, 0.001);
        let a = tau_monte_carlo(&m, &g, 100_000, 5).unwrap();
        let b = tau_monte_carlo(&m, &g, 100_000, 5).unwrap();
        assert_eq!(a.tau.to_bits(), b.tau.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
        assert_eq!(a.n_samples, Some(100_000));
        assert!(a.stderr / a.tau < 1e-4);
        assert!(rel(a.tau, tau_max(&m)) < 1e-5);
        assert!(tau_monte_carlo(&m, &g, 999, 5).is_err());
    }

    #[test]
    fn monte_carlo_matches_quadrature_at_unit_ratio() {
        let m = standard_params(ModelKind::Csl);
        let g = sphere(&m, 1.0);
        let mc = tau_monte_carlo(&m, &g, 1_000_000, 1).unwrap();
        let q = tau_quadrature(&m, &g).unwrap();
        assert!((mc.tau - q.tau).abs() < 3.0 * mc.stderr, "{} vs {} ± {}", q.tau, mc.tau, mc.stderr);
    }

    #[test]
    fn delta_t_values() {
        let year = SECONDS_PER_YEAR;
        let csl = delta_t(tau_max(&standard_params(ModelKind::Csl)), year).unwrap();
        let dp = delta_t(tau_max(&standard_params(ModelKind::Dp)), year).unwrap();
        assert!(rel(csl, 3.940_841_369_174_833e-29) < 1e-12);
        assert!(rel(dp, 1.245_558_276_114_204e-31) < 1e-12);
        assert_eq!(delta_t(1e-60, 0.0).unwrap(), 0.0);
        assert!(delta_t(-1.0, 1.0).is_err());
        assert!(delta_t(1.0, -1.0).is_err());
    }

    #[test]
    fn geometry_validation() {
        assert!(ClockGeometry::sphere(0.0).is_err());
        assert!(ClockGeometry::sphere(-1.0).is_err());
        assert!(ClockGeometry::sphere(f64::INFINITY).is_err());
    }
}
