//! Smeared spatial correlation functions 𝒟(r) of the collapse noise.
//!
//! The unsmeared CSL kernel is a Dirac delta and is never evaluated
//! pointwise; only its Gaussian-smeared form exists here. Everything is
//! expressed as 𝒟(r) = 𝒟(0)·f(r/σ) with a dimensionless shape f, f(0) = 1:
//!
//! * CSL: f(u) = exp(−u²/4)
//! * DP:  f(u) = (√π/u)·erf(u/2)

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{ModelKind, ModelParams};
use crate::quadrature::{integrate, Tolerance};

/// Below this u = r/σ the DP shape switches to its Maclaurin series.
pub const DP_SERIES_SWITCH: f64 = 1e-3;

const SQRT_PI: f64 = 1.772_453_850_905_516;

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelEvaluation {
    pub r: f64,
    pub value: f64,
    pub model: ModelKind,
}

fn check_non_negative(name: &str, x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::invalid(format!("{name} must be non-negative, got {x}")));
    }
    Ok(())
}

/// erf(x)/x·(√π/2) through the x⁶ term, x = u/2.
fn dp_shape_series(u: f64) -> f64 {
    let x2 = 0.25 * u * u;
    1.0 - x2 / 3.0 + x2 * x2 / 10.0 - x2 * x2 * x2 / 42.0
}

pub(crate) fn shape_unchecked(kind: ModelKind, u: f64) -> f64 {
    match kind {
        ModelKind::Csl => (-0.25 * u * u).exp(),
        ModelKind::Dp => {
            if u < DP_SERIES_SWITCH {
                dp_shape_series(u)
            } else {
                SQRT_PI / u * erf(0.5 * u)
            }
        }
    }
}

/// Dimensionless kernel shape f(u) = 𝒟(uσ)/𝒟(0).
pub fn kernel_shape(kind: ModelKind, u: f64) -> Result<f64> {
    check_non_negative("u", u)?;
    Ok(shape_unchecked(kind, u))
}

/// 1 − f(u) without cancellation at small u.
pub fn kernel_shape_complement(kind: ModelKind, u: f64) -> Result<f64> {
    check_non_negative("u", u)?;
    Ok(match kind {
        ModelKind::Csl => -(-0.25 * u * u).exp_m1(),
        ModelKind::Dp if u < 1.0 => {
            // 1 − f = −Σ_{n≥1} (−x²)^n / (n!(2n+1)), x = u/2.
            let x2 = 0.25 * u * u;
            let mut term = 1.0;
            let mut sum = 0.0;
            for n in 1..=20 {
                term *= -x2 / n as f64;
                let contrib = term / (2 * n + 1) as f64;
                sum -= contrib;
                if contrib.abs() < 1e-18 * sum.abs() {
                    break;
                }
            }
            sum
        }
        ModelKind::Dp => 1.0 - shape_unchecked(kind, u),
    })
}

/// 𝒟(0): ħ²λ/m₀² for CSL, ħG/(√π·σ) for DP.
pub fn kernel_zero(model: &ModelParams) -> f64 {
    let c = model.constants();
    match *model {
        ModelParams::Csl { lambda, .. } => {
            let ratio = c.hbar / c.m0;
            ratio * ratio * lambda
        }
        ModelParams::Dp { sigma, .. } => c.hbar * c.g / (SQRT_PI * sigma),
    }
}

/// Smeared correlation 𝒟(r) in SI units.
///
/// CSL: (ħ²λ/m₀²)·exp(−r²/4σ²). DP: (ħG/r)·erf(r/2σ), evaluated through
/// the series of erf(x)/x when r < 10⁻³σ.
pub fn kernel_smeared(model: &ModelParams, r: f64) -> Result<f64> {
    check_non_negative("r", r)?;
    let sigma = model.sigma();
    let c = model.constants();
    Ok(match *model {
        ModelParams::Csl { .. } => kernel_zero(model) * (-r * r / (4.0 * sigma * sigma)).exp(),
        ModelParams::Dp { .. } => {
            let u = r / sigma;
            if u < DP_SERIES_SWITCH {
                kernel_zero(model) * dp_shape_series(u)
            } else {
                c.hbar * c.g / r * erf(r / (2.0 * sigma))
            }
        }
    })
}

pub fn evaluate(model: &ModelParams, r: f64) -> Result<KernelEvaluation> {
    Ok(KernelEvaluation {
        r,
        value: kernel_smeared(model, r)?,
        model: model.kind(),
    })
}

/// DP kernel in Fourier space, 𝒟̃(k) = (4πħG/k²)·exp(−σ²k²).
pub fn kernel_dp_fourier(model: &ModelParams, k: f64) -> Result<f64> {
    let ModelParams::Dp { sigma, constants } = model else {
        return Err(Error::invalid("Fourier kernel is only defined for the DP model"));
    };
    if k.is_nan() || k <= 0.0 {
        return Err(Error::invalid(format!("wavenumber must be positive, got {k}")));
    }
    Ok(4.0 * PI * constants.hbar * constants.g / (k * k) * (-(sigma * k).powi(2)).exp())
}

/// Radial inverse Fourier transform of [`kernel_dp_fourier`],
/// 𝒟(r) = (1/2π²r)∫₀^∞ k·𝒟̃(k)·sin(kr) dk, by quadrature.
///
/// The integrand is cut at kσ = 10 where exp(−σ²k²) < 1e-43.
pub fn dp_inverse_fourier(model: &ModelParams, r: f64) -> Result<f64> {
    if model.kind() != ModelKind::Dp {
        return Err(Error::invalid("inverse Fourier check is only defined for the DP model"));
    }
    if r.is_nan() || r <= 0.0 {
        return Err(Error::invalid(format!("r must be positive, got {r}")));
    }
    let k_max = 10.0 / model.sigma();
    let integrand = |k: f64| match kernel_dp_fourier(model, k) {
        Ok(ft) => k * ft * (k * r).sin(),
        Err(_) => f64::NAN,
    };
    let tol = Tolerance {
        abs: 0.0,
        rel: 1e-11,
        max_intervals: 4000,
    };
    let integral = integrate(integrand, 0.0, k_max, tol)?;
    Ok(integral.value / (2.0 * PI * PI * r))
}

/// CSL kernel from an explicit convolution (g_σ * D * g_σ)(r), where the
/// unsmeared kernel is (ħ²γ/m₀²)·δ³. The remaining Gaussian self-convolution
/// is done by quadrature, one Cartesian axis at a time.
pub fn csl_gaussian_convolution(model: &ModelParams, r: f64) -> Result<f64> {
    let ModelParams::Csl {
        sigma, constants, ..
    } = model
    else {
        return Err(Error::invalid("Gaussian convolution check is only defined for the CSL model"));
    };
    check_non_negative("r", r)?;
    let gamma = model.gamma().expect("CSL has gamma");
    let sigma = *sigma;
    let norm = 1.0 / (2.0 * PI * sigma * sigma).sqrt();
    let g1 = |x: f64| norm * (-x * x / (2.0 * sigma * sigma)).exp();
    let tol = Tolerance {
        abs: 0.0,
        rel: 1e-13,
        max_intervals: 2000,
    };
    let half_width = 14.0 * sigma;
    // Separation along the first axis, zero along the other two.
    let along = integrate(|y| g1(y) * g1(r - y), 0.5 * r - half_width, 0.5 * r + half_width, tol)?;
    let across = integrate(|y| g1(y) * g1(y), -half_width, half_width, tol)?;
    let self_convolution = along.value * across.value * across.value;
    let ratio = constants.hbar / constants.m0;
    Ok(ratio * ratio * gamma * self_convolution)
}
