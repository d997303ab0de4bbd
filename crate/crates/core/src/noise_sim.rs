//! Stochastic realizations of the collapse noise.
//!
//! White-in-time noise is only ever sampled through its time integrals over
//! finite steps. Over a step dt, the clock-time increments δt(xᵢ) at a set of
//! points are jointly Gaussian with covariance 𝒟(|xᵢ − xⱼ|)·dt/c⁴.

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{kernel_shape_complement, kernel_zero, shape_unchecked};
use crate::params::ModelParams;
use crate::rng::{blocks, substream};
use crate::scan::format_sci;
use crate::tau::tau_max;

/// Relative eigenvalue floor applied to near-singular covariances.
pub const EIGEN_FLOOR: f64 = 1e-12;

pub const MIN_DECOHERENCE_SAMPLES: u64 = 1000;

pub type Point = [f64; 3];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftTrajectory {
    pub t_grid: Vec<f64>,
    pub delta_t_values: Vec<f64>,
    pub tau: f64,
    pub seed: u64,
    pub realization: u64,
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    match t_grid.first() {
        None => return Err(Error::invalid("time grid is empty")),
        Some(&t0) if t0 != 0.0 => return Err(Error::invalid(format!("time grid must start at 0, got {t0}"))),
        _ => {}
    }
    if let Some(w) = t_grid.windows(2).find(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
        return Err(Error::invalid(format!(
            "time grid must be strictly increasing, found {} then {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// One drift realization with independent N(0, τ·Δt) increments.
pub fn sample_drift(tau: f64, t_grid: &[f64], seed: u64) -> Result<DriftTrajectory> {
    sample_drift_realization(tau, t_grid, seed, 0)
}

/// Realization `index` of the ensemble for `seed`; each index owns its own
/// random stream.
pub fn sample_drift_realization(tau: f64, t_grid: &[f64], seed: u64, index: u64) -> Result<DriftTrajectory> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::invalid(format!("tau must be non-negative, got {tau}")));
    }
    check_grid(t_grid)?;
    let mut rng = substream(seed, index);
    let mut acc = 0.0;
    let mut values = Vec::with_capacity(t_grid.len());
    values.push(0.0);
    for w in t_grid.windows(2) {
        let z: f64 = rng.sample(StandardNormal);
        acc += (tau * (w[1] - w[0])).sqrt() * z;
        values.push(acc);
    }
    Ok(DriftTrajectory {
        t_grid: t_grid.to_vec(),
        delta_t_values: values,
        tau,
        seed,
        realization: index,
    })
}

pub fn sample_drift_ensemble(tau: f64, t_grid: &[f64], n: usize, seed: u64) -> Result<Vec<DriftTrajectory>> {
    check_grid(t_grid)?;
    (0..n as u64)
        .into_par_iter()
        .map(|i| sample_drift_realization(tau, t_grid, seed, i))
        .collect()
}

/// Writes trajectories as `t_s,delta_t_s,realization_id` rows.
pub fn write_drift_csv<W: Write>(mut out: W, trajectories: &[DriftTrajectory]) -> Result<()> {
    writeln!(out, "t_s,delta_t_s,realization_id")?;
    for traj in trajectories {
        for (t, dt) in traj.t_grid.iter().zip(&traj.delta_t_values) {
            writeln!(out, "{},{},{}", format_sci(*t), format_sci(*dt), traj.realization)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldIncrementSample {
    pub points: Vec<Point>,
    pub dt: f64,
    /// Time-fluctuation increments (s) at each point.
    pub values: Vec<f64>,
    /// Target covariance 𝒟(|xᵢ−xⱼ|)·dt/c⁴ before regularization (s²).
    pub covariance_used: Vec<Vec<f64>>,
}

/// Factorized sampler for the increments at a fixed set of points.
///
/// Coincident points share one draw. The remaining normalized kernel
/// matrix is factorized by symmetric eigendecomposition with eigenvalues
/// floored at [`EIGEN_FLOOR`] times the largest one.
#[derive(Debug, Clone)]
pub struct FieldSampler {
    points: Vec<Point>,
    dt: f64,
    slot: Vec<usize>,
    factor: DMatrix<f64>,
    scale: f64,
    covariance: Vec<Vec<f64>>,
    floored: usize,
}

impl FieldSampler {
    pub fn new(points: &[Point], model: &ModelParams, dt: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("at least one point is required"));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        if let Some(p) = points.iter().find(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(Error::invalid(format!("point coordinates must be finite, got {p:?}")));
        }

        let mut unique: Vec<Point> = Vec::new();
        let slot: Vec<usize> = points
            .iter()
            .map(|p| match unique.iter().position(|q| q == p) {
                Some(i) => i,
                None => {
                    unique.push(*p);
                    unique.len() - 1
                }
            })
            .collect();

        let sigma = model.sigma();
        let kind = model.kind();
        let shape = |a: &Point, b: &Point| shape_unchecked(kind, dist(a, b) / sigma);
        let variance = tau_max(model) * dt;

        let n = unique.len();
        let k = DMatrix::from_fn(n, n, |i, j| shape(&unique[i], &unique[j]));
        let eig = SymmetricEigen::new(k);
        let largest = eig.eigenvalues.max();
        if !(largest.is_finite() && largest > 0.0) {
            return Err(Error::Factorization(format!("largest eigenvalue is {largest}")));
        }
        let floor = EIGEN_FLOOR * largest;
        let mut floored = 0;
        let roots = DVector::from_iterator(
            n,
            eig.eigenvalues.iter().map(|&l| {
                if l < floor {
                    floored += 1;
                    floor.sqrt()
                } else {
                    l.sqrt()
                }
            }),
        );
        let factor = eig.eigenvectors * DMatrix::from_diagonal(&roots);
        if factor.iter().any(|x| !x.is_finite()) {
            return Err(Error::Factorization("non-finite factor after regularization".into()));
        }

        let covariance = points
            .iter()
            .map(|a| points.iter().map(|b| variance * shape(a, b)).collect())
            .collect();

        Ok(Self {
            points: points.to_vec(),
            dt,
            slot,
            factor,
            scale: variance.sqrt(),
            covariance,
            floored,
        })
    }

    pub fn covariance(&self) -> &[Vec<f64>] {
        &self.covariance
    }

    /// Number of eigenvalues raised to the floor.
    pub fn floored_eigenvalues(&self) -> usize {
        self.floored
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.factor.nrows();
        let z = DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let y = &self.factor * z;
        self.slot.iter().map(|&s| self.scale * y[s]).collect()
    }

    /// Draw number `index` for `seed`.
    pub fn draw(&self, seed: u64, index: u64) -> FieldIncrementSample {
        let values = self.sample(&mut substream(seed, index));
        FieldIncrementSample {
            points: self.points.clone(),
            dt: self.dt,
            values,
            covariance_used: self.covariance.clone(),
        }
    }
}

fn dist(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

pub fn sample_field_increments(points: &[Point], model: &ModelParams, dt: f64, seed: u64) -> Result<FieldIncrementSample> {
    Ok(FieldSampler::new(points, model, dt)?.draw(seed, 0))
}

/// Two point masses `mass` apart by `separation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoherenceSetup {
    pub mass: f64,
    pub separation: f64,
    pub model: ModelParams,
}

impl DecoherenceSetup {
    pub fn new(mass: f64, separation: f64, model: ModelParams) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::invalid(format!("mass must be positive, got {mass}")));
        }
        if !(separation.is_finite() && separation >= 0.0) {
            return Err(Error::invalid(format!("separation must be non-negative, got {separation}")));
        }
        Ok(Self {
            mass,
            separation,
            model,
        })
    }
}

/// Decay rate of the off-diagonal element between the two positions,
/// Γ = m²·(𝒟(0) − 𝒟(d))/ħ².
pub fn decoherence_rate(setup: &DecoherenceSetup) -> f64 {
    let hbar = setup.model.constants().hbar;
    let u = setup.separation / setup.model.sigma();
    let complement = kernel_shape_complement(setup.model.kind(), u).expect("separation validated");
    let m_over_hbar = setup.mass / hbar;
    m_over_hbar * m_over_hbar * kernel_zero(&setup.model) * complement
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherenceEstimate {
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
    /// Standard error of the modulus (delta method).
    pub stderr: f64,
    pub n_samples: u64,
}

impl CoherenceEstimate {
    pub fn mean(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Mergeable first and second moments of a pair (x, y).
#[derive(Debug, Clone, Copy, Default)]
struct PairMoments {
    n: f64,
    mx: f64,
    my: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

impl PairMoments {
    fn push(&mut self, x: f64, y: f64) {
        self.n += 1.0;
        let dx = x - self.mx;
        let dy = y - self.my;
        self.mx += dx / self.n;
        self.my += dy / self.n;
        self.sxx += dx * (x - self.mx);
        self.syy += dy * (y - self.my);
        self.sxy += dx * (y - self.my);
    }

    fn merge(self, o: PairMoments) -> PairMoments {
        if self.n == 0.0 {
            return o;
        }
        if o.n == 0.0 {
            return self;
        }
        let n = self.n + o.n;
        let dx = o.mx - self.mx;
        let dy = o.my - self.my;
        let w = self.n * o.n / n;
        PairMoments {
            n,
            mx: self.mx + dx * o.n / n,
            my: self.my + dy * o.n / n,
            sxx: self.sxx + o.sxx + dx * dx * w,
            syy: self.syy + o.syy + dy * dy * w,
            sxy: self.sxy + o.sxy + dx * dy * w,
        }
    }
}

/// Noise average of exp(i(θ₁ − θ₂)), where each mass picks up the phase
/// θᵢ = −(m/ħ)∫φ(xᵢ)dτ = −(mc²/ħ)·δt(xᵢ) over a time `t`.
pub fn decoherence_mc(setup: &DecoherenceSetup, t: f64, n: u64, seed: u64) -> Result<CoherenceEstimate> {
    if n < MIN_DECOHERENCE_SAMPLES {
        return Err(Error::invalid(format!(
            "need at least {MIN_DECOHERENCE_SAMPLES} samples, got {n}"
        )));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::invalid(format!("t must be positive, got {t}")));
    }
    let points = [[0.0, 0.0, 0.0], [setup.separation, 0.0, 0.0]];
    let sampler = FieldSampler::new(&points, &setup.model, t)?;
    let c = setup.model.constants();
    let phase_per_second = setup.mass * c.c * c.c / c.hbar;

    let parts: Vec<_> = blocks(n as usize).collect();
    let m = parts
        .par_iter()
        .map(|&(block, _, len)| {
            let mut rng = substream(seed, block);
            let mut acc = PairMoments::default();
            for _ in 0..len {
                let dt = sampler.sample(&mut rng);
                let dtheta = -phase_per_second * (dt[0] - dt[1]);
                acc.push(dtheta.cos(), dtheta.sin());
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(PairMoments::default(), PairMoments::merge);

    let modulus = m.mx.hypot(m.my);
    let denom = m.n - 1.0;
    let (vxx, vyy, vxy) = (m.sxx / denom, m.syy / denom, m.sxy / denom);
    let stderr = if modulus > 0.0 {
        let (a, b) = (m.mx / modulus, m.my / modulus);
        ((a * a * vxx + b * b * vyy + 2.0 * a * b * vxy).max(0.0) / m.n).sqrt()
    } else {
        ((vxx + vyy) / m.n).sqrt()
    };
    Ok(CoherenceEstimate {
        re: m.mx,
        im: m.my,
        modulus,
        stderr,
        n_samples: n,
    })
}
