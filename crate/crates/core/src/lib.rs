//! Clock-time uncertainty induced by spontaneous-collapse noise fields.
//!
//! The CSL and Diósi-Penrose (DP) models both describe a white-in-time
//! Gaussian field whose spatial correlation is a smeared kernel 𝒟. Read as
//! a fluctuating Newtonian potential, that field makes proper time jitter:
//! a clock occupying a volume 𝒱 accumulates a variance ⟨δt²⟩ = τ·t. This
//! crate evaluates the kernels, the fluctuation strength τ for spherical
//! clocks, stochastic drift and decoherence cross-checks, and comparisons
//! against real clock stability envelopes.

pub mod cli;
pub mod config;
pub mod error;
pub mod kernels;
pub mod noise_sim;
pub mod params;
pub mod quadrature;
pub mod rng;
pub mod scan;
pub mod stability;
pub mod tau;

pub use error::{Error, Result};
pub use kernels::{kernel_dp_fourier, kernel_shape, kernel_smeared, kernel_zero};
pub use params::{check_bounds, BoundsReport, ModelKind, ModelParams, PhysicalConstants};
pub use stability::StabilityModel;
pub use tau::{ClockGeometry, TauMethod, TauResult};
