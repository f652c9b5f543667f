//! Spectrum cartography core.
//!
//! Simulates sub-6 GHz RF environments, reconstructs RF power maps from
//! irregularly spaced sensor measurements via Delaunay planar interpolation,
//! scores reconstructions against ground truth, and computes the sensor
//! deployment density required for a target detection confidence from
//! Boolean-model coverage with log-normal shadowing.
//!
//! Modules follow the processing chain:
//!
//! * [`pointprocess`] — reproducible homogeneous Poisson point processes
//!   over rectangular regions (source and sensor layouts).
//! * [`propagation`] — power-law path loss `K r^-alpha` with optional
//!   log-normal shadowing; linear-domain superposition of sources.
//! * [`periodogram`] — Welch-averaged PSD estimation from raw IQ blocks
//!   and band-power integration.
//! * [`interpolation`] — Delaunay triangulation with per-triangle planar
//!   coefficients, evaluated on dBm values.
//! * [`powermap`] — measurement fusion, map construction, MSE scoring and
//!   end-to-end scenario simulation.
//! * [`density`] — coverage-probability closed forms, deployment density
//!   bounds, parameter sweeps and a Monte Carlo cross-check.
//!
//! All randomness derives from explicit `u64` seeds through labeled
//! sub-streams (see [`pointprocess::derive_seed`]); every operation is
//! bit-reproducible for a fixed seed, with or without the `parallel`
//! feature.

pub mod density;
pub mod error;
pub mod exec;
pub mod grid;
pub mod interpolation;
pub mod periodogram;
pub mod pointprocess;
pub mod powermap;
pub mod propagation;
pub mod units;

pub use error::{Error, Result};
