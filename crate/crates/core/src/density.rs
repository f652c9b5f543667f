//! Sensor deployment density from Boolean-model coverage.
//!
//! A sensor detects a source when the received power is within `A` dB of
//! the transmit power; under `l(r) = K r^-alpha` with log-normal shadowing
//! that is a disk of random radius `R = (K 10^(A/10))^(1/alpha) * Z^(-1/alpha)`
//! around the sensor. Disks on a Poisson sensor process form a Boolean
//! model, whose vacancy probability `exp(-lambda E|S|)` turns a coverage
//! confidence `beta` into a minimum density. `E|S|` has a closed form in
//! the shadowing moments; [`monte_carlo_coverage`] cross-checks the whole
//! chain geometrically.
//!
//! Unit convention: `K` is defined for distances in meters, densities are
//! per km²; `E|S|` is computed in m² and converted (divide by 1e6).

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::pointprocess::{derive_seed, sample_poisson_count, Region};
use crate::propagation::{free_space_k, default_reference_distance_m, PathLossModel, ShadowingModel};

/// `zeta = ln(10) / 10`, the dB-to-natural-log scale factor.
pub const ZETA: f64 = std::f64::consts::LN_10 / 10.0;

/// Gaussian quantile at 0.9999; bounds the largest disk radius for the
/// Monte Carlo edge padding.
const Z_SCORE_P9999: f64 = 3.719016485455709;

/// Test points evaluated against each independent sensor realization in
/// the Monte Carlo estimator.
const MC_POINTS_PER_BATCH: usize = 100;

/// Inputs to the density formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityParams {
    /// Target coverage confidence, in (0, 1).
    pub beta: f64,
    /// Relative power threshold: a sensor must sit within `-a_db` dB of
    /// the source power. Positive magnitude.
    pub a_db: f64,
    pub path: PathLossModel,
    pub shadow: ShadowingModel,
}

impl DensityParams {
    pub fn validate(&self) -> Result<()> {
        check_beta(self.beta)?;
        if !(self.a_db > 0.0) || !self.a_db.is_finite() {
            return Err(Error::param(
                "a_db",
                format!("must be > 0 (a positive dB deficit), got {}", self.a_db),
            ));
        }
        if !(self.path.alpha > 0.0) {
            return Err(Error::param("alpha", "must be > 0"));
        }
        if !(self.path.k > 0.0) {
            return Err(Error::param("k", "must be > 0"));
        }
        Ok(())
    }

    /// Shadowing moments used by the closed forms; a disabled model is
    /// `mu = sigma = 0`.
    fn moments(&self) -> (f64, f64) {
        if self.shadow.enabled {
            (self.shadow.mu_db, self.shadow.sigma_db)
        } else {
            (0.0, 0.0)
        }
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::param(
            "beta",
            format!("must lie strictly in (0, 1), got {beta}"),
        ));
    }
    Ok(())
}

/// Probability that a point is covered by at least one fixed-radius disk:
/// `1 - exp(-lambda_s * pi * r^2)`.
pub fn coverage_probability_fixed_r(lambda_s: f64, r_km: f64) -> f64 {
    1.0 - (-lambda_s * std::f64::consts::PI * r_km * r_km).exp()
}

/// Minimum density so that the fixed-radius coverage probability exceeds
/// `beta`: `-ln(1 - beta) / (pi r^2)`.
pub fn min_density_fixed_r(beta: f64, r_km: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(r_km > 0.0) {
        return Err(Error::param("r_km", "must be > 0"));
    }
    Ok(-(1.0 - beta).ln() / (std::f64::consts::PI * r_km * r_km))
}

/// Disk radius without shadowing: `(K 10^(A/10))^(1/alpha)`, in km.
pub fn deterministic_radius_km(path: &PathLossModel, a_db: f64) -> f64 {
    (path.k * 10f64.powf(a_db / 10.0)).powf(1.0 / path.alpha) / 1000.0
}

/// Mean coverage-disk area `E|S|` in km²:
/// `pi K^(2/alpha) 10^(A/(5 alpha)) exp(-2 zeta mu / alpha + 2 zeta^2 sigma^2 / alpha^2)`.
pub fn expected_coverage_area_km2(params: &DensityParams) -> Result<f64> {
    params.validate()?;
    let alpha = params.path.alpha;
    let (mu, sigma) = params.moments();
    let area_m2 = std::f64::consts::PI
        * params.path.k.powf(2.0 / alpha)
        * 10f64.powf(params.a_db / (5.0 * alpha))
        * (-2.0 * ZETA * mu / alpha + 2.0 * ZETA * ZETA * sigma * sigma / (alpha * alpha)).exp();
    Ok(area_m2 / 1e6)
}

/// Coverage probability under random (shadowed) radii:
/// `1 - exp(-lambda_s E|S|)`.
pub fn coverage_probability(lambda_s: f64, params: &DensityParams) -> Result<f64> {
    Ok(1.0 - (-lambda_s * expected_coverage_area_km2(params)?).exp())
}

/// Minimum sensor density meeting the relative power constraint with
/// confidence `beta`: `-ln(1 - beta) / E|S|`, in sensors per km².
pub fn min_density_power_constraint(params: &DensityParams) -> Result<f64> {
    params.validate()?;
    Ok(-(1.0 - params.beta).ln() / expected_coverage_area_km2(params)?)
}

/// Density as a function of `beta` over a grid; monotone increasing.
pub fn sweep_beta(params: &DensityParams, betas: &[f64]) -> Result<Vec<(f64, f64)>> {
    betas
        .iter()
        .map(|&beta| {
            let p = DensityParams { beta, ..*params };
            Ok((beta, min_density_power_constraint(&p)?))
        })
        .collect()
}

/// Density as a function of carrier frequency at fixed `beta`; `K` is
/// rederived per frequency as free space with `r0 = c / 2f`.
pub fn sweep_frequency(params: &DensityParams, freqs_hz: &[f64]) -> Result<Vec<(f64, f64)>> {
    freqs_hz
        .iter()
        .map(|&f| {
            let k = free_space_k(f, default_reference_distance_m(f), params.path.alpha)?;
            let p = DensityParams {
                path: PathLossModel {
                    k,
                    ..params.path
                },
                ..*params
            };
            Ok((f, min_density_power_constraint(&p)?))
        })
        .collect()
}

/// Largest radius the Monte Carlo pads the sampling region by (the 0.9999
/// quantile of the radius distribution).
fn pad_radius_km(params: &DensityParams) -> f64 {
    let (mu, sigma) = params.moments();
    let factor = 10f64.powf((Z_SCORE_P9999 * sigma - mu) / (10.0 * params.path.alpha));
    deterministic_radius_km(&params.path, params.a_db) * factor.max(1.0)
}

/// Empirical coverage probability: drops uniformly random test sources
/// into `region` and checks membership in the union of shadowed-radius
/// disks around an independently sampled sensor process.
///
/// Each batch of [`MC_POINTS_PER_BATCH`] test points sees a fresh sensor
/// realization, sampled on the region dilated by the 99.99th-percentile
/// radius so boundary points face the stationary process. Batches run in
/// parallel under the `parallel` feature with integer reduction, so the
/// estimate is seed-deterministic either way.
pub fn monte_carlo_coverage(
    lambda_s: f64,
    params: &DensityParams,
    region: Region,
    n_points: usize,
    seed: u64,
) -> Result<f64> {
    let batches = mc_batch_plan(lambda_s, params, region, n_points)?;
    let covered: Vec<u64> = exec::map_indexed(batches.len(), |b| {
        mc_coverage_batch(lambda_s, params, region, batches[b], derive_seed(seed, b as u64))
    });
    Ok(covered.iter().sum::<u64>() as f64 / n_points as f64)
}

/// Always-sequential variant of [`monte_carlo_coverage`]; same estimate.
pub fn monte_carlo_coverage_seq(
    lambda_s: f64,
    params: &DensityParams,
    region: Region,
    n_points: usize,
    seed: u64,
) -> Result<f64> {
    let batches = mc_batch_plan(lambda_s, params, region, n_points)?;
    let covered: Vec<u64> = exec::map_indexed_seq(batches.len(), |b| {
        mc_coverage_batch(lambda_s, params, region, batches[b], derive_seed(seed, b as u64))
    });
    Ok(covered.iter().sum::<u64>() as f64 / n_points as f64)
}

fn mc_batch_plan(
    lambda_s: f64,
    params: &DensityParams,
    region: Region,
    n_points: usize,
) -> Result<Vec<usize>> {
    params.validate()?;
    region.validate()?;
    if !(lambda_s >= 0.0) {
        return Err(Error::param("lambda_s", "must be >= 0"));
    }
    if n_points == 0 {
        return Err(Error::param("n_points", "must be >= 1"));
    }
    let n_batches = n_points.div_ceil(MC_POINTS_PER_BATCH);
    Ok((0..n_batches)
        .map(|b| MC_POINTS_PER_BATCH.min(n_points - b * MC_POINTS_PER_BATCH))
        .collect())
}

fn mc_coverage_batch(
    lambda_s: f64,
    params: &DensityParams,
    region: Region,
    points: usize,
    seed: u64,
) -> u64 {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let padded = region.dilated(pad_radius_km(params));
    let n_sensors = sample_poisson_count(&mut rng, lambda_s * padded.area_km2());
    let r_det_km = deterministic_radius_km(&params.path, params.a_db);
    let normal = params
        .shadow
        .enabled
        .then(|| Normal::new(params.shadow.mu_db, params.shadow.sigma_db).expect("valid sigma"));
    let sensors: Vec<(f64, f64, f64)> = (0..n_sensors)
        .map(|_| {
            let x = rng.random_range(padded.x_min..padded.x_max);
            let y = rng.random_range(padded.y_min..padded.y_max);
            let r = match &normal {
                Some(n) => {
                    let z_db = n.sample(&mut rng);
                    r_det_km * 10f64.powf(-z_db / (10.0 * params.path.alpha))
                }
                None => r_det_km,
            };
            (x, y, r * r)
        })
        .collect();
    let mut covered = 0u64;
    for _ in 0..points {
        let px = rng.random_range(region.x_min..region.x_max);
        let py = rng.random_range(region.y_min..region.y_max);
        if sensors.iter().any(|&(sx, sy, r2)| {
            let dx = px - sx;
            let dy = py - sy;
            dx * dx + dy * dy <= r2
        }) {
            covered += 1;
        }
    }
    covered
}

/// Two-column CSV with a unit-bearing header.
pub fn write_curve_csv<W: Write>(
    mut w: W,
    x_header: &str,
    y_header: &str,
    curve: &[(f64, f64)],
) -> Result<()> {
    writeln!(w, "{x_header},{y_header}")?;
    for (x, y) in curve {
        writeln!(w, "{x:?},{y:?}")?;
    }
    Ok(())
}
