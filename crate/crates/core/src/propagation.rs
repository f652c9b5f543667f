//! Received power from isotropic sources under power-law path loss
//! `l(r) = K r^-alpha` with optional log-normal shadowing.
//!
//! Distances feeding the path loss are in meters while point coordinates
//! are planar km; conversions happen here. Contributions from multiple
//! sources always superpose in the linear milliwatt domain.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointprocess::PointSet;
use crate::units::{dbm_to_mw, mw_to_dbm};

pub const SPEED_OF_LIGHT_M_S: f64 = 2.99792458e8;

/// Far-field reference distance of a half-wavelength dipole, `c / 2f`.
pub fn default_reference_distance_m(f_hz: f64) -> f64 {
    SPEED_OF_LIGHT_M_S / (2.0 * f_hz)
}

/// Thermal noise floor integrated over `bandwidth_hz`:
/// `-174 dBm/Hz + 10 log10(B)`.
pub fn thermal_noise_floor_dbm(bandwidth_hz: f64) -> f64 {
    -174.0 + 10.0 * bandwidth_hz.log10()
}

/// Free-space path loss constant `K = (c / (4 pi f r0))^2 * r0^alpha`,
/// for distances in meters.
pub fn free_space_k(f_hz: f64, r0_m: f64, alpha: f64) -> Result<f64> {
    if !(f_hz > 0.0) || !f_hz.is_finite() {
        return Err(Error::param("f_hz", format!("must be > 0, got {f_hz}")));
    }
    if !(r0_m > 0.0) || !r0_m.is_finite() {
        return Err(Error::param("r0_m", format!("must be > 0, got {r0_m}")));
    }
    check_alpha(alpha)?;
    let friis = SPEED_OF_LIGHT_M_S / (4.0 * std::f64::consts::PI * f_hz * r0_m);
    Ok(friis * friis * r0_m.powf(alpha))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::param("alpha", format!("must be > 0, got {alpha}")));
    }
    if !(2.0..=4.0).contains(&alpha) {
        log::warn!("path loss exponent alpha = {alpha} outside the typical [2, 4] range");
    }
    Ok(())
}

/// Power-law path loss `l(r) = K r^-alpha`, `r` in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossModel {
    pub alpha: f64,
    pub k: f64,
    /// Near-field clamp: distances below this are clamped before evaluating
    /// the loss (the model is invalid inside the far-field reference).
    /// Zero disables clamping.
    pub r0_m: f64,
}

impl PathLossModel {
    pub fn new(alpha: f64, k: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::param("k", format!("must be > 0, got {k}")));
        }
        Ok(PathLossModel { alpha, k, r0_m: 0.0 })
    }

    pub fn with_near_field_clamp(mut self, r0_m: f64) -> Self {
        self.r0_m = r0_m;
        self
    }

    /// Free-space model at carrier `f_hz`; `r0_m` defaults to `c / 2f` and
    /// doubles as the near-field clamp.
    pub fn free_space(f_hz: f64, r0_m: Option<f64>, alpha: f64) -> Result<Self> {
        let r0 = r0_m.unwrap_or_else(|| default_reference_distance_m(f_hz));
        let k = free_space_k(f_hz, r0, alpha)?;
        Ok(PathLossModel { alpha, k, r0_m: r0 })
    }

    /// Linear loss factor at distance `r_m` (clamped to `r0_m`).
    pub fn loss_linear(&self, r_m: f64) -> f64 {
        let r = r_m.max(self.r0_m);
        self.k * r.powf(-self.alpha)
    }

    /// Loss in dB: `10 log10 K - 10 alpha log10 r`. Errors on `r_m <= 0`;
    /// distances in `(0, r0_m)` are clamped to `r0_m`.
    pub fn path_loss_db(&self, r_m: f64) -> Result<f64> {
        if !(r_m > 0.0) {
            return Err(Error::param(
                "r_m",
                format!("path loss is singular at r = {r_m}; distance must be > 0"),
            ));
        }
        let r = r_m.max(self.r0_m);
        Ok(10.0 * self.k.log10() - 10.0 * self.alpha * r.log10())
    }
}

/// Log-normal shadowing: `Z_dB ~ N(mu, sigma^2)`, `Z = 10^(Z_dB / 10)`,
/// drawn i.i.d. per (source, evaluation point).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShadowingModel {
    pub mu_db: f64,
    pub sigma_db: f64,
    pub enabled: bool,
}

impl ShadowingModel {
    pub fn off() -> Self {
        ShadowingModel {
            mu_db: 0.0,
            sigma_db: 0.0,
            enabled: false,
        }
    }

    pub fn log_normal(mu_db: f64, sigma_db: f64) -> Result<Self> {
        if !(sigma_db >= 0.0) || !sigma_db.is_finite() || !mu_db.is_finite() {
            return Err(Error::param(
                "sigma_db",
                format!("shadowing needs finite mu and sigma >= 0, got mu={mu_db}, sigma={sigma_db}"),
            ));
        }
        Ok(ShadowingModel {
            mu_db,
            sigma_db,
            enabled: true,
        })
    }
}

/// A set of co-channel isotropic sources with a common transmit power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceField {
    pub sources: PointSet,
    pub tx_power_dbm: f64,
}

impl SourceField {
    pub fn new(sources: PointSet, tx_power_dbm: f64) -> Result<Self> {
        if !tx_power_dbm.is_finite() {
            return Err(Error::param("tx_power_dbm", "must be finite"));
        }
        Ok(SourceField {
            sources,
            tx_power_dbm,
        })
    }
}

/// Received power in dBm at `at` (planar km), summing every source's
/// `P_T * l(r_i) / Z_i` in the linear milliwatt domain, plus the noise
/// floor.
///
/// `noise_floor_dbm` is added in the linear domain so empty regions stay
/// finite; pass `f64::NEG_INFINITY` to disable it. With shadowing disabled
/// the result is deterministic and `seed` is unused; with shadowing enabled
/// the per-source draws come from `ChaCha8Rng::seed_from_u64(seed)` in
/// source order. An empty source field returns the floor unchanged.
pub fn received_power_dbm(
    field: &SourceField,
    path: &PathLossModel,
    shadow: &ShadowingModel,
    noise_floor_dbm: f64,
    at: (f64, f64),
    seed: u64,
) -> f64 {
    if field.sources.is_empty() {
        return noise_floor_dbm;
    }
    let tx_mw = dbm_to_mw(field.tx_power_dbm);
    let mut rng_and_normal = if shadow.enabled {
        let normal = Normal::new(shadow.mu_db, shadow.sigma_db).expect("validated sigma");
        Some((ChaCha8Rng::seed_from_u64(seed), normal))
    } else {
        None
    };
    let mut total_mw = dbm_to_mw(noise_floor_dbm);
    for &(sx, sy) in &field.sources.points {
        let dx_m = (at.0 - sx) * 1000.0;
        let dy_m = (at.1 - sy) * 1000.0;
        let r_m = dx_m.hypot(dy_m);
        let mut contrib = tx_mw * path.loss_linear(r_m);
        if let Some((rng, normal)) = rng_and_normal.as_mut() {
            let z_db = normal.sample(rng);
            contrib /= dbm_to_mw(z_db);
        }
        total_mw += contrib;
    }
    mw_to_dbm(total_mw)
}
