//! TOML scenario configuration with CLI flag overrides.
//!
//! A config file must be complete (every section present; unknown keys
//! rejected); without one, built-in defaults apply. Explicit flags win
//! over either. The path loss resolves last: an explicit `k` is used as
//! given, otherwise `K` derives from `f_hz` as free space with
//! `r0 = c / 2f`.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use rfmap_core::pointprocess::Region;
use rfmap_core::powermap::ScenarioConfig;
use rfmap_core::propagation::{thermal_noise_floor_dbm, PathLossModel, ShadowingModel};

use crate::error::{CliError, CliResult};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: u64,
    pub region: RegionSection,
    pub sources: SourcesSection,
    pub sensors: SensorsSection,
    pub path_loss: PathLossSection,
    pub shadowing: ShadowingSection,
    pub grid: GridSection,
    pub band: BandSection,
    #[serde(default)]
    pub fusion: FusionSection,
    #[serde(default)]
    pub noise: NoiseSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSection {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourcesSection {
    pub lambda_per_km2: f64,
    pub tx_power_dbm: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorsSection {
    pub lambda_per_km2: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLossSection {
    pub alpha: f64,
    pub f_hz: Option<f64>,
    pub k: Option<f64>,
    pub r0_m: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShadowingSection {
    pub enabled: bool,
    pub mu_db: f64,
    pub sigma_db: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandSection {
    pub f_lo_hz: f64,
    pub f_hi_hz: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionSection {
    /// Co-location merge radius in meters (default 1).
    pub merge_radius_m: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    /// Explicit floor in dBm; thermal noise over the band when omitted.
    pub floor_dbm: Option<f64>,
}

/// Path-loss inputs kept unresolved until after flag overrides.
#[derive(Debug, Clone, Copy)]
pub struct PathParams {
    pub alpha: f64,
    pub f_hz: Option<f64>,
    pub k: Option<f64>,
    pub r0_m: Option<f64>,
}

impl PathParams {
    pub fn resolve(&self) -> CliResult<PathLossModel> {
        match (self.k, self.f_hz) {
            (Some(k), _) => {
                let model = PathLossModel::new(self.alpha, k)?;
                Ok(model.with_near_field_clamp(self.r0_m.unwrap_or(0.0)))
            }
            (None, Some(f)) => Ok(PathLossModel::free_space(f, self.r0_m, self.alpha)?),
            (None, None) => Err(CliError::config(
                "path loss needs either f_hz (free-space K) or an explicit k",
            )),
        }
    }
}

/// Scenario parameters before path-loss resolution.
#[derive(Debug, Clone)]
pub struct ScenarioDraft {
    pub region: Region,
    pub lambda_sources_per_km2: f64,
    pub lambda_sensors_per_km2: f64,
    pub tx_power_dbm: f64,
    pub path: PathParams,
    pub shadow: ShadowingModel,
    /// None means thermal noise over the band.
    pub noise_floor_dbm: Option<f64>,
    pub grid_nx: usize,
    pub grid_ny: usize,
    pub f_lo_hz: f64,
    pub f_hi_hz: f64,
    pub merge_radius_km: f64,
    pub seed: u64,
}

impl Default for ScenarioDraft {
    fn default() -> Self {
        let d = ScenarioConfig::default();
        ScenarioDraft {
            region: d.region,
            lambda_sources_per_km2: d.lambda_sources_per_km2,
            lambda_sensors_per_km2: d.lambda_sensors_per_km2,
            tx_power_dbm: d.tx_power_dbm,
            path: PathParams {
                alpha: 3.0,
                f_hz: Some(1e9),
                k: None,
                r0_m: None,
            },
            shadow: d.shadow,
            noise_floor_dbm: None,
            grid_nx: d.grid_nx,
            grid_ny: d.grid_ny,
            f_lo_hz: d.f_lo_hz,
            f_hi_hz: d.f_hi_hz,
            merge_radius_km: d.merge_radius_km,
            seed: d.seed,
        }
    }
}

impl ScenarioDraft {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        let file: FileConfig = toml::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let region = Region::new(
            file.region.x_min,
            file.region.x_max,
            file.region.y_min,
            file.region.y_max,
        )?;
        let shadow = if file.shadowing.enabled {
            ShadowingModel::log_normal(file.shadowing.mu_db, file.shadowing.sigma_db)?
        } else {
            ShadowingModel::off()
        };
        Ok(ScenarioDraft {
            region,
            lambda_sources_per_km2: file.sources.lambda_per_km2,
            lambda_sensors_per_km2: file.sensors.lambda_per_km2,
            tx_power_dbm: file.sources.tx_power_dbm,
            path: PathParams {
                alpha: file.path_loss.alpha,
                f_hz: file.path_loss.f_hz,
                k: file.path_loss.k,
                r0_m: file.path_loss.r0_m,
            },
            shadow,
            noise_floor_dbm: file.noise.floor_dbm,
            grid_nx: file.grid.nx,
            grid_ny: file.grid.ny,
            f_lo_hz: file.band.f_lo_hz,
            f_hi_hz: file.band.f_hi_hz,
            merge_radius_km: file.fusion.merge_radius_m.unwrap_or(1.0) / 1000.0,
            seed: file.seed,
        })
    }

    pub fn resolve(&self) -> CliResult<ScenarioConfig> {
        let path = self.path.resolve()?;
        let noise_floor_dbm = self
            .noise_floor_dbm
            .unwrap_or_else(|| thermal_noise_floor_dbm(self.f_hi_hz - self.f_lo_hz));
        let config = ScenarioConfig {
            region: self.region,
            lambda_sources_per_km2: self.lambda_sources_per_km2,
            lambda_sensors_per_km2: self.lambda_sensors_per_km2,
            tx_power_dbm: self.tx_power_dbm,
            path,
            shadow: self.shadow,
            noise_floor_dbm,
            grid_nx: self.grid_nx,
            grid_ny: self.grid_ny,
            f_lo_hz: self.f_lo_hz,
            f_hi_hz: self.f_hi_hz,
            merge_radius_km: self.merge_radius_km,
            seed: self.seed,
        };
        config.validate()?;
        Ok(config)
    }
}
