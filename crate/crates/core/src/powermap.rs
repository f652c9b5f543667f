//! RF power maps: fuse tagged periodogram records into per-location dBm
//! values, build maps by planar interpolation, score them against ground
//! truth, and run the end-to-end simulated-environment experiment.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{GridField, GridSpec};
use crate::interpolation::triangulate;
use crate::periodogram::{band_power_dbm, Psd};
use crate::pointprocess::{derive_seed, sample_ppp, streams, PointSet, Region};
use crate::propagation::{received_power_dbm, PathLossModel, ShadowingModel, SourceField};
use crate::units::dbm_mean;

/// Method tag for maps built by triangulated planar interpolation.
pub const METHOD_PLANAR: &str = "delaunay-planar";
/// Method tag for maps evaluated directly from the propagation model.
pub const METHOD_MODEL: &str = "model-truth";

/// Shadowing seed labels: grid nodes use the node index, sensor readings
/// start here so the two ranges never collide.
const SENSOR_SHADOW_LABEL_BASE: u64 = 1 << 32;

/// A measurement check-in: who, when, where, and the estimated PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodogramRecord {
    pub sensor_id: String,
    /// UTC seconds.
    pub timestamp: f64,
    /// Planar km within the query region.
    pub x_km: f64,
    pub y_km: f64,
    pub psd: Psd,
    pub gain_db: f64,
}

/// Wire form of a record, one JSON object per line:
/// `{"sensor_id": str, "timestamp": f64, "lat": f64, "lon": f64,
///   "f_start_hz": f64, "bin_hz": f64, "psd_dbm_per_hz": [f64,..],
///   "gain_db": f64}`.
///
/// How `lat`/`lon` map to planar km is the caller's choice (geographic
/// records need a projection; simulator exports already carry km).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireRecord {
    pub sensor_id: String,
    pub timestamp: f64,
    pub lat: f64,
    pub lon: f64,
    pub f_start_hz: f64,
    pub bin_hz: f64,
    pub psd_dbm_per_hz: Vec<f64>,
    pub gain_db: f64,
}

impl WireRecord {
    /// Converts to a planar record through `to_km(lat, lon) -> (x, y)`.
    pub fn into_record<F>(self, to_km: F) -> PeriodogramRecord
    where
        F: Fn(f64, f64) -> (f64, f64),
    {
        let (x_km, y_km) = to_km(self.lat, self.lon);
        PeriodogramRecord {
            sensor_id: self.sensor_id,
            timestamp: self.timestamp,
            x_km,
            y_km,
            psd: Psd {
                f_start_hz: self.f_start_hz,
                resolution_hz: self.bin_hz,
                values_dbm_per_hz: self.psd_dbm_per_hz,
                calibration_mw_per_unit: 1.0,
            },
            gain_db: self.gain_db,
        }
    }
}

/// Reads a JSON-lines record file; blank lines are skipped, parse failures
/// carry the 1-based line number.
pub fn read_records_jsonl(path: &Path) -> Result<Vec<WireRecord>> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: WireRecord =
            serde_json::from_str(&line).map_err(|source| Error::RecordParse {
                line: i + 1,
                source,
            })?;
        records.push(rec);
    }
    Ok(records)
}

pub fn write_records_jsonl<W: Write>(mut w: W, records: &[WireRecord]) -> Result<()> {
    for rec in records {
        serde_json::to_writer(&mut w, rec)?;
        writeln!(w)?;
    }
    Ok(())
}

/// How co-located measurements combine into one value. `Mean` (in the
/// linear domain) is the default and the only mode the release gate
/// exercises; the alternatives exist for comparison.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FusionMode {
    #[default]
    Mean,
    Median,
    Max,
}

impl std::str::FromStr for FusionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mean" => Ok(FusionMode::Mean),
            "median" => Ok(FusionMode::Median),
            "max" => Ok(FusionMode::Max),
            other => Err(Error::param(
                "fusion mode",
                format!("unknown mode '{other}' (mean, median, max)"),
            )),
        }
    }
}

/// What a map is asked for: band, time window, region and mesh resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub f_lo_hz: f64,
    pub f_hi_hz: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub region: Region,
    pub grid_nx: usize,
    pub grid_ny: usize,
    /// Records closer than this are one location. Default 1 m.
    #[serde(default = "default_merge_radius_km")]
    pub merge_radius_km: f64,
    #[serde(default)]
    pub fusion_mode: FusionMode,
}

fn default_merge_radius_km() -> f64 {
    1e-3
}

impl QuerySpec {
    pub fn validate(&self) -> Result<()> {
        self.region.validate()?;
        if !(self.f_hi_hz > self.f_lo_hz) {
            return Err(Error::param(
                "band",
                format!("f_hi ({}) must exceed f_lo ({})", self.f_hi_hz, self.f_lo_hz),
            ));
        }
        if !(self.t_end >= self.t_start) {
            return Err(Error::param(
                "time window",
                format!("t_end ({}) must be >= t_start ({})", self.t_end, self.t_start),
            ));
        }
        if self.grid_nx < 2 || self.grid_ny < 2 {
            return Err(Error::param(
                "grid",
                format!("grid dims must be >= 2, got {}x{}", self.grid_nx, self.grid_ny),
            ));
        }
        if !(self.merge_radius_km >= 0.0) {
            return Err(Error::param("merge_radius_km", "must be >= 0"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.region, self.grid_nx, self.grid_ny)
    }
}

/// Records dropped by [`fuse_records`], by reason.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DroppedCounts {
    pub out_of_band: usize,
    pub out_of_window: usize,
    pub out_of_region: usize,
}

impl DroppedCounts {
    pub fn total(&self) -> usize {
        self.out_of_band + self.out_of_window + self.out_of_region
    }
}

/// Fusion output: one `(x, y, z_dbm)` per distinct location.
#[derive(Debug, Clone)]
pub struct Fused {
    pub triples: Vec<(f64, f64, f64)>,
    pub dropped: DroppedCounts,
}

/// Integrates each usable record over the query band and merges co-located
/// results (linear-domain mean).
///
/// A record is usable when its timestamp falls in the window, its location
/// in the region, and at least one PSD bin center in the band; everything
/// else is dropped and counted. Output is canonically ordered, so any
/// permutation of the input yields identical triples.
pub fn fuse_records(records: &[PeriodogramRecord], query: &QuerySpec) -> Result<Fused> {
    query.validate()?;
    let mut dropped = DroppedCounts::default();
    let mut readings: Vec<(f64, f64, f64)> = Vec::with_capacity(records.len());
    for rec in records {
        if !(rec.timestamp >= query.t_start && rec.timestamp <= query.t_end) {
            dropped.out_of_window += 1;
            continue;
        }
        if !query.region.contains(rec.x_km, rec.y_km) {
            dropped.out_of_region += 1;
            continue;
        }
        match band_power_dbm(&rec.psd, query.f_lo_hz, query.f_hi_hz) {
            Ok(z) => readings.push((rec.x_km, rec.y_km, z)),
            Err(Error::EmptyBand { .. }) | Err(Error::EmptyInput(_)) => {
                dropped.out_of_band += 1;
            }
            Err(e) => return Err(e),
        }
    }
    if readings.is_empty() {
        return Err(Error::EmptyInput("no usable records in the query window"));
    }
    Ok(Fused {
        triples: merge_colocated(&readings, query.merge_radius_km, query.fusion_mode),
        dropped,
    })
}

/// Merges readings within `radius_km` of each other (connected components)
/// into one triple at the member centroid, values combined per `mode`.
/// Members are canonicalized before reduction, so the result is
/// independent of input order; a singleton passes through bit-exactly.
pub fn merge_colocated(
    readings: &[(f64, f64, f64)],
    radius_km: f64,
    mode: FusionMode,
) -> Vec<(f64, f64, f64)> {
    let n = readings.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        let mut root = i;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = i;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    let r2 = radius_km * radius_km;
    for i in 0..n {
        for j in i + 1..n {
            let dx = readings[i].0 - readings[j].0;
            let dy = readings[i].1 - readings[j].1;
            if dx * dx + dy * dy <= r2 {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut clusters: Vec<Vec<(f64, f64, f64)>> = vec![Vec::new(); n];
    for i in 0..n {
        let root = find(&mut parent, i);
        clusters[root].push(readings[i]);
    }
    let mut triples: Vec<(f64, f64, f64)> = clusters
        .into_iter()
        .filter(|c| !c.is_empty())
        .map(|mut members| {
            if members.len() == 1 {
                return members[0];
            }
            members.sort_by(|a, b| {
                (a.0, a.1, a.2)
                    .partial_cmp(&(b.0, b.1, b.2))
                    .expect("finite readings")
            });
            let m = members.len() as f64;
            let cx = members.iter().map(|p| p.0).sum::<f64>() / m;
            let cy = members.iter().map(|p| p.1).sum::<f64>() / m;
            let mut zs: Vec<f64> = members.iter().map(|p| p.2).collect();
            zs.sort_by(f64::total_cmp);
            let z = match mode {
                FusionMode::Mean => dbm_mean(&zs),
                FusionMode::Median => {
                    let mid = zs.len() / 2;
                    if zs.len() % 2 == 1 {
                        zs[mid]
                    } else {
                        dbm_mean(&zs[mid - 1..=mid])
                    }
                }
                FusionMode::Max => zs[zs.len() - 1],
            };
            (cx, cy, z)
        })
        .collect();
    triples.sort_by(|a, b| {
        (a.0, a.1, a.2)
            .partial_cmp(&(b.0, b.1, b.2))
            .expect("finite triples")
    });
    triples
}

/// A rectangular mesh of dBm values with its generating metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerMap {
    pub grid: GridField,
    pub query: QuerySpec,
    /// Fused sites the map was interpolated from (empty for model truth).
    pub sites: Vec<(f64, f64, f64)>,
    pub method: String,
}

/// Triangulates fused triples and evaluates the interpolant on the query
/// mesh. Fails with [`Error::DegenerateSites`] for fewer than 3 distinct
/// non-collinear sites.
pub fn build_map(triples: &[(f64, f64, f64)], query: &QuerySpec) -> Result<PowerMap> {
    query.validate()?;
    let tri = triangulate(triples)?;
    let grid = tri.interpolate_grid(&query.grid()?);
    Ok(PowerMap {
        grid,
        query: *query,
        sites: tri.sites().iter().map(|s| (s.x, s.y, s.z_dbm)).collect(),
        method: METHOD_PLANAR.to_string(),
    })
}

/// Like [`build_map`] but with the always-sequential grid evaluation;
/// output is bit-identical.
pub fn build_map_seq(triples: &[(f64, f64, f64)], query: &QuerySpec) -> Result<PowerMap> {
    query.validate()?;
    let tri = triangulate(triples)?;
    let grid = tri.interpolate_grid_seq(&query.grid()?);
    Ok(PowerMap {
        grid,
        query: *query,
        sites: tri.sites().iter().map(|s| (s.x, s.y, s.z_dbm)).collect(),
        method: METHOD_PLANAR.to_string(),
    })
}

/// Mean square error between two maps on identical grids, in dB².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MseReport {
    pub mse_db2: f64,
    /// Nodes unmasked in both maps (the evaluated support).
    pub nodes: usize,
}

/// Mean over nodes unmasked in *both* maps of the squared dBm difference.
pub fn mse(map: &PowerMap, truth: &PowerMap) -> Result<MseReport> {
    if map.grid.spec != truth.grid.spec {
        return Err(Error::GridMismatch {
            expected_nx: truth.grid.spec.nx,
            expected_ny: truth.grid.spec.ny,
            expected_region: format!("{:?}", truth.grid.spec.region),
            got_nx: map.grid.spec.nx,
            got_ny: map.grid.spec.ny,
            got_region: format!("{:?}", map.grid.spec.region),
        });
    }
    let mut sum = 0.0;
    let mut nodes = 0usize;
    for i in 0..map.grid.values.len() {
        if map.grid.mask[i] && truth.grid.mask[i] {
            let d = map.grid.values[i] - truth.grid.values[i];
            sum += d * d;
            nodes += 1;
        }
    }
    if nodes == 0 {
        return Err(Error::EmptyInput("no commonly unmasked nodes"));
    }
    Ok(MseReport {
        mse_db2: sum / nodes as f64,
        nodes,
    })
}

impl PowerMap {
    /// CSV matrix: one row per y (ascending), comma-separated x columns,
    /// masked nodes as `nan`. Values print in shortest round-trip form.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let spec = &self.grid.spec;
        for iy in 0..spec.ny {
            let mut row = String::new();
            for ix in 0..spec.nx {
                if ix > 0 {
                    row.push(',');
                }
                let idx = iy * spec.nx + ix;
                if self.grid.mask[idx] {
                    row.push_str(&format!("{:?}", self.grid.values[idx]));
                } else {
                    row.push_str("nan");
                }
            }
            writeln!(w, "{row}")?;
        }
        Ok(())
    }

    /// 8-bit ASCII PGM preview, top row = y_max. Unmasked values scale
    /// linearly onto 1..=255 over the map's own range; masked nodes are 0.
    pub fn write_pgm<W: Write>(&self, mut w: W) -> Result<()> {
        let spec = &self.grid.spec;
        let (lo, hi) = self.grid.value_range().unwrap_or((0.0, 0.0));
        let scale = if hi > lo { 254.0 / (hi - lo) } else { 0.0 };
        writeln!(w, "P2")?;
        writeln!(w, "{} {}", spec.nx, spec.ny)?;
        writeln!(w, "255")?;
        for iy in (0..spec.ny).rev() {
            let mut row = String::new();
            for ix in 0..spec.nx {
                if ix > 0 {
                    row.push(' ');
                }
                let idx = iy * spec.nx + ix;
                let level = if self.grid.mask[idx] {
                    1 + ((self.grid.values[idx] - lo) * scale).round() as u32
                } else {
                    0
                };
                row.push_str(&level.min(255).to_string());
            }
            writeln!(w, "{row}")?;
        }
        Ok(())
    }

    /// JSON sidecar: query, method, sites used, masked node coordinates.
    pub fn sidecar_json(&self, seed: Option<u64>) -> serde_json::Value {
        let spec = &self.grid.spec;
        let masked: Vec<[usize; 2]> = (0..self.grid.mask.len())
            .filter(|&i| !self.grid.mask[i])
            .map(|i| [i % spec.nx, i / spec.nx])
            .collect();
        json!({
            "query": self.query,
            "method": self.method,
            "seed": seed,
            "sites": self.sites,
            "grid": { "nx": spec.nx, "ny": spec.ny },
            "value_range": self.grid.value_range(),
            "unmasked_nodes": self.grid.unmasked_count(),
            "masked_nodes": masked,
        })
    }
}

/// Full parameter set for a simulated-environment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub region: Region,
    pub lambda_sources_per_km2: f64,
    pub lambda_sensors_per_km2: f64,
    pub tx_power_dbm: f64,
    pub path: PathLossModel,
    pub shadow: ShadowingModel,
    /// Added in the linear domain to every received power.
    pub noise_floor_dbm: f64,
    pub grid_nx: usize,
    pub grid_ny: usize,
    pub f_lo_hz: f64,
    pub f_hi_hz: f64,
    pub merge_radius_km: f64,
    #[serde(default)]
    pub fusion_mode: FusionMode,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    /// The standard experiment: 1 km² region, 3 sources/km² at 30 dBm,
    /// free-space loss with `alpha = 3` at 1 GHz, no shadowing, thermal
    /// floor over a 2 MHz band, 101x101 mesh.
    fn default() -> Self {
        let path = PathLossModel::free_space(1e9, None, 3.0).expect("valid default model");
        ScenarioConfig {
            region: Region {
                x_min: 0.0,
                x_max: 1.0,
                y_min: 0.0,
                y_max: 1.0,
            },
            lambda_sources_per_km2: 3.0,
            lambda_sensors_per_km2: 313.0,
            tx_power_dbm: 30.0,
            path,
            shadow: ShadowingModel::off(),
            noise_floor_dbm: crate::propagation::thermal_noise_floor_dbm(2e6),
            grid_nx: 101,
            grid_ny: 101,
            f_lo_hz: 0.999e9,
            f_hi_hz: 1.001e9,
            merge_radius_km: 1e-3,
            fusion_mode: FusionMode::Mean,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.query()?.validate()?;
        if !(self.lambda_sources_per_km2 >= 0.0) || !(self.lambda_sensors_per_km2 >= 0.0) {
            return Err(Error::param("intensity", "intensities must be >= 0"));
        }
        if !self.tx_power_dbm.is_finite() {
            return Err(Error::param("tx_power_dbm", "must be finite"));
        }
        Ok(())
    }

    /// The query this scenario answers (synthetic time window `[0, 0]`).
    pub fn query(&self) -> Result<QuerySpec> {
        let q = QuerySpec {
            f_lo_hz: self.f_lo_hz,
            f_hi_hz: self.f_hi_hz,
            t_start: 0.0,
            t_end: 0.0,
            region: self.region,
            grid_nx: self.grid_nx,
            grid_ny: self.grid_ny,
            merge_radius_km: self.merge_radius_km,
            fusion_mode: self.fusion_mode,
        };
        q.validate()?;
        Ok(q)
    }
}

/// Everything a scenario run produces.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub sources: PointSet,
    pub sensors: PointSet,
    /// Raw per-sensor readings, in sensor order (pre-merge).
    pub readings: Vec<(f64, f64, f64)>,
    /// Fused triples the reconstruction used.
    pub sensor_triples: Vec<(f64, f64, f64)>,
    pub truth: PowerMap,
    pub recon: PowerMap,
    pub mse: MseReport,
}

/// Runs the end-to-end experiment: sample source and sensor processes,
/// evaluate ground truth on the mesh and at the sensors, reconstruct by
/// planar interpolation, and score the reconstruction.
///
/// Randomness splits off the master seed: sources, sensors and shadowing
/// use independent labeled sub-streams, so e.g. changing the sensor
/// intensity leaves the source draw untouched.
pub fn simulate_scenario(config: &ScenarioConfig) -> Result<Scenario> {
    config.validate()?;
    let query = config.query()?;
    let sources = sample_ppp(
        config.region,
        config.lambda_sources_per_km2,
        derive_seed(config.seed, streams::SOURCES),
    )?;
    let sensors = sample_ppp(
        config.region,
        config.lambda_sensors_per_km2,
        derive_seed(config.seed, streams::SENSORS),
    )?;
    let shadow_seed = derive_seed(config.seed, streams::SHADOWING);
    let field = SourceField::new(sources.clone(), config.tx_power_dbm)?;

    let grid = query.grid()?;
    let truth_values = exec::map_indexed(grid.len(), |idx| {
        received_power_dbm(
            &field,
            &config.path,
            &config.shadow,
            config.noise_floor_dbm,
            grid.node(idx),
            derive_seed(shadow_seed, idx as u64),
        )
    });
    let truth = PowerMap {
        grid: GridField::new(grid, truth_values, vec![true; grid.len()])?,
        query,
        sites: Vec::new(),
        method: METHOD_MODEL.to_string(),
    };

    let readings: Vec<(f64, f64, f64)> = sensors
        .points
        .iter()
        .enumerate()
        .map(|(j, &(x, y))| {
            let z = received_power_dbm(
                &field,
                &config.path,
                &config.shadow,
                config.noise_floor_dbm,
                (x, y),
                derive_seed(shadow_seed, SENSOR_SHADOW_LABEL_BASE + j as u64),
            );
            (x, y, z)
        })
        .collect();
    let sensor_triples = merge_colocated(&readings, config.merge_radius_km, config.fusion_mode);

    let recon = match build_map(&sensor_triples, &query) {
        Ok(map) => map,
        Err(Error::DegenerateSites { count, .. }) => {
            return Err(Error::DegenerateScenario {
                seed: config.seed,
                sensors: count,
            })
        }
        Err(e) => return Err(e),
    };
    let mse = mse(&recon, &truth)?;

    Ok(Scenario {
        config: config.clone(),
        sources,
        sensors,
        readings,
        sensor_triples,
        truth,
        recon,
        mse,
    })
}

impl Scenario {
    /// Exports the raw sensor readings as wire records: one single-bin PSD
    /// per sensor at the band center with 1 Hz resolution, timestamped at
    /// the window midpoint, `lon`/`lat` carrying planar x/y km. Fusing
    /// these records reproduces the scenario's fused triples bit-exactly.
    pub fn records(&self) -> Result<Vec<WireRecord>> {
        let f_center = 0.5 * (self.config.f_lo_hz + self.config.f_hi_hz);
        let t_mid = 0.5 * (self.truth.query.t_start + self.truth.query.t_end);
        self.readings
            .iter()
            .enumerate()
            .map(|(j, &(x, y, z))| {
                if !z.is_finite() {
                    return Err(Error::param(
                        "records",
                        "non-finite sensor reading; use a finite noise floor when exporting",
                    ));
                }
                Ok(WireRecord {
                    sensor_id: format!("s{j:05}"),
                    timestamp: t_mid,
                    lat: y,
                    lon: x,
                    f_start_hz: f_center,
                    bin_hz: 1.0,
                    psd_dbm_per_hz: vec![z],
                    gain_db: 0.0,
                })
            })
            .collect()
    }
}

/// Runs one scenario per seed (in parallel with the `parallel` feature);
/// degenerate draws surface as per-seed errors, not a crash.
pub fn run_ensemble(base: &ScenarioConfig, seeds: &[u64]) -> Vec<(u64, Result<MseReport>)> {
    exec::map_indexed(seeds.len(), |i| {
        let mut config = base.clone();
        config.seed = seeds[i];
        (seeds[i], simulate_scenario(&config).map(|s| s.mse))
    })
}

/// Always-sequential variant of [`run_ensemble`]; same results.
pub fn run_ensemble_seq(base: &ScenarioConfig, seeds: &[u64]) -> Vec<(u64, Result<MseReport>)> {
    exec::map_indexed_seq(seeds.len(), |i| {
        let mut config = base.clone();
        config.seed = seeds[i];
        (seeds[i], simulate_scenario(&config).map(|s| s.mse))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_psd(f_start: f64, bin: f64, n: usize, v: f64) -> Psd {
        Psd {
            f_start_hz: f_start,
            resolution_hz: bin,
            values_dbm_per_hz: vec![v; n],
            calibration_mw_per_unit: 1.0,
        }
    }

    fn rec(id: &str, t: f64, x: f64, y: f64, psd: Psd) -> PeriodogramRecord {
        PeriodogramRecord {
            sensor_id: id.into(),
            timestamp: t,
            x_km: x,
            y_km: y,
            psd,
            gain_db: 0.0,
        }
    }

    fn query_1km() -> QuerySpec {
        QuerySpec {
            f_lo_hz: 0.999e9,
            f_hi_hz: 1.001e9,
            t_start: 0.0,
            t_end: 100.0,
            region: Region::new(0.0, 1.0, 0.0, 1.0).unwrap(),
            grid_nx: 11,
            grid_ny: 11,
            merge_radius_km: 1e-3,
            fusion_mode: FusionMode::Mean,
        }
    }

    #[test]
    fn single_record_fuses_to_its_band_power() {
        let q = query_1km();
        let psd = flat_psd(0.999e9, 1e3, 2000, -100.0);
        let bp = band_power_dbm(&psd, q.f_lo_hz, q.f_hi_hz).unwrap();
        let fused = fuse_records(&[rec("a", 1.0, 0.5, 0.5, psd)], &q).unwrap();
        assert_eq!(fused.triples.len(), 1);
        assert_eq!(fused.triples[0], (0.5, 0.5, bp));
        assert_eq!(fused.dropped.total(), 0);
    }

    #[test]
    fn colocated_equal_records_average_to_same() {
        let q = query_1km();
        let records = vec![
            rec("a", 1.0, 0.5, 0.5, flat_psd(0.999e9, 1e3, 2000, -100.0)),
            rec("b", 2.0, 0.5, 0.5, flat_psd(0.999e9, 1e3, 2000, -100.0)),
        ];
        let bp = band_power_dbm(&records[0].psd, q.f_lo_hz, q.f_hi_hz).unwrap();
        let fused = fuse_records(&records, &q).unwrap();
        assert_eq!(fused.triples.len(), 1);
        assert!((fused.triples[0].2 - bp).abs() < 1e-12);
    }

    #[test]
    fn colocated_mixed_records_average_in_linear_domain() {
        // band powers 0 dBm and 10 dBm -> 10*log10(5.5)
        let q = QuerySpec {
            f_lo_hz: 0.0,
            f_hi_hz: 10.0,
            ..query_1km()
        };
        // single 1 Hz bin at f=5 with value v integrates to exactly v
        let records = vec![
            rec("a", 1.0, 0.5, 0.5, flat_psd(5.0, 1.0, 1, 0.0)),
            rec("b", 2.0, 0.5, 0.5, flat_psd(5.0, 1.0, 1, 10.0)),
        ];
        let fused = fuse_records(&records, &q).unwrap();
        assert_eq!(fused.triples.len(), 1);
        assert!((fused.triples[0].2 - 7.403626894942438).abs() < 1e-12);
    }

    #[test]
    fn fusion_is_order_invariant() {
        let q = query_1km();
        let mut records = vec![
            rec("a", 1.0, 0.2, 0.3, flat_psd(0.999e9, 1e3, 2000, -101.0)),
            rec("b", 2.0, 0.7, 0.1, flat_psd(0.999e9, 1e3, 2000, -95.0)),
            rec("c", 3.0, 0.2, 0.3, flat_psd(0.999e9, 1e3, 2000, -99.0)),
            rec("d", 4.0, 0.5, 0.9, flat_psd(0.999e9, 1e3, 2000, -97.0)),
        ];
        let a = fuse_records(&records, &q).unwrap();
        records.reverse();
        records.swap(0, 2);
        let b = fuse_records(&records, &q).unwrap();
        assert_eq!(a.triples, b.triples);
    }

    #[test]
    fn drops_are_counted_by_reason() {
        let q = query_1km();
        let records = vec![
            rec("ok", 1.0, 0.5, 0.5, flat_psd(0.999e9, 1e3, 2000, -100.0)),
            rec("late", 1e6, 0.5, 0.5, flat_psd(0.999e9, 1e3, 2000, -100.0)),
            rec("far", 1.0, 5.0, 0.5, flat_psd(0.999e9, 1e3, 2000, -100.0)),
            rec("offband", 1.0, 0.5, 0.5, flat_psd(2e9, 1e3, 2000, -100.0)),
        ];
        let fused = fuse_records(&records, &q).unwrap();
        assert_eq!(fused.triples.len(), 1);
        assert_eq!(
            fused.dropped,
            DroppedCounts {
                out_of_band: 1,
                out_of_window: 1,
                out_of_region: 1,
            }
        );
    }

    #[test]
    fn zero_usable_records_error() {
        let q = query_1km();
        let records = vec![rec("late", 1e6, 0.5, 0.5, flat_psd(0.999e9, 1e3, 2000, -100.0))];
        assert!(matches!(
            fuse_records(&records, &q),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn merge_radius_groups_connected_components() {
        let merged = merge_colocated(
            &[
                (0.0, 0.0, -100.0),
                (0.0005, 0.0, -100.0),  // within 1 m of first
                (0.0009, 0.0, -100.0),  // chains onto second
                (0.5, 0.5, -90.0),
            ],
            1e-3,
            FusionMode::Mean,
        );
        assert_eq!(merged.len(), 2);
    }

    #[test]
    fn fusion_modes_reduce_clusters() {
        let readings = [
            (0.5, 0.5, 0.0),
            (0.5, 0.5, 10.0),
            (0.5, 0.5, 20.0),
        ];
        let median = merge_colocated(&readings, 1e-3, FusionMode::Median);
        assert_eq!(median[0].2, 10.0);
        let max = merge_colocated(&readings, 1e-3, FusionMode::Max);
        assert_eq!(max[0].2, 20.0);
        let mean = merge_colocated(&readings, 1e-3, FusionMode::Mean);
        // linear mean of 1, 10, 100 mW
        assert!((mean[0].2 - 10.0 * (111f64 / 3.0).log10()).abs() < 1e-12);
        // singletons pass through whatever the mode
        for mode in [FusionMode::Mean, FusionMode::Median, FusionMode::Max] {
            let one = merge_colocated(&[(0.1, 0.2, -93.25)], 1e-3, mode);
            assert_eq!(one, vec![(0.1, 0.2, -93.25)]);
        }
    }

    #[test]
    fn plane_samples_rebuild_plane_map() {
        let q = query_1km();
        let plane = |x: f64, y: f64| -80.0 + 3.0 * x - 5.0 * y;
        let triples: Vec<(f64, f64, f64)> = [
            (0.0, 0.0),
            (1.0, 0.0),
            (0.0, 1.0),
            (1.0, 1.0),
            (0.3, 0.4),
            (0.8, 0.6),
        ]
        .iter()
        .map(|&(x, y)| (x, y, plane(x, y)))
        .collect();
        let map = build_map(&triples, &q).unwrap();
        for idx in 0..map.grid.values.len() {
            assert!(map.grid.mask[idx]);
            let (x, y) = map.grid.spec.node(idx);
            assert!((map.grid.values[idx] - plane(x, y)).abs() <= 1e-9);
        }
    }

    #[test]
    fn three_triples_build_single_triangle_map() {
        let q = query_1km();
        let map = build_map(
            &[(0.0, 0.0, -100.0), (1.0, 0.0, -90.0), (0.0, 1.0, -80.0)],
            &q,
        )
        .unwrap();
        assert!(map.grid.unmasked_count() > 0);
        assert!(map.grid.unmasked_count() < map.grid.values.len());
    }

    #[test]
    fn mse_identities() {
        let q = query_1km();
        let triples = [
            (0.0, 0.0, -100.0),
            (1.0, 0.0, -90.0),
            (0.0, 1.0, -80.0),
            (1.0, 1.0, -95.0),
        ];
        let a = build_map(&triples, &q).unwrap();
        assert_eq!(mse(&a, &a).unwrap().mse_db2, 0.0);

        let mut b = a.clone();
        for v in &mut b.grid.values {
            *v += 2.0;
        }
        let r = mse(&b, &a).unwrap();
        assert!((r.mse_db2 - 4.0).abs() < 1e-9);
        let sym = mse(&a, &b).unwrap();
        assert_eq!(r.mse_db2.to_bits(), sym.mse_db2.to_bits());
        assert_eq!(r.nodes, sym.nodes);

        let q2 = QuerySpec {
            grid_nx: 12,
            ..q
        };
        let c = build_map(&triples, &q2).unwrap();
        assert!(matches!(mse(&c, &a), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn map_max_principle_vs_sites() {
        let config = ScenarioConfig {
            lambda_sensors_per_km2: 150.0,
            seed: 5,
            ..ScenarioConfig::default()
        };
        let s = simulate_scenario(&config).unwrap();
        let max_site = s
            .sensor_triples
            .iter()
            .map(|t| t.2)
            .fold(f64::NEG_INFINITY, f64::max);
        let (_, hi) = s.recon.grid.value_range().unwrap();
        assert!(hi <= max_site + 1e-9, "map max {hi} vs site max {max_site}");
    }

    #[test]
    fn scenario_is_deterministic() {
        let config = ScenarioConfig {
            lambda_sensors_per_km2: 94.0,
            seed: 11,
            ..ScenarioConfig::default()
        };
        let a = simulate_scenario(&config).unwrap();
        let b = simulate_scenario(&config).unwrap();
        assert_eq!(a.recon.grid, b.recon.grid);
        assert_eq!(a.truth.grid, b.truth.grid);
        assert_eq!(a.mse, b.mse);
        assert_eq!(a.sensor_triples, b.sensor_triples);
    }

    #[test]
    fn no_sources_gives_floor_truth_and_zero_mse() {
        let config = ScenarioConfig {
            lambda_sources_per_km2: 0.0,
            lambda_sensors_per_km2: 200.0,
            seed: 3,
            ..ScenarioConfig::default()
        };
        let s = simulate_scenario(&config).unwrap();
        let floor = config.noise_floor_dbm;
        assert!(s.truth.grid.values.iter().all(|&v| v == floor));
        assert_eq!(s.mse.mse_db2, 0.0);
    }

    #[test]
    fn degenerate_sensor_draw_is_reported() {
        let config = ScenarioConfig {
            lambda_sensors_per_km2: 0.0,
            seed: 1,
            ..ScenarioConfig::default()
        };
        assert!(matches!(
            simulate_scenario(&config),
            Err(Error::DegenerateScenario { sensors: 0, .. })
        ));
    }

    #[test]
    fn exported_records_rebuild_bit_exactly() {
        // fusing the exported records reproduces the fused triples bitwise
        let config = ScenarioConfig {
            lambda_sensors_per_km2: 120.0,
            seed: 21,
            ..ScenarioConfig::default()
        };
        let s = simulate_scenario(&config).unwrap();
        let wire = s.records().unwrap();
        let mut buf = Vec::new();
        write_records_jsonl(&mut buf, &wire).unwrap();
        let parsed = {
            let tmp = std::env::temp_dir().join("rfmap_records_test.jsonl");
            fs::write(&tmp, &buf).unwrap();
            let r = read_records_jsonl(&tmp).unwrap();
            fs::remove_file(&tmp).ok();
            r
        };
        assert_eq!(parsed, wire);
        let records: Vec<PeriodogramRecord> = parsed
            .into_iter()
            .map(|w| w.into_record(|lat, lon| (lon, lat)))
            .collect();
        let fused = fuse_records(&records, &s.truth.query).unwrap();
        assert_eq!(fused.triples, s.sensor_triples);
        let rebuilt = build_map(&fused.triples, &s.truth.query).unwrap();
        assert_eq!(rebuilt.grid, s.recon.grid);
    }

    #[test]
    fn ensemble_runs_and_reports_per_seed() {
        let base = ScenarioConfig {
            lambda_sensors_per_km2: 80.0,
            grid_nx: 41,
            grid_ny: 41,
            ..ScenarioConfig::default()
        };
        let seeds: Vec<u64> = (0..8).collect();
        let runs = run_ensemble(&base, &seeds);
        assert_eq!(runs.len(), 8);
        for (seed, outcome) in &runs {
            assert!(outcome.is_ok(), "seed {seed}: {outcome:?}");
        }
        let seq = run_ensemble_seq(&base, &seeds);
        for (a, b) in runs.iter().zip(&seq) {
            assert_eq!(a.0, b.0);
            assert_eq!(a.1.as_ref().unwrap(), b.1.as_ref().unwrap());
        }
    }

    #[test]
    fn csv_and_pgm_shapes() {
        let q = QuerySpec {
            grid_nx: 4,
            grid_ny: 3,
            ..query_1km()
        };
        let map = build_map(
            &[
                (0.0, 0.0, -100.0),
                (1.0, 0.0, -90.0),
                (0.0, 1.0, -80.0),
                (1.0, 1.0, -95.0),
            ],
            &q,
        )
        .unwrap();
        let mut csv = Vec::new();
        map.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().all(|l| l.split(',').count() == 4));

        let mut pgm = Vec::new();
        map.write_pgm(&mut pgm).unwrap();
        let text = String::from_utf8(pgm).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("P2"));
        assert_eq!(lines.next(), Some("4 3"));
        assert_eq!(lines.next(), Some("255"));

        let sidecar = map.sidecar_json(Some(9));
        assert_eq!(sidecar["seed"], 9);
        assert_eq!(sidecar["method"], METHOD_PLANAR);
    }
}
