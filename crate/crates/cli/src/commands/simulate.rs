//! `rfmap simulate`: run the simulated RF environment end to end and write
//! truth/reconstruction artifacts, or sweep an ensemble of seeds.

use std::fs;
use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use rfmap_core::pointprocess::Region;
use rfmap_core::powermap::{
    run_ensemble, simulate_scenario, write_records_jsonl, Scenario, ScenarioConfig,
};
use rfmap_core::propagation::ShadowingModel;

use super::{parse_grid, parse_pair, parse_region4};
use crate::config::ScenarioDraft;
use crate::error::{CliError, CliResult};
use crate::manifest::Manifest;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML scenario config; explicit flags below override its values
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Master seed; all sub-streams derive from it
    #[arg(long)]
    pub seed: Option<u64>,

    /// Sensor intensity, sensors per km^2
    #[arg(long = "lambda-s")]
    pub lambda_s: Option<f64>,

    /// Source intensity, sources per km^2
    #[arg(long = "lambda-t")]
    pub lambda_t: Option<f64>,

    /// Per-source transmit power, dBm
    #[arg(long)]
    pub tx_power_dbm: Option<f64>,

    /// Path loss exponent
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Carrier frequency for the free-space K derivation, Hz
    #[arg(long)]
    pub f_hz: Option<f64>,

    /// Explicit path loss constant (r in meters); overrides f-hz
    #[arg(long)]
    pub k: Option<f64>,

    /// Reference / near-field clamp distance, meters
    #[arg(long)]
    pub r0_m: Option<f64>,

    /// Enable log-normal shadowing with this sigma, dB
    #[arg(long)]
    pub shadow_sigma_db: Option<f64>,

    /// Shadowing mean, dB (with --shadow-sigma-db)
    #[arg(long, default_value_t = 0.0)]
    pub shadow_mu_db: f64,

    /// Noise floor, dBm (default: thermal over the band)
    #[arg(long)]
    pub noise_floor_dbm: Option<f64>,

    /// Mesh resolution: N or NXxNY
    #[arg(long)]
    pub grid: Option<String>,

    /// Query band as LO:HI Hz
    #[arg(long)]
    pub band: Option<String>,

    /// Region as X0:X1:Y0:Y1 km
    #[arg(long)]
    pub region: Option<String>,

    /// Co-location merge radius, meters
    #[arg(long)]
    pub merge_radius_m: Option<f64>,

    /// Ensemble mode: run this many consecutive seeds and report MSE stats
    #[arg(long)]
    pub seeds: Option<usize>,

    /// Worker threads for grid evaluation and ensembles (default: all cores)
    #[arg(long)]
    pub threads: Option<usize>,

    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

pub fn run(args: SimulateArgs) -> CliResult<()> {
    if let Some(t) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    }
    let config = effective_config(&args)?;
    fs::create_dir_all(&args.out)?;
    match args.seeds {
        Some(n) => run_ensemble_mode(&args, &config, n),
        None => run_single(&args, &config),
    }
}

fn effective_config(args: &SimulateArgs) -> CliResult<ScenarioConfig> {
    let mut draft = match &args.config {
        Some(path) => ScenarioDraft::from_file(path)?,
        None => ScenarioDraft::default(),
    };
    if let Some(seed) = args.seed {
        draft.seed = seed;
    }
    if let Some(v) = args.lambda_s {
        draft.lambda_sensors_per_km2 = v;
    }
    if let Some(v) = args.lambda_t {
        draft.lambda_sources_per_km2 = v;
    }
    if let Some(v) = args.tx_power_dbm {
        draft.tx_power_dbm = v;
    }
    if let Some(v) = args.alpha {
        draft.path.alpha = v;
    }
    if let Some(v) = args.f_hz {
        draft.path.f_hz = Some(v);
        draft.path.k = None;
    }
    if let Some(v) = args.k {
        draft.path.k = Some(v);
    }
    if let Some(v) = args.r0_m {
        draft.path.r0_m = Some(v);
    }
    if let Some(sigma) = args.shadow_sigma_db {
        draft.shadow = ShadowingModel::log_normal(args.shadow_mu_db, sigma)?;
    }
    if let Some(v) = args.noise_floor_dbm {
        draft.noise_floor_dbm = Some(v);
    }
    if let Some(g) = &args.grid {
        let (nx, ny) = parse_grid(g)?;
        draft.grid_nx = nx;
        draft.grid_ny = ny;
    }
    if let Some(b) = &args.band {
        let (lo, hi) = parse_pair(b, "band")?;
        draft.f_lo_hz = lo;
        draft.f_hi_hz = hi;
    }
    if let Some(r) = &args.region {
        let [x0, x1, y0, y1] = parse_region4(r)?;
        draft.region = Region::new(x0, x1, y0, y1)?;
    }
    if let Some(m) = args.merge_radius_m {
        draft.merge_radius_km = m / 1000.0;
    }
    draft.resolve()
}

fn run_single(args: &SimulateArgs, config: &ScenarioConfig) -> CliResult<()> {
    let scenario = simulate_scenario(config)?;
    write_artifacts(args, config, &scenario)?;
    println!(
        "mse = {:.4} dB^2 over {} nodes ({} sources, {} sensors, {} fused sites)",
        scenario.mse.mse_db2,
        scenario.mse.nodes,
        scenario.sources.len(),
        scenario.sensors.len(),
        scenario.sensor_triples.len(),
    );
    println!("artifacts in {}", args.out.display());
    Ok(())
}

fn write_artifacts(
    args: &SimulateArgs,
    config: &ScenarioConfig,
    scenario: &Scenario,
) -> CliResult<()> {
    let out = &args.out;
    let mut manifest = Manifest::new("simulate", serde_json::to_value(config)?);

    for (name, map) in [("truth", &scenario.truth), ("recon", &scenario.recon)] {
        let mut csv = Vec::new();
        map.write_csv(&mut csv)?;
        fs::write(out.join(format!("{name}.csv")), csv)?;
        let mut pgm = Vec::new();
        map.write_pgm(&mut pgm)?;
        fs::write(out.join(format!("{name}.pgm")), pgm)?;
        fs::write(
            out.join(format!("{name}.json")),
            serde_json::to_string_pretty(&map.sidecar_json(Some(config.seed)))?,
        )?;
        for ext in ["csv", "pgm", "json"] {
            manifest.add_artifact(out, &format!("{name}.{ext}"))?;
        }
    }

    let sites = json!({
        "sources": scenario.sources,
        "sensors": scenario.sensors,
        "fused_triples": scenario.sensor_triples,
    });
    fs::write(out.join("sites.json"), serde_json::to_string_pretty(&sites)?)?;
    manifest.add_artifact(out, "sites.json")?;

    let mut records = Vec::new();
    write_records_jsonl(&mut records, &scenario.records()?)?;
    fs::write(out.join("records.jsonl"), records)?;
    manifest.add_artifact(out, "records.jsonl")?;

    manifest.set_results(json!({
        "mse_db2": scenario.mse.mse_db2,
        "evaluated_nodes": scenario.mse.nodes,
        "sources_drawn": scenario.sources.len(),
        "sensors_drawn": scenario.sensors.len(),
    }));
    manifest.write(out)?;
    Ok(())
}

fn run_ensemble_mode(args: &SimulateArgs, config: &ScenarioConfig, n: usize) -> CliResult<()> {
    if n == 0 {
        return Err(CliError::config("--seeds must be >= 1"));
    }
    let seeds: Vec<u64> = (0..n as u64).map(|i| config.seed.wrapping_add(i)).collect();
    let runs = run_ensemble(config, &seeds);

    let mut csv = String::from("seed,lambda_sensors_per_km2,mse_db2,nodes,status\n");
    let mut oks: Vec<f64> = Vec::new();
    let mut degenerate = 0usize;
    for (seed, outcome) in &runs {
        match outcome {
            Ok(report) => {
                csv.push_str(&format!(
                    "{seed},{:?},{:?},{},ok\n",
                    config.lambda_sensors_per_km2, report.mse_db2, report.nodes
                ));
                oks.push(report.mse_db2);
            }
            Err(_) => {
                csv.push_str(&format!(
                    "{seed},{:?},,,degenerate\n",
                    config.lambda_sensors_per_km2
                ));
                degenerate += 1;
            }
        }
    }
    fs::write(args.out.join("mse_per_seed.csv"), csv)?;

    if oks.is_empty() {
        return Err(CliError::Degenerate(format!(
            "all {n} seeds drew degenerate sensor sets"
        )));
    }
    let mean = oks.iter().sum::<f64>() / oks.len() as f64;

    let mut manifest = Manifest::new("simulate", serde_json::to_value(config)?);
    manifest.add_artifact(&args.out, "mse_per_seed.csv")?;
    manifest.set_results(json!({
        "seeds": n,
        "completed": oks.len(),
        "degenerate": degenerate,
        "mean_mse_db2": mean,
    }));
    manifest.write(&args.out)?;

    println!(
        "mean mse = {:.4} dB^2 over {}/{} seeds (lambda_s = {}, {} degenerate)",
        mean,
        oks.len(),
        n,
        config.lambda_sensors_per_km2,
        degenerate
    );
    println!("per-seed results in {}", args.out.join("mse_per_seed.csv").display());
    Ok(())
}
