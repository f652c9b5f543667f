//! `rfmap density`: deployment density for a coverage confidence, single
//! values or sweep curves.

use std::fs;
use std::path::PathBuf;

use clap::Args;

use rfmap_core::density::{
    min_density_fixed_r, min_density_power_constraint, sweep_beta, sweep_frequency,
    write_curve_csv, DensityParams,
};
use rfmap_core::propagation::ShadowingModel;

use super::parse_sweep;
use crate::config::PathParams;
use crate::error::{CliError, CliResult};

#[derive(Debug, Args)]
pub struct DensityArgs {
    /// Coverage confidence in (0, 1)
    #[arg(long)]
    pub beta: Option<f64>,

    /// Sweep beta over START:STOP:COUNT and emit a CSV curve
    #[arg(long)]
    pub sweep_beta: Option<String>,

    /// Sweep carrier frequency (Hz) over START:STOP:COUNT at fixed beta
    /// (default 0.95) and emit a CSV curve
    #[arg(long)]
    pub sweep_freq: Option<String>,

    /// Path loss exponent
    #[arg(long, default_value_t = 3.0)]
    pub alpha: f64,

    /// Carrier frequency for the free-space K, Hz
    #[arg(long, default_value_t = 1e9)]
    pub f_hz: f64,

    /// Explicit path loss constant (r in meters); overrides f-hz
    #[arg(long)]
    pub k: Option<f64>,

    /// Reference distance, meters (default c/2f)
    #[arg(long)]
    pub r0_m: Option<f64>,

    /// Relative power threshold magnitude, dB
    #[arg(long, default_value_t = 90.0)]
    pub a_db: f64,

    /// Shadowing mean, dB
    #[arg(long, default_value_t = 0.0)]
    pub mu_db: f64,

    /// Shadowing standard deviation, dB
    #[arg(long, default_value_t = 4.0)]
    pub sigma_db: f64,

    /// Fixed detection radius in km: use the pure spatial constraint
    /// instead of the power constraint
    #[arg(long)]
    pub r_km: Option<f64>,

    /// Also report the total sensor count for this deployment area
    #[arg(long)]
    pub area_km2: Option<f64>,

    /// CSV destination for sweeps (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: DensityArgs) -> CliResult<()> {
    let params = |beta: f64| -> CliResult<DensityParams> {
        let path = PathParams {
            alpha: args.alpha,
            f_hz: if args.k.is_some() { None } else { Some(args.f_hz) },
            k: args.k,
            r0_m: args.r0_m,
        }
        .resolve()?;
        let p = DensityParams {
            beta,
            a_db: args.a_db,
            path,
            shadow: ShadowingModel::log_normal(args.mu_db, args.sigma_db)?,
        };
        p.validate()?;
        Ok(p)
    };

    match (&args.beta, &args.sweep_beta, &args.sweep_freq) {
        (Some(beta), None, None) => {
            let lambda = match args.r_km {
                Some(r_km) => min_density_fixed_r(*beta, r_km)?,
                None => min_density_power_constraint(&params(*beta)?)?,
            };
            println!("lambda_s = {lambda:.4} sensors/km^2");
            if let Some(area) = args.area_km2 {
                println!("total = {:.0} sensors over {area} km^2", lambda * area);
            }
            Ok(())
        }
        (None, Some(spec), None) => {
            let betas = parse_sweep(spec, "--sweep-beta")?;
            if betas.iter().any(|b| !(*b > 0.0 && *b < 1.0)) {
                return Err(CliError::config("--sweep-beta values must lie in (0, 1)"));
            }
            let curve = sweep_beta(&params(betas[0])?, &betas)?;
            emit_curve(&args.out, "beta", "sensors_per_km2", &curve)
        }
        (beta, None, Some(spec)) => {
            let freqs = parse_sweep(spec, "--sweep-freq")?;
            let curve = sweep_frequency(&params(beta.unwrap_or(0.95))?, &freqs)?;
            emit_curve(&args.out, "frequency_hz", "sensors_per_km2", &curve)
        }
        _ => Err(CliError::config(
            "pass exactly one of --beta, --sweep-beta, --sweep-freq (--beta may also set the \
             confidence for --sweep-freq)",
        )),
    }
}

fn emit_curve(
    out: &Option<PathBuf>,
    x: &str,
    y: &str,
    curve: &[(f64, f64)],
) -> CliResult<()> {
    let mut buf = Vec::new();
    write_curve_csv(&mut buf, x, y, curve)?;
    match out {
        Some(path) => {
            fs::write(path, buf)?;
            println!("{} points written to {}", curve.len(), path.display());
        }
        None => print!("{}", String::from_utf8_lossy(&buf)),
    }
    Ok(())
}
