//! `rfmap welch`: estimate a PSD from a raw IQ capture file.

use std::fs;
use std::path::PathBuf;

use clap::Args;

use rfmap_core::periodogram::{
    band_power_dbm, read_iq_file, welch_psd, IqFormat, WelchConfig, Window,
};

use super::parse_pair;
use crate::error::CliResult;

#[derive(Debug, Args)]
pub struct WelchArgs {
    /// Raw interleaved IQ file
    #[arg(long)]
    pub input: PathBuf,

    /// Sample encoding: cu8 (8-bit offset binary) or cf32 (LE float pairs)
    #[arg(long)]
    pub format: String,

    /// Sample rate, Hz
    #[arg(long)]
    pub rate_hz: f64,

    /// RF center frequency the capture was tuned to, Hz
    #[arg(long)]
    pub center_hz: f64,

    /// Front-end gain to remove, dB
    #[arg(long, default_value_t = 0.0)]
    pub gain_db: f64,

    /// Segment/FFT length (power of two)
    #[arg(long, default_value_t = 256)]
    pub segment: usize,

    /// Segment overlap fraction in [0, 1)
    #[arg(long, default_value_t = 0.5)]
    pub overlap: f64,

    /// Window: hann, hamming, blackman, rect
    #[arg(long, default_value = "hann")]
    pub window: String,

    /// Calibration constant, mW per unit input power
    #[arg(long, default_value_t = 1.0)]
    pub calibration: f64,

    /// Also integrate and print band power over LO:HI Hz
    #[arg(long)]
    pub band: Option<String>,

    /// PSD JSON destination
    #[arg(long, default_value = "psd.json")]
    pub out: PathBuf,
}

pub fn run(args: WelchArgs) -> CliResult<()> {
    let format: IqFormat = args.format.parse()?;
    let window: Window = args.window.parse()?;
    let block = read_iq_file(&args.input, format, args.rate_hz, args.center_hz, args.gain_db)?;
    let cfg = WelchConfig {
        segment_len: args.segment,
        overlap_frac: args.overlap,
        window,
        calibration_mw_per_unit: args.calibration,
    };
    let psd = welch_psd(&block, &cfg)?;
    fs::write(&args.out, serde_json::to_string_pretty(&psd)?)?;
    let (span_lo, span_hi) = psd.span_hz();
    println!(
        "{} samples -> {} bins at {} Hz resolution, span [{span_lo}, {span_hi}] Hz; psd in {}",
        block.samples.len(),
        psd.len(),
        psd.resolution_hz,
        args.out.display()
    );
    if let Some(band) = &args.band {
        let (lo, hi) = parse_pair(band, "--band")?;
        let bp = band_power_dbm(&psd, lo, hi)?;
        println!("band power [{lo}, {hi}] Hz = {bp:.4} dBm");
    }
    Ok(())
}
