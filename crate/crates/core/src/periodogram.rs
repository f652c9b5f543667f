//! Welch-averaged power spectral density estimation from complex IQ
//! blocks, band-power integration, and raw IQ file parsing.
//!
//! Normalization: the linear PSD satisfies
//! `sum(psd) * resolution_hz == mean(|x|^2)` for stationary input (window
//! power included), so integrating the full span recovers the block's
//! mean-square power. dBm/Hz values assume a configurable calibration
//! constant (mW per unit input power, default 1) with the front-end gain
//! subtracted.

use std::fs;
use std::path::Path;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

pub use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::units::{dbm_sum, DBM_FLOOR};

/// Representation floor for PSD bins with zero power.
pub const PSD_FLOOR_DBM_PER_HZ: f64 = DBM_FLOOR;

/// A block of complex baseband samples with capture metadata.
#[derive(Debug, Clone)]
pub struct IqBlock {
    pub samples: Vec<Complex64>,
    pub sample_rate_hz: f64,
    /// RF frequency the block was centered on.
    pub center_freq_hz: f64,
    /// Front-end gain applied during capture, removed from reported PSD.
    pub gain_db: f64,
}

/// Power spectral density on a uniform absolute-frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Psd {
    /// Center frequency of the first bin.
    pub f_start_hz: f64,
    /// Bin spacing; also the integration width per bin.
    pub resolution_hz: f64,
    pub values_dbm_per_hz: Vec<f64>,
    /// mW of reported power per unit of input |x|^2.
    pub calibration_mw_per_unit: f64,
}

impl Psd {
    pub fn len(&self) -> usize {
        self.values_dbm_per_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values_dbm_per_hz.is_empty()
    }

    /// Center frequency of bin `i`.
    pub fn freq_at(&self, i: usize) -> f64 {
        self.f_start_hz + i as f64 * self.resolution_hz
    }

    pub fn span_hz(&self) -> (f64, f64) {
        (self.f_start_hz, self.freq_at(self.len().saturating_sub(1)))
    }
}

/// Segment taper for Welch averaging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Hann,
    Hamming,
    Blackman,
    Rect,
}

impl Window {
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        use std::f64::consts::PI;
        (0..n)
            .map(|i| {
                let phase = 2.0 * PI * i as f64 / n as f64;
                match self {
                    Window::Hann => 0.5 * (1.0 - phase.cos()),
                    Window::Hamming => 0.54 - 0.46 * phase.cos(),
                    Window::Blackman => 0.42 - 0.5 * phase.cos() + 0.08 * (2.0 * phase).cos(),
                    Window::Rect => 1.0,
                }
            })
            .collect()
    }
}

impl std::str::FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hann" => Ok(Window::Hann),
            "hamming" => Ok(Window::Hamming),
            "blackman" => Ok(Window::Blackman),
            "rect" | "rectangular" | "boxcar" => Ok(Window::Rect),
            other => Err(Error::param(
                "window",
                format!("unknown window '{other}' (hann, hamming, blackman, rect)"),
            )),
        }
    }
}

/// Welch estimator parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchConfig {
    /// Segment and FFT length; must be a power of two.
    pub segment_len: usize,
    /// Fractional overlap between consecutive segments, in `[0, 1)`.
    pub overlap_frac: f64,
    pub window: Window,
    /// mW of power per unit of input |x|^2.
    pub calibration_mw_per_unit: f64,
}

impl Default for WelchConfig {
    fn default() -> Self {
        WelchConfig {
            segment_len: 256,
            overlap_frac: 0.5,
            window: Window::Hann,
            calibration_mw_per_unit: 1.0,
        }
    }
}

/// Estimates the PSD of `block` by averaging windowed, overlapped segment
/// periodograms.
///
/// Bins come out in ascending absolute frequency
/// (`center - fs/2 .. center + fs/2`), spaced `fs / segment_len`.
pub fn welch_psd(block: &IqBlock, cfg: &WelchConfig) -> Result<Psd> {
    let n = cfg.segment_len;
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::param(
            "segment_len",
            format!("must be a power of two, got {n}"),
        ));
    }
    if !(0.0..1.0).contains(&cfg.overlap_frac) {
        return Err(Error::param(
            "overlap_frac",
            format!("must be in [0, 1), got {}", cfg.overlap_frac),
        ));
    }
    if !(block.sample_rate_hz > 0.0) {
        return Err(Error::param("sample_rate_hz", "must be > 0"));
    }
    if !(cfg.calibration_mw_per_unit > 0.0) {
        return Err(Error::param("calibration_mw_per_unit", "must be > 0"));
    }
    if block.samples.len() < n {
        return Err(Error::InputTooShort {
            segment: n,
            got: block.samples.len(),
        });
    }
    if let Some(i) = block
        .samples
        .iter()
        .position(|s| !s.re.is_finite() || !s.im.is_finite())
    {
        return Err(Error::NonFiniteSample(i));
    }

    let window = cfg.window.coefficients(n);
    let window_power: f64 = window.iter().map(|w| w * w).sum();
    let hop = ((n as f64) * (1.0 - cfg.overlap_frac)).round().max(1.0) as usize;
    let n_segments = (block.samples.len() - n) / hop + 1;

    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut accum = vec![0.0f64; n];
    let mut buf = vec![Complex64::default(); n];
    for s in 0..n_segments {
        let start = s * hop;
        for (i, (sample, w)) in block.samples[start..start + n].iter().zip(&window).enumerate() {
            buf[i] = sample * *w;
        }
        fft.process(&mut buf);
        for (acc, v) in accum.iter_mut().zip(&buf) {
            *acc += v.norm_sqr();
        }
    }

    // sum(psd) * (fs/n) == mean |x|^2 for stationary input
    let scale = 1.0 / (n_segments as f64 * block.sample_rate_hz * window_power);
    let fs = block.sample_rate_hz;
    let resolution = fs / n as f64;
    let half = n / 2;
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let lin = accum[(i + half) % n] * scale * cfg.calibration_mw_per_unit;
            if lin > 0.0 {
                (10.0 * lin.log10() - block.gain_db).max(PSD_FLOOR_DBM_PER_HZ)
            } else {
                PSD_FLOOR_DBM_PER_HZ
            }
        })
        .collect();

    Ok(Psd {
        f_start_hz: block.center_freq_hz - half as f64 * resolution,
        resolution_hz: resolution,
        values_dbm_per_hz: values,
        calibration_mw_per_unit: cfg.calibration_mw_per_unit,
    })
}

/// Integrates the PSD over `[f_lo_hz, f_hi_hz]`, returning dBm.
///
/// A bin contributes iff its center lies in the closed band; there is no
/// fractional-bin weighting. Errors when no bin center falls in the band.
pub fn band_power_dbm(psd: &Psd, f_lo_hz: f64, f_hi_hz: f64) -> Result<f64> {
    if psd.is_empty() {
        return Err(Error::EmptyInput("psd has no bins"));
    }
    let in_band: Vec<f64> = (0..psd.len())
        .filter(|&i| {
            let f = psd.freq_at(i);
            f >= f_lo_hz && f <= f_hi_hz
        })
        .map(|i| psd.values_dbm_per_hz[i])
        .collect();
    if in_band.is_empty() {
        let (span_lo, span_hi) = psd.span_hz();
        return Err(Error::EmptyBand {
            f_lo_hz,
            f_hi_hz,
            span_lo_hz: span_lo,
            span_hi_hz: span_hi,
        });
    }
    Ok(dbm_sum(&in_band) + 10.0 * psd.resolution_hz.log10())
}

/// Raw IQ sample encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IqFormat {
    /// Interleaved unsigned 8-bit offset-binary pairs (RTL-SDR style);
    /// byte `b` decodes to `(b - 127.5) / 127.5`.
    Cu8,
    /// Interleaved little-endian 32-bit float pairs.
    Cf32,
}

impl std::str::FromStr for IqFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cu8" | "u8" => Ok(IqFormat::Cu8),
            "cf32" | "f32" => Ok(IqFormat::Cf32),
            other => Err(Error::param(
                "format",
                format!("unknown IQ format '{other}' (cu8, cf32)"),
            )),
        }
    }
}

/// Decodes 8-bit offset-binary interleaved IQ bytes.
pub fn parse_cu8(bytes: &[u8]) -> Vec<Complex64> {
    bytes
        .chunks_exact(2)
        .map(|p| {
            Complex64::new(
                (p[0] as f64 - 127.5) / 127.5,
                (p[1] as f64 - 127.5) / 127.5,
            )
        })
        .collect()
}

/// Decodes little-endian f32 interleaved IQ bytes.
pub fn parse_cf32(bytes: &[u8]) -> Result<Vec<Complex64>> {
    if bytes.len() % 8 != 0 {
        return Err(Error::param(
            "iq file",
            format!("cf32 input length {} is not a multiple of 8", bytes.len()),
        ));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|p| {
            let re = f32::from_le_bytes([p[0], p[1], p[2], p[3]]) as f64;
            let im = f32::from_le_bytes([p[4], p[5], p[6], p[7]]) as f64;
            Complex64::new(re, im)
        })
        .collect())
}

/// Reads a raw interleaved IQ file into a block.
pub fn read_iq_file(
    path: &Path,
    format: IqFormat,
    sample_rate_hz: f64,
    center_freq_hz: f64,
    gain_db: f64,
) -> Result<IqBlock> {
    let bytes = fs::read(path)?;
    let samples = match format {
        IqFormat::Cu8 => parse_cu8(&bytes),
        IqFormat::Cf32 => parse_cf32(&bytes)?,
    };
    Ok(IqBlock {
        samples,
        sample_rate_hz,
        center_freq_hz,
        gain_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn white_noise_block(n: usize, seed: u64) -> IqBlock {
        // unit-variance complex white noise: each quadrature N(0, 1/2)
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = (0..n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            })
            .collect();
        IqBlock {
            samples,
            sample_rate_hz: 2e6,
            center_freq_hz: 1e9,
            gain_db: 0.0,
        }
    }

    fn full_span_power_dbm(psd: &Psd) -> f64 {
        let (lo, hi) = psd.span_hz();
        band_power_dbm(psd, lo, hi).unwrap()
    }

    #[test]
    fn white_noise_integrates_to_unit_power() {
        let block = white_noise_block(1 << 16, 7);
        let psd = welch_psd(&block, &WelchConfig::default()).unwrap();
        // oracle: mean |x|^2 of the raw block
        let ms: f64 =
            block.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / block.samples.len() as f64;
        let oracle_dbm = 10.0 * ms.log10();
        let integrated = full_span_power_dbm(&psd);
        assert!(
            (integrated - oracle_dbm).abs() < 0.25,
            "{integrated} vs {oracle_dbm}"
        );
        // and within 5% of exactly 1 (0 dBm) in absolute terms
        assert!(integrated.abs() < 10.0 * 1.05f64.log10() + 0.25);
    }

    #[test]
    fn white_noise_psd_is_flat() {
        let block = white_noise_block(1 << 16, 11);
        let psd = welch_psd(&block, &WelchConfig::default()).unwrap();
        let mean = psd.values_dbm_per_hz.iter().sum::<f64>() / psd.len() as f64;
        for (i, v) in psd.values_dbm_per_hz.iter().enumerate() {
            assert!((v - mean).abs() < 1.5, "bin {i}: {v} vs mean {mean}");
        }
    }

    #[test]
    fn bin_centered_tone_power_and_peak() {
        // complex exponential of amplitude A at an exact bin offset
        let n = 1 << 14;
        let seg = 256;
        let fs = 2e6;
        let a = 0.5;
        let bin = 32; // offset f0 = bin * fs / seg
        let f0 = bin as f64 * fs / seg as f64;
        let samples: Vec<Complex64> = (0..n)
            .map(|i| {
                let phase = 2.0 * std::f64::consts::PI * f0 * i as f64 / fs;
                Complex64::new(a * phase.cos(), a * phase.sin())
            })
            .collect();
        let block = IqBlock {
            samples,
            sample_rate_hz: fs,
            center_freq_hz: 1e9,
            gain_db: 0.0,
        };
        let psd = welch_psd(&block, &WelchConfig::default()).unwrap();
        let integrated_mw = 10f64.powf(full_span_power_dbm(&psd) / 10.0);
        // for a complex exponential the power is A^2
        assert!(
            (integrated_mw - a * a).abs() < 0.01 * a * a,
            "{integrated_mw}"
        );
        let peak = (0..psd.len())
            .max_by(|&i, &j| {
                psd.values_dbm_per_hz[i]
                    .partial_cmp(&psd.values_dbm_per_hz[j])
                    .unwrap()
            })
            .unwrap();
        assert_eq!(psd.freq_at(peak), 1e9 + f0);
    }

    #[test]
    fn zero_input_sits_on_floor() {
        let block = IqBlock {
            samples: vec![Complex64::default(); 4096],
            sample_rate_hz: 1e6,
            center_freq_hz: 100e6,
            gain_db: 0.0,
        };
        let psd = welch_psd(&block, &WelchConfig::default()).unwrap();
        assert!(psd
            .values_dbm_per_hz
            .iter()
            .all(|&v| v == PSD_FLOOR_DBM_PER_HZ));
    }

    #[test]
    fn gain_scaling_shifts_band_power_exactly() {
        let block = white_noise_block(1 << 14, 3);
        let g = 3.7;
        let scaled = IqBlock {
            samples: block.samples.iter().map(|s| s * g).collect(),
            ..block.clone()
        };
        let cfg = WelchConfig::default();
        let p0 = full_span_power_dbm(&welch_psd(&block, &cfg).unwrap());
        let p1 = full_span_power_dbm(&welch_psd(&scaled, &cfg).unwrap());
        assert!(
            (p1 - p0 - 20.0 * g.log10()).abs() < 1e-9,
            "{} vs {}",
            p1 - p0,
            20.0 * g.log10()
        );
    }

    #[test]
    fn overlap_choice_barely_moves_band_power() {
        let block = white_noise_block(1 << 16, 5);
        let p50 = full_span_power_dbm(
            &welch_psd(
                &block,
                &WelchConfig {
                    overlap_frac: 0.5,
                    ..WelchConfig::default()
                },
            )
            .unwrap(),
        );
        let p0 = full_span_power_dbm(
            &welch_psd(
                &block,
                &WelchConfig {
                    overlap_frac: 0.0,
                    ..WelchConfig::default()
                },
            )
            .unwrap(),
        );
        assert!((p50 - p0).abs() < 0.1, "{p50} vs {p0}");
    }

    #[test]
    fn flat_psd_band_power_closed_form() {
        // flat p dBm/Hz over B Hz integrates to p + 10 log10(B)
        let p = -100.0;
        let psd = Psd {
            f_start_hz: 0.0,
            resolution_hz: 100.0,
            values_dbm_per_hz: vec![p; 1000],
            calibration_mw_per_unit: 1.0,
        };
        let full = band_power_dbm(&psd, 0.0, 1e5).unwrap();
        assert!((full - (p + 10.0 * 1e5f64.log10())).abs() < 1e-9);
        // half of the bins -> 3.01 dB less
        let half = band_power_dbm(&psd, 0.0, 499.5 * 100.0).unwrap();
        assert!((full - half - 10.0 * 2f64.log10()).abs() < 1e-9);
    }

    #[test]
    fn band_power_errors() {
        let psd = Psd {
            f_start_hz: 1e9,
            resolution_hz: 1e3,
            values_dbm_per_hz: vec![-100.0; 10],
            calibration_mw_per_unit: 1.0,
        };
        assert!(matches!(
            band_power_dbm(&psd, 2e9, 3e9),
            Err(Error::EmptyBand { .. })
        ));
    }

    #[test]
    fn welch_input_validation() {
        let block = white_noise_block(128, 1);
        let err = welch_psd(&block, &WelchConfig::default()).unwrap_err();
        assert!(matches!(
            err,
            Error::InputTooShort {
                segment: 256,
                got: 128
            }
        ));

        let mut bad = white_noise_block(1024, 1);
        bad.samples[77] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            welch_psd(&bad, &WelchConfig::default()),
            Err(Error::NonFiniteSample(77))
        ));

        let block = white_noise_block(1024, 1);
        let bad_seg = WelchConfig {
            segment_len: 100,
            ..WelchConfig::default()
        };
        assert!(welch_psd(&block, &bad_seg).is_err());
        let bad_overlap = WelchConfig {
            overlap_frac: 1.0,
            ..WelchConfig::default()
        };
        assert!(welch_psd(&block, &bad_overlap).is_err());
    }

    #[test]
    fn cu8_codec_on_four_samples() {
        // 0 -> -1.0, 255 -> +1.0, 127/128 -> -+0.5/255... fixed mapping
        let bytes = [0u8, 255, 127, 128, 191, 64, 127, 127];
        let samples = parse_cu8(&bytes);
        assert_eq!(samples.len(), 4);
        assert!((samples[0].re - (-1.0)).abs() < 1e-12);
        assert!((samples[0].im - 1.0).abs() < 1e-12);
        assert!((samples[1].re - (-0.5 / 127.5)).abs() < 1e-12);
        assert!((samples[1].im - 0.5 / 127.5).abs() < 1e-12);
        assert!((samples[2].re - 0.49803921568627446).abs() < 1e-12);
        assert!((samples[2].im - (-0.49803921568627446)).abs() < 1e-12);
        assert_eq!(samples[3].re, samples[3].im);
    }

    #[test]
    fn cf32_codec_round_trip() {
        let vals = [1.0f32, -0.5, 0.25, 3.75];
        let mut bytes = Vec::new();
        for v in vals {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let samples = parse_cf32(&bytes).unwrap();
        assert_eq!(samples.len(), 2);
        assert_eq!(samples[0], Complex64::new(1.0, -0.5));
        assert_eq!(samples[1], Complex64::new(0.25, 3.75));
        assert!(parse_cf32(&bytes[..7]).is_err());
    }
}
