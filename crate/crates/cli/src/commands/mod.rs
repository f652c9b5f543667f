//! Subcommand implementations and shared flag parsing.

pub mod density;
pub mod map;
pub mod simulate;
pub mod welch;

use crate::error::{CliError, CliResult};

/// `"A:B"` -> `(A, B)`.
pub fn parse_pair(s: &str, what: &str) -> CliResult<(f64, f64)> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 2 {
        return Err(CliError::config(format!("{what} wants LO:HI, got '{s}'")));
    }
    let lo = parse_f64(parts[0], what)?;
    let hi = parse_f64(parts[1], what)?;
    Ok((lo, hi))
}

/// `"A:B:N"` -> N values linearly spaced from A to B inclusive.
pub fn parse_sweep(s: &str, what: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::config(format!("{what} wants START:STOP:COUNT, got '{s}'")));
    }
    let start = parse_f64(parts[0], what)?;
    let stop = parse_f64(parts[1], what)?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| CliError::config(format!("{what}: bad count '{}'", parts[2])))?;
    if count < 2 {
        return Err(CliError::config(format!("{what}: count must be >= 2")));
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

/// `"N"` or `"NXxNY"` -> `(nx, ny)`.
pub fn parse_grid(s: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::config(format!("grid wants N or NXxNY, got '{s}'"));
    match s.split_once('x') {
        Some((a, b)) => {
            let nx = a.parse().map_err(|_| bad())?;
            let ny = b.parse().map_err(|_| bad())?;
            Ok((nx, ny))
        }
        None => {
            let n = s.parse().map_err(|_| bad())?;
            Ok((n, n))
        }
    }
}

/// `"X0:X1:Y0:Y1"` -> four coordinates.
pub fn parse_region4(s: &str) -> CliResult<[f64; 4]> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 4 {
        return Err(CliError::config(format!(
            "region wants X0:X1:Y0:Y1, got '{s}'"
        )));
    }
    let mut out = [0.0; 4];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = parse_f64(part, "region")?;
    }
    Ok(out)
}

fn parse_f64(s: &str, what: &str) -> CliResult<f64> {
    s.trim()
        .parse()
        .map_err(|_| CliError::config(format!("{what}: bad number '{s}'")))
}
