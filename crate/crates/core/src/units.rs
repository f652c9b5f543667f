//! Power unit conversions and order-stable dB-domain accumulation.
//!
//! Sums and means of dBm quantities are evaluated in the linear milliwatt
//! domain with the largest term factored out, so very small values
//! (down to the -300 dBm representation floor) neither underflow nor
//! swamp the result, and a single-element sum returns its input bit-exactly.

/// Representation floor for "no power" in dB quantities.
pub const DBM_FLOOR: f64 = -300.0;

/// dBm (or any dB quantity) to linear milliwatts. `-inf` maps to 0.
#[inline]
pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Linear milliwatts to dBm. Zero or negative power maps to `-inf`.
#[inline]
pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Sum of powers given in dBm, returned in dBm.
///
/// Exactly the identity for a single finite term. Empty input or all
/// `-inf` terms return `-inf`.
pub fn dbm_sum(terms: &[f64]) -> f64 {
    match terms {
        [] => f64::NEG_INFINITY,
        [single] => *single,
        _ => {
            let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if max == f64::NEG_INFINITY {
                return f64::NEG_INFINITY;
            }
            let sum: f64 = terms.iter().map(|t| dbm_to_mw(t - max)).sum();
            max + mw_to_dbm(sum)
        }
    }
}

/// Linear-domain mean of powers given in dBm, returned in dBm.
///
/// Exactly the identity for a single finite term.
pub fn dbm_mean(terms: &[f64]) -> f64 {
    match terms {
        [] => f64::NEG_INFINITY,
        [single] => *single,
        _ => {
            let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if max == f64::NEG_INFINITY {
                return f64::NEG_INFINITY;
            }
            let sum: f64 = terms.iter().map(|t| dbm_to_mw(t - max)).sum();
            max + mw_to_dbm(sum / terms.len() as f64)
        }
    }
}
