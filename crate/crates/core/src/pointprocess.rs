//! Homogeneous Poisson point processes over rectangular regions with
//! reproducible seeding.
//!
//! All sampling uses `ChaCha8Rng` seeded from an explicit `u64`. Experiments
//! that need several independent draws (sources, sensors, shadowing, Monte
//! Carlo trials) derive one child seed per purpose from a master seed via
//! [`derive_seed`] with the labels in [`streams`]; the same master seed then
//! reproduces the whole experiment on any platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sub-stream labels for [`derive_seed`], one per consumer of randomness.
pub mod streams {
    /// Source (transmitter) point process.
    pub const SOURCES: u64 = 0;
    /// Sensor point process.
    pub const SENSORS: u64 = 1;
    /// Shadowing draws.
    pub const SHADOWING: u64 = 2;
    /// Monte Carlo trial batches.
    pub const MC: u64 = 3;
}

/// Derives a labeled child seed from a master seed.
///
/// splitmix64 finalizer over `master + (label + 1) * golden`; distinct labels
/// give statistically independent ChaCha streams.
pub fn derive_seed(master: u64, label: u64) -> u64 {
    let mut z = master.wrapping_add(label.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Axis-aligned rectangular region in planar km coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let r = Region {
            x_min,
            x_max,
            y_min,
            y_max,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.x_max <= self.x_min || self.y_max <= self.y_min {
            return Err(Error::InvalidRegion {
                x_min: self.x_min,
                x_max: self.x_max,
                y_min: self.y_min,
                y_max: self.y_max,
            });
        }
        Ok(())
    }

    pub fn area_km2(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    /// Closed containment check.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        )
    }

    /// Region grown by `pad_km` on every side.
    pub fn dilated(&self, pad_km: f64) -> Region {
        Region {
            x_min: self.x_min - pad_km,
            x_max: self.x_max + pad_km,
            y_min: self.y_min - pad_km,
            y_max: self.y_max + pad_km,
        }
    }

    fn as_array(&self) -> [f64; 4] {
        [self.x_min, self.x_max, self.y_min, self.y_max]
    }
}

/// One realization of a planar point process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "PointSetRepr", try_from = "PointSetRepr")]
pub struct PointSet {
    pub points: Vec<(f64, f64)>,
    /// Intensity the realization was drawn with, in points per km².
    pub intensity: f64,
    pub region: Region,
    /// Seed the realization was drawn with.
    pub seed: u64,
}

/// Wire form: `{"seed": .., "intensity": .., "region": [x_min,x_max,y_min,y_max], "points": [[x,y],..]}`.
#[derive(Serialize, Deserialize)]
struct PointSetRepr {
    seed: u64,
    intensity: f64,
    region: [f64; 4],
    points: Vec<(f64, f64)>,
}

impl From<PointSet> for PointSetRepr {
    fn from(ps: PointSet) -> Self {
        PointSetRepr {
            seed: ps.seed,
            intensity: ps.intensity,
            region: ps.region.as_array(),
            points: ps.points,
        }
    }
}

impl TryFrom<PointSetRepr> for PointSet {
    type Error = Error;

    fn try_from(repr: PointSetRepr) -> Result<Self> {
        let [x_min, x_max, y_min, y_max] = repr.region;
        let region = Region::new(x_min, x_max, y_min, y_max)?;
        if let Some(&(x, y)) = repr.points.iter().find(|(x, y)| !region.contains(*x, *y)) {
            return Err(Error::param(
                "points",
                format!("point ({x}, {y}) lies outside the region"),
            ));
        }
        Ok(PointSet {
            points: repr.points,
            intensity: repr.intensity,
            region,
            seed: repr.seed,
        })
    }
}

impl PointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Samples a homogeneous Poisson point process of the given intensity
/// (points per km²) over `region`.
///
/// Draws `N ~ Poisson(intensity * area)` and then `N` points i.i.d. uniform
/// over the region. Identical `(region, intensity, seed)` produce an
/// identical point list.
pub fn sample_ppp(region: Region, intensity: f64, seed: u64) -> Result<PointSet> {
    region.validate()?;
    if !intensity.is_finite() || intensity < 0.0 {
        return Err(Error::param(
            "intensity",
            format!("must be finite and >= 0, got {intensity}"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = sample_poisson_count(&mut rng, intensity * region.area_km2());
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let x = rng.random_range(region.x_min..region.x_max);
        let y = rng.random_range(region.y_min..region.y_max);
        points.push((x, y));
    }
    Ok(PointSet {
        points,
        intensity,
        region,
        seed,
    })
}

/// Poisson count draw; exact for all means (inversion for small means,
/// transformed rejection for large — no normal approximation).
pub(crate) fn sample_poisson_count<R: Rng>(rng: &mut R, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive finite mean");
    dist.sample(rng) as usize
}

/// Empirical mean and variance of the point count over `n_trials`
/// independent realizations (trial `t` uses `derive_seed(seed, t)`).
///
/// For a correct sampler both approach `intensity * area`.
pub fn count_distribution_check(
    region: Region,
    intensity: f64,
    n_trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    region.validate()?;
    if n_trials < 1 {
        return Err(Error::param("n_trials", "must be >= 1"));
    }
    if !intensity.is_finite() || intensity < 0.0 {
        return Err(Error::param(
            "intensity",
            format!("must be finite and >= 0, got {intensity}"),
        ));
    }
    let mean_count = intensity * region.area_km2();
    let counts = crate::exec::map_indexed(n_trials, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64));
        sample_poisson_count(&mut rng, mean_count) as f64
    });
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let var = if n_trials == 1 {
        0.0
    } else {
        counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (n - 1.0)
    };
    Ok((mean, var))
}
