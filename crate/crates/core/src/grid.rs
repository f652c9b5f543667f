//! Rectangular evaluation meshes and masked scalar fields on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointprocess::Region;

/// A regular `nx` x `ny` node mesh spanning a region, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub region: Region,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(region: Region, nx: usize, ny: usize) -> Result<Self> {
        region.validate()?;
        if nx < 2 || ny < 2 {
            return Err(Error::param(
                "grid",
                format!("grid dims must be >= 2, got {nx}x{ny}"),
            ));
        }
        Ok(GridSpec { region, nx, ny })
    }

    /// Node x coordinate; the last column lands exactly on `x_max`.
    pub fn x_at(&self, ix: usize) -> f64 {
        if ix == self.nx - 1 {
            return self.region.x_max;
        }
        let step = (self.region.x_max - self.region.x_min) / (self.nx - 1) as f64;
        self.region.x_min + ix as f64 * step
    }

    /// Node y coordinate; the last row lands exactly on `y_max`.
    pub fn y_at(&self, iy: usize) -> f64 {
        if iy == self.ny - 1 {
            return self.region.y_max;
        }
        let step = (self.region.y_max - self.region.y_min) / (self.ny - 1) as f64;
        self.region.y_min + iy as f64 * step
    }

    /// Node coordinates for a row-major flat index (`idx = iy * nx + ix`).
    pub fn node(&self, idx: usize) -> (f64, f64) {
        (self.x_at(idx % self.nx), self.y_at(idx / self.nx))
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Row-major scalar field over a [`GridSpec`] with a validity mask
/// (`mask[i] == false` marks nodes outside the interpolation hull).
#[derive(Debug, Clone)]
pub struct GridField {
    pub spec: GridSpec,
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
}

/// Bit-level equality (masked nodes hold NaN, which still compares equal
/// to itself here); this is the determinism check used by the tests.
impl PartialEq for GridField {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
            && self.mask == other.mask
            && self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl GridField {
    pub fn new(spec: GridSpec, values: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        if values.len() != spec.len() || mask.len() != spec.len() {
            return Err(Error::param(
                "grid field",
                format!(
                    "expected {} nodes, got {} values / {} mask entries",
                    spec.len(),
                    values.len(),
                    mask.len()
                ),
            ));
        }
        Ok(GridField { spec, values, mask })
    }

    pub fn unmasked_count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    /// Min and max over unmasked nodes, if any.
    pub fn value_range(&self) -> Option<(f64, f64)> {
        let mut range: Option<(f64, f64)> = None;
        for (v, m) in self.values.iter().zip(&self.mask) {
            if *m {
                range = Some(match range {
                    None => (*v, *v),
                    Some((lo, hi)) => (lo.min(*v), hi.max(*v)),
                });
            }
        }
        range
    }
}
