//! Geographic to local planar km conversion.
//!
//! Equirectangular projection about a reference point: adequate at city
//! scale (worst case a few meters over tens of km), which is all the
//! region sizes here call for. `Planar` means the record `lon`/`lat`
//! fields already carry x/y km and pass through untouched.

use clap::ValueEnum;

const KM_PER_DEG_LAT: f64 = 110.574;
const KM_PER_DEG_LON_EQUATOR: f64 = 111.320;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProjKind {
    /// lon/lat fields are planar x/y km already
    Planar,
    /// lon/lat degrees, projected about the region centroid
    Equirect,
}

#[derive(Debug, Clone, Copy)]
pub enum Projection {
    Planar,
    Equirect { lat0_deg: f64, lon0_deg: f64 },
}

impl Projection {
    pub fn to_km(&self, lat: f64, lon: f64) -> (f64, f64) {
        match *self {
            Projection::Planar => (lon, lat),
            Projection::Equirect { lat0_deg, lon0_deg } => {
                let kx = KM_PER_DEG_LON_EQUATOR * lat0_deg.to_radians().cos();
                ((lon - lon0_deg) * kx, (lat - lat0_deg) * KM_PER_DEG_LAT)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_is_identity() {
        let p = Projection::Planar;
        assert_eq!(p.to_km(0.25, 0.75), (0.75, 0.25));
    }

    #[test]
    fn equirect_scales_by_latitude() {
        let p = Projection::Equirect {
            lat0_deg: 41.68,
            lon0_deg: -86.25,
        };
        let (x, y) = p.to_km(41.69, -86.25);
        assert!(x.abs() < 1e-12);
        assert!((y - 0.01 * KM_PER_DEG_LAT).abs() < 1e-9);
        let (x, _) = p.to_km(41.68, -86.24);
        assert!((x - 0.01 * KM_PER_DEG_LON_EQUATOR * 41.68f64.to_radians().cos()).abs() < 1e-9);
    }
}
