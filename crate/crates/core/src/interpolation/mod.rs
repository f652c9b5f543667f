//! Delaunay triangulation of irregular sample sites and piecewise-planar
//! interpolation of their dBm values.
//!
//! Each triangle carries the coefficients of the plane
//! `f(x, y) = a x + b y + c` through its three vertices, so interpolation
//! inside the convex hull is a point location followed by one plane
//! evaluation; values never leave the dBm domain. Queries outside the hull
//! return `None` (masked, no extrapolation). Sites sharing identical
//! coordinates are fused up front by averaging their values in the linear
//! milliwatt domain.
//!
//! Construction canonicalizes the site order internally, so any permutation
//! of the same input multiset produces a bit-identical triangulation.

mod delaunay;
mod predicates;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{GridField, GridSpec};
use crate::units::dbm_mean;
use delaunay::DelaunayCore;
use predicates::{orient2d, Sign};

/// A sample site: planar km coordinates and a dBm value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Site {
    pub x: f64,
    pub y: f64,
    pub z_dbm: f64,
}

/// Plane coefficients `f(x, y) = a x + b y + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Plane {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Plane {
    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.a.mul_add(x, self.b.mul_add(y, self.c))
    }
}

/// Delaunay partition of the sample sites with per-triangle planes.
#[derive(Debug, Clone)]
pub struct Triangulation {
    sites: Vec<Site>,
    /// CCW vertex index triples, smallest index first.
    triangles: Vec<[usize; 3]>,
    /// Twin half-edge per `3t + i`; `None` on the hull.
    twins: Vec<Option<usize>>,
    planes: Vec<Plane>,
}

/// Builds the Delaunay triangulation of `sites` and solves each triangle's
/// plane from its vertices.
///
/// Duplicate coordinates are fused (linear-domain mean of their values)
/// before triangulating. Fails with [`Error::DegenerateSites`] when fewer
/// than 3 distinct sites remain or all are collinear.
pub fn triangulate(sites: &[(f64, f64, f64)]) -> Result<Triangulation> {
    for &(x, y, z) in sites {
        if !x.is_finite() || !y.is_finite() || !z.is_finite() {
            return Err(Error::param(
                "sites",
                format!("non-finite site ({x}, {y}, {z})"),
            ));
        }
    }
    let fused = fuse_duplicate_sites(sites);
    let points: Vec<[f64; 2]> = fused.iter().map(|s| [s.x, s.y]).collect();
    let core = delaunay::triangulate_core(&points)?;
    Ok(assemble(fused, core))
}

/// Sorts lexicographically and fuses identical coordinates; the mean is
/// taken over value-sorted members so the result does not depend on the
/// input order.
fn fuse_duplicate_sites(sites: &[(f64, f64, f64)]) -> Vec<Site> {
    let mut sorted: Vec<(f64, f64, f64)> = sites.to_vec();
    sorted.sort_by(|a, b| {
        (a.0, a.1)
            .partial_cmp(&(b.0, b.1))
            .expect("finite coordinates")
    });
    let mut fused: Vec<Site> = Vec::with_capacity(sorted.len());
    let mut i = 0;
    while i < sorted.len() {
        let (x, y, _) = sorted[i];
        let mut group: Vec<f64> = Vec::new();
        while i < sorted.len() && sorted[i].0 == x && sorted[i].1 == y {
            group.push(sorted[i].2);
            i += 1;
        }
        group.sort_by(f64::total_cmp);
        fused.push(Site {
            x,
            y,
            z_dbm: dbm_mean(&group),
        });
    }
    fused
}

fn assemble(sites: Vec<Site>, core: DelaunayCore) -> Triangulation {
    let ntri = core.triangles.len();
    // rotate each triangle so its smallest vertex index leads (keeps CCW);
    // remap twin slots accordingly
    let mut rot = vec![0usize; ntri];
    let mut triangles = Vec::with_capacity(ntri);
    for (t, tri) in core.triangles.iter().enumerate() {
        let r = (0..3).min_by_key(|&i| tri[i]).unwrap();
        rot[t] = r;
        triangles.push([tri[r], tri[(r + 1) % 3], tri[(r + 2) % 3]]);
    }
    let remap = |e: usize| {
        let (t, i) = (e / 3, e % 3);
        3 * t + (i + 3 - rot[t]) % 3
    };
    let mut twins = vec![None; 3 * ntri];
    for e in 0..3 * ntri {
        twins[remap(e)] = core.twins[e].map(remap);
    }

    let planes = triangles
        .iter()
        .map(|&[i, j, k]| solve_plane(&sites[i], &sites[j], &sites[k]))
        .collect();

    Triangulation {
        sites,
        triangles,
        twins,
        planes,
    }
}

/// Plane through three sites, solved in coordinates translated to the first
/// vertex to keep the residual at the vertices near machine precision.
fn solve_plane(s1: &Site, s2: &Site, s3: &Site) -> Plane {
    let u2 = s2.x - s1.x;
    let v2 = s2.y - s1.y;
    let w2 = s2.z_dbm - s1.z_dbm;
    let u3 = s3.x - s1.x;
    let v3 = s3.y - s1.y;
    let w3 = s3.z_dbm - s1.z_dbm;
    let det = u2 * v3 - u3 * v2;
    let a = (w2 * v3 - w3 * v2) / det;
    let b = (u2 * w3 - u3 * w2) / det;
    let c = s1.z_dbm - a * s1.x - b * s1.y;
    Plane { a, b, c }
}

impl Triangulation {
    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn planes(&self) -> &[Plane] {
        &self.planes
    }

    fn point(&self, v: usize) -> [f64; 2] {
        [self.sites[v].x, self.sites[v].y]
    }

    /// Walks from `start` to a triangle containing `p` (closed hull
    /// convention), or `None` when `p` is outside the hull.
    fn locate_from(&self, p: [f64; 2], start: usize) -> Option<usize> {
        let mut t = start.min(self.triangles.len() - 1);
        let mut steps = 0usize;
        'walk: loop {
            let tri = self.triangles[t];
            for i in 0..3 {
                let a = self.point(tri[i]);
                let b = self.point(tri[(i + 1) % 3]);
                if orient2d(a, b, p) == Sign::Negative {
                    match self.twins[3 * t + i] {
                        Some(f) => {
                            t = f / 3;
                            steps += 1;
                            if steps > 4 * self.triangles.len() {
                                break 'walk;
                            }
                            continue 'walk;
                        }
                        None => return None,
                    }
                }
            }
            return Some(self.canonical_containing(t, p));
        }
        // the visibility walk terminates on Delaunay triangulations; keep a
        // brute-force fallback so a query can never spin
        (0..self.triangles.len())
            .find(|&t| self.contains_closed(t, p))
            .map(|t| self.canonical_containing(t, p))
    }

    fn contains_closed(&self, t: usize, p: [f64; 2]) -> bool {
        let tri = self.triangles[t];
        (0..3).all(|i| {
            orient2d(self.point(tri[i]), self.point(tri[(i + 1) % 3]), p) != Sign::Negative
        })
    }

    /// For points on shared edges or vertices, several triangles contain
    /// `p`; pick the smallest index so every query path returns the same
    /// triangle bit-for-bit.
    fn canonical_containing(&self, t: usize, p: [f64; 2]) -> usize {
        let tri = self.triangles[t];
        let strict = (0..3).all(|i| {
            orient2d(self.point(tri[i]), self.point(tri[(i + 1) % 3]), p) == Sign::Positive
        });
        if strict {
            return t;
        }
        let mut best = t;
        let mut stack = vec![t];
        let mut seen = vec![t];
        while let Some(u) = stack.pop() {
            for i in 0..3 {
                if let Some(f) = self.twins[3 * u + i] {
                    let v = f / 3;
                    if !seen.contains(&v) && self.contains_closed(v, p) {
                        seen.push(v);
                        stack.push(v);
                        best = best.min(v);
                    }
                }
            }
        }
        best
    }

    /// Piecewise-planar interpolation at `at`; `None` outside the hull.
    pub fn interpolate(&self, at: (f64, f64)) -> Option<f64> {
        if !at.0.is_finite() || !at.1.is_finite() {
            return None;
        }
        let t = self.locate_from([at.0, at.1], 0)?;
        Some(self.planes[t].eval(at.0, at.1))
    }

    /// Value of the nearest site; display fill for masked nodes.
    pub fn nearest_site_value(&self, at: (f64, f64)) -> f64 {
        let mut best = (f64::INFINITY, 0usize);
        for (i, s) in self.sites.iter().enumerate() {
            let d = (s.x - at.0).powi(2) + (s.y - at.1).powi(2);
            if d < best.0 {
                best = (d, i);
            }
        }
        self.sites[best.1].z_dbm
    }

    /// Evaluates the interpolant on every mesh node. Nodes outside the hull
    /// carry `NaN` and a cleared mask bit. Rows are evaluated independently
    /// (in parallel with the `parallel` feature); node values are identical
    /// to per-node [`Triangulation::interpolate`] calls.
    pub fn interpolate_grid(&self, spec: &GridSpec) -> GridField {
        let rows = exec::map_indexed(spec.ny, |iy| self.interpolate_row(spec, iy));
        self.assemble_rows(spec, rows)
    }

    /// Always-sequential variant of [`Triangulation::interpolate_grid`];
    /// same output bit-for-bit.
    pub fn interpolate_grid_seq(&self, spec: &GridSpec) -> GridField {
        let rows = exec::map_indexed_seq(spec.ny, |iy| self.interpolate_row(spec, iy));
        self.assemble_rows(spec, rows)
    }

    fn interpolate_row(&self, spec: &GridSpec, iy: usize) -> (Vec<f64>, Vec<bool>) {
        let y = spec.y_at(iy);
        let mut values = Vec::with_capacity(spec.nx);
        let mut mask = Vec::with_capacity(spec.nx);
        let mut start = 0usize;
        for ix in 0..spec.nx {
            let x = spec.x_at(ix);
            match self.locate_from([x, y], start) {
                Some(t) => {
                    values.push(self.planes[t].eval(x, y));
                    mask.push(true);
                    start = t;
                }
                None => {
                    values.push(f64::NAN);
                    mask.push(false);
                }
            }
        }
        (values, mask)
    }

    fn assemble_rows(&self, spec: &GridSpec, rows: Vec<(Vec<f64>, Vec<bool>)>) -> GridField {
        let mut values = Vec::with_capacity(spec.len());
        let mut mask = Vec::with_capacity(spec.len());
        for (v, m) in rows {
            values.extend(v);
            mask.extend(m);
        }
        GridField::new(*spec, values, mask).expect("rows match spec")
    }

    /// Brute-force check that no site lies strictly inside any triangle's
    /// circumcircle beyond `eps` on the normalized determinant. This is the
    /// defining invariant; exposed so tests and diagnostics can verify any
    /// instance in O(T * N).
    pub fn verify_empty_circumcircles(&self, eps: f64) -> bool {
        self.triangles.iter().all(|&[i, j, k]| {
            let (a, b, c) = (self.point(i), self.point(j), self.point(k));
            (0..self.sites.len()).all(|s| {
                if s == i || s == j || s == k {
                    return true;
                }
                normalized_incircle_det(a, b, c, self.point(s)) <= eps
            })
        })
    }
}

/// Incircle determinant scaled by its permanent (sum of absolute products),
/// a dimensionless measure of how far inside the circumcircle `d` sits.
pub fn normalized_incircle_det(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> f64 {
    let adx = a[0] - d[0];
    let ady = a[1] - d[1];
    let bdx = b[0] - d[0];
    let bdy = b[1] - d[1];
    let cdx = c[0] - d[0];
    let cdy = c[1] - d[1];
    let alift = adx * adx + ady * ady;
    let blift = bdx * bdx + bdy * bdy;
    let clift = cdx * cdx + cdy * cdy;
    let det =
        alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) + clift * (adx * bdy - bdx * ady);
    let permanent = ((bdx * cdy).abs() + (cdx * bdy).abs()) * alift
        + ((cdx * ady).abs() + (adx * cdy).abs()) * blift
        + ((adx * bdy).abs() + (bdx * ady).abs()) * clift;
    if permanent == 0.0 {
        0.0
    } else {
        det / permanent
    }
}

impl Serialize for Triangulation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let sites: Vec<[f64; 3]> = self.sites.iter().map(|s| [s.x, s.y, s.z_dbm]).collect();
        let planes: Vec<[f64; 3]> = self.planes.iter().map(|p| [p.a, p.b, p.c]).collect();
        let mut st = serializer.serialize_struct("Triangulation", 3)?;
        st.serialize_field("sites", &sites)?;
        st.serialize_field("triangles", &self.triangles)?;
        st.serialize_field("planes", &planes)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointprocess::Region;
    use crate::units::{dbm_to_mw, mw_to_dbm};

    fn tri_of(sites: &[(f64, f64, f64)]) -> Triangulation {
        triangulate(sites).unwrap()
    }

    #[test]
    fn three_sites_one_triangle() {
        let t = tri_of(&[(0.0, 0.0, 1.0), (1.0, 0.0, 2.0), (0.0, 1.0, 3.0)]);
        assert_eq!(t.triangles().len(), 1);
    }

    #[test]
    fn too_few_or_collinear_sites_fail() {
        assert!(matches!(
            triangulate(&[(0.0, 0.0, 1.0), (1.0, 0.0, 2.0)]),
            Err(Error::DegenerateSites { count: 2, .. })
        ));
        assert!(matches!(
            triangulate(&[(0.0, 0.0, 1.0), (1.0, 1.0, 2.0), (2.0, 2.0, 3.0)]),
            Err(Error::DegenerateSites { count: 3, .. })
        ));
        assert!(triangulate(&[(0.0, f64::NAN, 1.0), (1.0, 0.0, 2.0), (0.0, 1.0, 3.0)]).is_err());
    }

    #[test]
    fn duplicates_fuse_in_linear_domain() {
        // 0 dBm and 10 dBm at one spot average to 10*log10(5.5)
        let t = tri_of(&[
            (0.0, 0.0, 0.0),
            (0.0, 0.0, 10.0),
            (1.0, 0.0, 5.0),
            (0.0, 1.0, 5.0),
        ]);
        assert_eq!(t.sites().len(), 3);
        let fused = t
            .sites()
            .iter()
            .find(|s| s.x == 0.0 && s.y == 0.0)
            .unwrap();
        assert!((fused.z_dbm - 7.403626894942438).abs() < 1e-12);
        // same thing via the units helper
        let expect = mw_to_dbm((dbm_to_mw(0.0) + dbm_to_mw(10.0)) / 2.0);
        assert!((fused.z_dbm - expect).abs() < 1e-12);
    }

    #[test]
    fn unit_square_cocircular_tie() {
        let t = tri_of(&[
            (0.0, 0.0, 1.0),
            (1.0, 0.0, 2.0),
            (1.0, 1.0, 3.0),
            (0.0, 1.0, 4.0),
        ]);
        assert_eq!(t.triangles().len(), 2);
        // either diagonal satisfies the (non-strict) circumcircle test
        assert!(t.verify_empty_circumcircles(1e-10));
        // regenerating gives the identical tie-break
        let again = tri_of(&[
            (1.0, 1.0, 3.0),
            (0.0, 0.0, 1.0),
            (0.0, 1.0, 4.0),
            (1.0, 0.0, 2.0),
        ]);
        assert_eq!(t.triangles(), again.triangles());
    }

    #[test]
    fn vertex_queries_return_site_values() {
        let sites = [
            (0.0, 0.0, -80.0),
            (1.0, 0.1, -70.0),
            (0.2, 1.0, -90.0),
            (0.9, 0.9, -60.0),
            (0.5, 0.4, -75.0),
        ];
        let t = tri_of(&sites);
        for s in t.sites() {
            let got = t.interpolate((s.x, s.y)).unwrap();
            assert!((got - s.z_dbm).abs() <= 1e-9, "site ({}, {})", s.x, s.y);
        }
    }

    #[test]
    fn centroid_is_mean_of_vertices() {
        let t = tri_of(&[(0.0, 0.0, 3.0), (1.0, 0.0, 6.0), (0.0, 1.0, 9.0)]);
        let got = t.interpolate((1.0 / 3.0, 1.0 / 3.0)).unwrap();
        assert!((got - 6.0).abs() <= 1e-9);
    }

    #[test]
    fn planes_pass_through_vertices() {
        let t = tri_of(&[
            (0.0, 0.0, -80.0),
            (1.0, 0.1, -70.0),
            (0.2, 1.0, -90.0),
            (0.9, 0.9, -60.0),
            (0.5, 0.4, -75.0),
            (0.3, 0.7, -82.5),
        ]);
        for (tri, plane) in t.triangles().iter().zip(t.planes()) {
            for &v in tri {
                let s = t.sites()[v];
                assert!(
                    (plane.eval(s.x, s.y) - s.z_dbm).abs() <= 1e-9,
                    "vertex {v}"
                );
            }
        }
    }

    #[test]
    fn outside_hull_is_masked() {
        let t = tri_of(&[(0.0, 0.0, 1.0), (1.0, 0.0, 2.0), (0.0, 1.0, 3.0)]);
        assert!(t.interpolate((2.0, 2.0)).is_none());
        assert!(t.interpolate((-0.1, 0.0)).is_none());
        // on the hull edge counts as inside (closed hull)
        assert!(t.interpolate((0.5, 0.0)).is_some());
        assert!(t.interpolate((0.5, 0.5)).is_some());
    }

    #[test]
    fn grid_matches_pointwise_calls_bit_exactly() {
        let sites = [
            (0.0, 0.0, -80.0),
            (1.0, 0.0, -70.0),
            (0.0, 1.0, -90.0),
            (1.0, 1.0, -60.0),
            (0.4, 0.6, -75.0),
        ];
        let t = tri_of(&sites);
        let spec = GridSpec::new(Region::new(-0.2, 1.2, -0.2, 1.2).unwrap(), 23, 19).unwrap();
        let field = t.interpolate_grid(&spec);
        for idx in 0..spec.len() {
            let (x, y) = spec.node(idx);
            match t.interpolate((x, y)) {
                Some(v) => {
                    assert!(field.mask[idx]);
                    assert_eq!(field.values[idx].to_bits(), v.to_bits(), "node {idx}");
                }
                None => assert!(!field.mask[idx]),
            }
        }
    }

    #[test]
    fn grid_seq_and_parallel_agree_bitwise() {
        let sites = [
            (0.0, 0.0, -80.0),
            (1.0, 0.0, -70.0),
            (0.0, 1.0, -90.0),
            (1.0, 1.0, -60.0),
            (0.4, 0.6, -75.0),
            (0.7, 0.2, -72.0),
        ];
        let t = tri_of(&sites);
        let spec = GridSpec::new(Region::new(0.0, 1.0, 0.0, 1.0).unwrap(), 33, 31).unwrap();
        let par = t.interpolate_grid(&spec);
        let seq = t.interpolate_grid_seq(&spec);
        assert_eq!(par, seq);
    }

    #[test]
    fn grid_inside_single_triangle_is_exact_plane() {
        let t = tri_of(&[(0.0, 0.0, 1.0), (4.0, 0.0, 5.0), (0.0, 4.0, 9.0)]);
        let spec = GridSpec::new(Region::new(0.5, 1.0, 0.5, 1.0).unwrap(), 5, 5).unwrap();
        let field = t.interpolate_grid(&spec);
        let plane = t.planes()[0];
        for idx in 0..spec.len() {
            let (x, y) = spec.node(idx);
            assert!(field.mask[idx]);
            assert_eq!(field.values[idx], plane.eval(x, y));
        }
    }

    #[test]
    fn boundary_nodes_included_on_unit_square() {
        let t = tri_of(&[
            (0.0, 0.0, 1.0),
            (1.0, 0.0, 2.0),
            (1.0, 1.0, 3.0),
            (0.0, 1.0, 4.0),
        ]);
        let spec = GridSpec::new(Region::new(0.0, 1.0, 0.0, 1.0).unwrap(), 5, 5).unwrap();
        let field = t.interpolate_grid(&spec);
        assert_eq!(field.unmasked_count(), spec.len(), "hull is closed");
    }

    #[test]
    fn input_permutation_gives_identical_structure() {
        let sites = [
            (0.31, 0.57, -81.0),
            (0.91, 0.03, -72.5),
            (0.05, 0.88, -64.0),
            (0.44, 0.21, -77.7),
            (0.68, 0.79, -69.1),
            (0.12, 0.33, -85.3),
        ];
        let mut shuffled = sites;
        shuffled.reverse();
        shuffled.swap(0, 3);
        let a = tri_of(&sites);
        let b = tri_of(&shuffled);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn nearest_site_fill() {
        let t = tri_of(&[(0.0, 0.0, 1.0), (1.0, 0.0, 2.0), (0.0, 1.0, 3.0)]);
        assert_eq!(t.nearest_site_value((-5.0, -5.0)), 1.0);
        assert_eq!(t.nearest_site_value((1.2, 0.1)), 2.0);
    }
}
