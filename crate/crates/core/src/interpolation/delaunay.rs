//! Incremental Delaunay construction over lexicographically sorted points.
//!
//! Points are inserted in `(x, y)` order, so every new point lies outside
//! the hull built so far: insertion reduces to fanning triangles onto the
//! strictly visible hull arc and restoring the Delaunay property with
//! Lawson edge flips. All sign decisions go through the exact predicates,
//! so the structure is valid for any finite input. Cocircular ties never
//! flip (the strictly-inside test decides), which pins the diagonal chosen
//! for tied configurations to insertion order — deterministic because the
//! input is sorted.

use std::collections::HashMap;

use super::predicates::{incircle, orient2d, Sign};
use crate::error::{Error, Result};

/// Triangle soup with twin half-edge links.
///
/// Half-edge `e = 3t + i` runs `triangles[t][i] -> triangles[t][(i+1)%3]`;
/// `twins[e]` is the oppositely directed half-edge in the adjacent triangle,
/// `None` on the hull. All triangles are counterclockwise.
#[derive(Debug)]
pub(crate) struct DelaunayCore {
    pub triangles: Vec<[usize; 3]>,
    pub twins: Vec<Option<usize>>,
}

struct Builder {
    points: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    twins: Vec<Option<usize>>,
    /// Directed boundary edge (from, to) -> half-edge slot, for twin stitching.
    boundary: HashMap<(usize, usize), usize>,
    /// Current hull ring, counterclockwise.
    hull: Vec<usize>,
    /// Scratch stack for legalization.
    suspect: Vec<usize>,
}

/// Builds the Delaunay triangulation of `points`, which must be
/// lexicographically sorted by `(x, y)` and free of duplicates.
pub(crate) fn triangulate_core(points: &[[f64; 2]]) -> Result<DelaunayCore> {
    let n = points.len();
    if n < 3 {
        return Err(Error::DegenerateSites {
            count: n,
            reason: "need at least 3 distinct sites",
        });
    }

    // leading run of collinear points
    let mut first_apex = None;
    for (k, p) in points.iter().enumerate().skip(2) {
        if orient2d(points[0], points[1], *p) != Sign::Zero {
            first_apex = Some(k);
            break;
        }
    }
    let Some(k) = first_apex else {
        return Err(Error::DegenerateSites {
            count: n,
            reason: "all sites are collinear",
        });
    };

    let mut b = Builder {
        points: points.to_vec(),
        triangles: Vec::with_capacity(2 * n),
        twins: Vec::with_capacity(6 * n),
        boundary: HashMap::new(),
        hull: Vec::new(),
        suspect: Vec::new(),
    };

    // initial fan: apex k over the sorted collinear chain 0..k
    let left_of_chain = orient2d(points[0], points[1], points[k]) == Sign::Positive;
    for j in 0..k - 1 {
        if left_of_chain {
            b.add_triangle(j, j + 1, k);
        } else {
            b.add_triangle(j + 1, j, k);
        }
    }
    if left_of_chain {
        b.hull.extend(0..k);
    } else {
        b.hull.extend((0..k).rev());
    }
    b.hull.push(k);

    for p in k + 1..n {
        b.insert_outside(p);
    }

    debug_assert!(b.twins_consistent());
    Ok(DelaunayCore {
        triangles: b.triangles,
        twins: b.twins,
    })
}

impl Builder {
    /// Appends a CCW triangle, stitching twin links against any boundary
    /// edge already waiting for its reverse.
    fn add_triangle(&mut self, a: usize, c: usize, d: usize) -> usize {
        let t = self.triangles.len();
        self.triangles.push([a, c, d]);
        self.twins.extend([None, None, None]);
        let verts = [a, c, d];
        for i in 0..3 {
            let e = 3 * t + i;
            let from = verts[i];
            let to = verts[(i + 1) % 3];
            if let Some(rev) = self.boundary.remove(&(to, from)) {
                self.twins[e] = Some(rev);
                self.twins[rev] = Some(e);
            } else {
                self.boundary.insert((from, to), e);
            }
        }
        t
    }

    /// Inserts point `p`, which lies outside the current hull.
    fn insert_outside(&mut self, p: usize) {
        let m = self.hull.len();
        let pp = self.points[p];
        let visible: Vec<bool> = (0..m)
            .map(|i| {
                let u = self.points[self.hull[i]];
                let w = self.points[self.hull[(i + 1) % m]];
                orient2d(u, w, pp) == Sign::Negative
            })
            .collect();

        // the strictly visible edges form one contiguous circular arc
        let start = (0..m)
            .find(|&i| !visible[i] && visible[(i + 1) % m])
            .expect("point outside hull must see a proper arc");
        let arc_start = (start + 1) % m;
        let mut arc_len = 0;
        while visible[(arc_start + arc_len) % m] {
            arc_len += 1;
            debug_assert!(arc_len <= m, "visible arc wrapped the whole hull");
        }
        debug_assert!(
            (0..m).filter(|&i| visible[i]).count() == arc_len,
            "visible edges not contiguous"
        );

        for j in 0..arc_len {
            let u = self.hull[(arc_start + j) % m];
            let w = self.hull[(arc_start + j + 1) % m];
            let t = self.add_triangle(w, u, p);
            // base edge (w -> u) twins the interior; flips start there
            self.suspect.push(3 * t);
        }
        self.legalize();

        // splice: keep arc endpoints, replace interior arc vertices with p
        let mut next_hull = Vec::with_capacity(m + 1 - arc_len.saturating_sub(1));
        let mut i = (arc_start + arc_len) % m; // first vertex after the arc
        loop {
            next_hull.push(self.hull[i]);
            if i == arc_start {
                break;
            }
            i = (i + 1) % m;
        }
        next_hull.push(p);
        self.hull = next_hull;
    }

    /// Lawson flip loop over the suspect-edge stack.
    fn legalize(&mut self) {
        while let Some(e) = self.suspect.pop() {
            let Some(f) = self.twins[e] else { continue };
            let (t1, i) = (e / 3, e % 3);
            let (t2, j) = (f / 3, f % 3);
            let a = self.triangles[t1][i];
            let bb = self.triangles[t1][(i + 1) % 3];
            let c = self.triangles[t1][(i + 2) % 3];
            let d = self.triangles[t2][(j + 2) % 3];
            debug_assert_eq!(self.triangles[t2][j], bb);
            debug_assert_eq!(self.triangles[t2][(j + 1) % 3], a);

            let inside = incircle(
                self.points[a],
                self.points[bb],
                self.points[c],
                self.points[d],
            );
            if inside != Sign::Positive {
                continue;
            }

            // flip shared edge a-b to c-d: (a,b,c)/(b,a,d) -> (a,d,c)/(d,b,c)
            let t_bc = self.twins[3 * t1 + (i + 1) % 3];
            let t_ca = self.twins[3 * t1 + (i + 2) % 3];
            let t_ad = self.twins[3 * t2 + (j + 1) % 3];
            let t_db = self.twins[3 * t2 + (j + 2) % 3];

            self.triangles[t1] = [a, d, c];
            self.triangles[t2] = [d, bb, c];

            let e_ad = 3 * t1;
            let e_dc = 3 * t1 + 1;
            let e_ca = 3 * t1 + 2;
            let e_db = 3 * t2;
            let e_bc = 3 * t2 + 1;
            let e_cd = 3 * t2 + 2;

            self.twins[e_dc] = Some(e_cd);
            self.twins[e_cd] = Some(e_dc);
            self.relink(e_ad, t_ad, a, d);
            self.relink(e_ca, t_ca, c, a);
            self.relink(e_db, t_db, d, bb);
            self.relink(e_bc, t_bc, bb, c);

            self.suspect.extend([e_ad, e_ca, e_db, e_bc]);
        }
    }

    /// Points an outer edge slot at its (possibly relocated) twin, or
    /// refreshes the boundary map entry when the edge is on the hull.
    fn relink(&mut self, slot: usize, twin: Option<usize>, from: usize, to: usize) {
        self.twins[slot] = twin;
        match twin {
            Some(h) => self.twins[h] = Some(slot),
            None => {
                self.boundary.insert((from, to), slot);
            }
        }
    }

    fn twins_consistent(&self) -> bool {
        (0..self.twins.len()).all(|e| match self.twins[e] {
            None => true,
            Some(f) => {
                let ok_link = self.twins[f] == Some(e);
                let (t1, i) = (e / 3, e % 3);
                let (t2, j) = (f / 3, f % 3);
                let same_edge = self.triangles[t1][i] == self.triangles[t2][(j + 1) % 3]
                    && self.triangles[t1][(i + 1) % 3] == self.triangles[t2][j];
                ok_link && same_edge
            }
        })
    }
}
