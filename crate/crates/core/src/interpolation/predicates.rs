//! Orientation and incircle predicates with exactly decided signs.
//!
//! Each predicate first evaluates in f64 with a forward error bound on the
//! determinant; when the bound cannot certify the sign, it re-evaluates in
//! exact rational arithmetic (every finite f64 is representable exactly).
//! The slow path is only reached near degeneracy.

use num_rational::BigRational;
use num_traits::Zero;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    fn from_f64(x: f64) -> Sign {
        if x > 0.0 {
            Sign::Positive
        } else if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

// Shewchuk's static filter constants for f64.
const EPSILON: f64 = f64::EPSILON / 2.0; // 2^-53
const CCW_ERRBOUND: f64 = (3.0 + 16.0 * EPSILON) * EPSILON;
const INCIRCLE_ERRBOUND: f64 = (10.0 + 96.0 * EPSILON) * EPSILON;

/// Sign of the signed area of triangle `(a, b, c)`:
/// `Positive` when `c` lies left of the directed line `a -> b`
/// (counterclockwise turn), `Zero` when collinear.
pub fn orient2d(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Sign {
    let detleft = (a[0] - c[0]) * (b[1] - c[1]);
    let detright = (a[1] - c[1]) * (b[0] - c[0]);
    let det = detleft - detright;
    let detsum = detleft.abs() + detright.abs();
    if det.abs() > CCW_ERRBOUND * detsum {
        return Sign::from_f64(det);
    }
    orient2d_exact(a, b, c)
}

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite coordinate")
}

fn rational_sign(r: &BigRational) -> Sign {
    if r.is_zero() {
        Sign::Zero
    } else if r > &BigRational::zero() {
        Sign::Positive
    } else {
        Sign::Negative
    }
}

fn orient2d_exact(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Sign {
    let (ax, ay) = (rat(a[0]), rat(a[1]));
    let (bx, by) = (rat(b[0]), rat(b[1]));
    let (cx, cy) = (rat(c[0]), rat(c[1]));
    let det = (&ax - &cx) * (&by - &cy) - (&ay - &cy) * (&bx - &cx);
    rational_sign(&det)
}

/// Incircle test for a counterclockwise triangle `(a, b, c)`:
/// `Positive` when `d` lies strictly inside the circumcircle,
/// `Zero` when cocircular.
pub fn incircle(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> Sign {
    let adx = a[0] - d[0];
    let ady = a[1] - d[1];
    let bdx = b[0] - d[0];
    let bdy = b[1] - d[1];
    let cdx = c[0] - d[0];
    let cdy = c[1] - d[1];

    let bdxcdy = bdx * cdy;
    let cdxbdy = cdx * bdy;
    let alift = adx * adx + ady * ady;

    let cdxady = cdx * ady;
    let adxcdy = adx * cdy;
    let blift = bdx * bdx + bdy * bdy;

    let adxbdy = adx * bdy;
    let bdxady = bdx * ady;
    let clift = cdx * cdx + cdy * cdy;

    let det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
    let permanent = (bdxcdy.abs() + cdxbdy.abs()) * alift
        + (cdxady.abs() + adxcdy.abs()) * blift
        + (adxbdy.abs() + bdxady.abs()) * clift;
    if det.abs() > INCIRCLE_ERRBOUND * permanent {
        return Sign::from_f64(det);
    }
    incircle_exact(a, b, c, d)
}

fn incircle_exact(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> Sign {
    let (dx, dy) = (rat(d[0]), rat(d[1]));
    let col = |p: [f64; 2]| {
        let px = rat(p[0]) - &dx;
        let py = rat(p[1]) - &dy;
        let lift = &px * &px + &py * &py;
        (px, py, lift)
    };
    let (ax, ay, al) = col(a);
    let (bx, by, bl) = col(b);
    let (cx, cy, cl) = col(c);
    let det = &al * (&bx * &cy - &cx * &by) + &bl * (&cx * &ay - &ax * &cy)
        + &cl * (&ax * &by - &bx * &ay);
    rational_sign(&det)
}
