//! Small numerical routines: bracketed bisection and 2x2 linear algebra.

pub type Matrix2 = [[f64; 2]; 2];

/// Bisection on a sign change. `f(lo)` and `f(hi)` must have opposite
/// signs (or one of them be zero). Runs to machine precision.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Largest root in `[0, 1]` of `g -> map(g) - g` for a continuous,
/// concave, nondecreasing self-map of the unit interval.
pub fn largest_fixed_point_concave(map: impl Fn(f64) -> f64) -> f64 {
    let f = |g: f64| map(g) - g;
    if f(1.0) >= 0.0 {
        return 1.0;
    }
    if f(0.0) > 0.0 {
        return bisect(f, 0.0, 1.0);
    }
    // f(0) == 0: a positive root exists iff f turns positive just right of 0.
    // Probing stops well above the scale where `map` is pure rounding noise.
    let mut x = 0.5;
    for _ in 0..24 {
        if f(x) > 0.0 {
            return bisect(f, x, 1.0);
        }
        x *= 0.5;
    }
    0.0
}

pub fn spectral_radius(m: &Matrix2) -> f64 {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr / 4.0 - det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        (tr / 2.0 + s).abs().max((tr / 2.0 - s).abs())
    } else {
        // complex pair: |lambda|^2 = det
        det.sqrt()
    }
}

pub fn inverse(m: &Matrix2) -> Option<Matrix2> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
}

pub fn identity_minus(m: &Matrix2) -> Matrix2 {
    [[1.0 - m[0][0], -m[0][1]], [-m[1][0], 1.0 - m[1][1]]]
}

pub fn mat_vec(m: &Matrix2, v: [f64; 2]) -> [f64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}
