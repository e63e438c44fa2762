//! Roots of real polynomials up to degree three, without an eigen-solver.

use nalgebra::Complex;

/// Roots of `x² + p x + q`, avoiding cancellation.
pub(crate) fn quadratic(p: f64, q: f64) -> [Complex<f64>; 2] {
    let disc = p * p - 4.0 * q;
    if disc >= 0.0 {
        let big = -0.5 * (p + p.signum() * disc.sqrt());
        if big == 0.0 {
            [Complex::new(0.0, 0.0); 2]
        } else {
            [Complex::new(big, 0.0), Complex::new(q / big, 0.0)]
        }
    } else {
        let im = 0.5 * (-disc).sqrt();
        [Complex::new(-0.5 * p, im), Complex::new(-0.5 * p, -im)]
    }
}

/// Roots of `x³ + c2 x² + c1 x + c0`: one real root by bisection to the last
/// bit inside the Cauchy bound, the other two from the deflated quadratic.
pub(crate) fn cubic(c2: f64, c1: f64, c0: f64) -> [Complex<f64>; 3] {
    let p = |x: f64| ((x + c2) * x + c1) * x + c0;
    let bound = 1.0 + c0.abs().max(c1.abs()).max(c2.abs());
    let (mut lo, mut hi) = (-bound, bound);
    let mut r = f64::NAN;
    for _ in 0..2200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let v = p(mid);
        if v == 0.0 {
            r = mid;
            break;
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if r.is_nan() {
        r = if p(lo).abs() <= p(hi).abs() { lo } else { hi };
    }
    let pp = c2 + r;
    let [z1, z2] = quadratic(pp, c1 + r * pp);
    [Complex::new(r, 0.0), z1, z2]
}

/// Complex roots of `c[0] + c[1] x + … + c[n] xⁿ`, `n ≤ 3`, `c[n] ≠ 0`.
pub(crate) fn roots_upto_cubic(c: &[f64]) -> Vec<Complex<f64>> {
    let n = c.len() - 1;
    let l = c[n];
    match n {
        0 => vec![],
        1 => vec![Complex::new(-c[0] / l, 0.0)],
        2 => quadratic(c[1] / l, c[0] / l).to_vec(),
        3 => cubic(c[2] / l, c[1] / l, c[0] / l).to_vec(),
        _ => panic!("degree {n} above three"),
    }
}
