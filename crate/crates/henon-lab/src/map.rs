use crate::coeffs::{Case, TaylorCoeffs};
use crate::error::HenonError;
use crate::roots::{cubic, roots_upto_cubic};
use nalgebra::Complex;
use serde::{Deserialize, Serialize};

/// Cubic polynomial `f(y, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CubicYZ {
    pub k: f64,
    pub y: f64,
    pub z: f64,
    pub yy: f64,
    pub yz: f64,
    pub zz: f64,
    pub yyy: f64,
    pub yyz: f64,
    pub yzz: f64,
    pub zzz: f64,
}

impl CubicYZ {
    pub fn eval(&self, y: f64, z: f64) -> f64 {
        self.k
            + y * (self.y + y * (self.yy + y * self.yyy + z * self.yyz))
            + z * (self.z + z * (self.zz + z * self.zzz + y * self.yzz))
            + y * z * self.yz
    }

    /// `(f_y, f_z)`.
    pub fn grad(&self, y: f64, z: f64) -> (f64, f64) {
        let fy = self.y + 2.0 * self.yy * y + self.yz * z + 3.0 * self.yyy * y * y + 2.0 * self.yyz * y * z + self.yzz * z * z;
        let fz = self.z + self.yz * y + 2.0 * self.zz * z + self.yyz * y * y + 2.0 * self.yzz * y * z + 3.0 * self.zzz * z * z;
        (fy, fz)
    }
}

/// `(x, y, z) ↦ (y, z, Bx + f(y, z))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HenonSpec {
    pub b: f64,
    pub f: CubicYZ,
    pub eps: [f64; 4],
}

impl HenonSpec {
    pub fn new(b: f64, f: CubicYZ) -> Self {
        Self { b, f, eps: [0.0; 4] }
    }

    /// The map shifted to the fixed point, with linear part set by `(ε₁, ε₂, ε₃)`
    /// and the quadratic part unfolded by `ε₄` for the given case.
    pub fn unfolding(c: &TaylorCoeffs, eps: [f64; 4], case: Case) -> Self {
        let t = c.unfold(case, eps[3]);
        let f = CubicYZ {
            k: 0.0,
            y: 1.0 - eps[1],
            z: -(1.0 + eps[2]),
            yy: t.a,
            yz: t.b,
            zz: t.c,
            yyy: t.d1,
            yyz: t.d2,
            yzz: t.d3,
            zzz: t.d4,
        };
        Self { b: 1.0 - eps[0], f, eps }
    }

    pub fn step(&self, s: &[f64; 3]) -> [f64; 3] {
        [s[1], s[2], self.b * s[0] + self.f.eval(s[1], s[2])]
    }

    pub fn jacobian(&self, s: &[f64; 3]) -> [[f64; 3]; 3] {
        let (fy, fz) = self.f.grad(s[1], s[2]);
        [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [self.b, fy, fz]]
    }
}

pub const OVERFLOW: f64 = 1e150;

/// `s0` followed by `n` iterates.
pub fn iterate(spec: &HenonSpec, s0: [f64; 3], n: usize) -> Result<Vec<[f64; 3]>, HenonError> {
    let mut orbit = Vec::with_capacity(n + 1);
    orbit.push(s0);
    let mut s = s0;
    for i in 1..=n {
        s = spec.step(&s);
        if s.iter().any(|v| !v.is_finite() || v.abs() > OVERFLOW) {
            return Err(HenonError::Diverged { index: i });
        }
        orbit.push(s);
    }
    Ok(orbit)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub x0: f64,
    pub multiplicity: usize,
}

/// Real roots of `Σ cₖ xᵏ` (ascending coefficients), clustered with multiplicity.
fn real_roots(coef: &[f64]) -> Vec<FixedPoint> {
    let mut c: Vec<f64> = coef.to_vec();
    while c.len() > 1 && c.last() == Some(&0.0) {
        c.pop();
    }
    let n = c.len() - 1;
    if n == 0 {
        return vec![];
    }
    let lead = c[n];
    let eig = roots_upto_cubic(&c);
    let p = |x: f64| c.iter().rev().fold(0.0, |acc, a| acc * x + a);
    let dp = |x: f64| c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, a)| acc * x + k as f64 * a);
    let scale = c.iter().fold(0.0_f64, |m, a| m.max(a.abs())) / lead.abs();
    let mut roots: Vec<f64> = eig
        .iter()
        .filter(|z| z.im.abs() <= 1e-7 * (1.0 + z.re.abs()))
        .map(|z| {
            let mut x = z.re;
            for _ in 0..8 {
                let d = dp(x);
                if d == 0.0 {
                    break;
                }
                let nx = x - p(x) / d;
                if p(nx).abs() >= p(x).abs() {
                    break;
                }
                x = nx;
            }
            x
        })
        .collect();
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tol = 1e-6 * (1.0 + scale);
    let mut out: Vec<FixedPoint> = vec![];
    for r in roots {
        match out.last_mut() {
            Some(fp) if (r - fp.x0).abs() < tol => {
                let m = fp.multiplicity as f64;
                fp.x0 = (fp.x0 * m + r) / (m + 1.0);
                fp.multiplicity += 1;
            }
            _ => out.push(FixedPoint { x0: r, multiplicity: 1 }),
        }
    }
    // a cluster centre is a root of the derivative as well; a plain zero is exact for x²
    for fp in &mut out {
        if fp.multiplicity > 1 && p(fp.x0) != 0.0 {
            let mut x = fp.x0;
            for _ in 0..40 {
                let d2 = (1..=n).skip(1).map(|k| (k * (k - 1)) as f64 * c[k] * x.powi(k as i32 - 2)).sum::<f64>();
                if d2 == 0.0 {
                    break;
                }
                let step = dp(x) / d2;
                x -= step;
                if step.abs() < 1e-17 {
                    break;
                }
            }
            if p(x).abs() <= p(fp.x0).abs() {
                fp.x0 = x;
            }
        }
    }
    out
}

/// Points `x = y = z = x₀` with `x₀(1 − B) = f(x₀, x₀)`.
pub fn fixed_points(spec: &HenonSpec) -> Vec<FixedPoint> {
    let f = &spec.f;
    real_roots(&[f.k, f.y + f.z - (1.0 - spec.b), f.yy + f.yz + f.zz, f.yyy + f.yyz + f.yzz + f.zzz])
}

pub fn fixed_point_residual(spec: &HenonSpec, x0: f64) -> f64 {
    (x0 * (1.0 - spec.b) - spec.f.eval(x0, x0)).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `[re, im]` pairs.
    pub roots: [[f64; 2]; 3],
    pub near_plus_one: usize,
    pub near_minus_one: usize,
}

impl Multipliers {
    pub fn complex(&self) -> [Complex<f64>; 3] {
        self.roots.map(|r| Complex::new(r[0], r[1]))
    }
}

pub const UNIT_PROXIMITY: f64 = 1e-6;

/// Roots of `λ³ − Aλ² − Cλ − B`: the best isolated real root is polished and
/// deflated, so a double root of the quadratic factor comes out exactly.
pub fn cubic_multipliers(a: f64, b: f64, c: f64) -> Multipliers {
    let poly = [-b, -c, -a, 1.0];
    let p = |x: f64| ((x - a) * x - c) * x - b;
    let dp = |x: f64| (3.0 * x - 2.0 * a) * x - c;
    let ev = cubic(poly[2], poly[1], poly[0]);
    // real root farthest from the other two
    let mut best = None;
    for i in 0..3 {
        if ev[i].im.abs() > 1e-7 * (1.0 + ev[i].re.abs()) {
            continue;
        }
        let sep = (0..3).filter(|&j| j != i).map(|j| (ev[j] - ev[i]).norm()).fold(f64::INFINITY, f64::min);
        if best.map_or(true, |(_, s)| sep > s) {
            best = Some((ev[i].re, sep));
        }
    }
    let mut r = best.map(|b| b.0).unwrap_or(ev[0].re);
    for _ in 0..20 {
        let d = dp(r);
        if d == 0.0 {
            break;
        }
        let nr = r - p(r) / d;
        if p(nr).abs() >= p(r).abs() {
            break;
        }
        r = nr;
    }
    // (λ − r)(λ² + pλ + q)
    let pq = r - a;
    let q = r * pq - c;
    let disc = pq * pq - 4.0 * q;
    let (z1, z2) = if disc >= 0.0 {
        let sq = disc.sqrt();
        let big = -0.5 * (pq + pq.signum() * sq);
        if big == 0.0 {
            (Complex::new(0.0, 0.0), Complex::new(0.0, 0.0))
        } else {
            (Complex::new(big, 0.0), Complex::new(q / big, 0.0))
        }
    } else {
        let im = 0.5 * (-disc).sqrt();
        (Complex::new(-0.5 * pq, im), Complex::new(-0.5 * pq, -im))
    };
    let roots = [Complex::new(r, 0.0), z1, z2];
    let near = |t: f64| roots.iter().filter(|z| (**z - Complex::new(t, 0.0)).norm() < UNIT_PROXIMITY).count();
    Multipliers {
        a,
        b,
        c,
        roots: roots.map(|z| [z.re, z.im]),
        near_plus_one: near(1.0),
        near_minus_one: near(-1.0),
    }
}

/// Multipliers of the fixed point `x = y = z = x₀`.
pub fn multipliers(spec: &HenonSpec, x0: f64) -> Multipliers {
    let (fy, fz) = spec.f.grad(x0, x0);
    cubic_multipliers(fz, spec.b, fy)
}

/// `(ε₁, ε₂, ε₃) = (1 − B, 1 − C, −1 − A)`.
pub fn epsilon_chart(a: f64, b: f64, c: f64) -> [f64; 3] {
    [1.0 - b, 1.0 - c, -1.0 - a]
}

/// Inverse chart, returning `(A, B, C)`.
pub fn chart_inverse(eps: [f64; 3]) -> (f64, f64, f64) {
    (-1.0 - eps[2], 1.0 - eps[0], 1.0 - eps[1])
}
