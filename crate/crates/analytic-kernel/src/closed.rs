//! Closed-form objects of the first-order homoclinic expansion.

use crate::quadrature::{QuadError, Quadrature};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

/// `32 − 3π²`, the denominator shared by the slope and separatrix constants.
pub const K: f64 = 32.0 - 3.0 * PI * PI;

/// Limit value `π²/(32 − 3π²)` of `A/ε`.
pub fn a1_exact() -> f64 {
    PI * PI / K
}

/// Split integrals of `A₁`, in order.
pub fn split_integrals_exact() -> [f64; 3] {
    [-16.0 / (9.0 * K), 16.0 / (9.0 * K) - 1.0 / 3.0, 1.0 / 3.0 + 2.0 * PI * PI / K]
}

/// Slope `dβ/dλ` of the butterfly surface at the origin.
pub fn surface_slope() -> f64 {
    4.0 / K
}

/// Value and first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    pub x: f64,
    pub dx: f64,
    pub ddx: f64,
}

/// Homoclinic solution `√2 / cosh t` of `ẍ = x − x³`.
pub fn x0_jet(t: f64) -> Jet {
    let s = 1.0 / t.cosh();
    let th = t.tanh();
    Jet { x: SQRT_2 * s, dx: -SQRT_2 * s * th, ddx: SQRT_2 * s * (1.0 - 2.0 * s * s) }
}

/// Coefficients of `β e^{kw}`, `k = 4, 6, …, 24`, in `F(w)` as `w → −∞`.
const LEFT_TAIL: [f64; 11] = [
    -16.0 / 3.0,
    832.0 / 45.0,
    -1408.0 / 35.0,
    111_808.0 / 1575.0,
    -1_154_416.0 / 10_395.0,
    1_125_504.0 / 7007.0,
    -9_903_136.0 / 45_045.0,
    1_990_666_624.0 / 6_891_885.0,
    -424_585_136.0 / 1_154_725.0,
    73_057_134_784.0 / 160_044_885.0,
    -111_487_057_216.0 / 200_783_583.0,
];

/// Even coefficients of `β e^{−kw}`, `k = 4, 6, …, 24`, in `F(w) − F(+∞)` as `w → +∞`.
const RIGHT_TAIL_EVEN: [f64; 11] = [
    16.0,
    -448.0 / 9.0,
    1472.0 / 15.0,
    -27_968.0 / 175.0,
    221_296.0 / 945.0,
    -7_781_248.0 / 24_255.0,
    419_872.0 / 1001.0,
    -214_828_672.0 / 405_405.0,
    2_496_555_088.0 / 3_828_825.0,
    -1_996_072_128.0 / 2_540_395.0,
    40_632_233_984.0 / 43_648_605.0,
];

/// Beta coefficient of `F(w)`, or of `F(w) − F(+∞)` when `relative` is set and `w > 3`.
fn beta_coeff(w: f64) -> (f64, bool) {
    if w < -2.0 {
        let x2 = (2.0 * w).exp();
        let mut acc = 0.0;
        for c in LEFT_TAIL.iter().rev() {
            acc = acc * x2 + c;
        }
        return (acc * x2 * x2, false);
    }
    if w > 3.0 {
        let x = (-w).exp();
        let x2 = x * x;
        let mut even = 0.0;
        for c in RIGHT_TAIL_EVEN.iter().rev() {
            even = even * x2 + c;
        }
        // odd terms: (−1)^m 16 m² π/(2m + 1) x^{2m+1}
        let mut odd = 0.0;
        for m in (1..=12).rev() {
            let mf = m as f64;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            odd = odd * x2 + sign * 16.0 * mf * mf * PI / (2.0 * mf + 1.0);
        }
        return (x2 * x * odd + x2 * x2 * even, true);
    }
    (beta_bulk(w), false)
}

fn beta_bulk(w: f64) -> f64 {
    let th = w.tanh();
    let at = w.exp().atan();
    let sech = 1.0 / w.cosh();
    55.0 / 12.0 - 4.0 * at * at + 3.75 * sech * sech + 4.0 * (th - 2.0) * at * sech
        + 4.0 * th
        + 0.75 * th * th
        + 4.0 / 3.0 * th * th * th
}

/// Lambda coefficient `−(2/3)(1 + tanh³ w)` evaluated without cancellation in either tail.
fn lambda_coeff(w: f64) -> f64 {
    let th = w.tanh();
    if w < 0.0 {
        let one_plus = 2.0 / (1.0 + (-2.0 * w).exp());
        -2.0 / 3.0 * one_plus * (1.0 - th + th * th)
    } else {
        let one_minus = 2.0 / (1.0 + (2.0 * w).exp());
        -4.0 / 3.0 + 2.0 / 3.0 * one_minus * (1.0 + th + th * th)
    }
}

/// `F(w)·μ` in closed form for `μ = (·, λ, β)`.
pub fn melnikov_integrand(w: f64, lambda: f64, beta: f64) -> f64 {
    if w == f64::NEG_INFINITY {
        return 0.0;
    }
    if w == f64::INFINITY {
        return melnikov_limit(lambda, beta);
    }
    let (b, relative) = beta_coeff(w);
    let b = if relative { b + 32.0 / 3.0 - PI * PI } else { b };
    lambda_coeff(w) * lambda + b * beta
}

/// `(F(w) − F(+∞))·μ`, accurate where the difference is exponentially small.
pub fn melnikov_deficit(w: f64, lambda: f64, beta: f64) -> f64 {
    if w == f64::INFINITY {
        return 0.0;
    }
    let th = w.tanh();
    let lam = if w < 0.0 {
        lambda_coeff(w) + 4.0 / 3.0
    } else {
        2.0 / 3.0 * (2.0 / (1.0 + (2.0 * w).exp())) * (1.0 + th + th * th)
    };
    let (b, relative) = beta_coeff(w);
    let b = if relative { b } else { b - (32.0 / 3.0 - PI * PI) };
    lam * lambda + b * beta
}

/// `F(+∞)·μ = (32/3 − π²)β − (4/3)λ`.
pub fn melnikov_limit(lambda: f64, beta: f64) -> f64 {
    (32.0 / 3.0 - PI * PI) * beta - 4.0 / 3.0 * lambda
}

/// `z₁(t) = 2e^{−t}(2 arctan e^t − sech t)β`.
pub fn z1(t: f64, beta: f64) -> f64 {
    if t < -2.0 {
        // 2 arctan x − 2x/(1 + x²) = Σ_{k≥1} (−1)^{k+1} 4k/(2k + 1) x^{2k+1}
        let x2 = (2.0 * t).exp();
        let mut acc = 0.0;
        for k in (1..=14).rev() {
            let kf = k as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            acc = acc * x2 + sign * 4.0 * kf / (2.0 * kf + 1.0);
        }
        return 2.0 * acc * x2 * beta;
    }
    2.0 * (-t).exp() * (2.0 * t.exp().atan() - 1.0 / t.cosh()) * beta
}

/// Taylor coefficients of `F/ẋ₀² − F(0)/(2w²)` at `w = 0`, lambda and beta parts.
const POLE_FREE_LAMBDA: [f64; 12] = [
    -0.555_555_555_555_555_6,
    -0.333_333_333_333_333_3,
    -0.355_555_555_555_555_6,
    -0.222_222_222_222_222_2,
    -0.107_583_774_250_440_9,
    -0.044_444_444_444_444_44,
    -0.015_308_641_975_308_64,
    -0.004_232_804_232_804_233,
    -0.000_994_067_660_734_327_4,
    -0.000_235_155_790_711_346_3,
    -0.000_054_967_307_171_892_71,
    -8.551_119_662_230_773e-6,
];
const POLE_FREE_BETA: [f64; 12] = [
    0.223_085_431_696_069_3,
    0.286_135_782_136_735_6,
    0.240_960_435_630_371_3,
    0.143_264_589_398_844_4,
    0.061_291_297_328_097_68,
    0.022_232_783_556_873_44,
    0.009_027_785_867_686_806,
    0.003_583_956_381_762_498,
    0.000_763_934_035_167_415_3,
    -0.000_085_488_156_917_331_13,
    -0.000_030_343_546_371_024_70,
    0.000_052_716_016_361_341_94,
];

fn horner(c: &[f64], w: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, k| acc * w + k)
}

/// First-order correction of the loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correction {
    pub x1: f64,
    pub z1: f64,
    pub x1_err: f64,
    /// `|t|` exceeded the quadrature horizon.
    pub extrapolated: bool,
}

/// `x₁ = ẋ₀ ⨍₀ᵗ F/ẋ₀²` with the pole `F(0)/(ẍ₀(0)² w²)` subtracted analytically.
pub fn first_order_correction(t: f64, lambda: f64, beta: f64, quad: &Quadrature) -> Result<Correction, QuadError> {
    let z = z1(t, beta);
    let extrapolated = t.abs() > quad.horizon;
    let f0 = melnikov_integrand(0.0, lambda, beta);
    if lambda == 0.0 && beta == 0.0 {
        return Ok(Correction { x1: 0.0, z1: z, x1_err: 0.0, extrapolated });
    }
    let ddx0 = x0_jet(0.0).ddx;
    let pole = f0 / (ddx0 * ddx0);
    if t == 0.0 {
        return Ok(Correction { x1: -f0 / ddx0, z1: z, x1_err: 0.0, extrapolated });
    }
    let mut f_inf = melnikov_limit(lambda, beta);
    // Round-off residue on the surface would be amplified by e^{2t}.
    if f_inf.abs() <= 8.0 * f64::EPSILON * (lambda.abs() + beta.abs()) {
        f_inf = 0.0;
    }
    let g = |w: f64| {
        if w.abs() < 0.1 {
            return lambda * horner(&POLE_FREE_LAMBDA, w) + beta * horner(&POLE_FREE_BETA, w);
        }
        let dx = x0_jet(w).dx;
        let f = if w > 3.0 || f_inf == 0.0 && w > 0.0 { f_inf + melnikov_deficit(w, lambda, beta) } else { melnikov_integrand(w, lambda, beta) };
        f / (dx * dx) - pole / (w * w)
    };
    let r = quad.integrate(g, 0.0, t)?;
    let jet = x0_jet(t);
    let x1 = jet.dx * (r.value - pole / t);
    Ok(Correction { x1, z1: z, x1_err: (jet.dx * r.err).abs(), extrapolated })
}

/// First-order point of the butterfly curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderPoint {
    pub alpha: f64,
    pub lambda: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum KernelError {
    #[error("eps = {0} outside the guard range [0, 0.2]")]
    EpsOutOfRange(f64),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("model invariant violated: {0}")]
    Model(String),
}

/// `α = 1 − ε, λ = 2ε, β = 8ε/(32 − 3π²)`.
pub fn butterfly_curve_prediction(eps: f64) -> Result<FirstOrderPoint, KernelError> {
    if !(0.0..=0.2).contains(&eps) {
        return Err(KernelError::EpsOutOfRange(eps));
    }
    Ok(FirstOrderPoint { alpha: 1.0 - eps, lambda: 2.0 * eps, beta: 8.0 * eps / K })
}

/// `ε` matching a given `β` on the first-order curve.
pub fn eps_of_beta(beta: f64) -> f64 {
    beta * K / 8.0
}

/// Zeroth-order area solution `(v₄⁰, v₂⁰, v₃⁰)`.
pub fn zeroth_order_series(t: f64) -> [f64; 3] {
    let s = 1.0 / t.cosh();
    let th = t.tanh();
    let v4 = -0.5 * th * s * (-t).exp();
    let v2 = 0.25 * s * s * (1.0 - 2.0 * th);
    let v3 = (PI + 4.0 * (0.5 * t).tanh().atan() + 2.0 * s * (2.0 - th)) / (4.0 * SQRT_2);
    [v4, v2, v3]
}

/// Time derivatives of [`zeroth_order_series`], differentiated by hand.
pub fn zeroth_order_series_dot(t: f64) -> [f64; 3] {
    let s = 1.0 / t.cosh();
    let th = t.tanh();
    let dv4 = -0.5 * s * (s * s - th * th - th) * (-t).exp();
    let dv2 = -0.5 * s * s * (th * (1.0 - 2.0 * th) + s * s);
    let dv3 = s * th * (th - 1.0) / SQRT_2;
    [dv4, dv2, dv3]
}

/// Homogeneous solutions of the scalar first-order area equation and their derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousPair {
    pub y1: f64,
    pub y2: f64,
    pub dy1: f64,
    pub dy2: f64,
}

impl HomogeneousPair {
    pub fn wronskian(&self) -> f64 {
        self.y1 * self.dy2 - self.y2 * self.dy1
    }
}

pub fn homogeneous_pair(t: f64) -> HomogeneousPair {
    let s = 1.0 / t.cosh();
    let th = t.tanh();
    let e = (-t).exp();
    let y1 = -th * s * e;
    let dy1 = -s * (s * s - th * th - th) * e;
    let p = t.cosh() + 3.0 * t * th * s - 3.0 * s;
    let dp = t.sinh() + 6.0 * th * s + 3.0 * t * s * (s * s - th * th);
    HomogeneousPair { y1, y2: -0.5 * p * e, dy1, dy2: -0.5 * (dp - p) * e }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn x0_at_origin_and_one() {
        let j = x0_jet(0.0);
        assert_eq!(j.x, SQRT_2);
        assert_eq!(j.dx, 0.0);
        assert!((x0_jet(1.0).x - SQRT_2 / 1.0f64.cosh()).abs() < 1e-16);
        assert!((x0_jet(1.0).x - 0.916_487_1).abs() < 1e-7);
    }

    #[test]
    fn melnikov_limits() {
        assert!((melnikov_integrand(f64::INFINITY, 0.0, 1.0) - 0.797_062_3).abs() < 1e-7);
        assert_eq!(melnikov_integrand(f64::INFINITY, 1.0, 0.0), -4.0 / 3.0);
        assert_eq!(melnikov_integrand(f64::NEG_INFINITY, 0.3, 0.7), 0.0);
        assert!((melnikov_integrand(0.0, 1.0, 0.0) + 2.0 / 3.0).abs() < 1e-15);
        assert!((melnikov_integrand(60.0, 0.2, 0.9) - melnikov_limit(0.2, 0.9)).abs() < 1e-13);
    }

    #[test]
    fn tails_join_the_bulk_formula() {
        for &w in &[-2.5, -2.0 - 1e-9, 3.0 + 1e-9, 3.5] {
            let (series, rel) = beta_coeff(w);
            let series = if rel { series + 32.0 / 3.0 - PI * PI } else { series };
            assert!((series - beta_bulk(w)).abs() < 1e-14, "{w} {series} {}", beta_bulk(w));
        }
        let bulk = |t: f64| 2.0 * (-t).exp() * (2.0 * t.exp().atan() - 1.0 / t.cosh());
        assert!((z1(-2.0 - 1e-9, 1.0) - bulk(-2.0 - 1e-9)).abs() < 1e-14);
        // leading behaviour in the left tail
        let w = -20.0;
        assert!((melnikov_integrand(w, 0.0, 1.0) / (4.0 * w).exp() + 16.0 / 3.0).abs() < 1e-12);
        assert!((melnikov_deficit(20.0, 0.0, 1.0) / (-60.0f64).exp() + 16.0 * PI / 3.0).abs() < 1e-6);
    }

    #[test]
    fn pole_free_series_joins_bulk() {
        let f0 = |l: f64, b: f64| melnikov_integrand(0.0, l, b);
        for &w in &[-0.1, 0.1] {
            let dx = x0_jet(w).dx;
            for (l, b, c) in [(1.0, 0.0, &POLE_FREE_LAMBDA), (0.0, 1.0, &POLE_FREE_BETA)] {
                let bulk = melnikov_integrand(w, l, b) / (dx * dx) - f0(l, b) / (2.0 * w * w);
                assert!((bulk - horner(c, w)).abs() < 1e-12, "{bulk} {}", horner(c, w));
            }
        }
    }

    #[test]
    fn prediction_points() {
        let p = butterfly_curve_prediction(0.0).unwrap();
        assert_eq!((p.alpha, p.lambda, p.beta), (1.0, 0.0, 0.0));
        let p = butterfly_curve_prediction(0.01).unwrap();
        assert!((p.beta - 0.08 / (32.0 - 3.0 * PI * PI)).abs() < 1e-17);
        assert!((p.beta - 0.033_456_19).abs() < 1e-8);
        let p = butterfly_curve_prediction(0.001).unwrap();
        assert!((p.beta / p.lambda - 1.672_809_5).abs() < 1e-7);
        assert!(butterfly_curve_prediction(0.3).is_err());
        assert!(butterfly_curve_prediction(-0.01).is_err());
    }

    #[test]
    fn zeroth_order_values() {
        let [v4, v2, v3] = zeroth_order_series(0.0);
        assert_eq!(v4, 0.0);
        assert_eq!(v2, 0.25);
        assert!((v3 - 1.262_467_1).abs() < 1e-7);
        let [v4, v2, v3] = zeroth_order_series(-40.0);
        assert!((v4 - 1.0).abs() < 1e-15 && v2.abs() < 1e-15 && v3.abs() < 1e-15);
    }

    #[test]
    fn pair_limits() {
        assert_eq!(homogeneous_pair(0.0).y1, 0.0);
        assert!((homogeneous_pair(40.0).y2 + 0.25).abs() < 1e-12);
    }

    #[test]
    fn correction_at_zero_parameters_and_origin() {
        let q = Quadrature::default();
        let c = first_order_correction(1.3, 0.0, 0.0, &q).unwrap();
        assert_eq!((c.x1, c.z1), (0.0, 0.0));
        let c = first_order_correction(0.0, 0.0, 1.0, &q).unwrap();
        assert!((c.z1 - 2.0 * (PI / 2.0 - 1.0)).abs() < 1e-15);
        let c = first_order_correction(-30.0, 0.02, 0.03, &q).unwrap();
        assert!(c.x1.abs() < 1e-9 && c.z1.abs() < 1e-12);
    }
}
