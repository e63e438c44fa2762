//! First-order series for the separatrix value.

use crate::closed::{first_order_correction, homogeneous_pair, x0_jet, zeroth_order_series, K};
use crate::quadrature::{QuadError, Quadrature};
use serde::{Deserialize, Serialize};

/// `λ` and `β` per unit `ε` on the first-order butterfly curve.
pub const LAMBDA1: f64 = 2.0;
pub fn beta1() -> f64 {
    8.0 / K
}

/// The three pieces of the forcing `f₁` at time `t`, per unit `ε`.
fn f1_parts(t: f64, quad: &Quadrature) -> Result<[f64; 3], QuadError> {
    let c = first_order_correction(t, LAMBDA1, beta1(), quad)?;
    let x0 = x0_jet(t).x;
    let [v4, _, v3] = zeroth_order_series(t);
    Ok([3.0 * x0 * c.x1 * v4, 0.5 * c.z1 * v4, -beta1() * x0 * v3])
}

/// First-order forcings `(f₁, f₂)` of the area system.
pub fn forcings(t: f64, quad: &Quadrature) -> Result<(f64, f64), QuadError> {
    let c = first_order_correction(t, LAMBDA1, beta1(), quad)?;
    let x0 = x0_jet(t).x;
    let [v4, _, v3] = zeroth_order_series(t);
    let f1 = 3.0 * x0 * c.x1 * v4 + 0.5 * c.z1 * v4 - beta1() * x0 * v3;
    let f2 = -2.0 * v3 + c.x1 * v4;
    Ok((f1, f2))
}

/// Variation-of-constants coefficients `(C₁(t), C₂(t))`.
pub fn variation_coefficients(t: f64, quad: &Quadrature) -> Result<(f64, f64), QuadError> {
    let mut fail = None;
    let mut weighted = |s: f64, pick: fn(&crate::closed::HomogeneousPair) -> f64| -> f64 {
        match forcings(s, quad) {
            Ok((f1, _)) => pick(&homogeneous_pair(s)) * f1 * (2.0 * s).exp(),
            Err(e) => {
                fail = Some(e);
                0.0
            }
        }
    };
    let c1 = quad.integrate_with_breaks(&mut |s| 2.0 * weighted(s, |p| p.y2), f64::NEG_INFINITY, t, &[0.0])?;
    let c2 = quad.integrate_with_breaks(&mut |s| -2.0 * weighted(s, |p| p.y1), f64::NEG_INFINITY, t, &[0.0])?;
    match fail {
        Some(e) => Err(e),
        None => Ok((c1.value, c2.value)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    pub a1: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    /// Summed quadrature error estimate of `A₁`.
    pub err: f64,
}

/// `A₁ = ½∫ y₁ f₁ e^{2t}` and its three split integrals.
pub fn separatrix_slope(quad: &Quadrature) -> Result<SlopeReport, QuadError> {
    let inner = Quadrature { abs_tol: (quad.abs_tol * 0.01).max(1e-15), rel_tol: (quad.rel_tol * 0.01).max(1e-13), ..*quad };
    let mut parts = [0.0; 3];
    let mut err = 0.0;
    for (k, slot) in parts.iter_mut().enumerate() {
        let mut fail = None;
        let mut f = |t: f64| match f1_parts(t, &inner) {
            Ok(p) => homogeneous_pair(t).y1 * p[k] * (2.0 * t).exp(),
            Err(e) => {
                fail = Some(e);
                0.0
            }
        };
        let r = quad.integrate_with_breaks(&mut f, f64::NEG_INFINITY, f64::INFINITY, &[0.0])?;
        if let Some(e) = fail {
            return Err(e);
        }
        *slot = r.value;
        err += r.err;
    }
    Ok(SlopeReport { a1: 0.5 * (parts[0] + parts[1] + parts[2]), i1: parts[0], i2: parts[1], i3: parts[2], err: 0.5 * err })
}
