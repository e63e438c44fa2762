use crate::params::SystemParams;
use serde::{Deserialize, Serialize};

pub const RESONANCE_GAP: f64 = 1e-6;

/// Spectrum and local manifold data of the saddle at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleData {
    pub gamma: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub sigma: f64,
    pub nu: f64,
    /// Quadratic coefficient of W^ss in the normal form where `σ = 0`.
    pub gamma1: f64,
    /// Quadratic coefficient of W^u in the normal form where `σ = 0`.
    pub gamma2: f64,
    /// `Z ≈ c X²` on the local unstable manifold, exact in `α, λ`.
    pub wu_quadratic: f64,
    /// `Z ≈ c X²` on the local strong stable manifold, exact in `α, λ`.
    pub wss_quadratic: f64,
    pub eigvec_u: [f64; 3],
    pub eigvec_lead: [f64; 3],
    pub eigvec_strong: [f64; 3],
    pub resonant: bool,
    /// True when the Z-direction is the leading stable one.
    pub z_leading: bool,
}

pub fn equilibrium_analysis(p: &SystemParams) -> SaddleData {
    let disc = (p.lambda * p.lambda + 4.0).sqrt();
    // Both roots written without cancellation.
    let (gamma, mu) = if p.lambda >= 0.0 {
        let m = -(p.lambda + disc) / 2.0;
        (-1.0 / m, m)
    } else {
        let g = (disc - p.lambda) / 2.0;
        (g, -1.0 / g)
    };
    let v_xy = [1.0 / (1.0 + mu * mu).sqrt(), mu / (1.0 + mu * mu).sqrt(), 0.0];
    let v_z = [0.0, 0.0, 1.0];
    let z_leading = -p.alpha >= mu;
    let (lambda1, lambda2, lead, strong) = if z_leading { (-p.alpha, mu, v_z, v_xy) } else { (mu, -p.alpha, v_xy, v_z) };
    let n = (1.0 + gamma * gamma).sqrt();
    SaddleData {
        gamma,
        lambda1,
        lambda2,
        sigma: gamma + lambda1,
        nu: lambda1.abs() / gamma,
        gamma1: p.beta * p.alpha / (p.alpha * p.alpha - 2.0),
        gamma2: p.beta / (3.0 * p.alpha),
        wu_quadratic: p.beta / (2.0 * gamma + p.alpha),
        wss_quadratic: p.beta / (p.alpha + 2.0 * mu),
        eigvec_u: [1.0 / n, gamma / n, 0.0],
        eigvec_lead: lead,
        eigvec_strong: strong,
        resonant: (lambda1 - lambda2).abs() < RESONANCE_GAP,
        z_leading,
    }
}
