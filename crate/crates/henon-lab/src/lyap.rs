use crate::error::HenonError;
use crate::map::{HenonSpec, OVERFLOW};
use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovConfig {
    pub n_transient: usize,
    pub n_iter: usize,
    pub renorm_every: usize,
    /// Orbit counts as unbounded beyond this sup-norm.
    pub bound: f64,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        Self { n_transient: 10_000, n_iter: 1_000_000, renorm_every: 5, bound: 1e3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    /// Descending.
    pub exponents: [f64; 3],
    pub log_abs_b: f64,
    /// Per-axis `[min, max]` after the transient.
    pub bbox: [[f64; 2]; 3],
    /// Closest approach to the origin after the transient.
    pub min_origin_distance: f64,
    pub end: [f64; 3],
}

impl LyapunovReport {
    pub fn sum(&self) -> f64 {
        self.exponents.iter().sum()
    }
}

/// Exponents by repeated QR re-orthonormalisation of the tangent map.
pub fn lyapunov_spectrum(spec: &HenonSpec, s0: [f64; 3], cfg: &LyapunovConfig) -> Result<LyapunovReport, HenonError> {
    let bad = |s: &[f64; 3]| s.iter().any(|v| !v.is_finite() || v.abs() > cfg.bound.min(OVERFLOW));
    let mut s = s0;
    for i in 0..cfg.n_transient {
        s = spec.step(&s);
        if bad(&s) {
            return Err(HenonError::Diverged { index: i + 1 });
        }
    }
    let mut bbox = [[f64::INFINITY, f64::NEG_INFINITY]; 3];
    let mut dmin = f64::INFINITY;
    let mut q = Matrix3::identity();
    let mut acc = [0.0; 3];
    let every = cfg.renorm_every.max(1);
    for i in 0..cfg.n_iter {
        let j = spec.jacobian(&s);
        q = Matrix3::from_fn(|r, c| j[r][c]) * q;
        s = spec.step(&s);
        if bad(&s) {
            return Err(HenonError::Diverged { index: cfg.n_transient + i + 1 });
        }
        for k in 0..3 {
            bbox[k][0] = bbox[k][0].min(s[k]);
            bbox[k][1] = bbox[k][1].max(s[k]);
        }
        dmin = dmin.min(s.iter().map(|v| v * v).sum::<f64>().sqrt());
        if (i + 1) % every == 0 || i + 1 == cfg.n_iter {
            let qr = q.qr();
            let r = qr.r();
            for k in 0..3 {
                acc[k] += r[(k, k)].abs().ln();
            }
            q = qr.q();
        }
    }
    let n = cfg.n_iter.max(1) as f64;
    let mut ex = acc.map(|a| a / n);
    ex.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(LyapunovReport { exponents: ex, log_abs_b: spec.b.abs().ln(), bbox, min_origin_distance: dmin, end: s })
}
