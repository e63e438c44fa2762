//! First-return map of the section to itself in chart coordinates, with its Jacobian.

use crate::ConeError;
use homoclinic_finder::{checked_saddle, SectionChart};
use ode_engine::{nfy_field, solve, Direction, Flow, NfyTangent, OdeOptions, SystemParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnConfig {
    pub t_max: f64,
    pub opts: OdeOptions,
}

impl Default for ReturnConfig {
    fn default() -> Self {
        Self { t_max: 300.0, opts: OdeOptions { rtol: 1e-13, atol: 1e-16, escape_radius: 10.0, escape_dims: 3, ..Default::default() } }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnPoint {
    pub u: f64,
    pub v: f64,
    pub ubar: f64,
    pub vbar: f64,
    pub time: f64,
    /// `∂(ū, v̄)/∂(u, v)`, row-major.
    pub jac: [[f64; 2]; 2],
}

/// Section chart for the return map; fails on resonant stable eigenvalues.
pub fn build_chart(p: &SystemParams) -> Result<SectionChart, ConeError> {
    checked_saddle(p)?;
    Ok(SectionChart::build(p)?)
}

/// Foot point data of one `v`-fiber, reusable for every `u` on it.
#[derive(Debug, Clone, Copy)]
pub struct Fiber {
    pub v: f64,
    foot: [f64; 2],
    normal: [f64; 2],
    dnormal: [f64; 2],
    tangent: [f64; 2],
}

impl Fiber {
    pub fn new(chart: &SectionChart, v: f64) -> Result<Self, ConeError> {
        let xi = chart.foot_xi(v)?;
        let (f, d1, d2) = chart.trace_jet(xi)?;
        let len = d1[0].hypot(d1[1]);
        let o = chart.orientation;
        let n = [-d1[1] / len * o, d1[0] / len * o];
        let dot = (d1[0] * d2[0] + d1[1] * d2[1]) / (len * len);
        // Derivatives in `v` carry the factor dξ/dv = 1/X'(ξ).
        let dn = [(-d2[1] / len * o - n[0] * dot) / d1[0], (d2[0] / len * o - n[1] * dot) / d1[0]];
        Ok(Fiber { v, foot: f, normal: n, dnormal: dn, tangent: [d1[0] / d1[0], d1[1] / d1[0]] })
    }

    fn point(&self, u: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        let p = [self.foot[0] + u * self.normal[0], self.foot[1] + u * self.normal[1]];
        let dv = [self.tangent[0] + u * self.dnormal[0], self.tangent[1] + u * self.dnormal[1]];
        (p, [[self.normal[0], dv[0]], [self.normal[1], dv[1]]])
    }
}

/// Return of `(u, v)` on a precomputed fiber.
pub fn return_on_fiber(chart: &SectionChart, fiber: &Fiber, u: f64, cfg: &ReturnConfig) -> Result<ReturnPoint, ConeError> {
    if u == 0.0 {
        return Err(ConeError::OnStableManifold);
    }
    let (p0, dp) = fiber.point(u);
    let level = chart.level;
    let mut y0 = [0.0; 12];
    y0[..3].copy_from_slice(&[p0[0], p0[1], level]);
    y0[3] = 1.0;
    y0[7] = 1.0;
    y0[11] = 1.0;
    let sol = solve(&NfyTangent(chart.params), 0.0, y0, cfg.t_max, &cfg.opts, |w| {
        match w.crossings(2, level, Direction::Down).iter().find(|c| c.t > 1e-6) {
            Some(c) => Flow::StopAt(c.t),
            None => Flow::Continue,
        }
    })
    .map_err(|f| ConeError::Ode(f.error))?;
    if !sol.stopped_early {
        return Err(ConeError::NoReturn { u, v: fiber.v, t_max: cfg.t_max });
    }
    let y = sol.y;
    let s1 = [y[0], y[1], y[2]];
    let f = nfy_field(&s1, &chart.params);
    // Tangent map restricted to in-plane starts, then projected along the flow onto Z = level.
    let mut m = [[0.0; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            m[r][c] = y[3 + 3 * r + c] - f[r] / f[2] * y[3 + 6 + c];
        }
    }
    let cp = chart.to_chart([s1[0], s1[1]])?;
    let g = [cp.grad_u, cp.grad_v];
    let mut jac = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            jac[i][j] = (0..2).map(|a| g[i][a] * (0..2).map(|b| m[a][b] * dp[b][j]).sum::<f64>()).sum();
        }
    }
    Ok(ReturnPoint { u, v: fiber.v, ubar: cp.u, vbar: cp.v, time: sol.t, jac })
}

/// Next downward crossing of the section by the orbit of chart point `(u, v)`.
pub fn return_map(chart: &SectionChart, u: f64, v: f64, cfg: &ReturnConfig) -> Result<ReturnPoint, ConeError> {
    return_on_fiber(chart, &Fiber::new(chart, v)?, u, cfg)
}
