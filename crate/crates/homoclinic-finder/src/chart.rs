//! Coordinates on the section `Z = β/α` adapted to the stable manifold of the origin.
//!
//! The trace of W^s on the section is computed by integrating backward from
//! the local stable plane, parameterised by `ξ`: the seed is `r0 (e_z + ξ e_s)`.
//! `u` is the signed normal offset from the trace, positive on the side whose
//! orbits leave the saddle along the `X > 0` branch; `v` is the `X` coordinate
//! of the foot point. The reflection `R` acts as `(u, v) → (−u, −v)`.

use crate::seed::checked_saddle;
use crate::FinderError;
use ode_engine::{solve, Direction, Flow, NfyTangent, Nfy, OdeOptions, State3, SystemParams};
use serde::{Deserialize, Serialize};

const R0: f64 = 1e-7;
const TABLE: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub u: f64,
    pub v: f64,
    pub xi: f64,
    pub grad_u: [f64; 2],
    pub grad_v: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectionChart {
    pub params: SystemParams,
    pub level: f64,
    pub e_strong: [f64; 3],
    /// `+1` when the normal `(−t_y, t_x)` points to the `X > 0` exit side.
    pub orientation: f64,
    /// The trace folds away from the section at `|ξ| = xi_end`.
    pub xi_end: f64,
    table: Vec<(f64, [f64; 2])>,
    opts: OdeOptions,
}

fn sect_project(f: &[f64; 3], col: [f64; 3]) -> [f64; 2] {
    // Derivative of the hitting point along a tangent vector, for the plane Z = const.
    let tau = -col[2] / f[2];
    [col[0] + tau * f[0], col[1] + tau * f[1]]
}

impl SectionChart {
    pub fn build(p: &SystemParams) -> Result<Self, FinderError> {
        let s = checked_saddle(p)?;
        let e_strong = if s.z_leading { s.eigvec_strong } else { s.eigvec_lead };
        let mut c = SectionChart {
            params: *p,
            level: p.beta / p.alpha,
            e_strong: [e_strong[0].abs(), e_strong[1] * e_strong[0].signum(), 0.0],
            orientation: 1.0,
            xi_end: f64::INFINITY,
            table: Vec::new(),
            opts: OdeOptions { rtol: 1e-13, atol: 1e-16, escape_radius: 10.0, max_steps: 200_000, ..Default::default() },
        };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while c.trace_point(hi).is_ok() {
            lo = hi;
            hi *= 2.0;
            if hi > 1e9 {
                break;
            }
        }
        if hi <= 1e9 {
            while hi - lo > 1e-7 * hi {
                let mid = 0.5 * (lo + hi);
                if c.trace_point(mid).is_ok() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        c.xi_end = lo;
        for i in 0..=TABLE {
            let xi = lo * (1.0 - (1.0 - i as f64 / TABLE as f64).powi(2)) * (1.0 - 1e-6);
            if let Ok(q) = c.trace_point(xi) {
                c.table.push((xi, q));
            }
        }
        c.orientation = c.exit_side(0.0)?;
        Ok(c)
    }

    fn seed(&self, xi: f64) -> State3 {
        [R0 * xi * self.e_strong[0], R0 * xi * self.e_strong[1], R0]
    }

    /// Trace point of W^s with parameter `xi`.
    pub fn trace_point(&self, xi: f64) -> Result<[f64; 2], FinderError> {
        let level = self.level;
        let sol = solve(&Nfy(self.params), 0.0, self.seed(xi), -200.0, &self.opts, |v| match v.crossings(2, level, Direction::Up).first() {
            Some(c) => Flow::StopAt(c.t),
            None => Flow::Continue,
        });
        match sol {
            Ok(s) if s.stopped_early => Ok([s.y[0], s.y[1]]),
            _ => Err(FinderError::TraceEnded { xi }),
        }
    }

    /// Trace point and its derivative in `xi`.
    pub fn trace_tangent(&self, xi: f64) -> Result<([f64; 2], [f64; 2]), FinderError> {
        let level = self.level;
        let s0 = self.seed(xi);
        let mut y0 = [0.0; 12];
        y0[..3].copy_from_slice(&s0);
        y0[3] = 1.0;
        y0[7] = 1.0;
        y0[11] = 1.0;
        let mut o = self.opts;
        o.escape_dims = 3;
        let sol = solve(&NfyTangent(self.params), 0.0, y0, -200.0, &o, |v| match v.crossings(2, level, Direction::Up).first() {
            Some(c) => Flow::StopAt(c.t),
            None => Flow::Continue,
        });
        let s = match sol {
            Ok(s) if s.stopped_early => s,
            _ => return Err(FinderError::TraceEnded { xi }),
        };
        let y = s.y;
        let d = [R0 * self.e_strong[0], R0 * self.e_strong[1], 0.0];
        let mut col = [0.0; 3];
        for r in 0..3 {
            col[r] = (0..3).map(|k| y[3 + 3 * r + k] * d[k]).sum();
        }
        let f = ode_engine::nfy_field(&[y[0], y[1], y[2]], &self.params);
        Ok(([y[0], y[1]], sect_project(&f, col)))
    }

    /// Trace point with its first and second derivatives in `xi`.
    pub fn trace_jet(&self, xi: f64) -> Result<([f64; 2], [f64; 2], [f64; 2]), FinderError> {
        let (f, d1) = self.trace_tangent(xi)?;
        let h = 1e-4 * xi.abs().max(1.0);
        let room = self.xi_end - xi.abs();
        let d2 = if room > 2.0 * h {
            let (_, a) = self.trace_tangent(xi + h)?;
            let (_, b) = self.trace_tangent(xi - h)?;
            [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h)]
        } else {
            // One-sided near the fold.
            let s = -xi.signum();
            let (_, a) = self.trace_tangent(xi + s * h)?;
            [(a[0] - d1[0]) / (s * h), (a[1] - d1[1]) / (s * h)]
        };
        Ok((f, d1, d2))
    }

    fn guess(&self, p: [f64; 2]) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        for &(xi, q) in &self.table {
            for sgn in [1.0, -1.0] {
                let d = (p[0] - sgn * q[0]).hypot(p[1] - sgn * q[1]);
                if d < best.0 {
                    best = (d, sgn * xi);
                }
            }
        }
        best.1
    }

    /// Chart coordinates and their gradients with respect to `(X, Y)`.
    pub fn to_chart(&self, p: [f64; 2]) -> Result<ChartPoint, FinderError> {
        let lim = self.xi_end * (1.0 - 1e-6);
        let mut xi = self.guess(p);
        for _ in 0..60 {
            let (f, d1, d2) = self.trace_jet(xi)?;
            let r = [p[0] - f[0], p[1] - f[1]];
            let phi = r[0] * d1[0] + r[1] * d1[1];
            let dphi = -(d1[0] * d1[0] + d1[1] * d1[1]) + r[0] * d2[0] + r[1] * d2[1];
            let step = -phi / dphi;
            let mut next = xi + step;
            if next.abs() > lim {
                if xi.abs() >= lim * (1.0 - 1e-9) {
                    return Err(FinderError::OffTrace { x: p[0], y: p[1] });
                }
                next = next.signum() * lim;
            }
            let done = (next - xi).abs() <= 1e-11 * xi.abs().max(1.0);
            xi = next;
            if done {
                let (f, d1, d2) = self.trace_jet(xi)?;
                let r = [p[0] - f[0], p[1] - f[1]];
                let len = d1[0].hypot(d1[1]);
                let n = [-d1[1] / len * self.orientation, d1[0] / len * self.orientation];
                let den = d1[0] * d1[0] + d1[1] * d1[1] - (r[0] * d2[0] + r[1] * d2[1]);
                let dxi = [d1[0] / den, d1[1] / den];
                return Ok(ChartPoint {
                    u: r[0] * n[0] + r[1] * n[1],
                    v: f[0],
                    xi,
                    grad_u: n,
                    grad_v: [d1[0] * dxi[0], d1[0] * dxi[1]],
                });
            }
        }
        Err(FinderError::FootNotConverged)
    }

    /// Trace parameter of the foot point whose `X` equals `v`.
    pub fn foot_xi(&self, v: f64) -> Result<f64, FinderError> {
        let mut xi = 0.0;
        let mut best = f64::INFINITY;
        for &(x, q) in &self.table {
            for sgn in [1.0, -1.0] {
                let d = (sgn * q[0] - v).abs();
                if d < best {
                    best = d;
                    xi = sgn * x;
                }
            }
        }
        let lim = self.xi_end * (1.0 - 1e-6);
        for _ in 0..60 {
            let (f, d1) = self.trace_tangent(xi)?;
            let next = (xi - (f[0] - v) / d1[0]).clamp(-lim, lim);
            let done = (next - xi).abs() <= 1e-12 * xi.abs().max(1.0);
            xi = next;
            if done {
                return Ok(xi);
            }
        }
        Err(FinderError::FootNotConverged)
    }

    /// Section point `(X, Y)` with chart coordinates `(u, v)`.
    pub fn from_chart(&self, u: f64, v: f64) -> Result<[f64; 2], FinderError> {
        let (f, d1) = self.trace_tangent(self.foot_xi(v)?)?;
        let len = d1[0].hypot(d1[1]);
        let n = [-d1[1] / len * self.orientation, d1[0] / len * self.orientation];
        Ok([f[0] + u * n[0], f[1] + u * n[1]])
    }

    /// `+1` if a point just off the trace on the `+n` side leaves the saddle with `X > 0`.
    fn exit_side(&self, xi: f64) -> Result<f64, FinderError> {
        let (f, d1) = self.trace_tangent(xi)?;
        let len = d1[0].hypot(d1[1]);
        let d = 1e-8;
        let s0 = [f[0] - d * d1[1] / len, f[1] + d * d1[0] / len, self.level];
        let mut near = false;
        let sol = solve(&Nfy(self.params), 0.0, s0, 400.0, &self.opts, |v| {
            let r = v.y1.iter().map(|a| a * a).sum::<f64>().sqrt();
            if r < 1e-3 {
                near = true;
            }
            if near && r > 1e-2 {
                Flow::Stop
            } else {
                Flow::Continue
            }
        })
        .map_err(|e| e.error)?;
        if !sol.stopped_early {
            return Err(FinderError::NoReturn { t_max: 400.0 });
        }
        Ok(sol.y[0].signum())
    }
}
