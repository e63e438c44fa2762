//! Separatrix value `A` of a homoclinic loop: the limit factor by which the
//! distinguished solution of the area-evolution equations is rescaled along the loop.

use analytic_kernel::{a1_exact, eps_of_beta, QuadError, Quadrature};
use homoclinic_finder::HomoclinicOrbit;
use ode_engine::{integrate, jacobian, nfy_field, OdeError, OdeOptions, Solution, SystemParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SeparatrixError {
    #[error("time {t} outside the orbit span [{lo}, {hi}]")]
    OutsideSpan { t: f64, lo: f64, hi: f64 },
    #[error("v4 has not settled: change {delta:e} over the plateau window exceeds {tol:e}")]
    NoPlateau { delta: f64, tol: f64 },
    #[error("orbit span too short: {0}")]
    ShortSpan(String),
    #[error("integration failed: {0}")]
    Ode(#[from] OdeError),
    #[error("quadrature failed: {0}")]
    Quad(#[from] QuadError),
    #[error("separatrix value {0:e} is numerically zero")]
    Degenerate(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Orientable,
    Nonorientable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub orientation: Orientation,
    /// `0 < |A| < 2`.
    pub criterion_ok: bool,
}

pub fn classify(a: f64) -> Result<Classification, SeparatrixError> {
    if !(a.abs() >= 1e-12) {
        return Err(SeparatrixError::Degenerate(a));
    }
    Ok(Classification {
        orientation: if a > 0.0 { Orientation::Orientable } else { Orientation::Nonorientable },
        criterion_ok: a.abs() < 2.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaConfig {
    /// Incoming and outgoing tails are cut where `|x| < x_cut`.
    pub x_cut: f64,
    pub plateau: f64,
    pub tol: f64,
    pub picard_points: usize,
    pub opts: OdeOptions,
}

impl Default for AreaConfig {
    fn default() -> Self {
        Self { x_cut: 1e-8, plateau: 5.0, tol: 1e-10, picard_points: 400, opts: OdeOptions { rtol: 1e-12, atol: 1e-15, ..Default::default() } }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatrixReport {
    pub alpha: f64,
    pub lambda: f64,
    pub beta: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub eps_effective: f64,
    pub series_prediction: f64,
    pub orientation: Orientation,
    pub criterion_ok: bool,
    pub t_truncation: (f64, f64),
    pub plateau_delta: f64,
    pub picard_residual: f64,
    /// `v3` at the cut; past it `v3` decays exactly like `exp((α − 1/α) t)`.
    pub v3_end: f64,
    pub v3_rate: f64,
    pub v2_end: f64,
}

/// Right-hand side in `(v4, v2, v3)` for given loop coordinates `x, z`.
pub fn area_field(v: &[f64; 3], x: f64, z: f64, alpha: f64, beta: f64) -> [f64; 3] {
    let s = alpha + 1.0 / alpha;
    let k = alpha / (1.0 + alpha * alpha);
    let [v4, v2, v3] = *v;
    [-s * v2, -s * v2 + k * (3.0 * x * x + z) * v4 - 2.0 * k * beta * x * v3, (alpha - 1.0 / alpha) * v3 + x * v4]
}

/// Span where the loop coordinates are above the double-precision floor.
pub fn orbit_span(orbit: &HomoclinicOrbit) -> (f64, f64) {
    (orbit.time_below(1e-15), orbit.time_after(1e-15))
}

pub fn area_rhs(v: &[f64; 3], t: f64, orbit: &HomoclinicOrbit) -> Result<[f64; 3], SeparatrixError> {
    let (lo, hi) = orbit_span(orbit);
    if !(t >= lo && t <= hi) {
        return Err(SeparatrixError::OutsideSpan { t, lo, hi });
    }
    let (x, z) = orbit.x_z(t);
    Ok(area_field(v, x, z, orbit.params.alpha, orbit.params.beta))
}

/// Limit matrix of the vector-product equation, row-major.
pub fn d_infinity(alpha: f64) -> [[f64; 3]; 3] {
    [[-1.0 / alpha, -1.0, 0.0], [-1.0, -alpha, 0.0], [0.0, 0.0, alpha - 1.0 / alpha]]
}

/// `D = tr C · Id − Cᵀ` with `C` the linearisation along the loop.
pub fn d_matrix(s: &[f64; 3], p: &SystemParams) -> [[f64; 3]; 3] {
    let c = jacobian(s, p);
    let tr = c[0][0] + c[1][1] + c[2][2];
    let mut d = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            d[i][j] = -c[j][i] + if i == j { tr } else { 0.0 };
        }
    }
    d
}

/// Solution of the area equations along a loop, piecewise over the incoming tail,
/// the integrated part and the outgoing tail.
pub struct AreaSolution {
    pub incoming: Solution<3>,
    pub body: Solution<6>,
    pub outgoing: Solution<3>,
}

impl AreaSolution {
    pub fn t_range(&self) -> (f64, f64) {
        (self.incoming.t_start(), self.outgoing.t)
    }

    pub fn eval(&self, t: f64) -> [f64; 3] {
        if t <= self.body.t_start() {
            self.incoming.eval(t).unwrap_or(self.incoming.y)
        } else if t <= self.body.t {
            let y = self.body.eval(t).unwrap_or(self.body.y);
            [y[3], y[4], y[5]]
        } else {
            self.outgoing.eval(t).unwrap_or(self.outgoing.y)
        }
    }

    pub fn end(&self) -> [f64; 3] {
        self.outgoing.y
    }
}

fn outgoing_end(orbit: &HomoclinicOrbit, cfg: &AreaConfig) -> f64 {
    // Continue until both x and z are negligible for v4.
    let mut t = orbit.time_after(cfg.x_cut).max(orbit.t_entry + cfg.plateau);
    while orbit.x_z(t).1.abs() > 1e-3 * cfg.tol && t < orbit.t_entry + 400.0 {
        t += 1.0;
    }
    t
}

/// Integrate `(v4, v2, v3)` from `(1, 0, 0)` on the incoming tail to the outgoing tail.
pub fn solve_area(orbit: &HomoclinicOrbit, cfg: &AreaConfig) -> Result<AreaSolution, SeparatrixError> {
    let p = orbit.params;
    let t_lo = orbit.time_below(cfg.x_cut);
    let t_hi = outgoing_end(orbit, cfg);
    if !(t_lo < orbit.t_seed && t_hi > orbit.t_entry) {
        return Err(SeparatrixError::ShortSpan(format!("[{t_lo}, {t_hi}] vs [{}, {}]", orbit.t_seed, orbit.t_entry)));
    }
    let mut o = cfg.opts;
    o.keep_dense = true;
    let tail = |t: f64, v: &[f64; 3]| {
        let (x, z) = orbit.x_z(t);
        area_field(v, x, z, p.alpha, p.beta)
    };
    let incoming = integrate(&tail, t_lo, [1.0, 0.0, 0.0], orbit.t_seed, &o).map_err(|e| e.error)?;
    let body_rhs = |_t: f64, y: &[f64; 6]| {
        let s = [y[0], y[1], y[2]];
        let f = nfy_field(&s, &p);
        let a = area_field(&[y[3], y[4], y[5]], y[0], y[2], p.alpha, p.beta);
        [f[0], f[1], f[2], a[0], a[1], a[2]]
    };
    let v = incoming.y;
    let s = orbit.seed;
    let mut ob = o;
    ob.escape_dims = 3;
    let body = integrate(&body_rhs, orbit.t_seed, [s[0], s[1], s[2], v[0], v[1], v[2]], orbit.t_entry, &ob).map_err(|e| e.error)?;
    let b = body.y;
    let outgoing = integrate(&tail, orbit.t_entry, [b[3], b[4], b[5]], t_hi, &o).map_err(|e| e.error)?;
    Ok(AreaSolution { incoming, body, outgoing })
}

/// Sup-norm defect of one application of the integral-equation operator to the computed solution.
pub fn picard_residual(orbit: &HomoclinicOrbit, sol: &AreaSolution, n: usize) -> Result<f64, SeparatrixError> {
    let p = orbit.params;
    let a = p.alpha;
    let s = a + 1.0 / a;
    let k = a / (1.0 + a * a);
    let c3 = 1.0 / a - a;
    let (t0, t1) = sol.t_range();
    let q = Quadrature::with_tol(1e-15, 1e-12);
    let xz = |t: f64| orbit.x_z(t);
    // Breaks at the joints keep each quadrature panel smooth.
    let joints = [sol.body.t_start(), sol.body.t];
    let mut i4 = 0.0;
    let mut i2 = 0.0;
    let mut i3 = 0.0;
    let mut worst: f64 = 0.0;
    let mut ta = t0;
    for j in 1..=n {
        let tb = t0 + (t1 - t0) * j as f64 / n as f64;
        let br: Vec<f64> = joints.iter().copied().filter(|&x| x > ta && x < tb).collect();
        let d4 = q.integrate_with_breaks(&mut |u| sol.eval(u)[1], ta, tb, &br)?.value;
        let d2 = q
            .integrate_with_breaks(
                &mut |u| {
                    let (x, z) = xz(u);
                    let v = sol.eval(u);
                    (s * (u - tb)).exp() * (k * (3.0 * x * x + z) * v[0] - 2.0 * k * p.beta * x * v[2])
                },
                ta,
                tb,
                &br,
            )?
            .value;
        let d3 = q
            .integrate_with_breaks(
                &mut |u| {
                    let (x, _) = xz(u);
                    (c3 * (u - tb)).exp() * x * sol.eval(u)[0]
                },
                ta,
                tb,
                &br,
            )?
            .value;
        i4 += d4;
        i2 = (-s * (tb - ta)).exp() * i2 + d2;
        i3 = (-c3 * (tb - ta)).exp() * i3 + d3;
        let v = sol.eval(tb);
        let r = [(1.0 - s * i4 - v[0]).abs(), (i2 - v[1]).abs(), (i3 - v[2]).abs()];
        worst = worst.max(r[0]).max(r[1]).max(r[2]);
        ta = tb;
    }
    Ok(worst)
}

/// Separatrix value along a located loop.
pub fn compute_a(orbit: &HomoclinicOrbit, cfg: &AreaConfig) -> Result<SeparatrixReport, SeparatrixError> {
    let sol = solve_area(orbit, cfg)?;
    let (t_lo, t_hi) = sol.t_range();
    let end = sol.end();
    let before = sol.eval(t_hi - cfg.plateau);
    let plateau_delta = (end[0] - before[0]).abs();
    if plateau_delta > cfg.tol {
        return Err(SeparatrixError::NoPlateau { delta: plateau_delta, tol: cfg.tol });
    }
    let a = end[0];
    let cl = classify(a)?;
    let eps = eps_of_beta(orbit.params.beta);
    let picard = picard_residual(orbit, &sol, cfg.picard_points)?;
    Ok(SeparatrixReport {
        alpha: orbit.params.alpha,
        lambda: orbit.params.lambda,
        beta: orbit.params.beta,
        a,
        eps_effective: eps,
        series_prediction: a1_exact() * eps,
        orientation: cl.orientation,
        criterion_ok: cl.criterion_ok,
        t_truncation: (t_lo, t_hi),
        plateau_delta,
        picard_residual: picard,
        v3_end: end[2],
        v3_rate: orbit.params.alpha - 1.0 / orbit.params.alpha,
        v2_end: end[1],
    })
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn apply(d: &[[f64; 3]; 3], e: &[f64; 3]) -> [f64; 3] {
    [
        d[0][0] * e[0] + d[0][1] * e[1] + d[0][2] * e[2],
        d[1][0] * e[0] + d[1][1] * e[1] + d[1][2] * e[2],
        d[2][0] * e[0] + d[2][1] * e[1] + d[2][2] * e[2],
    ]
}

/// The same value in unrotated coordinates: `η = ξ₁ × ξ₂` of the flow direction and
/// the Z-axis tangent solution on the incoming tail, evolved by `η̇ = D(t) η`.
pub fn wedge_value(orbit: &HomoclinicOrbit, cfg: &AreaConfig) -> Result<f64, SeparatrixError> {
    let p = orbit.params;
    let t0 = orbit.time_below(cfg.x_cut);
    let s0 = orbit.state(t0);
    let eta = cross(&nfy_field(&s0, &p), &[0.0, 0.0, 1.0]);
    let eta0 = [eta[0] / eta[1], 1.0, eta[2] / eta[1]];
    let tail = |t: f64, e: &[f64; 3]| apply(&d_matrix(&orbit.state(t), &p), e);
    let head = integrate(&tail, t0, eta0, orbit.t_seed, &cfg.opts).map_err(|e| e.error)?;
    let body_rhs = |_t: f64, y: &[f64; 6]| {
        let s = [y[0], y[1], y[2]];
        let f = nfy_field(&s, &p);
        let e = apply(&d_matrix(&s, &p), &[y[3], y[4], y[5]]);
        [f[0], f[1], f[2], e[0], e[1], e[2]]
    };
    let s = orbit.seed;
    let h = head.y;
    let mut o = cfg.opts;
    o.escape_dims = 3;
    let body = integrate(&body_rhs, orbit.t_seed, [s[0], s[1], s[2], h[0], h[1], h[2]], orbit.t_entry, &o).map_err(|e| e.error)?;
    let b = body.y;
    let fin = integrate(&tail, orbit.t_entry, [b[3], b[4], b[5]], outgoing_end(orbit, cfg), &cfg.opts).map_err(|e| e.error)?;
    // Component along η* = (−α, 1, 0) in the orthogonal eigenbasis of D∞.
    let a = p.alpha;
    Ok((-a * fin.y[0] + fin.y[1]) / (1.0 + a * a))
}

/// Approximation of `|A| = sup lim ‖η(t)‖/‖η(−t)‖` over a family of initial vectors
/// `η* + c_i w_i` at `−T`, `w_i` in the contracting eigenspace of `D∞`, `c_i → 0`.
/// Past `+T` the coefficients vanish, so the forward limit is the `η*` component.
/// Returns the ratios in order of decreasing perturbation.
pub fn sup_ratio(orbit: &HomoclinicOrbit, cfg: &AreaConfig, family: usize) -> Result<Vec<f64>, SeparatrixError> {
    let p = orbit.params;
    let a = p.alpha;
    let t_lo = orbit.time_below(cfg.x_cut);
    let t_hi = outgoing_end(orbit, cfg);
    let t = t_hi.max(-t_lo);
    let drhs = |tt: f64, e: &[f64; 3]| apply(&d_matrix(&orbit.state(tt), &p), e);
    let star = [-a, 1.0, 0.0];
    let star_n = (1.0 + a * a).sqrt();
    let w1 = [1.0 / star_n, a / star_n, 0.0];
    let n = |v: &[f64; 3]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut out = Vec::with_capacity(family);
    for i in 0..family {
        let th = std::f64::consts::PI * i as f64 / family as f64;
        let c = 0.1 * 0.5f64.powi(i as i32);
        let e0 = [star[0] + c * th.cos() * w1[0], star[1] + c * th.cos() * w1[1], c * th.sin()];
        let sol = integrate(&drhs, -t, e0, t, &cfg.opts).map_err(|e| e.error)?;
        let along = (sol.y[0] * star[0] + sol.y[1] * star[1]).abs() / star_n;
        out.push(along / n(&e0));
    }
    Ok(out)
}

/// `A` for the unperturbed loop `x0` with `z = 0` at `α = 1`; the limit value vanishes.
pub fn zeroth_order_value(t_cut: f64, opts: &OdeOptions) -> Result<f64, SeparatrixError> {
    let f = |t: f64, v: &[f64; 3]| area_field(v, analytic_kernel::x0_jet(t).x, 0.0, 1.0, 0.0);
    let s = integrate(&f, -t_cut, [1.0, 0.0, 0.0], t_cut, opts).map_err(|e| e.error)?;
    Ok(s.y[0])
}

pub fn csv_header() -> &'static str {
    "beta,eps,A,A_over_eps,prediction,orientation"
}

pub fn csv_row(r: &SeparatrixReport) -> String {
    format!(
        "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}",
        r.beta,
        r.eps_effective,
        r.a,
        r.a / r.eps_effective,
        r.series_prediction,
        match r.orientation {
            Orientation::Orientable => "orientable",
            Orientation::Nonorientable => "nonorientable",
        }
    )
}
