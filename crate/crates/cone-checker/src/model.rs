//! Leading-order Poincaré asymptotics, the hyperbolicity wedge, and parameter placement.

use crate::map::{build_chart, return_on_fiber, Fiber, ReturnConfig};
use crate::ConeError;
use analytic_kernel::eps_of_beta;
use homoclinic_finder::{first_return, splitting_value, SectionChart, ShootConfig};
use ode_engine::{equilibrium_analysis, SystemParams};
use serde::{Deserialize, Serialize};

/// Minimum coefficient of determination before a fit is flagged.
pub const MIN_R2: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderPoint {
    pub u: f64,
    pub ubar: f64,
    pub vbar: f64,
}

/// `ū ≈ u₊ + A|u|^ν + c|u|^ν₂`, `v̄ ≈ v₊ + B|u|^ν + d|u|^ν₂` on the positive side.
///
/// The second term comes from the strong stable direction. It is formally of
/// higher order but `ν₂ − ν ≈ ε`, so it is kept in the fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareModel {
    pub params: SystemParams,
    pub u_plus: f64,
    pub v_plus: f64,
    pub a_hat: f64,
    pub b_hat: f64,
    pub c_hat: f64,
    pub d_hat: f64,
    pub nu: f64,
    pub nu2: f64,
    pub eps: f64,
    pub r_squared: f64,
    pub poor_fit: bool,
    /// Log-log slope of `|ū − u₊|` over the finest rungs.
    pub exponent_slope: f64,
    pub ladder: Vec<LadderPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderConfig {
    pub u_top: f64,
    pub rungs: usize,
    /// Only rungs at or above this `u` enter the coefficient fit; below it the
    /// `A` term drowns in the chart's round-off next to the `c` term.
    pub fit_floor: f64,
    /// Rungs below this `u` enter the exponent check.
    pub slope_below: f64,
}

impl Default for LadderConfig {
    fn default() -> Self {
        Self { u_top: 1e-3, rungs: 34, fit_floor: 1e-10, slope_below: 1e-10 }
    }
}

/// Image of the positive separatrix in chart coordinates.
pub fn separatrix_image(p: &SystemParams, chart: &SectionChart) -> Result<(f64, f64), ConeError> {
    let (_, m) = first_return(p, 1.0, &ShootConfig::default())?;
    let c = chart.to_chart([m[0], m[1]])?;
    Ok((c.u, c.v))
}

fn two_term_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let det = n * sxx - sx * sx;
    let a = (sy * sxx - sx * sxy) / det;
    let c = (n * sxy - sx * sy) / det;
    let mean = sy / n;
    let ss_tot: f64 = y.iter().map(|b| (b - mean).powi(2)).sum();
    let ss_res: f64 = x.iter().zip(y).map(|(p, q)| (q - a - c * p).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (a, c, r2)
}

/// Slope of the least-squares line through `(x, y)`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub fn measure_poincare_asymptotics(p: &SystemParams, ladder: &LadderConfig, cfg: &ReturnConfig) -> Result<PoincareModel, ConeError> {
    let chart = build_chart(p)?;
    measure_on_chart(&chart, ladder, cfg)
}

pub fn measure_on_chart(chart: &SectionChart, ladder: &LadderConfig, cfg: &ReturnConfig) -> Result<PoincareModel, ConeError> {
    let p = chart.params;
    let s = equilibrium_analysis(&p);
    let (nu, nu2) = (s.nu, s.lambda2.abs() / s.gamma);
    let (u_plus, v_plus) = separatrix_image(&p, chart)?;
    let fiber = Fiber::new(chart, v_plus)?;
    let mut pts = Vec::with_capacity(ladder.rungs);
    for k in 0..ladder.rungs {
        let u = ladder.u_top * 0.5f64.powi(k as i32);
        let r = return_on_fiber(chart, &fiber, u, cfg)?;
        pts.push(LadderPoint { u, ubar: r.ubar, vbar: r.vbar });
    }
    let fit: Vec<&LadderPoint> = pts.iter().filter(|q| q.u >= ladder.fit_floor).collect();
    let x: Vec<f64> = fit.iter().map(|q| q.u.powf(nu2 - nu)).collect();
    let yu: Vec<f64> = fit.iter().map(|q| (q.ubar - u_plus) / q.u.powf(nu)).collect();
    let yv: Vec<f64> = fit.iter().map(|q| (q.vbar - v_plus) / q.u.powf(nu)).collect();
    let (a_hat, c_hat, r_squared) = two_term_fit(&x, &yu);
    let (b_hat, d_hat, _) = two_term_fit(&x, &yv);
    let fine: Vec<&LadderPoint> = pts.iter().filter(|q| q.u <= ladder.slope_below).collect();
    let exponent_slope = if fine.len() >= 2 {
        let lx: Vec<f64> = fine.iter().map(|q| q.u.ln()).collect();
        let ly: Vec<f64> = fine.iter().map(|q| (q.ubar - u_plus).abs().ln()).collect();
        ls_slope(&lx, &ly)
    } else {
        f64::NAN
    };
    Ok(PoincareModel {
        params: p,
        u_plus,
        v_plus,
        a_hat,
        b_hat,
        c_hat,
        d_hat,
        nu,
        nu2,
        eps: 1.0 - nu,
        r_squared,
        poor_fit: r_squared < MIN_R2,
        exponent_slope,
        ladder: pts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wedge {
    pub eps: f64,
    pub a: f64,
    pub mu_min: f64,
    pub mu_max: f64,
    /// Sign of `μ` inside the wedge, opposite to `A`.
    pub sign: f64,
}

impl Wedge {
    /// Geometric midpoint, signed.
    pub fn mid(&self) -> f64 {
        self.sign * (self.mu_min * self.mu_max).sqrt()
    }

    pub fn contains(&self, mu: f64) -> bool {
        mu.signum() == self.sign && mu.abs() > self.mu_min && mu.abs() < self.mu_max
    }
}

/// Leading-order wedge `(|A|/2)^{1/ε} < |μ| < |A|^{1/ε}` with `Aμ < 0`.
pub fn vla_wedge(eps: f64, a: f64) -> Result<Wedge, ConeError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(ConeError::BadEps(eps));
    }
    if !(a.abs() > 0.0 && a.abs() < 2.0) {
        return Err(ConeError::EmptyWedge { a });
    }
    let k = 1.0 / eps;
    Ok(Wedge { eps, a, mu_min: (a.abs() / 2.0).powf(k), mu_max: a.abs().powf(k), sign: -a.signum() })
}

/// Wedge with the fitted strong-stable coefficient: invariance needs
/// `|A||μ|^{−ε} < 2 − c`, expansion needs `|A|(1−ε)|μ|^{−ε} > 1 − c`.
pub fn corrected_wedge(m: &PoincareModel) -> Result<Wedge, ConeError> {
    let base = vla_wedge(m.eps, m.a_hat)?;
    let (a, k, c) = (m.a_hat.abs(), 1.0 / m.eps, m.c_hat);
    if c >= 2.0 {
        return Err(ConeError::EmptyWedge { a: m.a_hat });
    }
    let hi = if c < 1.0 { (a * (1.0 - m.eps) / (1.0 - c)).powf(k) } else { f64::INFINITY };
    Ok(Wedge { mu_min: (a / (2.0 - c)).powf(k), mu_max: hi, ..base })
}

/// `|μ|` where the fitted model maps the domain edge halfway back: `|A||μ|^{−ε} = (2 − c)/2`.
pub fn calibrated_mu(m: &PoincareModel) -> f64 {
    -m.a_hat.signum() * (2.0 * m.a_hat.abs() / (2.0 - m.c_hat)).powf(1.0 / m.eps)
}

/// Wedge boundaries over an `ε` grid, as CSV.
pub fn wedge_csv(a: f64, eps_grid: &[f64]) -> String {
    let mut s = String::from("eps,mu_min,mu_max\n");
    for &e in eps_grid {
        if let Ok(w) = vla_wedge(e, a) {
            s.push_str(&format!("{e},{:e},{:e}\n", w.sign * w.mu_min, w.sign * w.mu_max));
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaceConfig {
    pub rel_tol: f64,
    pub max_iter: usize,
    pub expansions: usize,
}

impl Default for PlaceConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-6, max_iter: 60, expansions: 30 }
    }
}

fn illinois(f: &mut dyn FnMut(f64) -> Result<f64, ConeError>, mut a: f64, mut fa: f64, mut b: f64, mut fb: f64, tol: f64, iters: usize) -> Result<f64, ConeError> {
    let mut side = 0;
    for _ in 0..iters {
        if fa.abs() <= tol {
            return Ok(a);
        }
        if fb.abs() <= tol {
            return Ok(b);
        }
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = f(c)?;
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

/// Root of `f` near `x0`, bracketed by stepping outward with doubling steps.
fn root_near(f: &mut dyn FnMut(f64) -> Result<f64, ConeError>, x0: f64, h0: f64, tol: f64, cfg: &PlaceConfig, what: &'static str) -> Result<f64, ConeError> {
    let f0 = f(x0)?;
    if f0.abs() <= tol {
        return Ok(x0);
    }
    let mut h = h0;
    for _ in 0..cfg.expansions {
        for x in [x0 + h, x0 - h] {
            let fx = f(x)?;
            if fx.signum() != f0.signum() {
                return illinois(f, x0, f0, x, fx, tol, cfg.max_iter);
            }
        }
        h *= 2.0;
    }
    Err(ConeError::NoBracket { what })
}

fn split_at(alpha: f64, lambda: f64, beta: f64) -> Result<f64, ConeError> {
    let p = SystemParams::new(alpha, lambda, beta).map_err(homoclinic_finder::FinderError::from)?;
    let chart = build_chart(&p)?;
    Ok(splitting_value(&p, &chart, 1.0, &ShootConfig::default())?)
}

/// Homoclinic parameters at fixed `β` whose saddle index is `1 − ε`.
pub fn unfold(beta: f64, eps: f64, cfg: &PlaceConfig) -> Result<SystemParams, ConeError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(ConeError::BadEps(eps));
    }
    let mut lambda = 2.0 * eps_of_beta(beta);
    let mut alpha = 0.0;
    for _ in 0..20 {
        let g = equilibrium_analysis(&SystemParams { alpha: 0.5, lambda, beta }).gamma;
        let next = (1.0 - eps) * g;
        let moved = (next - alpha).abs();
        alpha = next;
        let mut f = |l: f64| split_at(alpha, l, beta);
        lambda = root_near(&mut f, lambda, 0.1 * lambda.abs().max(1e-4), 1e-12, cfg, "the homoclinic lambda")?;
        if moved < 1e-14 {
            break;
        }
    }
    Ok(SystemParams::new(alpha, lambda, beta).map_err(homoclinic_finder::FinderError::from)?)
}

/// Move `λ` at fixed `α, β` until the separatrix lands at `u = mu`.
pub fn place_mu(base: &SystemParams, mu: f64, cfg: &PlaceConfig) -> Result<SystemParams, ConeError> {
    let (alpha, beta) = (base.alpha, base.beta);
    let mut f = |l: f64| Ok(split_at(alpha, l, beta)? - mu);
    let tol = cfg.rel_tol * mu.abs() + 1e-14;
    let h = 1e-3 * base.lambda.abs().max(1e-6);
    let lambda = root_near(&mut f, base.lambda, h, tol, cfg, "the target splitting")?;
    Ok(SystemParams::new(alpha, lambda, beta).map_err(homoclinic_finder::FinderError::from)?)
}
