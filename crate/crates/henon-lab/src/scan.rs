use crate::coeffs::{Case, TaylorCoeffs, G_fn};
use crate::error::HenonError;
use crate::lyap::{lyapunov_spectrum, LyapunovConfig, LyapunovReport};
use crate::map::HenonSpec;
use crate::normal::{reduce, solve_unfolding, FlowTarget};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const SCAN_SCHEMA_VERSION: u32 = 1;

/// Box of target-flow parameters at fixed `s` and `β`, pulled back to the unfolding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub s: f64,
    pub beta: f64,
    pub alpha: [f64; 2],
    pub lambda: [f64; 2],
    pub grid: [usize; 2],
    /// Initial point in rescaled flow variables.
    pub start: [f64; 3],
    pub lyapunov: LyapunovConfig,
    /// Positivity threshold for the largest exponent, above the estimator's noise.
    pub lambda1_floor: f64,
    pub lambda12_floor: f64,
    pub sum_tol: f64,
    /// Largest closest-approach to the fixed point, relative to the attractor diameter.
    pub approach_ratio: f64,
    pub hypothesis_tol: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            s: 0.1,
            beta: 1.0,
            alpha: [0.35, 0.55],
            lambda: [0.4, 0.6],
            grid: [3, 3],
            start: [0.1, 0.0, 0.0],
            lyapunov: LyapunovConfig::default(),
            lambda1_floor: 1e-4,
            lambda12_floor: -0.01,
            sum_tol: 1e-3,
            approach_ratio: 0.05,
            hypothesis_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub index: [usize; 2],
    pub target: FlowTarget,
    pub eps: Option<[f64; 4]>,
    pub lyapunov: Option<LyapunovReport>,
    pub accepted: bool,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub schema_version: u32,
    pub coeffs: TaylorCoeffs,
    pub g: f64,
    pub config: ScanConfig,
    pub points: Vec<ScanPoint>,
    pub accepted: usize,
}

impl ScanReport {
    /// One JSON object per grid point.
    pub fn json_lines(&self) -> String {
        self.points.iter().map(|p| serde_json::to_string(p).unwrap() + "\n").collect()
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("alpha,lambda,beta,s,eps1,eps2,eps3,eps4,l1,l2,l3,log_abs_b,accepted\n");
        for p in &self.points {
            let e = p.eps.unwrap_or([f64::NAN; 4]);
            let l = p.lyapunov.map(|r| r.exponents).unwrap_or([f64::NAN; 3]);
            let lb = p.lyapunov.map(|r| r.log_abs_b).unwrap_or(f64::NAN);
            s += &format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                p.target.alpha, p.target.lambda, p.target.beta, p.target.s, e[0], e[1], e[2], e[3], l[0], l[1], l[2], lb, p.accepted
            );
        }
        s
    }
}

/// Checks `a − b + c = 0` and `G < 0` at the centre table.
pub fn check_hypotheses(c: &TaylorCoeffs, tol: f64) -> Result<(), HenonError> {
    let q = c.a - c.b + c.c;
    if q.abs() > tol {
        return Err(HenonError::Hypothesis(format!("a - b + c = 0 fails ({q:e})")));
    }
    let g = G_fn(c);
    if !(g < 0.0) {
        return Err(HenonError::Hypothesis(format!("G < 0 fails (G = {g})")));
    }
    Ok(())
}

fn lerp(r: [f64; 2], i: usize, n: usize) -> f64 {
    if n <= 1 {
        0.5 * (r[0] + r[1])
    } else {
        r[0] + (r[1] - r[0]) * i as f64 / (n - 1) as f64
    }
}

/// The map at `eps` and a start point given in rescaled flow variables.
pub fn map_start(c: &TaylorCoeffs, eps: [f64; 4], case: Case, start: [f64; 3]) -> Result<(HenonSpec, [f64; 3]), HenonError> {
    let red = reduce(c, eps, case)?;
    let nu = red.scaling()?.nu;
    let w = [start[0] * nu[0], start[1] * nu[1], start[2] * nu[2]];
    let u = red.phi.solve(&w).ok_or(HenonError::Singular("start point"))?;
    let pi = red.chart.p_inv;
    let x0 = [0, 1, 2].map(|r| pi[r][0] * u[0] + pi[r][1] * u[1] + pi[r][2] * u[2]);
    Ok((HenonSpec::unfolding(c, eps, case), x0))
}

fn evaluate(c: &TaylorCoeffs, cfg: &ScanConfig, index: [usize; 2]) -> ScanPoint {
    let target = FlowTarget {
        s: cfg.s,
        alpha: lerp(cfg.alpha, index[0], cfg.grid[0]),
        lambda: lerp(cfg.lambda, index[1], cfg.grid[1]),
        beta: cfg.beta,
    };
    let mut pt = ScanPoint { index, target, eps: None, lyapunov: None, accepted: false, reason: None };
    let run = || -> Result<(Option<[f64; 4]>, LyapunovReport), HenonError> {
        let eps = solve_unfolding(c, Case::I, &target)?;
        let (spec, x0) = map_start(c, eps, Case::I, cfg.start)?;
        let rep = lyapunov_spectrum(&spec, x0, &cfg.lyapunov)?;
        Ok((Some(eps), rep))
    };
    match run() {
        Err(e) => pt.reason = Some(e.to_string()),
        Ok((eps, rep)) => {
            pt.eps = eps;
            pt.lyapunov = Some(rep);
            let [l1, l2, l3] = rep.exponents;
            let diam = rep.bbox.iter().map(|b| (b[1] - b[0]).powi(2)).sum::<f64>().sqrt();
            let why = if !(l1 > cfg.lambda1_floor) {
                Some("largest exponent not positive")
            } else if !(l1 + l2 > cfg.lambda12_floor) {
                Some("no area expansion along the two leading directions")
            } else if !(l3 < 0.0) {
                Some("no contracting direction")
            } else if (rep.sum() - rep.log_abs_b).abs() >= cfg.sum_tol {
                Some("exponent sum misses log|B|")
            } else if !(rep.min_origin_distance <= cfg.approach_ratio * diam) {
                Some("attractor stays away from the fixed point")
            } else {
                None
            };
            pt.accepted = why.is_none();
            pt.reason = why.map(str::to_string);
        }
    }
    pt
}

/// Pulls a box of flow parameters back to the map, and keeps the points whose
/// orbit is bounded, passes near the fixed point and has exponents of Lorenz type.
#[allow(non_snake_case)]
pub fn scan_VDLA(c: &TaylorCoeffs, cfg: &ScanConfig) -> Result<ScanReport, HenonError> {
    check_hypotheses(c, cfg.hypothesis_tol)?;
    let idx: Vec<[usize; 2]> = (0..cfg.grid[0]).flat_map(|i| (0..cfg.grid[1]).map(move |j| [i, j])).collect();
    let points: Vec<ScanPoint> = idx.par_iter().map(|&ix| evaluate(c, cfg, ix)).collect();
    let accepted = points.iter().filter(|p| p.accepted).count();
    Ok(ScanReport { schema_version: SCAN_SCHEMA_VERSION, coeffs: *c, g: G_fn(c), config: *cfg, points, accepted })
}
