//! Absorbing domain `|u| ≤ |μ| + δ(μ)` and sampled invariant-cone inequalities.

use crate::map::{build_chart, return_on_fiber, Fiber, ReturnConfig, ReturnPoint};
use crate::model::{ls_slope, separatrix_image};
use crate::ConeError;
use homoclinic_finder::SectionChart;
use ode_engine::SystemParams;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;
pub const DISCLAIMER: &str = "sampled numerical evidence on a finite grid, not a computer-assisted proof";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeConfig {
    /// Samples per axis on each side of the section.
    pub grid_n: usize,
    pub u_floor: f64,
    /// `δ(μ) = |μ|^delta_exponent`.
    pub delta_exponent: f64,
    pub safety: f64,
    /// Height of each `v`-box in units of the observed attractor thickness.
    pub v_box_factor: f64,
    pub ret: ReturnConfig,
}

impl Default for ConeConfig {
    fn default() -> Self {
        Self { grid_n: 64, u_floor: 1e-9, delta_exponent: 1.5, safety: 1.1, v_box_factor: 4.0, ret: ReturnConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub inv_fu: f64,
    pub gv: f64,
    pub gu_inv_fu: f64,
    pub fv: f64,
}

impl Norms {
    fn of(j: &[[f64; 2]; 2]) -> Self {
        Norms { inv_fu: 1.0 / j[0][0].abs(), gv: j[1][1].abs(), gu_inv_fu: (j[1][0] / j[0][0]).abs(), fv: j[0][1].abs() }
    }

    fn max(self, o: Self) -> Self {
        Norms { inv_fu: self.inv_fu.max(o.inv_fu), gv: self.gv.max(o.gv), gu_inv_fu: self.gu_inv_fu.max(o.gu_inv_fu), fv: self.fv.max(o.fv) }
    }

    fn scaled(self, k: f64) -> Self {
        Norms { inv_fu: k * self.inv_fu, gv: k * self.gv, gu_inv_fu: k * self.gu_inv_fu, fv: k * self.fv }
    }

    /// The three inequality margins; all positive means the cones are invariant.
    pub fn margins(&self) -> [f64; 3] {
        [1.0 - self.inv_fu, 1.0 - self.gv, (1.0 - self.inv_fu) * (1.0 - self.gv) - self.gu_inv_fu * self.fv]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub mu: f64,
    pub delta: f64,
    pub u_max: f64,
    pub u_floor: f64,
    /// The two `v`-boxes are centred at `±v_center`.
    pub v_center: f64,
    pub v_half: f64,
}

impl Domain {
    /// Relative room left for an image point inside `D`; negative when outside.
    pub fn room(&self, u: f64, v: f64) -> f64 {
        let ru = (self.u_max - u.abs()) / self.u_max;
        let dv = (v - self.v_center).abs().min((v + self.v_center).abs());
        ru.min((self.v_half - dv) / self.v_half)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeSample {
    pub point: ReturnPoint,
    pub norms: Norms,
    pub room: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub u: f64,
    pub v: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeReport {
    pub schema_version: u32,
    pub params: SystemParams,
    pub domain: Domain,
    pub grid_n: usize,
    pub safety: f64,
    /// Sampled suprema before the safety factor.
    pub sup_norms: Norms,
    pub margins: [f64; 3],
    pub invariance_margin: f64,
    pub verdict: Verdict,
    pub failures: Vec<SampleFailure>,
    pub note: String,
    pub samples: Vec<ConeSample>,
}

impl ConeReport {
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Domain of the given parameters: `μ` is the measured separatrix image.
pub fn build_domain(chart: &SectionChart, cfg: &ConeConfig) -> Result<Domain, ConeError> {
    let (mu, v_plus) = separatrix_image(&chart.params, chart)?;
    let delta = mu.abs().powf(cfg.delta_exponent);
    let u_max = mu.abs() + delta;
    if u_max <= cfg.u_floor {
        return Err(ConeError::DomainInsideCusp { u_max, u_floor: cfg.u_floor });
    }
    // Thickness of the image cluster near M₊ over the domain's u-range.
    let fiber = Fiber::new(chart, v_plus)?;
    let mut thick: f64 = 0.0;
    for u in linspace(cfg.u_floor, u_max, 9) {
        let r = return_on_fiber(chart, &fiber, u, &cfg.ret)?;
        thick = thick.max((r.vbar - v_plus).abs());
    }
    let thick = thick.max(1e-10);
    Ok(Domain { mu, delta, u_max, u_floor: cfg.u_floor, v_center: v_plus, v_half: 0.5 * cfg.v_box_factor * thick })
}

pub fn check_domain_and_cones(p: &SystemParams, cfg: &ConeConfig) -> Result<ConeReport, ConeError> {
    let chart = build_chart(p)?;
    let domain = build_domain(&chart, cfg)?;
    Ok(check_on_domain(&chart, &domain, cfg))
}

pub fn check_on_domain(chart: &SectionChart, domain: &Domain, cfg: &ConeConfig) -> ConeReport {
    let n = cfg.grid_n.max(2);
    let us = linspace(domain.u_floor, domain.u_max, n);
    let (c, h) = (domain.v_center, domain.v_half);
    let mut vs = linspace(c - h, c + h, n / 2);
    vs.extend(linspace(-c - h, -c + h, n - n / 2));
    let fibers: Vec<Result<Fiber, ConeError>> = vs.par_iter().map(|&v| Fiber::new(chart, v)).collect();
    let jobs: Vec<(usize, f64)> = (0..fibers.len()).flat_map(|i| us.iter().flat_map(move |&u| [(i, u), (i, -u)])).collect();
    let results: Vec<Result<ConeSample, SampleFailure>> = jobs
        .par_iter()
        .map(|&(i, u)| {
            let fail = |e: ConeError| SampleFailure { u, v: vs[i], reason: e.to_string() };
            let fiber = fibers[i].as_ref().map_err(|e| fail(e.clone()))?;
            let r = return_on_fiber(chart, fiber, u, &cfg.ret).map_err(fail)?;
            Ok(ConeSample { point: r, norms: Norms::of(&r.jac), room: domain.room(r.ubar, r.vbar) })
        })
        .collect();
    let mut samples = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(s) => samples.push(s),
            Err(f) => failures.push(f),
        }
    }
    let zero = Norms { inv_fu: 0.0, gv: 0.0, gu_inv_fu: 0.0, fv: 0.0 };
    let sup = samples.iter().fold(zero, |a, s| a.max(s.norms));
    let margins = sup.scaled(cfg.safety).margins();
    let invariance_margin = samples.iter().map(|s| s.room).fold(f64::INFINITY, f64::min);
    let ok = margins.iter().all(|m| *m > 0.0) && invariance_margin > 0.0;
    let verdict = if !failures.is_empty() || samples.is_empty() {
        Verdict::Inconclusive
    } else if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    ConeReport {
        schema_version: SCHEMA_VERSION,
        params: chart.params,
        domain: *domain,
        grid_n: n,
        safety: cfg.safety,
        sup_norms: sup,
        margins,
        invariance_margin,
        verdict,
        failures,
        note: DISCLAIMER.to_string(),
        samples,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormScaling {
    pub u: Vec<f64>,
    pub inv_fu: Vec<f64>,
    pub gv: Vec<f64>,
    /// Log-log slope of `‖(f′_u)^{-1}‖` against `u`.
    pub slope: f64,
}

/// Norms along the dyadic ladder `u = u_top 2^{-k}` on the fiber `v`.
pub fn norm_scaling(chart: &SectionChart, v: f64, u_top: f64, rungs: usize, cfg: &ReturnConfig) -> Result<NormScaling, ConeError> {
    let fiber = Fiber::new(chart, v)?;
    let mut out = NormScaling { u: vec![], inv_fu: vec![], gv: vec![], slope: f64::NAN };
    for k in 0..rungs {
        let u = u_top * 0.5f64.powi(k as i32);
        let r = return_on_fiber(chart, &fiber, u, cfg)?;
        let nm = Norms::of(&r.jac);
        out.u.push(u);
        out.inv_fu.push(nm.inv_fu);
        out.gv.push(nm.gv);
    }
    let lx: Vec<f64> = out.u.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = out.inv_fu.iter().map(|x| x.ln()).collect();
    out.slope = ls_slope(&lx, &ly);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientMap {
    pub v: f64,
    /// `(u, ū, dū/du)` ordered by `u`.
    pub samples: Vec<(f64, f64, f64)>,
    pub u_plus: f64,
    pub u_minus: f64,
    pub min_abs_slope: f64,
    pub monotone_left: bool,
    pub monotone_right: bool,
}

impl QuotientMap {
    pub fn csv(&self) -> String {
        let mut s = String::from("u,ubar\n");
        for (u, ub, _) in &self.samples {
            s.push_str(&format!("{u:e},{ub:e}\n"));
        }
        s
    }

    /// Images at the innermost samples on each side.
    pub fn one_sided_limits(&self) -> (f64, f64) {
        let left = self.samples.iter().filter(|s| s.0 < 0.0).max_by(|a, b| a.0.total_cmp(&b.0)).map(|s| s.1);
        let right = self.samples.iter().filter(|s| s.0 > 0.0).min_by(|a, b| a.0.total_cmp(&b.0)).map(|s| s.1);
        (left.unwrap_or(f64::NAN), right.unwrap_or(f64::NAN))
    }
}

/// `n` samples of the `u`-return over the fiber through `M₊`, split evenly between the two sides.
pub fn quotient_samples(p: &SystemParams, n: usize, cfg: &ConeConfig) -> Result<QuotientMap, ConeError> {
    let chart = build_chart(p)?;
    let domain = build_domain(&chart, cfg)?;
    let fiber = Fiber::new(&chart, domain.v_center)?;
    let half = (n / 2).max(2);
    let mut us: Vec<f64> = linspace(domain.u_floor, domain.u_max, half).into_iter().flat_map(|u| [u, -u]).collect();
    us.sort_by(f64::total_cmp);
    let pts: Result<Vec<ReturnPoint>, ConeError> = us.par_iter().map(|&u| return_on_fiber(&chart, &fiber, u, &cfg.ret)).collect();
    let samples: Vec<(f64, f64, f64)> = pts?.iter().map(|r| (r.u, r.ubar, r.jac[0][0])).collect();
    let mono = |s: &[(f64, f64, f64)]| s.windows(2).all(|w| w[1].1 > w[0].1) || s.windows(2).all(|w| w[1].1 < w[0].1);
    let (l, r): (Vec<_>, Vec<_>) = samples.iter().partition(|s| s.0 < 0.0);
    Ok(QuotientMap {
        v: domain.v_center,
        min_abs_slope: samples.iter().map(|s| s.2.abs()).fold(f64::INFINITY, f64::min),
        monotone_left: mono(&l),
        monotone_right: mono(&r),
        u_plus: domain.mu,
        u_minus: -domain.mu,
        samples,
    })
}
