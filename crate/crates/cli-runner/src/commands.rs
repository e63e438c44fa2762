//! One function per subcommand. Each returns a typed, schema-versioned report;
//! `run` turns it into files.

use crate::config::*;
use crate::error::{numerical, CliError};
use crate::manifest::{Diagnostic, Status};
use analytic_kernel::{
    a1_exact, eps_of_beta, first_order_correction, general_melnikov, homogeneous_pair, separatrix_slope, split_integrals_exact, surface_slope,
    x0_jet, z1, zeroth_order_series, zeroth_order_series_dot, GeneralModel, Quadrature,
};
use cone_checker::{
    build_chart, check_domain_and_cones, measure_on_chart, norm_scaling, place_mu, quotient_samples, unfold, vla_wedge, ConeConfig, ConeReport,
    LadderConfig, PlaceConfig, PoincareModel, QuotientMap, ReturnConfig, Verdict, Wedge,
};
use henon_lab::{
    cubic_multipliers, flow_shift_residual, jordan_chart, lyapunov_spectrum, map_in_u, map_start, normal_form, psi_fn, reduce, scan_VDLA,
    solve_unfolding, Case, FlowTarget, HenonError, HenonSpec, LyapunovConfig, LyapunovReport, Multipliers, NormalFormOut, ResidualReport,
    ScanConfig, ScanReport, TaylorCoeffs, G_fn,
};
use homoclinic_finder::{find_butterfly, FindConfig, HomoclinicOrbit};
use ode_engine::SystemParams;
use rayon::prelude::*;
use separatrix_value::{compute_a, csv_header, csv_row, AreaConfig, SeparatrixReport};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};
use std::time::Instant;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub pass: bool,
}

impl Check {
    /// `value < hi`; NaN fails.
    pub fn below(name: impl Into<String>, value: f64, hi: f64) -> Self {
        Check { name: name.into(), value, lo: None, hi: Some(hi), pass: value < hi }
    }

    pub fn above(name: impl Into<String>, value: f64, lo: f64) -> Self {
        Check { name: name.into(), value, lo: Some(lo), hi: None, pass: value > lo }
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Check { name: name.into(), value, lo: Some(lo), hi: Some(hi), pass: value >= lo && value <= hi }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Check { name: name.into(), value: if ok { 1.0 } else { 0.0 }, lo: None, hi: None, pass: ok }
    }
}

fn all_pass(c: &[Check]) -> bool {
    c.iter().all(|c| c.pass)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

// ---------------------------------------------------------------- closed forms

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A1Entry {
    pub value: f64,
    pub exact: f64,
    pub rel_error: f64,
    pub quadrature_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormsReport {
    pub schema_version: u32,
    pub a1: A1Entry,
    pub split_integrals: [f64; 3],
    pub split_exact: [f64; 3],
    pub checks: Vec<Check>,
    pub pass: bool,
}

pub const CLOSED_FORM_CHECKS: [&str; 7] = ["melnikov_grid", "wronskian", "v4_zeroth_order", "a1", "split_i1", "split_i2", "split_i3"];

pub fn verify_closed_forms(p: &ClosedFormsParams, tol: f64) -> Result<ClosedFormsReport, CliError> {
    if let Some(name) = &p.perturb {
        if !CLOSED_FORM_CHECKS.contains(&name.as_str()) {
            return Err(CliError::Usage(format!("unknown check '{name}' for perturb; one of {CLOSED_FORM_CHECKS:?}")));
        }
    }
    let kick = |name: &str, v: f64| if p.perturb.as_deref() == Some(name) { v + 1e-3 } else { v };
    let q = Quadrature::with_tol(tol, tol);
    let model = GeneralModel::nfy();
    model.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let grid: Vec<(f64, f64)> =
        linspace(p.lambda_range[0], p.lambda_range[1], p.grid_n).into_iter().flat_map(|l| linspace(p.beta_range[0], p.beta_range[1], p.grid_n).into_iter().map(move |b| (l, b))).collect();
    let errs: Result<Vec<f64>, CliError> = grid
        .par_iter()
        .map(|&(l, b)| {
            let r = general_melnikov(&model, &[0.0, l, b], f64::INFINITY, &q).map_err(numerical)?;
            Ok((r.value - ((32.0 / 3.0 - PI * PI) * b - 4.0 / 3.0 * l)).abs())
        })
        .collect();
    let melnikov = errs?.into_iter().fold(0.0, f64::max);

    let ts = linspace(-p.span, p.span, p.points);
    let wronskian = ts.iter().map(|&t| (homogeneous_pair(t).wronskian() * (2.0 * t).exp() - 1.0).abs()).fold(0.0, f64::max);

    // the first-order area system and its scalar reduction
    let mut v4 = 0.0f64;
    for &t in &ts {
        let [a4, a2, _] = zeroth_order_series(t);
        let [d4, d2, d3] = zeroth_order_series_dot(t);
        let x0 = x0_jet(t).x;
        for r in [d4 + 2.0 * a2, d2 + 2.0 * a2 - 1.5 * x0 * x0 * a4, d3 - x0 * a4, -2.0 * d2 + 2.0 * d4 + 3.0 * x0 * x0 * a4] {
            v4 = v4.max(r.abs());
        }
    }

    let slope = separatrix_slope(&q).map_err(numerical)?;
    let split_exact = split_integrals_exact();
    let rel = |got: f64, want: f64| ((got - want) / want).abs();
    let a1 = A1Entry { value: slope.a1, exact: a1_exact(), rel_error: rel(slope.a1, a1_exact()), quadrature_error: slope.err };
    let split = [slope.i1, slope.i2, slope.i3];
    let mut checks = vec![
        Check::below("melnikov_grid", kick("melnikov_grid", melnikov), p.melnikov_tol),
        Check::below("wronskian", kick("wronskian", wronskian), p.wronskian_tol),
        Check::below("v4_zeroth_order", kick("v4_zeroth_order", v4), p.v4_tol),
        Check::below("a1", kick("a1", a1.rel_error), p.slope_rel_tol),
    ];
    for (k, name) in ["split_i1", "split_i2", "split_i3"].iter().enumerate() {
        checks.push(Check::below(*name, kick(name, rel(split[k], split_exact[k])), p.slope_rel_tol));
    }
    let pass = all_pass(&checks);
    Ok(ClosedFormsReport { schema_version: REPORT_SCHEMA_VERSION, a1, split_integrals: split, split_exact, checks, pass })
}

// ---------------------------------------------------------------- orbits

fn find_config(tol: f64) -> FindConfig {
    FindConfig { tol, ..FindConfig::default() }
}

/// Orbits are pure functions of `(β, tol)`; cached so sibling commands share them.
fn orbit(beta: f64, tol: f64) -> Result<HomoclinicOrbit, String> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64), Result<HomoclinicOrbit, String>>>> = OnceLock::new();
    let key = (beta.to_bits(), tol.to_bits());
    let cache = CACHE.get_or_init(Default::default);
    if let Some(o) = cache.lock().unwrap().get(&key) {
        return o.clone();
    }
    let o = find_butterfly(beta, &find_config(tol)).map_err(|e| e.to_string());
    cache.lock().unwrap().insert(key, o.clone());
    o
}

fn orbits(betas: &[f64], tol: f64) -> Vec<Result<HomoclinicOrbit, String>> {
    betas.par_iter().map(|&b| orbit(b, tol)).collect()
}

/// Largest deviation of the loop from `x₀ + x₁` over `[-span, span]`, minimised over a time shift.
pub fn profile_error(o: &HomoclinicOrbit, span: f64) -> Result<f64, CliError> {
    let q = Quadrature::default();
    let beta = o.params.beta;
    // x₁ is evaluated on the surface, where it is not secular
    let lam = beta / surface_slope();
    let n = (8.0 * span).round() as usize;
    let ts = linspace(-span, span, n + 1);
    let x1 = |t: f64| first_order_correction(t, lam, beta, &q).map(|c| c.x1).map_err(numerical);
    let mut pred = Vec::with_capacity(ts.len());
    for &t in &ts {
        let h = 1e-4;
        let dx1 = (x1(t + h)? - x1(t - h)?) / (2.0 * h);
        let j = x0_jet(t);
        pred.push([j.x + x1(t)?, j.dx + dx1, z1(t, beta)]);
    }
    let err = |tau: f64| {
        ts.iter()
            .zip(&pred)
            .map(|(&t, p)| {
                let s = o.state(t + tau);
                (0..3).map(|i| (s[i] - p[i]).abs()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    };
    let (mut a, mut b) = (-0.5, 0.5);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if err(c) < err(d) {
            b = d;
        } else {
            a = c;
        }
    }
    Ok(err(0.5 * (a + b)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ButterflyPoint {
    pub beta: f64,
    pub eps: f64,
    pub error: Option<String>,
    pub alpha: f64,
    pub lambda: f64,
    pub miss: f64,
    /// `λ − 2ε`
    pub d_lambda: f64,
    /// `α − (1 − ε)`
    pub d_alpha: f64,
    pub profile_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ButterflyReport {
    pub schema_version: u32,
    pub points: Vec<ButterflyPoint>,
    pub checks: Vec<Check>,
    pub converged: bool,
    pub pass: bool,
}

impl ButterflyReport {
    pub fn csv(&self) -> String {
        let mut s = String::from("beta,eps,alpha,lambda,miss,d_lambda,d_alpha,profile_error\n");
        for p in &self.points {
            s.push_str(&format!(
                "{:e},{:e},{:.17e},{:.17e},{:e},{:e},{:e},{:e}\n",
                p.beta, p.eps, p.alpha, p.lambda, p.miss, p.d_lambda, p.d_alpha, p.profile_error
            ));
        }
        s
    }
}

pub fn butterfly(p: &ButterflyParams, tol: f64) -> Result<ButterflyReport, CliError> {
    let found = orbits(&p.betas, tol);
    let profiles: Vec<Option<f64>> = found.par_iter().map(|o| o.as_ref().ok().and_then(|o| profile_error(o, p.profile_span).ok())).collect();
    let mut points = Vec::new();
    let mut checks = Vec::new();
    for ((&beta, o), prof) in p.betas.iter().zip(&found).zip(profiles) {
        let eps = eps_of_beta(beta);
        let e2 = eps * eps;
        match o {
            Ok(o) => {
                let q = o.params;
                let pt = ButterflyPoint {
                    beta,
                    eps,
                    error: None,
                    alpha: q.alpha,
                    lambda: q.lambda,
                    miss: o.miss,
                    d_lambda: q.lambda - 2.0 * eps,
                    d_alpha: q.alpha - (1.0 - eps),
                    profile_error: prof.unwrap_or(f64::NAN),
                };
                checks.push(Check::below(format!("lambda_second_order@{beta}"), pt.d_lambda.abs() / e2, p.second_order_factor + f64::EPSILON));
                checks.push(Check::below(format!("alpha_second_order@{beta}"), pt.d_alpha.abs() / e2, p.second_order_factor + f64::EPSILON));
                checks.push(Check::below(format!("profile@{beta}"), pt.profile_error / e2, p.profile_factor));
                points.push(pt);
            }
            Err(msg) => {
                checks.push(Check::holds(format!("converged@{beta}"), false));
                points.push(ButterflyPoint {
                    beta,
                    eps,
                    error: Some(msg.clone()),
                    alpha: f64::NAN,
                    lambda: f64::NAN,
                    miss: f64::NAN,
                    d_lambda: f64::NAN,
                    d_alpha: f64::NAN,
                    profile_error: f64::NAN,
                });
            }
        }
    }
    let converged = points.iter().all(|p| p.error.is_none());
    let pass = converged && all_pass(&checks);
    Ok(ButterflyReport { schema_version: REPORT_SCHEMA_VERSION, points, checks, converged, pass })
}

// ---------------------------------------------------------------- separatrix value

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatrixRun {
    pub beta: f64,
    pub eps: f64,
    pub error: Option<String>,
    pub report: Option<SeparatrixReport>,
    pub a_over_eps: f64,
    /// `|A/ε − A₁|`
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatrixSummary {
    pub schema_version: u32,
    pub a1: f64,
    pub runs: Vec<SeparatrixRun>,
    /// `deviation(β/2) / deviation(β)` for each halving pair.
    pub ratios: Vec<(f64, f64)>,
    pub checks: Vec<Check>,
    pub converged: bool,
    pub pass: bool,
}

impl SeparatrixSummary {
    pub fn csv(&self) -> String {
        let mut s = format!("{},a_over_eps,deviation\n", csv_header());
        for r in &self.runs {
            if let Some(rep) = &r.report {
                s.push_str(&format!("{},{:.17e},{:e}\n", csv_row(rep), r.a_over_eps, r.deviation));
            }
        }
        s
    }
}

pub fn separatrix(p: &SeparatrixParams, tol: f64) -> Result<SeparatrixSummary, CliError> {
    let found = orbits(&p.betas, FindConfig::default().tol);
    let cfg = AreaConfig { tol, ..AreaConfig::default() };
    let a1 = a1_exact();
    let runs: Vec<SeparatrixRun> = p
        .betas
        .par_iter()
        .zip(&found)
        .map(|(&beta, o)| {
            let eps = eps_of_beta(beta);
            let res = o.clone().and_then(|o| compute_a(&o, &cfg).map_err(|e| e.to_string()));
            match res {
                Ok(r) => SeparatrixRun { beta, eps, error: None, a_over_eps: r.a / eps, deviation: (r.a / eps - a1).abs(), report: Some(r) },
                Err(m) => SeparatrixRun { beta, eps, error: Some(m), report: None, a_over_eps: f64::NAN, deviation: f64::NAN },
            }
        })
        .collect();
    let mut checks = Vec::new();
    for r in &runs {
        match &r.report {
            Some(rep) => checks.push(Check::within(format!("A_in_(0,{})@{}", p.a_max, r.beta), rep.a, f64::MIN_POSITIVE, p.a_max)),
            None => checks.push(Check::holds(format!("converged@{}", r.beta), false)),
        }
    }
    let mut ratios = Vec::new();
    for r in &runs {
        if let Some(h) = runs.iter().find(|h| (h.beta - 0.5 * r.beta).abs() < 1e-12 * r.beta) {
            let q = h.deviation / r.deviation;
            ratios.push((r.beta, q));
            checks.push(Check::within(format!("halving_ratio@{}", r.beta), q, p.ratio_range[0], p.ratio_range[1]));
        }
    }
    if ratios.is_empty() {
        checks.push(Check::holds("halving_pairs_present", false));
    }
    let converged = runs.iter().all(|r| r.error.is_none());
    let pass = converged && all_pass(&checks);
    Ok(SeparatrixSummary { schema_version: REPORT_SCHEMA_VERSION, a1, runs, ratios, checks, converged, pass })
}

// ---------------------------------------------------------------- cones and quotient

/// The system at `(β, ε)` with `μ` placed in the wedge of its measured return map.
pub struct Placement {
    pub base: SystemParams,
    pub model: PoincareModel,
    pub wedge: Wedge,
    pub mu: f64,
    pub placed: SystemParams,
    pub chart: homoclinic_finder::SectionChart,
}

pub fn place(beta: f64, eps: f64, mu: Option<f64>, ret: &ReturnConfig) -> Result<Placement, CliError> {
    let base = unfold(beta, eps, &PlaceConfig::default()).map_err(numerical)?;
    let chart = build_chart(&base).map_err(numerical)?;
    let model = measure_on_chart(&chart, &LadderConfig::default(), ret).map_err(numerical)?;
    let wedge = vla_wedge(model.eps, model.a_hat).map_err(numerical)?;
    let mu = mu.unwrap_or(wedge.mid());
    let placed = place_mu(&base, mu, &PlaceConfig::default()).map_err(numerical)?;
    Ok(Placement { base, model, wedge, mu, placed, chart })
}

fn return_config(tol: f64) -> ReturnConfig {
    let mut r = ReturnConfig::default();
    r.opts.rtol = tol;
    r
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormLadder {
    pub v: f64,
    pub u: Vec<f64>,
    pub inv_fu: Vec<f64>,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConesSummary {
    pub schema_version: u32,
    pub beta: f64,
    pub eps: f64,
    pub base: SystemParams,
    pub a_hat: f64,
    pub wedge: Wedge,
    pub mu: f64,
    pub in_wedge: bool,
    pub verdict: Verdict,
    pub margins: [f64; 3],
    pub invariance_margin: f64,
    pub failures: usize,
    pub ladders: Vec<NormLadder>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

pub fn cones(p: &ConesParams, tol: f64) -> Result<(ConesSummary, ConeReport), CliError> {
    let ret = return_config(tol);
    let pl = place(p.beta, p.eps, p.mu, &ret)?;
    let cfg = ConeConfig { grid_n: p.grid_n, ret, ..ConeConfig::default() };
    let rep = check_domain_and_cones(&pl.placed, &cfg).map_err(numerical)?;
    let mut ladders = Vec::new();
    for v in [pl.model.v_plus, -pl.model.v_plus] {
        let n = norm_scaling(&pl.chart, v, p.ladder_top, p.ladder_rungs, &ret).map_err(numerical)?;
        ladders.push(NormLadder { v, u: n.u, inv_fu: n.inv_fu, slope: n.slope });
    }
    let mut checks = vec![
        Check::holds("verdict_pass", rep.verdict == Verdict::Pass),
        Check::above("margin_inv_fu", rep.margins[0], 0.0),
        Check::above("margin_gv", rep.margins[1], 0.0),
        Check::above("margin_mixed", rep.margins[2], 0.0),
        Check::above("invariance", rep.invariance_margin, 0.0),
    ];
    for l in &ladders {
        checks.push(Check::within(format!("norm_slope@v={:.6}", l.v), l.slope, p.eps - p.slope_tol, p.eps + p.slope_tol));
    }
    let s = ConesSummary {
        schema_version: REPORT_SCHEMA_VERSION,
        beta: p.beta,
        eps: p.eps,
        base: pl.base,
        a_hat: pl.model.a_hat,
        wedge: pl.wedge,
        mu: pl.mu,
        in_wedge: pl.wedge.contains(pl.mu),
        verdict: rep.verdict,
        margins: rep.margins,
        invariance_margin: rep.invariance_margin,
        failures: rep.failures.len(),
        ladders,
        pass: all_pass(&checks),
        checks,
    };
    Ok((s, rep))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientSummary {
    pub schema_version: u32,
    pub beta: f64,
    pub eps: f64,
    pub mu: f64,
    pub wedge: Wedge,
    pub limits: (f64, f64),
    pub map: QuotientMap,
    pub checks: Vec<Check>,
    pub pass: bool,
}

pub fn quotient(p: &QuotientParams, tol: f64) -> Result<QuotientSummary, CliError> {
    let ret = return_config(tol);
    let pl = place(p.beta, p.eps, p.mu, &ret)?;
    let cfg = ConeConfig { ret, ..ConeConfig::default() };
    let map = quotient_samples(&pl.placed, p.samples, &cfg).map_err(numerical)?;
    let (l, r) = map.one_sided_limits();
    // every sample lies outside the cusp strip |u| < u_floor by construction
    let checks = vec![Check::above("min_abs_slope", map.min_abs_slope, 1.0), Check::holds("opposite_one_sided_limits", l * r < 0.0)];
    Ok(QuotientSummary {
        schema_version: REPORT_SCHEMA_VERSION,
        beta: p.beta,
        eps: p.eps,
        mu: pl.mu,
        wedge: pl.wedge,
        limits: (l, r),
        map,
        pass: all_pass(&checks),
        checks,
    })
}

// ---------------------------------------------------------------- Hénon

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rung {
    pub target: FlowTarget,
    pub eps: [f64; 4],
    pub residual: ResidualReport,
    pub normal_form: Option<NormalFormOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HenonNfReport {
    pub schema_version: u32,
    pub table: TaylorCoeffs,
    pub case: Case,
    pub g: f64,
    pub degenerate_multipliers: Multipliers,
    pub vieta_worst: [f64; 2],
    /// Deviation of the linear parts of the map and of the flow of its square at `ε = 0`.
    pub linear_deviation: [f64; 2],
    pub ladder: Vec<Rung>,
    pub ratios: Vec<f64>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl HenonNfReport {
    pub fn ladder_csv(&self) -> String {
        let mut s = String::from("s,eps1,eps2,eps3,eps4,residual,commutator\n");
        for r in &self.ladder {
            let e = r.eps;
            s.push_str(&format!("{:e},{:.17e},{:.17e},{:.17e},{:.17e},{:e},{:e}\n", r.target.s, e[0], e[1], e[2], e[3], r.residual.residual, r.residual.commutator));
        }
        s
    }
}

fn max_dev(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> f64 {
    (0..3).flat_map(|r| (0..3).map(move |c| (a[r][c] - b[r][c]).abs())).fold(0.0, f64::max)
}

pub fn henon_nf(p: &HenonNfParams, tol: f64) -> Result<HenonNfReport, CliError> {
    let mut checks = Vec::new();
    let m = cubic_multipliers(-1.0, 1.0, 1.0);
    let dev = m.complex().iter().zip([1.0, -1.0, -1.0]).map(|(z, w)| (z.re - w).abs().max(z.im.abs())).fold(0.0, f64::max);
    checks.push(Check::below("multipliers_at_degenerate_point", dev, tol));

    let axis = linspace(-3.0, 3.0, p.vieta_n);
    let mut vieta = [0.0f64; 2];
    for &a in &axis {
        for &b in &axis {
            for &c in &axis {
                let z = cubic_multipliers(a, b, c).complex();
                let (sum, prod) = (z[0] + z[1] + z[2], z[0] * z[1] * z[2]);
                vieta[0] = vieta[0].max((sum.re - a).abs()).max(sum.im.abs());
                vieta[1] = vieta[1].max((prod.re - b).abs()).max(prod.im.abs());
            }
        }
    }
    checks.push(Check::below("vieta_sum", vieta[0], tol));
    checks.push(Check::below("vieta_product", vieta[1], tol));
    checks.push(Check::holds("psi_trivial_zero", psi_fn(&TaylorCoeffs::quadratic(0.7, 0.3, 0.7)) == 0.0));
    checks.push(Check::holds("g_trivial_zero", G_fn(&TaylorCoeffs::quadratic(0.4, 1.2, 0.6)) == 0.0));

    let t = p.table.coeffs();
    let g = G_fn(&t);
    checks.push(Check::holds("table_g_negative", g < 0.0));

    let zero = [0.0; 4];
    let spec = HenonSpec::unfolding(&t, zero, p.case);
    let ch = jordan_chart(zero).map_err(numerical)?;
    let lin = map_in_u(&spec, &ch).lin();
    let red = reduce(&t, zero, p.case).map_err(numerical)?;
    let linear_deviation = [
        max_dev(&lin, &[[-1.0, -1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]]),
        max_dev(&red.field.lin(), &[[0.0, 2.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]),
    ];
    checks.push(Check::below("linear_part_map", linear_deviation[0], p.linear_tol));
    checks.push(Check::below("linear_part_flow", linear_deviation[1], p.linear_tol));

    let ladder: Result<Vec<Rung>, CliError> = p
        .s_ladder
        .par_iter()
        .map(|&s| {
            let target = FlowTarget { s, alpha: p.alpha, lambda: p.lambda, beta: p.beta };
            let eps = solve_unfolding(&t, p.case, &target).map_err(numerical)?;
            let residual = flow_shift_residual(&t, eps, p.case, p.samples).map_err(numerical)?;
            Ok(Rung { target, eps, residual, normal_form: normal_form(&t, eps, p.case).ok() })
        })
        .collect();
    let ladder = ladder?;
    let ratios: Vec<f64> = ladder.windows(2).map(|w| w[0].residual.residual / w[1].residual.residual).collect();
    for (k, r) in ratios.iter().enumerate() {
        checks.push(Check::within(format!("residual_ratio_{k}"), *r, p.ratio_range[0], p.ratio_range[1]));
    }
    Ok(HenonNfReport {
        schema_version: REPORT_SCHEMA_VERSION,
        table: t,
        case: p.case,
        g,
        degenerate_multipliers: m,
        vieta_worst: vieta,
        linear_deviation,
        ladder,
        ratios,
        pass: all_pass(&checks),
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub schema_version: u32,
    pub hypotheses: Option<String>,
    pub accepted: usize,
    pub points: usize,
    pub checks: Vec<Check>,
    pub pass: bool,
}

pub fn scan_config(p: &HenonScanParams, tol: f64) -> ScanConfig {
    ScanConfig {
        s: p.s,
        beta: p.beta,
        alpha: p.alpha,
        lambda: p.lambda,
        grid: p.grid,
        start: p.start,
        lyapunov: LyapunovConfig { n_transient: p.n_transient, n_iter: p.n_iter, renorm_every: p.renorm_every, bound: p.bound },
        lambda1_floor: p.lambda1_floor,
        lambda12_floor: p.lambda12_floor,
        sum_tol: tol,
        approach_ratio: p.approach_ratio,
        ..ScanConfig::default()
    }
}

pub fn henon_scan(p: &HenonScanParams, tol: f64) -> Result<(ScanSummary, Option<ScanReport>), CliError> {
    match scan_VDLA(&p.table.coeffs(), &scan_config(p, tol)) {
        Err(HenonError::Hypothesis(m)) => {
            let checks = vec![Check::holds("hypotheses", false)];
            Ok((ScanSummary { schema_version: REPORT_SCHEMA_VERSION, hypotheses: Some(m), accepted: 0, points: 0, checks, pass: false }, None))
        }
        Err(e) => Err(numerical(e)),
        Ok(r) => {
            let checks = vec![Check::holds("hypotheses", true), Check::above("accepted_points", r.accepted as f64, 0.0)];
            let s = ScanSummary { schema_version: REPORT_SCHEMA_VERSION, hypotheses: None, accepted: r.accepted, points: r.points.len(), pass: all_pass(&checks), checks };
            Ok((s, Some(r)))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovRun {
    pub schema_version: u32,
    pub target: FlowTarget,
    pub eps: [f64; 4],
    pub start: [f64; 3],
    pub report: LyapunovReport,
    pub checks: Vec<Check>,
    pub pass: bool,
}

pub fn lyapunov(p: &LyapunovParams, tol: f64) -> Result<LyapunovRun, CliError> {
    let t = p.table.coeffs();
    let target = FlowTarget { s: p.s, alpha: p.alpha, lambda: p.lambda, beta: p.beta };
    let eps = solve_unfolding(&t, p.case, &target).map_err(numerical)?;
    let (spec, x0) = map_start(&t, eps, p.case, p.start).map_err(numerical)?;
    let cfg = LyapunovConfig { n_transient: p.n_transient, n_iter: p.n_iter, renorm_every: p.renorm_every, bound: p.bound };
    let report = lyapunov_spectrum(&spec, x0, &cfg).map_err(numerical)?;
    let checks = vec![Check::below("sum_rule", (report.sum() - report.log_abs_b).abs(), tol)];
    Ok(LyapunovRun { schema_version: REPORT_SCHEMA_VERSION, target, eps, start: x0, report, pass: all_pass(&checks), checks })
}

// ---------------------------------------------------------------- dispatch

/// Files and diagnostics of one finished command.
pub struct CommandOutput {
    pub status: Status,
    pub files: Vec<(String, Vec<u8>)>,
    pub diagnostics: Vec<Diagnostic>,
}

fn json<T: Serialize>(v: &T) -> Result<Vec<u8>, CliError> {
    let mut s = serde_json::to_vec_pretty(v)?;
    s.push(b'\n');
    Ok(s)
}

fn status(pass: bool) -> Status {
    if pass {
        Status::Pass
    } else {
        Status::CheckFailed
    }
}

fn diag(op: &str, t0: Instant, detail: String) -> Diagnostic {
    Diagnostic { operation: op.to_string(), seconds: t0.elapsed().as_secs_f64(), detail }
}

/// Runs a materialized config inside its own worker pool.
pub fn run(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let cmd = cfg.command.ok_or_else(|| CliError::Usage("no command".into()))?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build().map_err(|e| CliError::Usage(e.to_string()))?;
    pool.install(|| dispatch(cmd, cfg))
}

fn dispatch(cmd: CommandName, cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let tol = cfg.tol();
    let t0 = Instant::now();
    let out = match cmd {
        CommandName::VerifyClosedForms => {
            let r = verify_closed_forms(&cfg.closed_forms, tol)?;
            CommandOutput {
                status: status(r.pass),
                diagnostics: vec![diag("closed_form_suite", t0, format!("A1 quadrature error {:e}", r.a1.quadrature_error))],
                files: vec![("closed_forms.json".into(), json(&r)?)],
            }
        }
        CommandName::Butterfly => {
            let r = butterfly(&cfg.butterfly, tol)?;
            let st = if !r.converged { Status::NonConvergence } else { status(r.pass) };
            let failed: Vec<String> = r.points.iter().filter_map(|p| p.error.as_ref().map(|e| format!("beta {}: {e}", p.beta))).collect();
            CommandOutput {
                status: st,
                diagnostics: vec![diag("find_butterfly", t0, failed.join("; "))],
                files: vec![("butterfly.csv".into(), r.csv().into_bytes()), ("butterfly.json".into(), json(&r)?)],
            }
        }
        CommandName::Separatrix => {
            let r = separatrix(&cfg.separatrix, tol)?;
            let st = if !r.converged { Status::NonConvergence } else { status(r.pass) };
            CommandOutput {
                status: st,
                diagnostics: vec![diag("compute_a", t0, format!("ratios {:?}", r.ratios))],
                files: vec![("separatrix.csv".into(), r.csv().into_bytes()), ("separatrix.json".into(), json(&r)?)],
            }
        }
        CommandName::Cones => {
            let (s, rep) = cones(&cfg.cones, tol)?;
            let mut csv = String::from("v,u,inv_fu\n");
            for l in &s.ladders {
                for (u, n) in l.u.iter().zip(&l.inv_fu) {
                    csv.push_str(&format!("{:.17e},{:e},{:.17e}\n", l.v, u, n));
                }
            }
            CommandOutput {
                status: status(s.pass),
                diagnostics: vec![diag("check_domain_and_cones", t0, format!("verdict {:?}, margins {:?}", s.verdict, s.margins))],
                files: vec![("cones.json".into(), json(&s)?), ("cone_report.json".into(), json(&rep)?), ("norm_scaling.csv".into(), csv.into_bytes())],
            }
        }
        CommandName::Quotient => {
            let s = quotient(&cfg.quotient, tol)?;
            CommandOutput {
                status: status(s.pass),
                diagnostics: vec![diag("quotient_samples", t0, format!("min |slope| {}", s.map.min_abs_slope))],
                files: vec![("quotient.csv".into(), s.map.csv().into_bytes()), ("quotient.json".into(), json(&s)?)],
            }
        }
        CommandName::HenonNf => {
            let r = henon_nf(&cfg.henon_nf, tol)?;
            CommandOutput {
                status: status(r.pass),
                diagnostics: vec![diag("normal_form", t0, format!("residual ratios {:?}", r.ratios))],
                files: vec![("henon_nf.json".into(), json(&r)?), ("residual_ladder.csv".into(), r.ladder_csv().into_bytes())],
            }
        }
        CommandName::HenonScan => {
            let (s, rep) = henon_scan(&cfg.henon_scan, tol)?;
            let mut files = vec![("scan.json".into(), json(&s)?)];
            if let Some(r) = &rep {
                files.push(("scan_points.jsonl".into(), r.json_lines().into_bytes()));
                files.push(("scan_summary.csv".into(), r.summary_csv().into_bytes()));
            }
            CommandOutput { status: status(s.pass), diagnostics: vec![diag("scan", t0, format!("{} of {} accepted", s.accepted, s.points))], files }
        }
        CommandName::Lyapunov => {
            let r = lyapunov(&cfg.lyapunov, tol)?;
            CommandOutput {
                status: status(r.pass),
                diagnostics: vec![diag("lyapunov_spectrum", t0, format!("{:?}", r.report.exponents))],
                files: vec![("lyapunov.json".into(), json(&r)?)],
            }
        }
    };
    Ok(out)
}
