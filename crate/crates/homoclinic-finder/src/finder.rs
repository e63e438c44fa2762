use crate::chart::SectionChart;
use crate::orbit::{build_orbit, HomoclinicOrbit};
use crate::seed::slaved_params;
use crate::split::{splitting_value, ShootConfig};
use crate::FinderError;
use analytic_kernel::{eps_of_beta, surface_slope};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FindConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub expansions: usize,
    pub shoot: ShootConfig,
}

impl Default for FindConfig {
    fn default() -> Self {
        Self { tol: 1e-11, max_iter: 60, expansions: 4, shoot: ShootConfig::default() }
    }
}

fn split_at(lambda: f64, beta: f64, cfg: &ShootConfig) -> Result<f64, FinderError> {
    let p = slaved_params(lambda, beta)?;
    let chart = SectionChart::build(&p)?;
    splitting_value(&p, &chart, 1.0, cfg)
}

/// Root of the splitting function in `λ` on the zero saddle value line.
pub fn find_lambda(beta: f64, cfg: &FindConfig) -> Result<(f64, f64, Vec<(f64, f64)>), FinderError> {
    if !(beta > 0.0 && beta <= cfg.shoot.beta_guard) {
        return Err(FinderError::BetaGuard(beta));
    }
    let l0 = 2.0 * eps_of_beta(beta);
    let mut log = Vec::new();
    let eval = |l: f64, log: &mut Vec<(f64, f64)>| -> Result<f64, FinderError> {
        let m = split_at(l, beta, &cfg.shoot)?;
        log.push((l, m));
        Ok(m)
    };
    let mut half = 0.5 * l0;
    let (mut a, mut b, mut fa, mut fb);
    let mut k = 0;
    loop {
        a = (l0 - half).max(1e-3 * l0);
        b = l0 + half;
        fa = eval(a, &mut log)?;
        fb = eval(b, &mut log)?;
        if fa.signum() != fb.signum() || fa == 0.0 || fb == 0.0 {
            break;
        }
        k += 1;
        if k > cfg.expansions {
            return Err(FinderError::NoBracket { scan: log });
        }
        half *= 2.0;
    }
    // Illinois-modified secant keeps the bracket and converges superlinearly.
    let mut side = 0;
    for _ in 0..cfg.max_iter {
        if fa.abs() <= cfg.tol {
            return Ok((a, fa, log));
        }
        if fb.abs() <= cfg.tol {
            return Ok((b, fb, log));
        }
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = eval(c, &mut log)?;
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
        if (b - a).abs() < 4.0 * f64::EPSILON * b.abs() {
            break;
        }
    }
    let (l, m) = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    if m.abs() <= cfg.tol {
        Ok((l, m, log))
    } else {
        Err(FinderError::NotConverged { lambda: l, miss: m })
    }
}

/// Locate the butterfly for this `β` and integrate the loop.
pub fn find_butterfly(beta: f64, cfg: &FindConfig) -> Result<HomoclinicOrbit, FinderError> {
    let (lambda, miss, log) = find_lambda(beta, cfg)?;
    let p = slaved_params(lambda, beta)?;
    build_orbit(&p, &cfg.shoot, miss, log)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub beta: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub miss: f64,
    pub eps_effective: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveReport {
    pub points: Vec<CurvePoint>,
    /// `dβ/dλ` at the origin from `β = c1 λ + c2 λ²`.
    pub slope: f64,
    pub slope_expected: f64,
    /// Intercept of `β = c0 + c1 λ + c2 λ²`.
    pub intercept: f64,
    pub monotone: bool,
}

fn lstsq(rows: &[Vec<f64>], rhs: &[f64]) -> Vec<f64> {
    let n = rows[0].len();
    let mut m = vec![vec![0.0; n + 1]; n];
    for (r, &y) in rows.iter().zip(rhs) {
        for i in 0..n {
            for j in 0..n {
                m[i][j] += r[i] * r[j];
            }
            m[i][n] += r[i] * y;
        }
    }
    for c in 0..n {
        let piv = (c..n).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())).unwrap();
        m.swap(c, piv);
        for r in 0..n {
            if r != c {
                let f = m[r][c] / m[c][c];
                for k in c..=n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    (0..n).map(|i| m[i][n] / m[i][i]).collect()
}

/// Butterfly points over a `β` grid with a quadratic fit through them.
pub fn trace_bifurcation_curve(betas: &[f64], cfg: &FindConfig) -> CurveReport {
    let points: Vec<CurvePoint> = betas
        .par_iter()
        .map(|&beta| match find_lambda(beta, cfg) {
            Ok((lambda, miss, _)) => {
                let alpha = crate::seed::alpha_for_zero_sigma(lambda);
                CurvePoint { beta, alpha, lambda, miss, eps_effective: 1.0 - alpha, error: None }
            }
            Err(e) => CurvePoint { beta, alpha: f64::NAN, lambda: f64::NAN, miss: f64::NAN, eps_effective: f64::NAN, error: Some(e.to_string()) },
        })
        .collect();
    let ok: Vec<&CurvePoint> = points.iter().filter(|p| p.error.is_none()).collect();
    let (slope, intercept) = if ok.len() >= 3 {
        let ys: Vec<f64> = ok.iter().map(|p| p.beta).collect();
        let s = lstsq(&ok.iter().map(|p| vec![p.lambda, p.lambda * p.lambda]).collect::<Vec<_>>(), &ys)[0];
        let c = lstsq(&ok.iter().map(|p| vec![1.0, p.lambda, p.lambda * p.lambda]).collect::<Vec<_>>(), &ys)[0];
        (s, c)
    } else {
        (f64::NAN, f64::NAN)
    };
    let mut sorted: Vec<(f64, f64)> = ok.iter().map(|p| (p.beta, p.lambda)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = sorted.windows(2).all(|w| w[1].1 > w[0].1);
    CurveReport { points, slope, slope_expected: surface_slope(), intercept, monotone }
}

pub fn curve_csv(r: &CurveReport) -> String {
    let mut s = String::from("beta,alpha,lambda,miss,eps_effective\n");
    for p in &r.points {
        s.push_str(&format!("{:.17e},{:.17e},{:.17e},{:.6e},{:.17e}\n", p.beta, p.alpha, p.lambda, p.miss, p.eps_effective));
    }
    s
}
