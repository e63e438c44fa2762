//! Reduction of the map near a `(+1, −1, −1)` fixed point to a flow normal form.
//!
//! The second iterate is conjugated, by an explicit near-identity polynomial change,
//! to a map that is exactly equivariant under `S = diag(−1, −1, 1)` through degree 3;
//! its logarithm is the truncated field whose time-one map it is, and a final
//! `u₃ ↦ u₃ + k u₁²` change removes the `u₁u₂` term of the third component.

use crate::coeffs::{eps4, psi_fn, Case, TaylorCoeffs, G_fn};
use crate::error::HenonError;
use crate::map::{cubic_multipliers, HenonSpec};
use crate::poly::{degree, idx, monomials, Mono, PolyMap, NM};
use nalgebra::{DMatrix, DVector, Matrix3};
use ode_engine::{integrate, OdeOptions};
use serde::{Deserialize, Serialize};

const S_DIAG: [f64; 3] = [-1.0, -1.0, 1.0];
const TINY: f64 = 1e-9;

/// `log` of a 2×2 matrix with eigenvalues near the positive real axis, via `a₀I + a₁M`.
pub fn log2(m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let h = 0.5 * tr;
    let disc = h * h - det;
    let a1 = if disc > 0.0 {
        let d = disc.sqrt();
        if d < 1e-8 * h {
            (1.0 + d * d / (3.0 * h * h)) / h
        } else {
            (d / h).atanh() / d
        }
    } else {
        let w = (-disc).sqrt();
        if w < 1e-8 * h {
            (1.0 - w * w / (3.0 * h * h)) / h
        } else {
            (w / h).atan() / w
        }
    };
    let a0 = 0.5 * det.ln() - a1 * h;
    [[a0 + a1 * m[0][0], a1 * m[0][1]], [a1 * m[1][0], a0 + a1 * m[1][1]]]
}

/// The linear change `u = P x` and the multiplier `ν` near 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JordanChart {
    pub nu: f64,
    pub p: [[f64; 3]; 3],
    pub p_inv: [[f64; 3]; 3],
    pub delta: [f64; 3],
}

pub fn jordan_chart(eps: [f64; 4]) -> Result<JordanChart, HenonError> {
    let (e1, e2, e3) = (eps[0], eps[1], eps[2]);
    let m = cubic_multipliers(-(1.0 + e3), 1.0 - e1, 1.0 - e2);
    let nu = m
        .roots
        .iter()
        .filter(|r| r[1] == 0.0)
        .map(|r| r[0])
        .min_by(|a, b| (a - 1.0).abs().partial_cmp(&(b - 1.0).abs()).unwrap())
        .ok_or(HenonError::Singular("no real multiplier near 1"))?;
    let p = [[-nu, 1.0, 0.0], [nu, nu - 1.0, -1.0], [nu * (1.0 - e1), 1.0 - e1 + nu * (1.0 - e2), nu * nu]];
    let inv = Matrix3::from_fn(|i, j| p[i][j]).try_inverse().ok_or(HenonError::Singular("coordinate change"))?;
    let delta = [nu + e3 - (1.0 - e1) / nu, 1.0 - nu - e3, 1.0 - nu];
    Ok(JordanChart { nu, p, p_inv: [0, 1, 2].map(|i| [0, 1, 2].map(|j| inv[(i, j)])), delta })
}

/// The map in `u` coordinates as an exact cubic polynomial map.
pub fn map_in_u(spec: &HenonSpec, ch: &JordanChart) -> PolyMap {
    let mut h = PolyMap::default();
    h.0[0].set([0, 1, 0], 1.0);
    h.0[1].set([0, 0, 1], 1.0);
    let f = &spec.f;
    let z = &mut h.0[2];
    z.set([1, 0, 0], spec.b);
    for (m, v) in [
        ([0, 1, 0], f.y),
        ([0, 0, 1], f.z),
        ([0, 2, 0], f.yy),
        ([0, 1, 1], f.yz),
        ([0, 0, 2], f.zz),
        ([0, 3, 0], f.yyy),
        ([0, 2, 1], f.yyz),
        ([0, 1, 2], f.yzz),
        ([0, 0, 3], f.zzz),
    ] {
        z.set(m, v);
    }
    PolyMap::linear(&ch.p).compose(&h.compose(&PolyMap::linear(&ch.p_inv)))
}

fn anti(c: usize, m: &Mono) -> bool {
    let parity = if (m[0] + m[1]) % 2 == 0 { 1.0 } else { -1.0 };
    parity != S_DIAG[c]
}

fn apply_lin(l: &[[f64; 3]; 3], h: &PolyMap) -> PolyMap {
    let mut out = PolyMap::default();
    for r in 0..3 {
        for k in 0..3 {
            out.0[r] = out.0[r].add(&h.0[k].scale(l[r][k]));
        }
    }
    out
}

/// Near-identity change killing the `S`-anti-equivariant terms of degree `d`.
fn equivariant_step(t: &PolyMap, d: u32) -> Result<PolyMap, HenonError> {
    let l = t.lin();
    let lm = PolyMap::linear(&l);
    let basis: Vec<(usize, usize)> =
        (0..3).flat_map(|c| (0..NM).filter(move |&i| degree(i) == d && anti(c, &monomials()[i])).map(move |i| (c, i))).collect();
    let n = basis.len();
    let mut a = DMatrix::zeros(n, n);
    for (col, &(c, i)) in basis.iter().enumerate() {
        let mut h = PolyMap::default();
        h.0[c].0[i] = 1.0;
        let op = h.compose(&lm).sub(&apply_lin(&l, &h));
        for (row, &(cc, ii)) in basis.iter().enumerate() {
            a[(row, col)] = op.0[cc].0[ii];
        }
    }
    let rhs = DVector::from_iterator(n, basis.iter().map(|&(c, i)| -t.0[c].0[i]));
    let x = a.lu().solve(&rhs).ok_or(HenonError::Singular("homological equation"))?;
    let mut p = PolyMap::identity();
    for (k, &(c, i)) in basis.iter().enumerate() {
        p.0[c].0[i] += x[k];
    }
    Ok(p)
}

fn conj(p: &PolyMap, t: &PolyMap) -> PolyMap {
    p.compose(&t.compose(&p.inverse_near_identity()))
}

/// Truncated field whose time-one map agrees with `f` through degree 3.
pub fn log_map(f: &PolyMap) -> Result<PolyMap, HenonError> {
    let l = f.lin();
    if l[0][2].abs() > 1e-13 || l[1][2].abs() > 1e-13 || l[2][0].abs() > 1e-13 || l[2][1].abs() > 1e-13 {
        return Err(HenonError::Singular("linear part is not block diagonal"));
    }
    if l[2][2] <= 0.0 {
        return Err(HenonError::Singular("negative centre multiplier"));
    }
    let b = log2([[l[0][0], l[0][1]], [l[1][0], l[1][1]]]);
    let mut v = PolyMap::linear(&[[b[0][0], b[0][1], 0.0], [b[1][0], b[1][1], 0.0], [0.0, 0.0, l[2][2].ln()]]);
    let scale = f.max_abs().max(1.0);
    let mut prev = f64::INFINITY;
    for _ in 0..300 {
        let r = f.sub(&v.time_one());
        let mut worst = 0.0f64;
        for c in 0..3 {
            for i in 3..NM {
                worst = worst.max(r.0[c].0[i].abs());
            }
        }
        // stop at round-off, or once the contraction has stalled near it
        if worst <= 1e-15 * scale || (worst <= 1e-12 * scale && worst >= 0.5 * prev) {
            return Ok(v);
        }
        for c in 0..3 {
            for i in 3..NM {
                v.0[c].0[i] += r.0[c].0[i];
            }
        }
        prev = worst;
    }
    Err(HenonError::Singular("logarithm iteration"))
}

/// Coefficients of the reduced field that survive the rescaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldCoeffs {
    pub l11: f64,
    pub l12: f64,
    pub l21: f64,
    pub l22: f64,
    pub l33: f64,
    pub q11: f64,
    pub q13: f64,
    pub q23: f64,
    pub q33: f64,
    pub k300: f64,
    pub k102: f64,
    /// Third-component `u₁u₂` coefficient left after the last change (should be round-off).
    pub q3_12: f64,
}

impl FieldCoeffs {
    fn of(v: &PolyMap) -> Self {
        let g = |c: usize, m: Mono| v.0[c].0[idx(m)];
        Self {
            l11: g(0, [1, 0, 0]),
            l12: g(0, [0, 1, 0]),
            l21: g(1, [1, 0, 0]),
            l22: g(1, [0, 1, 0]),
            l33: g(2, [0, 0, 1]),
            q11: g(2, [2, 0, 0]),
            q13: g(1, [1, 0, 1]),
            q23: g(1, [0, 1, 1]),
            q33: g(2, [0, 0, 2]),
            k300: g(1, [3, 0, 0]),
            k102: g(1, [1, 0, 2]),
            q3_12: g(2, [1, 1, 0]),
        }
    }
}

/// Scaling `u = diag(ν) X`, `τ = s t` that takes the field of the second iterate
/// to the target flow with unit coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowScaling {
    pub s: f64,
    pub nu: [f64; 3],
    pub alpha: f64,
    pub lambda: f64,
    pub beta: f64,
    /// Coefficient of `X³` (Case I: ±1).
    pub cubic: f64,
    /// Case II `YZ` and `XZ²` coefficients (Case I: 0).
    pub r2: f64,
    pub r3: f64,
    /// Case II `Z²` coefficient (±1); Case I: 0.
    pub zz: f64,
}

impl FlowScaling {
    fn of(fc: &FieldCoeffs, case: Case) -> Result<Self, HenonError> {
        let ss = fc.l12 * fc.l21;
        if !(ss > 0.0) || fc.l21 <= 0.0 {
            return Err(HenonError::NoTimeScale { rho1: fc.l21 });
        }
        let s = ss.sqrt();
        let alpha = -fc.l33 / s;
        let lambda = -fc.l22 / s;
        match case {
            Case::I => {
                if fc.q13 == 0.0 || fc.k300 == 0.0 {
                    return Err(HenonError::Singular("vanishing XZ or X³ coefficient"));
                }
                let nu3 = -fc.l21 / fc.q13;
                let nu1 = (fc.l21 / fc.k300.abs()).sqrt();
                let nu2 = fc.l21 * nu1 / s;
                Ok(Self {
                    s,
                    nu: [nu1, nu2, nu3],
                    alpha,
                    lambda,
                    beta: fc.q11 * nu1 * nu1 / (nu3 * s),
                    cubic: fc.k300.signum(),
                    r2: 0.0,
                    r3: 0.0,
                    zz: 0.0,
                })
            }
            Case::II => {
                if fc.q33 == 0.0 || fc.q11 == 0.0 {
                    return Err(HenonError::Singular("vanishing X² or Z² coefficient"));
                }
                let nu3 = fc.q11.signum() * s / fc.q33.abs();
                let nu1 = (nu3 * s / fc.q11).sqrt();
                let nu2 = fc.l21 * nu1 / s;
                Ok(Self {
                    s,
                    nu: [nu1, nu2, nu3],
                    alpha,
                    lambda,
                    beta: fc.q13 * nu3 / fc.l21,
                    cubic: fc.k300 * nu1 * nu1 / fc.l21,
                    r2: fc.q23 * nu3 / s,
                    r3: fc.k102 * nu3 * nu3 / fc.l21,
                    zz: fc.q33 * nu3 / s,
                })
            }
        }
    }

    /// Target field in the rescaled variables.
    pub fn field(&self, case: Case, x: &[f64; 3]) -> [f64; 3] {
        let [xx, y, z] = *x;
        match case {
            Case::I => [y, xx - self.lambda * y - xx * z + self.cubic * xx.powi(3), -self.alpha * z + self.beta * xx * xx],
            Case::II => [
                y,
                xx - self.lambda * y + self.beta * xx * z + self.cubic * xx.powi(3) + self.r2 * y * z + self.r3 * xx * z * z,
                -self.alpha * z + xx * xx + self.zz * z * z,
            ],
        }
    }
}

/// Everything the reduction produces.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub spec: HenonSpec,
    pub case: Case,
    pub chart: JordanChart,
    /// Map in `u` coordinates before the nonlinear changes.
    pub map_u: PolyMap,
    /// Combined near-identity change `w = φ(u)`.
    pub phi: PolyMap,
    /// Map after the equivariant changes only.
    pub map_equivariant: PolyMap,
    /// Map after all changes (truncated at degree 3).
    pub map_w: PolyMap,
    pub field: PolyMap,
    pub coeffs: FieldCoeffs,
}

pub fn reduce(c: &TaylorCoeffs, eps: [f64; 4], case: Case) -> Result<Reduction, HenonError> {
    let spec = HenonSpec::unfolding(c, eps, case);
    let chart = jordan_chart(eps)?;
    let map_u = map_in_u(&spec, &chart);
    let mut t = map_u;
    let mut phi = PolyMap::identity();
    for d in [2, 3] {
        let p = equivariant_step(&t, d)?;
        t = conj(&p, &t);
        phi = p.compose(&phi);
    }
    let map_equivariant = t;
    let mut field = log_map(&t.compose(&t))?;
    for _ in 0..4 {
        let fc = FieldCoeffs::of(&field);
        if fc.q3_12 == 0.0 {
            break;
        }
        let mut p = PolyMap::identity();
        p.0[2].set([2, 0, 0], -fc.q3_12 / (2.0 * fc.l12));
        t = conj(&p, &t);
        phi = p.compose(&phi);
        field = log_map(&t.compose(&t))?;
    }
    let coeffs = FieldCoeffs::of(&field);
    Ok(Reduction { spec, case, chart, map_u, phi, map_equivariant, map_w: t, field, coeffs })
}

impl Reduction {
    /// Fails at the bifurcation point itself, where the time scale vanishes.
    pub fn scaling(&self) -> Result<FlowScaling, HenonError> {
        FlowScaling::of(&self.coeffs, self.case)
    }

    /// Second iterate of the exact map in the rescaled variables.
    pub fn second_iterate(&self, sc: &FlowScaling, x: &[f64; 3]) -> Option<[f64; 3]> {
        let nu = sc.nu;
        let w = [x[0] * nu[0], x[1] * nu[1], x[2] * nu[2]];
        let u = self.phi.solve(&w)?;
        let pi = &self.chart.p_inv;
        let mut s = [0, 1, 2].map(|r| pi[r][0] * u[0] + pi[r][1] * u[1] + pi[r][2] * u[2]);
        s = self.spec.step(&self.spec.step(&s));
        let p = &self.chart.p;
        let u2 = [0, 1, 2].map(|r| p[r][0] * s[0] + p[r][1] * s[1] + p[r][2] * s[2]);
        let w2 = self.phi.eval(&u2);
        Some([w2[0] / nu[0], w2[1] / nu[1], w2[2] / nu[2]])
    }

    /// Time-`s` shift of the target flow.
    pub fn flow_shift(&self, sc: &FlowScaling, x: &[f64; 3]) -> Result<[f64; 3], HenonError> {
        let sc = *sc;
        let case = self.case;
        let rhs = move |_t: f64, y: &[f64; 3]| sc.field(case, y);
        let opts = OdeOptions::default().tol(1e-13, 1e-15);
        integrate(&rhs, 0.0, *x, sc.s, &opts).map(|s| s.y).map_err(|e| HenonError::Ode(e.to_string()))
    }
}

/// Printed normal-form quantities plus the scaling measured from the reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalFormOut {
    pub case: Case,
    pub eps: [f64; 4],
    pub psi: f64,
    pub g: f64,
    /// Multiplier near 1.
    pub nu: f64,
    pub delta: [f64; 3],
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub rho1_hat: f64,
    pub rho2_hat: f64,
    pub s: f64,
    pub kappa: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub nu3: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub beta: f64,
    pub cubic_sign: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub r3_numeric_only: bool,
    pub b300: f64,
    pub b102: f64,
    pub b300_tilde: f64,
    /// Scaling actually used to compare the second iterate with the flow.
    pub flow: FlowScaling,
    pub field: FieldCoeffs,
}

fn check_case(t: &TaylorCoeffs, case: Case) -> Result<(), HenonError> {
    let i = t.a - t.b + t.c;
    let ii = t.a - t.c;
    if i.abs() < TINY && ii.abs() < TINY {
        return Err(HenonError::Codimension5);
    }
    match case {
        Case::I if ii.abs() < TINY => Err(HenonError::CaseMismatch { what: "a - c", value: ii }),
        Case::II if i.abs() < TINY => Err(HenonError::CaseMismatch { what: "a - b + c", value: i }),
        _ => Ok(()),
    }
}

pub fn normal_form(c: &TaylorCoeffs, eps: [f64; 4], case: Case) -> Result<NormalFormOut, HenonError> {
    let t = c.unfold(case, eps[3]);
    check_case(&t, case)?;
    let g = G_fn(&t);
    if case == Case::I && g.abs() < TINY {
        return Err(HenonError::CubicDegenerate { g });
    }
    let ch = jordan_chart(eps)?;
    let [d1, d2, d3] = ch.delta;
    let lg = log2([[1.0, 1.0], [d1, 1.0 - d2]]);
    let (rho1_hat, rho2_hat, rho1, rho2) = (lg[0][0], lg[0][1] - 1.0, lg[1][0], -lg[1][1]);
    let rho3 = -(1.0 - d3).ln();
    if !(rho1 > 0.0) {
        return Err(HenonError::NoTimeScale { rho1 });
    }
    let s = (2.0 * rho1).sqrt();
    let e4 = eps4(&t, case);
    let (a, b, cc) = (t.a, t.b, t.c);
    let (kappa, beta, nu3, cubic_sign, r1, r2) = match case {
        Case::I => {
            let k = 16.0 / g.abs();
            (k, -4.0 * k * (a - cc) * e4 / s, -s * s / (a - cc), g.signum(), 0.0, 0.0)
        }
        Case::II => {
            let q = a - b + cc;
            let k = 12.0 / (q * q);
            (k, 2.0 * k * q * e4 / s, k * q * s, g.signum(), k * g / 16.0, -0.25 * k * (b + 2.0 * cc) * q)
        }
    };
    let nu2 = kappa.sqrt() * s * s;
    let nu1 = (2.0 + rho2_hat) * nu2 / s;
    let red = reduce(c, eps, case)?;
    let flow = red.scaling()?;
    let b300 = (-a * a + b * b + 5.0 * cc * cc + a * b - 5.0 * b * cc) / 32.0 + (-t.d1 + t.d2 - t.d3 + t.d4) / 8.0;
    let b102 = (2.0 * a * a - b * b + a * b + 2.0 * a * cc - b * cc) / 128.0 + (-3.0 * t.d1 - t.d2 + t.d3 + 3.0 * t.d4) / 32.0;
    Ok(NormalFormOut {
        case,
        eps,
        psi: psi_fn(&t),
        g,
        nu: ch.nu,
        delta: ch.delta,
        rho1,
        rho2,
        rho3,
        rho1_hat,
        rho2_hat,
        s,
        kappa,
        nu1,
        nu2,
        nu3,
        alpha: rho3 / s,
        lambda: rho2 / s,
        beta,
        cubic_sign,
        r1,
        r2,
        r3: if case == Case::II { flow.r3 } else { 0.0 },
        r3_numeric_only: case == Case::II,
        b300,
        b102,
        b300_tilde: g / 128.0,
        flow,
        field: red.coeffs,
    })
}

/// Flow parameters to aim the unfolding at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowTarget {
    pub s: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub beta: f64,
}

fn target_residual(c: &TaylorCoeffs, case: Case, e: [f64; 4], tg: &FlowTarget) -> Result<[f64; 4], HenonError> {
    let sc = reduce(c, e, case)?.scaling()?;
    Ok([sc.s - tg.s, sc.alpha - tg.alpha, sc.lambda - tg.lambda, sc.beta - tg.beta])
}

/// Unfolding parameters whose reduced flow has the requested `(s, α, λ, β)`.
pub fn solve_unfolding(c: &TaylorCoeffs, case: Case, tg: &FlowTarget) -> Result<[f64; 4], HenonError> {
    let (s, al, la) = (tg.s, tg.alpha, tg.lambda);
    // ρ₁ ≈ s²/4, ρ₂ ≈ λs/2, ρ₃ ≈ αs/2 for the second iterate
    let m = Matrix3::new(0.5, -0.5, 0.5, 0.5, 0.0, -0.5, 0.25, 0.25, 0.25);
    let e0 = m.lu().solve(&nalgebra::Vector3::new(s * s / 4.0, la * s / 2.0, al * s / 2.0)).ok_or(HenonError::Singular("chart"))?;
    let mut e = [e0[0], e0[1], e0[2], 0.0];
    let norm = |r: &[f64; 4]| r.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut r = target_residual(c, case, e, tg)?;
    for _ in 0..40 {
        if norm(&r) < 1e-12 {
            return Ok(e);
        }
        let mut j = nalgebra::Matrix4::zeros();
        for k in 0..4 {
            let h = 1e-7 * e[k].abs().max(1e-4);
            let mut ep = e;
            ep[k] += h;
            let rp = target_residual(c, case, ep, tg)?;
            for row in 0..4 {
                j[(row, k)] = (rp[row] - r[row]) / h;
            }
        }
        let d = j.lu().solve(&nalgebra::Vector4::from(r)).ok_or(HenonError::Singular("inversion Jacobian"))?;
        let mut step = 1.0;
        loop {
            let trial = [0, 1, 2, 3].map(|k| e[k] - step * d[k]);
            match target_residual(c, case, trial, tg) {
                Ok(rt) if norm(&rt) < norm(&r) => {
                    e = trial;
                    r = rt;
                    break;
                }
                _ if step > 1e-4 => step *= 0.5,
                _ => return Err(HenonError::NoConvergence { residual: norm(&r) }),
            }
        }
    }
    if norm(&r) < 1e-10 {
        Ok(e)
    } else {
        Err(HenonError::NoConvergence { residual: norm(&r) })
    }
}

/// Deterministic Halton points in `[−1, 1]³`.
pub fn halton_box(n: usize) -> Vec<[f64; 3]> {
    let rad = |mut i: usize, b: usize| {
        let mut f = 1.0;
        let mut r = 0.0;
        while i > 0 {
            f /= b as f64;
            r += f * (i % b) as f64;
            i /= b;
        }
        r
    };
    (1..=n).map(|i| [2.0 * rad(i, 2) - 1.0, 2.0 * rad(i, 3) - 1.0, 2.0 * rad(i, 5) - 1.0]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `sup |T²(X) − Φ_s(X)| / s` over the sample.
    pub residual: f64,
    pub s: f64,
    /// `sup |T²(RX) − R T²(X)| / s`, `R(X, Y, Z) = (−X, −Y, Z)`.
    pub commutator: f64,
    pub samples: usize,
}

/// Distance between the rescaled second iterate and the time-`s` flow shift,
/// per unit of flow time, over `sample_n` points of the unit box.
pub fn flow_shift_residual(c: &TaylorCoeffs, eps: [f64; 4], case: Case, sample_n: usize) -> Result<ResidualReport, HenonError> {
    let red = reduce(c, eps, case)?;
    let sc = red.scaling()?;
    let s = sc.s;
    let mut residual: f64 = 0.0;
    let mut commutator: f64 = 0.0;
    for x in halton_box(sample_n) {
        let t2 = red.second_iterate(&sc, &x).ok_or(HenonError::Singular("inverse change"))?;
        let phi = red.flow_shift(&sc, &x)?;
        let rx = [-x[0], -x[1], x[2]];
        let t2r = red.second_iterate(&sc, &rx).ok_or(HenonError::Singular("inverse change"))?;
        for k in 0..3 {
            residual = residual.max((t2[k] - phi[k]).abs() / s);
        }
        let rt = [-t2[0], -t2[1], t2[2]];
        for k in 0..3 {
            commutator = commutator.max((t2r[k] - rt[k]).abs() / s);
        }
    }
    Ok(ResidualReport { residual, s, commutator, samples: sample_n })
}
