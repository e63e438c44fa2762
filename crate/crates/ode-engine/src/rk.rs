//! Adaptive Verner 9(8) integration with lazy continuous extension.

use crate::tableau::{A, A_EXTRA, B_DENSE, B_HIGH, B_LOW, C, C_EXTRA, DENSE, EXTRA, ORDER, STAGES};
use serde::{Deserialize, Serialize};

/// Right-hand side of `ẏ = f(t, y)`.
pub trait Rhs<const N: usize> {
    fn eval(&self, t: f64, y: &[f64; N]) -> [f64; N];
}

impl<F, const N: usize> Rhs<N> for F
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    fn eval(&self, t: f64, y: &[f64; N]) -> [f64; N] {
        self(t, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
    /// Divergence is declared when the norm of the leading `escape_dims` components exceeds this.
    pub escape_radius: f64,
    /// `0` means all components.
    pub escape_dims: usize,
    /// Keep every step's stages so the solution can be evaluated anywhere.
    pub keep_dense: bool,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-14,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
            escape_radius: 1e3,
            escape_dims: 0,
            keep_dense: false,
        }
    }
}

impl OdeOptions {
    pub fn dense(mut self) -> Self {
        self.keep_dense = true;
        self
    }
    pub fn tol(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error, Serialize, Deserialize)]
pub enum OdeError {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("state left the escape radius {radius} at t = {t}")]
    Escaped { t: f64, radius: f64 },
    #[error("step budget {max} exhausted at t = {t}")]
    MaxSteps { t: f64, max: usize },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evals: usize,
}

/// One accepted step with its stage derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    pub y0: [f64; N],
    pub k: Vec<[f64; N]>,
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Continuous extension at `t`; exact node values at both ends up to round-off.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let mut y = self.y0;
        for (i, ki) in self.k.iter().enumerate() {
            let row = &B_DENSE[i];
            let mut w = row[ORDER - 1];
            for j in (0..ORDER - 1).rev() {
                w = w * th + row[j];
            }
            w *= th * self.h;
            if w != 0.0 {
                for n in 0..N {
                    y[n] += w * ki[n];
                }
            }
        }
        y
    }
}

fn complete_dense<S: Rhs<N>, const N: usize>(sys: &S, t0: f64, h: f64, y0: &[f64; N], k: &mut Vec<[f64; N]>) {
    if k.len() == DENSE {
        return;
    }
    for i in 0..EXTRA {
        let mut ys = *y0;
        for (j, kj) in k.iter().enumerate() {
            let a = A_EXTRA[i][j];
            if a != 0.0 {
                for n in 0..N {
                    ys[n] += h * a * kj[n];
                }
            }
        }
        let kn = sys.eval(t0 + C_EXTRA[i] * h, &ys);
        k.push(kn);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Up,
    Down,
    Either,
}

impl Direction {
    fn admits(self, g0: f64, g1: f64) -> bool {
        match self {
            Direction::Up => g0 < 0.0 && g1 >= 0.0,
            Direction::Down => g0 > 0.0 && g1 <= 0.0,
            Direction::Either => (g0 < 0.0 && g1 >= 0.0) || (g0 > 0.0 && g1 <= 0.0),
        }
    }
}

/// A refined crossing of `y[component] = level`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub up: bool,
}

/// Read access to an accepted step, handed to the step observer.
pub struct StepView<'a, S: Rhs<N>, const N: usize> {
    sys: &'a S,
    pub t0: f64,
    pub h: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    pub f0: [f64; N],
    pub f1: [f64; N],
    k: &'a mut Vec<[f64; N]>,
    evals: usize,
}

impl<S: Rhs<N>, const N: usize> StepView<'_, S, N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn interpolate(&mut self, t: f64) -> [f64; N] {
        if self.k.len() < DENSE {
            complete_dense(self.sys, self.t0, self.h, &self.y0, self.k);
            self.evals += EXTRA;
        }
        DenseStep { t0: self.t0, h: self.h, y0: self.y0, k: self.k.clone() }.eval(t)
    }

    fn dense(&mut self) -> DenseStep<N> {
        if self.k.len() < DENSE {
            complete_dense(self.sys, self.t0, self.h, &self.y0, self.k);
            self.evals += EXTRA;
        }
        DenseStep { t0: self.t0, h: self.h, y0: self.y0, k: self.k.clone() }
    }

    /// Crossings of `y[comp] = level` inside this step, in time order, refined to `|y[comp] − level| ≤ 1e-13·max(1, |level|)`.
    pub fn crossings(&mut self, comp: usize, level: f64, dir: Direction) -> Vec<Crossing<N>> {
        let g0 = self.y0[comp] - level;
        let g1 = self.y1[comp] - level;
        let d0 = self.f0[comp] * self.h;
        let d1 = self.f1[comp] * self.h;
        let sign_change = (g0 < 0.0) != (g1 < 0.0) || g1 == 0.0;
        // A same-sign pair can still hide two crossings when the slope turns inside the step.
        let turning = (g0 * d0 < 0.0) && (g1 * d1 > 0.0) && (g0 < 0.0) == (g1 < 0.0);
        if !sign_change && !turning {
            return Vec::new();
        }
        let dense = self.dense();
        const SUB: usize = 16;
        let mut out = Vec::new();
        let t_at = |i: usize| if i == SUB { dense.t1() } else { dense.t0 + dense.h * i as f64 / SUB as f64 };
        let mut ta = t_at(0);
        let mut ga = g0;
        for i in 1..=SUB {
            let tb = t_at(i);
            let gb = if i == SUB { g1 } else { dense.eval(tb)[comp] - level };
            if dir.admits(ga, gb) {
                let (t, y) = refine(self.sys, &dense, comp, level, ta, tb, ga, gb);
                out.push(Crossing { t, y, up: gb > ga });
            }
            ta = tb;
            ga = gb;
        }
        out
    }
}

#[allow(clippy::too_many_arguments)]
fn refine<S: Rhs<N>, const N: usize>(
    sys: &S,
    dense: &DenseStep<N>,
    comp: usize,
    level: f64,
    mut ta: f64,
    mut tb: f64,
    mut ga: f64,
    gb: f64,
) -> (f64, [f64; N]) {
    let tol = 1e-13 * level.abs().max(1.0);
    if gb == 0.0 {
        return (tb, dense.eval(tb));
    }
    let mut t = ta - ga * (tb - ta) / (gb - ga);
    for _ in 0..100 {
        let y = dense.eval(t);
        let g = y[comp] - level;
        if g.abs() <= tol {
            return (t, y);
        }
        if (g < 0.0) == (ga < 0.0) {
            ta = t;
            ga = g;
        } else {
            tb = t;
        }
        let slope = sys.eval(t, &y)[comp];
        let newton = t - g / slope;
        t = if slope != 0.0 && newton > ta.min(tb) && newton < ta.max(tb) { newton } else { 0.5 * (ta + tb) };
        if (tb - ta).abs() <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
            break;
        }
    }
    (t, dense.eval(t))
}

/// What the integrator does after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Flow {
    Continue,
    /// Stop at the end of this step.
    Stop,
    /// Stop at an interior time of this step; the final state is interpolated.
    StopAt(f64),
}

/// Output of an integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub nodes: Vec<(f64, [f64; N])>,
    pub dense: Vec<DenseStep<N>>,
    pub stats: Stats,
    pub stopped_early: bool,
}

impl<const N: usize> Solution<N> {
    /// Evaluate inside the stored span; requires `keep_dense`.
    pub fn eval(&self, t: f64) -> Option<[f64; N]> {
        let first = self.dense.first()?;
        let fwd = first.h > 0.0;
        let idx = self.dense.partition_point(|s| if fwd { s.t1() < t } else { s.t1() > t });
        let s = self.dense.get(idx)?;
        let (lo, hi) = if fwd { (s.t0, s.t1()) } else { (s.t1(), s.t0) };
        if t < lo - 1e-12 * lo.abs().max(1.0) || t > hi + 1e-12 * hi.abs().max(1.0) {
            return None;
        }
        Some(s.eval(t))
    }

    pub fn t_start(&self) -> f64 {
        self.nodes.first().map(|n| n.0).unwrap_or(self.t)
    }
}

/// Integration failure with everything computed up to it.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeFailure<const N: usize> {
    pub error: OdeError,
    pub partial: Solution<N>,
}

impl<const N: usize> std::fmt::Display for OdeFailure<N> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.error.fmt(f)
    }
}

impl<const N: usize> std::error::Error for OdeFailure<N> {}

fn err_norm<const N: usize>(y0: &[f64; N], y1: &[f64; N], e: &[f64; N], o: &OdeOptions) -> f64 {
    let mut m: f64 = 0.0;
    for n in 0..N {
        let sc = o.atol + o.rtol * y0[n].abs().max(y1[n].abs());
        m = m.max((e[n] / sc).abs());
    }
    m
}

fn escaped<const N: usize>(y: &[f64; N], o: &OdeOptions) -> bool {
    let d = if o.escape_dims == 0 { N } else { o.escape_dims.min(N) };
    y[..d].iter().map(|v| v * v).sum::<f64>().sqrt() > o.escape_radius
}

fn initial_step<S: Rhs<N>, const N: usize>(sys: &S, t0: f64, y0: &[f64; N], f0: &[f64; N], dir: f64, o: &OdeOptions) -> (f64, usize) {
    let sc: Vec<f64> = y0.iter().map(|v| o.atol + o.rtol * v.abs()).collect();
    let rms = |v: &[f64; N]| (v.iter().zip(&sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / N as f64).sqrt();
    let d0 = rms(y0);
    let d1 = rms(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let mut y1 = *y0;
    for n in 0..N {
        y1[n] += dir * h0 * f0[n];
    }
    let f1 = sys.eval(t0 + dir * h0, &y1);
    let mut df = [0.0; N];
    for n in 0..N {
        df[n] = f1[n] - f0[n];
    }
    let d2 = rms(&df) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(1.0 / (ORDER as f64 + 1.0)) };
    ((100.0 * h0).min(h1).min(o.h_max), 1)
}

/// Integrate from `t0` to `t1` (either direction), calling `observer` after every accepted step.
pub fn solve<S, O, const N: usize>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: &OdeOptions,
    mut observer: O,
) -> Result<Solution<N>, OdeFailure<N>>
where
    S: Rhs<N>,
    O: FnMut(&mut StepView<'_, S, N>) -> Flow,
{
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let mut sol = Solution { t: t0, y: y0, nodes: vec![(t0, y0)], dense: Vec::new(), stats: Stats::default(), stopped_early: false };
    if t1 == t0 {
        return Ok(sol);
    }
    let fail = |error: OdeError, sol: Solution<N>| Err(OdeFailure { error, partial: sol });
    if y0.iter().any(|v| !v.is_finite()) {
        return fail(OdeError::NonFinite { t: t0 }, sol);
    }
    let mut t = t0;
    let mut y = y0;
    let mut f = sys.eval(t, &y);
    sol.stats.evals += 1;
    let mut h = match opts.h_init {
        Some(h) => h.abs(),
        None => {
            let (h, e) = initial_step(sys, t, &y, &f, dir, opts);
            sol.stats.evals += e;
            h
        }
    };
    let mut last_rejected = false;
    let mut k: Vec<[f64; N]> = Vec::with_capacity(DENSE);
    loop {
        if sol.stats.accepted >= opts.max_steps {
            sol.t = t;
            sol.y = y;
            return fail(OdeError::MaxSteps { t, max: opts.max_steps }, sol);
        }
        let remaining = (t1 - t).abs();
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        }
        if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) && !last {
            sol.t = t;
            sol.y = y;
            return fail(OdeError::StepUnderflow { t }, sol);
        }
        let hs = dir * h;
        k.clear();
        k.push(f);
        for i in 1..STAGES {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate() {
                let a = A[i][j];
                if a != 0.0 {
                    for n in 0..N {
                        ys[n] += hs * a * kj[n];
                    }
                }
            }
            k.push(sys.eval(t + C[i] * hs, &ys));
        }
        sol.stats.evals += STAGES - 1;
        let mut yh = y;
        let mut e = [0.0; N];
        for (i, ki) in k.iter().enumerate() {
            for n in 0..N {
                yh[n] += hs * B_HIGH[i] * ki[n];
                e[n] += hs * (B_HIGH[i] - B_LOW[i]) * ki[n];
            }
        }
        let finite = yh.iter().all(|v| v.is_finite());
        let en = if finite { err_norm(&y, &yh, &e, opts) } else { f64::INFINITY };
        if en <= 1.0 {
            let t_new = if last { t1 } else { t + hs };
            let f_new = sys.eval(t_new, &yh);
            sol.stats.evals += 1;
            sol.stats.accepted += 1;
            let mut view = StepView { sys, t0: t, h: t_new - t, y0: y, y1: yh, f0: f, f1: f_new, k: &mut k, evals: 0 };
            let flow = observer(&mut view);
            if opts.keep_dense {
                view.dense();
            }
            sol.stats.evals += view.evals;
            let step_h = view.h;
            let (t_prev, y_prev) = (t, y);
            t = t_new;
            y = yh;
            f = f_new;
            if opts.keep_dense {
                sol.dense.push(DenseStep { t0: t_prev, h: step_h, y0: y_prev, k: k.clone() });
            }
            let stop_at = match flow {
                Flow::Continue => None,
                Flow::Stop => Some(t),
                Flow::StopAt(ts) => Some(ts),
            };
            if let Some(ts) = stop_at {
                let ys = if ts == t {
                    y
                } else {
                    if k.len() < DENSE {
                        complete_dense(sys, t_prev, step_h, &y_prev, &mut k);
                        sol.stats.evals += EXTRA;
                    }
                    DenseStep { t0: t_prev, h: step_h, y0: y_prev, k: k.clone() }.eval(ts)
                };
                sol.t = ts;
                sol.y = ys;
                sol.nodes.push((ts, ys));
                sol.stopped_early = true;
                return Ok(sol);
            }
            sol.nodes.push((t, y));
            if escaped(&y, opts) {
                sol.t = t;
                sol.y = y;
                return fail(OdeError::Escaped { t, radius: opts.escape_radius }, sol);
            }
            if last {
                sol.t = t;
                sol.y = y;
                return Ok(sol);
            }
            let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-1.0 / ORDER as f64)).min(5.0) };
            h = if last_rejected { h * fac.min(1.0) } else { h * fac }.min(opts.h_max);
            last_rejected = false;
        } else {
            sol.stats.rejected += 1;
            if !finite && sol.stats.rejected > opts.max_steps {
                return fail(OdeError::NonFinite { t }, sol);
            }
            let fac = if finite { (0.9 * en.powf(-1.0 / ORDER as f64)).max(0.2) } else { 0.2 };
            h *= fac;
            last_rejected = true;
        }
    }
}

/// [`solve`] without an observer.
pub fn integrate<S: Rhs<N>, const N: usize>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: &OdeOptions,
) -> Result<Solution<N>, OdeFailure<N>> {
    solve(sys, t0, y0, t1, opts, |_| Flow::Continue)
}

impl<'a, S: Rhs<N>, const N: usize> StepView<'a, S, N> {
    /// Rebuild a view from a stored step.
    pub fn from_dense(sys: &'a S, d: &DenseStep<N>, y1: [f64; N], k: &'a mut Vec<[f64; N]>) -> Self {
        let f0 = sys.eval(d.t0, &d.y0);
        let f1 = sys.eval(d.t1(), &y1);
        Self { sys, t0: d.t0, h: d.h, y0: d.y0, y1, f0, f1, k, evals: 2 }
    }
}
