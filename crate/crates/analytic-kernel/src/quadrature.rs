//! Adaptive Gauss–Kronrod (10/21) quadrature with a global error budget.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Integral value together with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub err: f64,
    pub evals: usize,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum QuadError {
    #[error("quadrature did not reach tolerance: best {value:e} with error {err:e} after {panels} panels")]
    NotConverged { value: f64, err: f64, panels: usize },
    #[error("integrand returned a non-finite value at t = {at}")]
    NonFinite { at: f64 },
}

/// Tolerances and limits for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
    /// Semi-infinite ranges are truncated at `±horizon`.
    pub horizon: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { abs_tol: 1e-13, rel_tol: 1e-12, max_panels: 4000, horizon: 40.0 }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err.abs();
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > e {
            e = min_err;
        }
    }
    e
}

/// One 21-point Kronrod panel; returns (value, error estimate).
pub fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64), QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    let fc = f(center);
    if !fc.is_finite() {
        return Err(QuadError::NonFinite { at: center });
    }
    let mut res_g = 0.0;
    let mut res_k = fc * WGK[10];
    let mut res_abs = res_k.abs();
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        if !f1.is_finite() {
            return Err(QuadError::NonFinite { at: center - x });
        }
        if !f2.is_finite() {
            return Err(QuadError::NonFinite { at: center + x });
        }
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let ah = half.abs();
    let err = rescale_error((res_k - res_g) * half, res_abs * ah, res_asc * ah);
    Ok((res_k * half, err))
}

impl Quadrature {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }

    /// Integrate `f` over `[a, b]`. Infinite endpoints are replaced by `±horizon`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> Result<QuadResult, QuadError> {
        self.integrate_with_breaks(&mut f, a, b, &[])
    }

    /// Like [`Quadrature::integrate`] but seeds the panel list with interior break points.
    pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
        &self,
        f: &mut F,
        a: f64,
        b: f64,
        breaks: &[f64],
    ) -> Result<QuadResult, QuadError> {
        let clip = |x: f64| {
            if x == f64::INFINITY {
                self.horizon
            } else if x == f64::NEG_INFINITY {
                -self.horizon
            } else {
                x
            }
        };
        let (a, b) = (clip(a), clip(b));
        if a == b {
            return Ok(QuadResult { value: 0.0, err: 0.0, evals: 0 });
        }
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        let mut pts = vec![lo];
        let mut inner: Vec<f64> = breaks.iter().copied().filter(|&p| p > lo && p < hi).collect();
        inner.sort_by(f64::total_cmp);
        pts.extend(inner);
        pts.push(hi);

        let mut heap = BinaryHeap::new();
        let mut total = 0.0;
        let mut total_err = 0.0;
        let mut evals = 0;
        for w in pts.windows(2) {
            let (v, e) = gk21(f, w[0], w[1])?;
            evals += 21;
            total += v;
            total_err += e;
            heap.push(Panel { a: w[0], b: w[1], value: v, err: e });
        }
        while total_err > self.abs_tol.max(self.rel_tol * total.abs()) {
            if heap.len() >= self.max_panels {
                return Err(QuadError::NotConverged { value: sign * total, err: total_err, panels: heap.len() });
            }
            let Some(p) = heap.pop() else { break };
            let mid = 0.5 * (p.a + p.b);
            if mid <= p.a || mid >= p.b {
                return Err(QuadError::NotConverged { value: sign * total, err: total_err, panels: heap.len() });
            }
            let (v1, e1) = gk21(f, p.a, mid)?;
            let (v2, e2) = gk21(f, mid, p.b)?;
            evals += 42;
            total += v1 + v2 - p.value;
            total_err += e1 + e2 - p.err;
            heap.push(Panel { a: p.a, b: mid, value: v1, err: e1 });
            heap.push(Panel { a: mid, b: p.b, value: v2, err: e2 });
        }
        // Re-sum to drop the drift from incremental updates.
        let (mut value, mut err) = (0.0, 0.0);
        let mut panels: Vec<Panel> = heap.into_vec();
        panels.sort_by(|x, y| x.a.total_cmp(&y.a));
        for p in &panels {
            value += p.value;
            err += p.err;
        }
        Ok(QuadResult { value: sign * value, err, evals })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant() {
        let r = Quadrature::default().integrate(|_| 1.0, 0.0, 1.0).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sech_squared_over_line() {
        let r = Quadrature::default()
            .integrate(|t: f64| 1.0 / t.cosh().powi(2), f64::NEG_INFINITY, f64::INFINITY)
            .unwrap();
        assert!((r.value - 2.0).abs() < 1e-12, "{r:?}");
        assert!(r.err < 1e-12);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let q = Quadrature::default();
        let a = q.integrate(|t: f64| t.exp(), 0.0, 1.0).unwrap().value;
        let b = q.integrate(|t: f64| t.exp(), 1.0, 0.0).unwrap().value;
        assert_eq!(a, -b);
    }

    #[test]
    fn reports_failure_with_best_estimate() {
        let q = Quadrature { max_panels: 4, ..Quadrature::default() };
        match q.integrate(|t: f64| t.abs().sqrt().recip().min(1e8), -1.0, 1.0) {
            Err(QuadError::NotConverged { value, err, .. }) => {
                assert!(value.is_finite() && err > 0.0);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        let r = Quadrature::default().integrate(|_| f64::NAN, 0.0, 1.0);
        assert!(matches!(r, Err(QuadError::NonFinite { .. })));
    }
}
