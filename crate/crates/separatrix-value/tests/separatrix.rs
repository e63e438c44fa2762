use analytic_kernel::{a1_exact, eps_of_beta, x0_jet, zeroth_order_series};
use homoclinic_finder::{find_butterfly, FindConfig, HomoclinicOrbit};
use ode_engine::{integrate, OdeOptions, SystemParams};
use proptest::prelude::*;
use separatrix_value::*;
use std::sync::OnceLock;

const BETAS: [f64; 3] = [0.02, 0.01, 0.005];

fn orbits() -> &'static Vec<HomoclinicOrbit> {
    static O: OnceLock<Vec<HomoclinicOrbit>> = OnceLock::new();
    O.get_or_init(|| BETAS.iter().map(|&b| find_butterfly(b, &FindConfig::default()).unwrap()).collect())
}

fn reports() -> &'static Vec<SeparatrixReport> {
    static R: OnceLock<Vec<SeparatrixReport>> = OnceLock::new();
    R.get_or_init(|| orbits().iter().map(|o| compute_a(o, &AreaConfig::default()).unwrap()).collect())
}

#[test]
fn field_examples() {
    assert_eq!(area_field(&[1.0, 0.0, 0.0], 0.0, 0.0, 0.9, 0.3), [0.0; 3]);
    let a = 0.8;
    let d = area_field(&[0.0, 1.0, 0.0], 0.0, 0.0, a, 0.3);
    assert_eq!(d[0], -(a + 1.0 / a));
    // At α = 1, z = 0: v̇4 = −2 v2 and v̇2 = −2 v2 + (3/2) x² v4.
    let d = area_field(&[0.7, 0.4, 0.1], 0.9, 0.0, 1.0, 0.0);
    assert!((d[0] + 0.8).abs() < 1e-15);
    assert!((d[1] - (-0.8 + 1.5 * 0.81 * 0.7)).abs() < 1e-15);
    let o = &orbits()[1];
    let (lo, hi) = orbit_span(o);
    assert!(area_rhs(&[1.0, 0.0, 0.0], 0.0, o).is_ok());
    assert!(matches!(area_rhs(&[1.0, 0.0, 0.0], lo - 1.0, o), Err(SeparatrixError::OutsideSpan { .. })));
    assert!(area_rhs(&[1.0, 0.0, 0.0], hi + 1.0, o).is_err());
}

#[test]
fn zeroth_order_solution_matches_closed_form() {
    let f = |t: f64, v: &[f64; 3]| area_field(v, x0_jet(t).x, 0.0, 1.0, 0.0);
    let o = OdeOptions::default().dense();
    let t0 = -30.0;
    let s = integrate(&f, t0, zeroth_order_series(t0), 15.0, &o).unwrap();
    for i in 0..=45 {
        let t = -15.0 + i as f64 * (2.0 / 3.0);
        let v = s.eval(t).unwrap();
        let w = zeroth_order_series(t);
        for k in 0..3 {
            assert!((v[k] - w[k]).abs() < 1e-9, "t={t} k={k} {} {}", v[k], w[k]);
        }
    }
    assert!(zeroth_order_value(30.0, &OdeOptions::default()).unwrap().abs() < 1e-12);
}

#[test]
fn limit_matrix_spectrum() {
    for a in [0.3, 0.8, 0.99, 1.0] {
        let d = d_infinity(a);
        let tr = d[0][0] + d[1][1] + d[2][2];
        let m2 = d[0][0] * d[1][1] - d[0][1] * d[1][0] + d[0][0] * d[2][2] - d[0][2] * d[2][0] + d[1][1] * d[2][2] - d[1][2] * d[2][1];
        let det = d[0][0] * (d[1][1] * d[2][2] - d[1][2] * d[2][1]) - d[0][1] * (d[1][0] * d[2][2] - d[1][2] * d[2][0])
            + d[0][2] * (d[1][0] * d[2][1] - d[1][1] * d[2][0]);
        // Roots 0, −(α + 1/α), α − 1/α.
        let (r1, r2) = (-(a + 1.0 / a), a - 1.0 / a);
        assert!((tr - (r1 + r2)).abs() < 1e-14);
        assert!((m2 - r1 * r2).abs() < 1e-14);
        assert!(det.abs() < 1e-14);
        // η* = (−α, 1, 0) is the null vector.
        let v = [-a, 1.0, 0.0];
        for row in d {
            assert!((row[0] * v[0] + row[1] * v[1] + row[2] * v[2]).abs() < 1e-15);
        }
    }
}

#[test]
fn d_matrix_matches_printed_form() {
    let a = 0.93;
    let p = SystemParams::new(a, 1.0 / a - a, 0.02).unwrap();
    let (x, z) = (0.7, 0.03);
    let d = d_matrix(&[x, -0.2, z], &p);
    let printed = [[-1.0 / a, 3.0 * x * x + z - 1.0, -2.0 * p.beta * x], [-1.0, -a, 0.0], [0.0, x, a - 1.0 / a]];
    for i in 0..3 {
        for j in 0..3 {
            assert!((d[i][j] - printed[i][j]).abs() < 1e-15);
        }
    }
    let d0 = d_matrix(&[0.0; 3], &p);
    let di = d_infinity(a);
    for i in 0..3 {
        for j in 0..3 {
            assert!((d0[i][j] - di[i][j]).abs() < 1e-15);
        }
    }
}

#[test]
fn classification() {
    let c = classify(0.0123).unwrap();
    assert_eq!(c.orientation, Orientation::Orientable);
    assert!(c.criterion_ok);
    let c = classify(-0.5).unwrap();
    assert_eq!(c.orientation, Orientation::Nonorientable);
    assert!(c.criterion_ok);
    assert!(!classify(2.5).unwrap().criterion_ok);
    assert!(!classify(-2.0).unwrap().criterion_ok);
    assert!(matches!(classify(1e-13), Err(SeparatrixError::Degenerate(_))));
}

#[test]
fn separatrix_values_and_ratio_test() {
    let r = reports();
    for x in r {
        assert!(x.a > 0.0 && x.a < 2.0);
        assert_eq!(x.orientation, Orientation::Orientable);
        assert!(x.criterion_ok);
        assert!(x.picard_residual < 10.0 * AreaConfig::default().tol, "{}", x.picard_residual);
        assert!(x.plateau_delta < AreaConfig::default().tol);
        assert_eq!(x.series_prediction, a1_exact() * eps_of_beta(x.beta));
        // v3 has no forcing left past the cut and decays at the stated rate.
        assert!(x.v3_rate < 0.0 && x.v2_end.abs() < 1e-12);
    }
    let d: Vec<f64> = r.iter().map(|x| (x.a / x.eps_effective - a1_exact()).abs()).collect();
    assert!(d[1] < d[0] && d[2] < d[1]);
    for w in d.windows(2) {
        let q = w[1] / w[0];
        assert!((0.4..=0.6).contains(&q), "{q}");
    }
    // Second-order coefficient of A in ε, stable across β.
    let c: Vec<f64> = r.iter().map(|x| (x.a - x.series_prediction) / x.eps_effective.powi(2)).collect();
    assert!((c[0] - c[2]).abs() < 0.05 * c[2].abs());
}

#[test]
fn wedge_cross_check() {
    for (o, r) in orbits().iter().zip(reports()) {
        let w = wedge_value(o, &AreaConfig::default()).unwrap();
        assert!((w / r.a - 1.0).abs() < 1e-6);
    }
}

#[test]
fn sup_ratio_converges() {
    let o = &orbits()[1];
    let r = &reports()[1];
    let q = sup_ratio(o, &AreaConfig::default(), 10).unwrap();
    assert_eq!(q.len(), 10);
    let sup = q.iter().cloned().fold(0.0, f64::max);
    assert!((sup / r.a.abs() - 1.0).abs() < 0.05);
    let dev: Vec<f64> = q.iter().map(|x| (x / r.a - 1.0).abs()).collect();
    assert!(dev[9] < dev[5] && dev[5] < dev[1]);
    assert!(dev[9] < 1e-3);
}

#[test]
fn plateau_failure_reported() {
    let cfg = AreaConfig { tol: 1e-16, ..Default::default() };
    assert!(matches!(compute_a(&orbits()[0], &cfg), Err(SeparatrixError::NoPlateau { .. })));
}

#[test]
fn report_serialisation() {
    let r = &reports()[1];
    let j = serde_json::to_value(r).unwrap();
    assert!(j["A"].as_f64().unwrap() > 0.0);
    let row = csv_row(r);
    assert_eq!(row.split(',').count(), csv_header().split(',').count());
    assert!(row.ends_with("orientable"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn field_is_linear(v in proptest::array::uniform3(-2.0..2.0f64), w in proptest::array::uniform3(-2.0..2.0f64),
                       c in -3.0..3.0f64, x in -1.5..1.5f64, z in 0.0..1.0f64, a in 0.3..1.0f64, b in 0.0..0.1f64) {
        let s = [v[0] + c * w[0], v[1] + c * w[1], v[2] + c * w[2]];
        let fs = area_field(&s, x, z, a, b);
        let fv = area_field(&v, x, z, a, b);
        let fw = area_field(&w, x, z, a, b);
        for k in 0..3 {
            prop_assert!((fs[k] - fv[k] - c * fw[k]).abs() < 1e-12);
        }
    }
}
