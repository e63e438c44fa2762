use ode_engine::*;
use proptest::prelude::*;

fn p(a: f64, l: f64, b: f64) -> SystemParams {
    SystemParams::new(a, l, b).unwrap()
}

#[test]
fn field_examples() {
    assert_eq!(nfy_field(&[0.0; 3], &p(1.0, 0.3, 0.2)), [0.0; 3]);
    assert_eq!(nfy_field(&[1.0, 0.0, 0.0], &p(1.0, 0.0, 0.0)), [0.0; 3]);
    let q = p(0.7, 0.3, 0.4);
    let s = [0.3, -0.8, 0.25];
    let f = nfy_field(&s, &q);
    let g = nfy_field(&reflect(&s), &q);
    assert_eq!(g, [-f[0], -f[1], f[2]]);
}

#[test]
fn jacobian_matches_differences() {
    let q = p(0.8, 0.2, 0.5);
    let s = [0.4, -0.3, 0.6];
    let j = jacobian(&s, &q);
    let h = 1e-6;
    for c in 0..3 {
        let mut a = s;
        let mut b = s;
        a[c] += h;
        b[c] -= h;
        let (fa, fb) = (nfy_field(&a, &q), nfy_field(&b, &q));
        for r in 0..3 {
            assert!(((fa[r] - fb[r]) / (2.0 * h) - j[r][c]).abs() < 1e-8);
        }
    }
}

#[test]
fn conversions() {
    let e = classical_to_extended(10.0, 28.0, 8.0 / 3.0).unwrap();
    assert_eq!(e.alpha, 8.0 / 3.0);
    assert!((e.beta - (20.0 - 8.0 / 3.0) / 270.0).abs() < 1e-15);
    assert_eq!((e.gamma, e.delta, e.lambda), (270.0, 1.0, 11.0));
    let e = classical_to_extended(1.0, 2.0, 1.0).unwrap();
    assert_eq!((e.beta, e.gamma, e.lambda), (1.0, 1.0, 2.0));
    assert!(classical_to_extended(10.0, 1.0, 1.0).is_err());
    assert!(classical_to_extended(0.0, 2.0, 1.0).is_err());

    assert_eq!(sst_to_nfy(1.0, 0.0, 1.0).unwrap().beta, 1.0);
    assert!((sst_to_nfy(0.5, 0.0, 100.0).unwrap().beta - 0.005).abs() < 1e-18);
    assert!(sst_to_nfy(0.5, 0.0, 1e12).unwrap().beta < 1e-11);
    assert!(sst_to_nfy(0.5, 0.0, 0.0).is_err());
    assert!(sst_to_nfy(0.5, 0.0, -1.0).is_err());
    assert!(SystemParams::new(0.0, 0.0, 0.0).is_err());
    assert!(!p(1.2, 0.0, 0.0).z_leading());
}

#[test]
fn saddle_examples() {
    let s = equilibrium_analysis(&p(1.0, 0.0, 0.3));
    assert_eq!(s.gamma, 1.0);
    assert!(s.resonant);
    assert_eq!((s.lambda1, s.lambda2), (-1.0, -1.0));

    let s = equilibrium_analysis(&p(0.99, 0.02, 0.1));
    let g = (-0.02 + 4.0004f64.sqrt()) / 2.0;
    assert!((s.gamma - g).abs() < 1e-15);
    assert!((s.gamma - 0.9900500).abs() < 1e-7);
    assert_eq!(s.lambda1, -0.99);
    assert!((s.sigma - (g - 0.99)).abs() < 1e-15);
    assert!((s.sigma - 0.0000500).abs() < 1e-7);
    assert!((s.nu - 0.99 / g).abs() < 1e-15);
    assert!(!s.resonant && s.z_leading);
    assert!(s.gamma1 < 0.0 && s.gamma2 > 0.0);
    assert!((s.gamma * s.lambda2 + 1.0).abs() < 1e-15);

    // Exact manifold coefficients reduce to the normal-form ones on σ = 0.
    let a = 0.9;
    let s = equilibrium_analysis(&p(a, SystemParams::zero_saddle_lambda(a), 0.2));
    assert!(s.sigma.abs() < 1e-15);
    assert!((s.wu_quadratic - s.gamma2).abs() < 1e-15);
    assert!((s.wss_quadratic - s.gamma1).abs() < 1e-14);
}

#[test]
fn origin_is_stationary() {
    let t = integrate_nfy([0.0; 3], &p(0.9, 0.1, 0.2), 0.0, 10.0, &OdeOptions::default()).unwrap();
    assert_eq!(t.y, [0.0; 3]);
    assert!(t.nodes.windows(2).all(|w| w[1].0 > w[0].0));
}

fn energy(s: &[f64; 3]) -> f64 {
    s[1] * s[1] / 2.0 - s[0] * s[0] / 2.0 + s[0].powi(4) / 4.0
}

#[test]
fn energy_conserved_on_invariant_plane() {
    let q = p(1.0, 0.0, 0.0);
    let s0 = [0.3, 0.9, 0.0];
    let t = integrate_nfy(s0, &q, 0.0, 20.0, &OdeOptions::default()).unwrap();
    let e0 = energy(&s0);
    for (_, y) in &t.nodes {
        assert!((energy(y) - e0).abs() < 1e-9);
        assert_eq!(y[2], 0.0);
    }
}

#[test]
fn forward_then_backward_returns() {
    let q = p(0.8, 0.25, 0.4);
    let s0 = [0.5, 0.1, 0.2];
    let o = OdeOptions::default();
    let a = integrate_nfy(s0, &q, 0.0, 15.0, &o).unwrap();
    let b = integrate_nfy(a.y, &q, 15.0, 0.0, &o).unwrap();
    for i in 0..3 {
        assert!((b.y[i] - s0[i]).abs() < 1e-8, "{:?}", b.y);
    }
}

#[test]
fn ninth_order_convergence() {
    // Harmonic oscillator with fixed steps; the error ratio for halved steps is about 2^9.
    let sys = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
    let err = |n: usize| {
        let o = OdeOptions { h_init: Some(10.0 / n as f64), rtol: 1.0, atol: 1.0, h_max: 10.0 / n as f64, ..Default::default() };
        let s = integrate(&sys, 0.0, [1.0, 0.0], 10.0, &o).unwrap();
        (s.y[0] - 10f64.cos()).abs()
    };
    let r = err(20) / err(40);
    assert!(r > 300.0 && r < 900.0, "ratio {r}");
}

#[test]
fn dense_output_matches_nodes_and_exact() {
    let sys = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
    let s = integrate(&sys, 0.0, [1.0, 0.0], 12.0, &OdeOptions::default().dense()).unwrap();
    for w in s.dense.windows(2) {
        let a = w[0].eval(w[0].t1());
        for i in 0..2 {
            assert!((a[i] - w[1].y0[i]).abs() < 1e-12, "{}", a[i] - w[1].y0[i]);
        }
    }
    for i in 0..=240 {
        let t = 0.05 * i as f64;
        let y = s.eval(t).unwrap();
        assert!((y[0] - t.cos()).abs() < 1e-10, "t={t} {}", y[0] - t.cos());
    }
    assert!(s.eval(13.0).is_none());
}

#[test]
fn escape_and_underflow_are_reported() {
    let blowup = |_t: f64, y: &[f64; 1]| [y[0] * y[0]];
    let e = integrate(&blowup, 0.0, [1.0], 2.0, &OdeOptions::default()).unwrap_err();
    assert!(matches!(e.error, OdeError::Escaped { .. }));
    assert!(e.partial.t < 1.0 && e.partial.nodes.len() > 2);
    let o = OdeOptions { escape_radius: f64::INFINITY, ..Default::default() };
    let e = integrate(&blowup, 0.0, [1.0], 2.0, &o).unwrap_err();
    assert!(matches!(e.error, OdeError::StepUnderflow { .. } | OdeError::NonFinite { .. }), "{:?}", e.error);
    let o = OdeOptions { max_steps: 3, ..Default::default() };
    let e = integrate(&|_t: f64, y: &[f64; 2]| [y[1], -y[0]], 0.0, [1.0, 0.0], 100.0, &o).unwrap_err();
    assert!(matches!(e.error, OdeError::MaxSteps { .. }));
}

#[test]
fn section_events() {
    let q = p(0.6, 0.1, 0.5);
    let o = OdeOptions::default().dense();
    let level = q.beta / q.alpha;
    // Damped motion near a nontrivial equilibrium stays below the section.
    let q1 = p(0.6, 1.0, 0.5);
    let xe = (1.0 / (1.0 + q1.beta / q1.alpha)).sqrt();
    let t = integrate_nfy([xe + 0.01, 0.0, q1.beta / q1.alpha * xe * xe], &q1, 0.0, 30.0, &o).unwrap();
    assert!(t.nodes.iter().all(|n| n.1[2] < level - 1e-3));
    assert!(section_crossings(&t, &q1, Direction::Either).is_empty());
    // Large orbit crossing repeatedly.
    let t = integrate_nfy([1e-3, 1e-3, 0.0], &q, 0.0, 60.0, &o).unwrap();
    let ups = section_crossings(&t, &q, Direction::Up);
    let downs = section_crossings(&t, &q, Direction::Down);
    assert!(!ups.is_empty() && !downs.is_empty());
    for c in ups.iter().chain(&downs) {
        assert!((c.y[2] - level).abs() < 1e-12);
    }
    for c in &ups {
        assert!(nfy_field(&c.y, &q)[2] > 0.0);
    }
    assert!(ups.windows(2).all(|w| w[1].t > w[0].t));
    let all = section_crossings(&t, &q, Direction::Either);
    assert_eq!(all.len(), ups.len() + downs.len());
}

#[test]
fn observer_stops_at_event() {
    let q = p(0.6, 0.1, 0.5);
    let level = q.beta / q.alpha;
    let sol = solve(&Nfy(q), 0.0, [1e-3, 1e-3, 0.0], 60.0, &OdeOptions::default(), |v| {
        match v.crossings(2, level, Direction::Up).first() {
            Some(c) => Flow::StopAt(c.t),
            None => Flow::Continue,
        }
    })
    .unwrap();
    assert!(sol.stopped_early);
    assert!((sol.y[2] - level).abs() < 1e-12);
}

#[test]
fn tangent_identity_and_liouville() {
    let a = 0.8;
    let q = p(a, SystemParams::zero_saddle_lambda(a), 0.3);
    let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let r = integrate_with_tangent([0.2, 0.1, 0.1], id, &q, 1.0, 1.0, &OdeOptions::default()).unwrap();
    assert_eq!(r.matrix, id);
    let tt = 6.0;
    let r = integrate_with_tangent([0.2, 0.1, 0.1], id, &q, 0.0, tt, &OdeOptions::default()).unwrap();
    let expect = ((a - 1.0 / a - a) * tt).exp();
    assert!((det3(&r.matrix) - expect).abs() < 1e-7 * expect.max(1e-3), "{} {}", det3(&r.matrix), expect);
}

fn fd_check(s0: [f64; 3], q: SystemParams, tt: f64) {
    let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let o = OdeOptions::default();
    let r = integrate_with_tangent(s0, id, &q, 0.0, tt, &o).unwrap();
    let h = 1e-5;
    for c in 0..3 {
        let mut a = s0;
        let mut b = s0;
        a[c] += h;
        b[c] -= h;
        let ya = integrate_nfy(a, &q, 0.0, tt, &o).unwrap().y;
        let yb = integrate_nfy(b, &q, 0.0, tt, &o).unwrap().y;
        let col: Vec<f64> = (0..3).map(|i| (ya[i] - yb[i]) / (2.0 * h)).collect();
        let scale = (0..3).map(|i| r.matrix[i][c].abs()).fold(1.0, f64::max);
        for i in 0..3 {
            assert!((col[i] - r.matrix[i][c]).abs() < 1e-5 * scale, "{c} {i} {} {}", col[i], r.matrix[i][c]);
        }
    }
}

#[test]
fn tangent_matches_differences() {
    fd_check([0.4, -0.2, 0.3], p(0.7, 0.3, 0.5), 5.0);
}

#[test]
fn json_and_csv_export() {
    let q = p(0.7, 0.3, 0.5);
    let t = integrate_nfy([0.4, -0.2, 0.3], &q, 0.0, 2.0, &OdeOptions::default().dense()).unwrap();
    let mut buf = Vec::new();
    write_csv(&t, &["X", "Y", "Z"], &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("t,X,Y,Z\n"));
    assert_eq!(text.lines().count(), t.nodes.len() + 1);
    let v: serde_json::Value = serde_json::from_str(&to_json(&t).unwrap()).unwrap();
    assert_eq!(v["steps"].as_array().unwrap().len(), t.dense.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reflection_equivariance(x in -1.0..1.0f64, y in -1.0..1.0f64, z in 0.0..1.0f64,
                               a in 0.3..1.2f64, l in 0.0..0.5f64, b in 0.0..1.0f64) {
        let q = p(a, l, b);
        let o = OdeOptions::default();
        let u = integrate_nfy([x, y, z], &q, 0.0, 5.0, &o).unwrap().y;
        let v = integrate_nfy(reflect(&[x, y, z]), &q, 0.0, 5.0, &o).unwrap().y;
        let ru = reflect(&u);
        for i in 0..3 {
            prop_assert!((ru[i] - v[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn z_stays_positive(x in -1.5..1.5f64, y in -1.5..1.5f64, z in 1e-6..1.0f64,
                        a in 0.3..1.2f64, l in 0.0..0.5f64, b in 1e-3..1.0f64) {
        let q = p(a, l, b);
        let t = integrate_nfy([x, y, z], &q, 0.0, 30.0, &OdeOptions::default()).unwrap();
        prop_assert!(t.nodes.iter().all(|n| n.1[2] > -1e-12));
    }

    #[test]
    fn tangent_vs_differences(x in -0.8..0.8f64, y in -0.8..0.8f64, z in 0.0..0.8f64,
                              a in 0.4..1.1f64, l in 0.05..0.5f64, b in 0.0..0.8f64) {
        fd_check([x, y, z], p(a, l, b), 3.0);
    }

    #[test]
    fn saddle_relations(a in 0.05..1.4f64, l in -0.5..2.0f64, b in 0.0..2.0f64) {
        let s = equilibrium_analysis(&p(a, l, b));
        prop_assert!(s.gamma > 0.0 && s.lambda1 < 0.0 && s.lambda1 >= s.lambda2);
        prop_assert!((s.sigma - (s.gamma + s.lambda1)).abs() < 1e-15);
        prop_assert!((s.nu - s.lambda1.abs() / s.gamma).abs() < 1e-14);
        prop_assert!(s.gamma1 <= 0.0 && s.gamma2 >= 0.0);
        prop_assert!((s.gamma * s.gamma + l * s.gamma - 1.0).abs() < 1e-12);
    }
}
