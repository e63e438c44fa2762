use analytic_kernel::*;
use proptest::prelude::*;
use std::f64::consts::PI;

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| a + (b - a) * i as f64 / (n - 1) as f64)
}

#[test]
fn x0_solves_the_hamiltonian_equation() {
    let worst = linspace(-20.0, 20.0, 4001)
        .map(|t| {
            let j = x0_jet(t);
            (j.ddx - j.x + j.x.powi(3)).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn x0_jet_derivatives_match_finite_differences() {
    let h = 1e-5;
    for t in linspace(-5.0, 5.0, 41) {
        let j = x0_jet(t);
        let d = (x0_jet(t + h).x - x0_jet(t - h).x) / (2.0 * h);
        let dd = (x0_jet(t + h).dx - x0_jet(t - h).dx) / (2.0 * h);
        assert!((d - j.dx).abs() < 1e-9 && (dd - j.ddx).abs() < 1e-9);
    }
}

#[test]
fn closed_form_matches_defining_integral() {
    // F(w) = ∫_{−∞}^w ẋ₀(−x₀ z₁ − λ ẋ₀) ds, independent of the printed antiderivative
    let q = Quadrature::default();
    for w in [-8.0, -2.5, -1.0, 0.0, 0.7, 2.0, 3.5, 9.0] {
        for (l, b) in [(1.0, 0.0), (0.0, 1.0)] {
            let direct = q
                .integrate(
                    |s| {
                        let j = x0_jet(s);
                        j.dx * (-j.x * z1(s, b) - l * j.dx)
                    },
                    f64::NEG_INFINITY,
                    w,
                )
                .unwrap()
                .value;
            let closed = melnikov_integrand(w, l, b);
            assert!((direct - closed).abs() < 1e-12 * (1.0 + closed.abs()), "w={w}: {direct} vs {closed}");
        }
    }
}

#[test]
fn general_melnikov_reproduces_closed_form_on_grid() {
    let model = GeneralModel::nfy();
    model.validate().unwrap();
    let q = Quadrature::with_tol(1e-12, 1e-12);
    let mut worst = 0.0f64;
    for l in linspace(-0.1, 0.1, 5) {
        for b in linspace(-0.1, 0.1, 5) {
            let r = general_melnikov(&model, &[0.0, l, b], f64::INFINITY, &q).unwrap();
            let exact = (32.0 / 3.0 - PI * PI) * b - 4.0 / 3.0 * l;
            worst = worst.max((r.value - exact).abs());
        }
    }
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn general_melnikov_examples() {
    let model = GeneralModel::nfy();
    let q = Quadrature::default();
    let r = general_melnikov(&model, &[0.0, 0.0, 1.0], f64::INFINITY, &q).unwrap();
    assert!((r.value - (32.0 / 3.0 - PI * PI)).abs() < 1e-8);
    let r = general_melnikov(&model, &[0.0, 0.0, 0.0], 1.0, &q).unwrap();
    assert_eq!(r.value, 0.0);
    let r = general_melnikov(&model, &[0.0, 1.0, 0.0], 0.0, &q).unwrap();
    assert!((r.value + 2.0 / 3.0).abs() < 1e-10);
}

#[test]
fn general_model_with_damping_term() {
    // p ≡ c x² changes h; check the nested h-quadrature against a direct ODE-free identity:
    // with f ≡ 0 only g contributes, so F(∞)·μ = −λ ∫ ẋ₀² = −4λ/3 regardless of p.
    let mut model = GeneralModel::nfy();
    model.f = Box::new(|_, _| 0.0);
    model.p = Some(Box::new(|x, _| 0.3 * x * x));
    model.validate().unwrap();
    let q = Quadrature::with_tol(1e-11, 1e-11);
    let r = general_melnikov(&model, &[0.0, 1.0, 0.0], f64::INFINITY, &q).unwrap();
    assert!((r.value + 4.0 / 3.0).abs() < 1e-9);
    assert!((model.h(1.0, &q).unwrap() - (-0.3 * 2.0 * 1.0f64.tanh()).exp()).abs() < 1e-12);
}

#[test]
fn invalid_general_model_rejected() {
    let mut model = GeneralModel::nfy();
    model.potential = Box::new(|x| 0.5 * x * x);
    assert!(model.validate().is_err());
}

#[test]
fn wronskian_identity() {
    let worst = linspace(-15.0, 15.0, 3001)
        .map(|t| (homogeneous_pair(t).wronskian() * (2.0 * t).exp() - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn homogeneous_pair_solves_scalar_area_equation() {
    // ÿ + 2ẏ + 3x₀² y = 0; second derivative by central differences of the analytic first derivative
    let h = 1e-5;
    for t in linspace(-6.0, 6.0, 61) {
        let p = homogeneous_pair(t);
        let x0 = x0_jet(t).x;
        let ddy1 = (homogeneous_pair(t + h).dy1 - homogeneous_pair(t - h).dy1) / (2.0 * h);
        let ddy2 = (homogeneous_pair(t + h).dy2 - homogeneous_pair(t - h).dy2) / (2.0 * h);
        let scale = 1.0 + p.y2.abs();
        assert!((ddy1 + 2.0 * p.dy1 + 3.0 * x0 * x0 * p.y1).abs() < 1e-7);
        assert!((ddy2 + 2.0 * p.dy2 + 3.0 * x0 * x0 * p.y2).abs() < 1e-7 * scale);
        let d1 = (homogeneous_pair(t + h).y1 - homogeneous_pair(t - h).y1) / (2.0 * h);
        assert!((d1 - p.dy1).abs() < 1e-8);
    }
}

#[test]
fn zeroth_order_series_solves_first_order_area_system() {
    let mut worst = 0.0f64;
    for t in linspace(-15.0, 15.0, 3001) {
        let [v4, v2, v3] = zeroth_order_series(t);
        let [d4, d2, d3] = zeroth_order_series_dot(t);
        let x0 = x0_jet(t).x;
        let r = [d4 + 2.0 * v2, d2 + 2.0 * v2 - 1.5 * x0 * x0 * v4, d3 - x0 * v4];
        worst = r.iter().fold(worst, |m, v| m.max(v.abs()));
        // scalar reduction carries coefficient 3
        let dd4 = -2.0 * d2;
        worst = worst.max((dd4 + 2.0 * d4 + 3.0 * x0 * x0 * v4).abs());
        let _ = v3;
    }
    assert!(worst < 1e-9, "{worst}");
}

#[test]
fn zeroth_order_derivatives_match_finite_differences() {
    let h = 1e-5;
    for t in linspace(-5.0, 5.0, 21) {
        let a = zeroth_order_series(t + h);
        let b = zeroth_order_series(t - h);
        let d = zeroth_order_series_dot(t);
        for k in 0..3 {
            assert!(((a[k] - b[k]) / (2.0 * h) - d[k]).abs() < 1e-9);
        }
    }
}

#[test]
fn x1_solves_linearized_equation() {
    // ẍ₁ − x₁ + 3x₀² x₁ = −x₀ z₁ − λ ẋ₀ on the surface
    let q = Quadrature::default();
    let (l, b) = (2.0, 8.0 / K);
    let x1 = |t: f64| first_order_correction(t, l, b, &q).unwrap().x1;
    let h = 1e-3;
    for t in [-6.0, -3.0, -1.0, -0.2, 0.0, 0.4, 1.5, 4.0, 8.0] {
        let j = x0_jet(t);
        let d2 = (x1(t + h) - 2.0 * x1(t) + x1(t - h)) / (h * h);
        let res = d2 + (-1.0 + 3.0 * j.x * j.x) * x1(t) + j.x * z1(t, b) + l * j.dx;
        assert!(res.abs() < 1e-5, "t={t} res={res}");
    }
    // x1(0) from the pole limit
    let c0 = first_order_correction(0.0, l, b, &q).unwrap();
    assert!((c0.x1 - x1(1e-7)).abs() < 1e-6);
    // decays at both ends on the surface
    assert!(x1(-30.0).abs() < 1e-9 && x1(30.0).abs() < 1e-9);
}

#[test]
fn separatrix_slope_and_split_integrals() {
    let q = Quadrature::with_tol(1e-12, 1e-12);
    let r = separatrix_slope(&q).unwrap();
    let [e1, e2, e3] = split_integrals_exact();
    for (got, want) in [(r.i1, e1), (r.i2, e2), (r.i3, e3), (r.a1, a1_exact())] {
        assert!(((got - want) / want).abs() < 1e-6, "{got} vs {want}");
    }
    assert!((a1_exact() - 4.127_492_0).abs() < 1e-7);
    assert!(r.err < 1e-8);
}

#[test]
fn a1_from_variation_of_constants_limit() {
    // v₄¹(T) = C₁ y₁ + C₂ y₂ at large T approaches A₁
    let q = Quadrature::with_tol(1e-11, 1e-11);
    let t = 25.0;
    let (c1, c2) = variation_coefficients(t, &q).unwrap();
    let p = homogeneous_pair(t);
    let v = c1 * p.y1 + c2 * p.y2;
    assert!((v - a1_exact()).abs() < 1e-6, "{v}");
}

proptest! {
    #[test]
    fn melnikov_is_linear(w in -30.0f64..30.0, l in -1.0f64..1.0, b in -1.0f64..1.0, c in -5.0f64..5.0) {
        let f = melnikov_integrand(w, l, b);
        let g = melnikov_integrand(w, c * l, c * b);
        prop_assert!((g - c * f).abs() <= 1e-13 * (1.0 + f.abs() * c.abs()));
        let sum = melnikov_integrand(w, l, 0.0) + melnikov_integrand(w, 0.0, b);
        prop_assert!((sum - f).abs() <= 1e-14 * (1.0 + f.abs()));
    }

    #[test]
    fn wronskian_pointwise(t in -15.0f64..15.0) {
        let w = homogeneous_pair(t).wronskian() * (2.0 * t).exp();
        prop_assert!((w - 1.0).abs() < 1e-10);
    }

    #[test]
    fn x0_is_even_and_positive(t in -50.0f64..50.0) {
        let a = x0_jet(t);
        let b = x0_jet(-t);
        prop_assert!(a.x > 0.0);
        prop_assert_eq!(a.x, b.x);
        prop_assert_eq!(a.dx, -b.dx);
    }
}
