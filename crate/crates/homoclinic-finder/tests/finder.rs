use analytic_kernel::{eps_of_beta, first_order_correction, surface_slope, x0_jet, z1, Quadrature};
use homoclinic_finder::*;
use ode_engine::{reflect, OdeOptions, SystemParams};
use proptest::prelude::*;
use std::sync::OnceLock;

fn orbits() -> &'static Vec<HomoclinicOrbit> {
    static O: OnceLock<Vec<HomoclinicOrbit>> = OnceLock::new();
    O.get_or_init(|| [0.02, 0.01, 0.005].iter().map(|&b| find_butterfly(b, &FindConfig::default()).unwrap()).collect())
}

#[test]
fn slaving_examples() {
    assert_eq!(alpha_for_zero_sigma(0.0), 1.0);
    assert!((alpha_for_zero_sigma(0.02) - 0.9900500).abs() < 1e-7);
    for e in [1e-3, 1e-4] {
        assert!((alpha_for_zero_sigma(2.0 * e) - (1.0 - e)).abs() < e * e);
    }
}

#[test]
fn seed_examples() {
    let p = slaved_params(0.01, 0.02).unwrap();
    let s = checked_saddle(&p).unwrap();
    for d in [1e-5, 1e-6, 1e-8] {
        let a = unstable_seed(&p, 1.0, d).unwrap();
        let b = unstable_seed(&p, -1.0, d).unwrap();
        assert_eq!(b, reflect(&a));
        assert!(a[2] > 0.0);
        let x = d * s.eigvec_u[0];
        assert!((a[2] - s.gamma2 * x * x).abs() < 1e-12 * x * x);
        assert!((a[0].hypot(a[1]) - d).abs() < 1e-15 * d);
    }
    assert!(unstable_seed(&p, 1.0, 1e-3).is_err());
    assert!(unstable_seed(&p, 1.0, 0.0).is_err());
    assert!(unstable_seed(&SystemParams::new(1.0, 0.0, 0.1).unwrap(), 1.0, 1e-6).is_err());
}

#[test]
fn chart_properties() {
    let p = slaved_params(0.006, 0.01).unwrap();
    let c = SectionChart::build(&p).unwrap();
    // Chart origin is the Z-axis point, whose orbit falls into the saddle.
    let o = c.to_chart([0.0, 0.0]).unwrap();
    assert!(o.u.abs() < 1e-12 && o.v.abs() < 1e-12);
    for xi in [5.0, 20.0, 50.0] {
        let q = c.trace_point(xi).unwrap();
        let m = c.trace_point(-xi).unwrap();
        assert!((q[0] + m[0]).abs() < 1e-10 && (q[1] + m[1]).abs() < 1e-10);
        let a = c.to_chart([q[0] + 1e-3, q[1] + 2e-3]).unwrap();
        let b = c.to_chart([-q[0] - 1e-3, -q[1] - 2e-3]).unwrap();
        assert!((a.u + b.u).abs() < 1e-10 && (a.v + b.v).abs() < 1e-10);
        let back = c.from_chart(a.u, a.v).unwrap();
        assert!((back[0] - q[0] - 1e-3).abs() < 1e-10 && (back[1] - q[1] - 2e-3).abs() < 1e-10);
        // Gradients against differences.
        let h = 1e-6;
        for k in 0..2 {
            let mut pp = [q[0] + 1e-3, q[1] + 2e-3];
            let mut pm = pp;
            pp[k] += h;
            pm[k] -= h;
            let (ap, am) = (c.to_chart(pp).unwrap(), c.to_chart(pm).unwrap());
            assert!(((ap.u - am.u) / (2.0 * h) - a.grad_u[k]).abs() < 1e-5);
            assert!(((ap.v - am.v) / (2.0 * h) - a.grad_v[k]).abs() < 1e-5 * a.grad_v[0].abs().max(1.0));
        }
    }
}

#[test]
fn splitting_brackets_and_symmetry() {
    let cfg = ShootConfig::default();
    let lo = splitting_function(0.004, 0.01, &cfg).unwrap();
    let hi = splitting_function(0.008, 0.01, &cfg).unwrap();
    assert!(lo.signum() != hi.signum());
    let p = slaved_params(0.004, 0.01).unwrap();
    let c = SectionChart::build(&p).unwrap();
    let plus = splitting_value(&p, &c, 1.0, &cfg).unwrap();
    let minus = splitting_value(&p, &c, -1.0, &cfg).unwrap();
    assert!((plus + minus).abs() < 1e-10);
    assert!(splitting_function(0.004, 0.06, &cfg).is_err());
}

#[test]
fn butterfly_location_within_second_order() {
    for o in orbits() {
        let e = eps_of_beta(o.params.beta);
        assert!((o.params.lambda - 2.0 * e).abs() <= 5.0 * e * e);
        assert!((o.params.alpha - (1.0 - e)).abs() <= 5.0 * e * e);
        assert!(o.miss.abs() < 1e-11);
        assert!((checked_saddle(&o.params).unwrap().sigma).abs() < 1e-14);
        // Splitting evaluated at the root.
        let cfg = ShootConfig::default();
        let c = SectionChart::build(&o.params).unwrap();
        assert!(splitting_value(&o.params, &c, 1.0, &cfg).unwrap().abs() < 1e-11);
    }
}

#[test]
fn secant_converges_superlinearly() {
    for o in orbits() {
        let m: Vec<f64> = o.iterations.iter().skip(2).map(|x| x.1.abs()).collect();
        assert!(m.len() >= 3);
        // Each step gains more than the previous contraction factor.
        assert!(m[1] / m[0] < 0.1 && m.last().unwrap() < &1e-11);
    }
}

#[test]
fn tail_enters_along_leading_direction() {
    for o in orbits() {
        assert!(o.entry[2] > 0.0);
        let r = |t: f64| {
            let s = o.state(t);
            s[0].abs() / s[2]
        };
        let mut prev = f64::INFINITY;
        for k in 0..40 {
            let t = o.t_entry + k as f64;
            let q = r(t);
            assert!(q < prev);
            prev = q;
        }
        let n = o.entry.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!((n - LINEAR_RADIUS).abs() < 1e-12);
        // Continuity of the analytic tails at both joints.
        // The dropped unstable remnant is the only jump at entry.
        let a = o.state(o.t_entry - 1e-9);
        let b = o.state(o.t_entry + 1e-9);
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() < 2.0 * o.tail_unstable.abs() + 1e-12);
        }
        assert!(o.tail_unstable.abs() < 1e-5 * o.tail_strong.abs());
        let a = o.state(o.t_seed - 1e-9);
        let b = o.state(o.t_seed + 1e-9);
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() < 1e-13);
        }
    }
}

#[test]
fn negative_branch_is_reflection() {
    let o = &orbits()[1];
    let cfg = ShootConfig::default();
    let (t1, m1) = first_return(&o.params, 1.0, &cfg).unwrap();
    let (t2, m2) = first_return(&o.params, -1.0, &cfg).unwrap();
    assert!((t1 - t2).abs() < 1e-8);
    let r = reflect(&m1);
    for i in 0..3 {
        assert!((r[i] - m2[i]).abs() < 1e-8);
    }
}

#[test]
fn seed_distance_sensitivity() {
    let base = FindConfig::default();
    let l0 = orbits()[1].params.lambda;
    for d0 in [5e-7, 2e-6] {
        let cfg = FindConfig { shoot: ShootConfig { d0, ..base.shoot }, ..base };
        let (l, _, _) = find_lambda(0.01, &cfg).unwrap();
        assert!((l - l0).abs() < 1e-9, "{d0} {}", l - l0);
    }
}

/// Max deviation of the loop from the first-order profile over [−10, 10], minimised over a time shift.
fn profile_error(o: &HomoclinicOrbit) -> f64 {
    let q = Quadrature::default();
    let beta = o.params.beta;
    let lam = beta / surface_slope();
    let ts: Vec<f64> = (0..=80).map(|i| -10.0 + 0.25 * i as f64).collect();
    let pred: Vec<[f64; 3]> = ts
        .iter()
        .map(|&t| {
            let j = x0_jet(t);
            let c = first_order_correction(t, lam, beta, &q).unwrap();
            let h = 1e-4;
            let dx1 = (first_order_correction(t + h, lam, beta, &q).unwrap().x1 - first_order_correction(t - h, lam, beta, &q).unwrap().x1) / (2.0 * h);
            [j.x + c.x1, j.dx + dx1, z1(t, beta)]
        })
        .collect();
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
    err(0.5 * (a + b))
}

#[test]
fn loop_matches_first_order_profile() {
    let errs: Vec<f64> = orbits().iter().map(profile_error).collect();
    for (o, e) in orbits().iter().zip(&errs) {
        let eps = eps_of_beta(o.params.beta);
        println!("beta {} err {e:e} err/eps^2 {}", o.params.beta, e / (eps * eps));
        assert!(e / (eps * eps) < 20.0);
    }
    // Second-order: halving β divides the deviation by about four.
    for w in errs.windows(2) {
        let r = w[1] / w[0];
        assert!(r > 0.2 && r < 0.3, "{r}");
    }
}

#[test]
fn curve_slope_and_origin() {
    let betas = [0.0025, 0.005, 0.0075, 0.01, 0.0125, 0.015];
    let r = trace_bifurcation_curve(&betas, &FindConfig::default());
    assert!(r.points.iter().all(|p| p.error.is_none()));
    assert!((r.slope - 1.6728).abs() < 0.01, "{}", r.slope);
    assert!(r.intercept.abs() < 1e-6, "{}", r.intercept);
    assert!(r.monotone);
    let csv = curve_csv(&r);
    assert_eq!(csv.lines().count(), betas.len() + 1);
    assert!(serde_json::to_string(&r).unwrap().contains("slope_expected"));
}

#[test]
fn guard_and_errors() {
    assert!(matches!(find_butterfly(0.0, &FindConfig::default()), Err(FinderError::BetaGuard(_))));
    assert!(matches!(find_butterfly(0.1, &FindConfig::default()), Err(FinderError::BetaGuard(_))));
    let cfg = FindConfig { expansions: 0, ..Default::default() };
    let shoot = ShootConfig { opts: OdeOptions { max_steps: 5, ..cfg.shoot.opts }, ..cfg.shoot };
    assert!(find_lambda(0.01, &FindConfig { shoot, ..cfg }).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn slaving_is_exact(l in -1.5..3.0f64) {
        let a = alpha_for_zero_sigma(l);
        let s = ode_engine::equilibrium_analysis(&SystemParams::new(a, l, 0.01).unwrap());
        prop_assert!((s.gamma - a).abs() <= 1e-14);
    }
}
