//! Melnikov functional of the general slow-fast homoclinic system by nested quadrature.

use crate::closed::{x0_jet, Jet, KernelError};
use crate::quadrature::{QuadResult, Quadrature};

type Scalar1 = Box<dyn Fn(f64) -> f64 + Send + Sync>;
type Scalar2 = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type Vector2 = Box<dyn Fn(f64, f64) -> Vec<f64> + Send + Sync>;

/// `ẍ + V′(x) = f z + g·μ`, `ż = −(α(μ) + p) z + q·μ`, truncated at first order in `(z, μ)`.
pub struct GeneralModel {
    pub potential: Scalar1,
    /// Parameterization `x₀(t)` of the zero-level loop with `x₀(0) = x*`.
    pub separatrix: Box<dyn Fn(f64) -> Jet + Send + Sync>,
    pub f: Scalar2,
    pub g: Vector2,
    /// `None` means `p ≡ 0`, so `h ≡ 1`.
    pub p: Option<Scalar2>,
    pub q: Vector2,
    pub alpha_of_mu: Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    pub x_star: f64,
    pub mu_dim: usize,
}

impl GeneralModel {
    /// The specialization reproducing the extended Lorenz system, `μ = (α − 1, λ, β)`.
    pub fn nfy() -> Self {
        Self {
            potential: Box::new(|x| -0.5 * x * x + 0.25 * x.powi(4)),
            separatrix: Box::new(x0_jet),
            f: Box::new(|x, _| -x),
            g: Box::new(|_, dx| vec![0.0, -dx, 0.0]),
            p: None,
            q: Box::new(|x, _| vec![0.0, 0.0, x * x]),
            alpha_of_mu: Box::new(|mu| 1.0 + mu[0]),
            x_star: std::f64::consts::SQRT_2,
            mu_dim: 3,
        }
    }

    /// Checks `V(0) = V′(0) = 0 > V″(0)`, `V(x*) = 0`, and vanishing `g, p, q` at the origin.
    pub fn validate(&self) -> Result<(), KernelError> {
        let v = &self.potential;
        let h = 1e-4;
        let d1 = (v(h) - v(-h)) / (2.0 * h);
        let d2 = (v(h) - 2.0 * v(0.0) + v(-h)) / (h * h);
        let bad = |m: &str| Err(KernelError::Model(m.to_string()));
        if v(0.0).abs() > 1e-12 || d1.abs() > 1e-8 {
            return bad("origin is not a critical point of V");
        }
        if d2 >= 0.0 {
            return bad("V''(0) must be negative");
        }
        if self.x_star <= 0.0 || v(self.x_star).abs() > 1e-10 {
            return bad("x_star must be a positive root of V");
        }
        if (self.g)(0.0, 0.0).iter().any(|c| *c != 0.0) || (self.q)(0.0, 0.0).iter().any(|c| *c != 0.0) {
            return bad("g and q must vanish at the origin");
        }
        if let Some(p) = &self.p {
            if p(0.0, 0.0) != 0.0 {
                return bad("p must vanish at the origin");
            }
        }
        Ok(())
    }

    fn on_loop(&self, t: f64) -> (f64, f64) {
        let j = (self.separatrix)(t);
        (j.x, j.dx)
    }

    /// `h(t) = exp(−∫₀ᵗ p̃)`.
    pub fn h(&self, t: f64, quad: &Quadrature) -> Result<f64, KernelError> {
        match &self.p {
            None => Ok(1.0),
            Some(p) => {
                let r = quad.integrate(
                    |s| {
                        let (x, dx) = self.on_loop(s);
                        p(x, dx)
                    },
                    0.0,
                    t,
                )?;
                Ok((-r.value).exp())
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `F(w)·μ` by nested quadrature, with `α` frozen at `α(0)`.
pub fn general_melnikov(model: &GeneralModel, mu: &[f64], w: f64, quad: &Quadrature) -> Result<QuadResult, KernelError> {
    let alpha = (model.alpha_of_mu)(&vec![0.0; model.mu_dim]);
    let inner_quad = Quadrature { abs_tol: quad.abs_tol * 0.1, rel_tol: quad.rel_tol * 0.1, ..*quad };
    let lo = -quad.horizon;
    let mut failure: Option<KernelError> = None;
    let mut outer = |s: f64| -> f64 {
        if failure.is_some() {
            return 0.0;
        }
        let (x, dx) = model.on_loop(s);
        let hs = match model.h(s, &inner_quad) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                return 0.0;
            }
        };
        let inner = inner_quad.integrate(
            |v| {
                let (xv, dxv) = model.on_loop(v);
                let hv = model.h(v, &inner_quad).unwrap_or(f64::NAN);
                (alpha * (v - s)).exp() * hs / hv * dot(&(model.q)(xv, dxv), mu)
            },
            lo,
            s,
        );
        let inner = match inner {
            Ok(r) => r.value,
            Err(e) => {
                failure = Some(e.into());
                return 0.0;
            }
        };
        dx * ((model.f)(x, dx) * inner + dot(&(model.g)(x, dx), mu))
    };
    let r = quad.integrate_with_breaks(&mut outer, lo, w, &[0.0])?;
    match failure {
        Some(e) => Err(e),
        None => Ok(r),
    }
}
