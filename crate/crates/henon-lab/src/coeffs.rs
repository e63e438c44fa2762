use serde::{Deserialize, Serialize};

/// Quadratic and cubic Taylor coefficients of the third component at the fixed point:
/// `a y² + b yz + c z² + d₁ y³ + d₂ y²z + d₃ yz² + d₄ z³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    /// `a − b + c` small.
    I,
    /// `a − c` small.
    II,
}

impl TaylorCoeffs {
    pub fn new(a: f64, b: f64, c: f64, d: [f64; 4]) -> Self {
        Self { a, b, c, d1: d[0], d2: d[1], d3: d[2], d4: d[3] }
    }

    pub fn quadratic(a: f64, b: f64, c: f64) -> Self {
        Self::new(a, b, c, [0.0; 4])
    }

    /// Table whose fourth unfolding parameter equals `eps4`: Case I moves `b`, Case II moves `a`.
    pub fn unfold(&self, case: Case, eps4: f64) -> Self {
        let mut t = *self;
        match case {
            Case::I => t.b = t.a + t.c - 4.0 * eps4,
            Case::II => t.a = t.c + 2.0 * eps4,
        }
        t
    }
}

pub fn psi_fn(c: &TaylorCoeffs) -> f64 {
    (c.c - c.a) * (c.a - c.b + c.c)
}

#[allow(non_snake_case)]
pub fn G_fn(c: &TaylorCoeffs) -> f64 {
    4.0 * (c.d1 - c.d2 + c.d3 - c.d4) - (c.b - 2.0 * c.c).powi(2)
}

pub fn eps4(c: &TaylorCoeffs, case: Case) -> f64 {
    match case {
        Case::I => 0.25 * (c.a - c.b + c.c),
        Case::II => 0.5 * (c.a - c.c),
    }
}
