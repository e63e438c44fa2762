use crate::params::SystemParams;
use crate::rk::Rhs;

pub type State3 = [f64; 3];

pub fn nfy_field(s: &State3, p: &SystemParams) -> State3 {
    let [x, y, z] = *s;
    [y, x - p.lambda * y - x * z - x * x * x, -p.alpha * z + p.beta * x * x]
}

/// Row-major Jacobian.
pub fn jacobian(s: &State3, p: &SystemParams) -> [[f64; 3]; 3] {
    let [x, _, z] = *s;
    [[0.0, 1.0, 0.0], [1.0 - z - 3.0 * x * x, -p.lambda, -x], [2.0 * p.beta * x, 0.0, -p.alpha]]
}

/// The symmetry `(X, Y, Z) → (−X, −Y, Z)`.
pub fn reflect(s: &State3) -> State3 {
    [-s[0], -s[1], s[2]]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nfy(pub SystemParams);

impl Rhs<3> for Nfy {
    fn eval(&self, _t: f64, y: &[f64; 3]) -> [f64; 3] {
        nfy_field(y, &self.0)
    }
}

/// State plus row-major fundamental matrix, 12 components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NfyTangent(pub SystemParams);

impl Rhs<12> for NfyTangent {
    fn eval(&self, _t: f64, y: &[f64; 12]) -> [f64; 12] {
        let s = [y[0], y[1], y[2]];
        let f = nfy_field(&s, &self.0);
        let j = jacobian(&s, &self.0);
        let mut out = [0.0; 12];
        out[..3].copy_from_slice(&f);
        for r in 0..3 {
            for c in 0..3 {
                out[3 + 3 * r + c] = (0..3).map(|k| j[r][k] * y[3 + 3 * k + c]).sum();
            }
        }
        out
    }
}

pub fn pack_tangent(s: &State3, m: &[[f64; 3]; 3]) -> [f64; 12] {
    let mut y = [0.0; 12];
    y[..3].copy_from_slice(s);
    for r in 0..3 {
        for c in 0..3 {
            y[3 + 3 * r + c] = m[r][c];
        }
    }
    y
}

pub fn unpack_tangent(y: &[f64; 12]) -> (State3, [[f64; 3]; 3]) {
    let mut m = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            m[r][c] = y[3 + 3 * r + c];
        }
    }
    ([y[0], y[1], y[2]], m)
}

pub fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}
