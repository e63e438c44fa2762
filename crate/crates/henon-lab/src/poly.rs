//! Polynomial maps of R³ without constant term, truncated at total degree 3.

use std::sync::OnceLock;

pub const DEG: u32 = 3;
pub const NM: usize = 19;

pub type Mono = [u32; 3];

fn table() -> &'static ([Mono; NM], [[[usize; 4]; 4]; 4]) {
    static T: OnceLock<([Mono; NM], [[[usize; 4]; 4]; 4])> = OnceLock::new();
    T.get_or_init(|| {
        let mut mons = Vec::with_capacity(NM);
        for d in 1..=DEG {
            for i in (0..=d).rev() {
                for j in (0..=d - i).rev() {
                    mons.push([i, j, d - i - j]);
                }
            }
        }
        let mut idx = [[[usize::MAX; 4]; 4]; 4];
        for (n, m) in mons.iter().enumerate() {
            idx[m[0] as usize][m[1] as usize][m[2] as usize] = n;
        }
        (mons.try_into().unwrap(), idx)
    })
}

pub fn monomials() -> &'static [Mono; NM] {
    &table().0
}

/// Index of a monomial of degree 1..=3.
pub fn idx(m: Mono) -> usize {
    let i = table().1[m[0] as usize][m[1] as usize][m[2] as usize];
    assert!(i != usize::MAX, "monomial {m:?} out of range");
    i
}

fn idx_opt(m: Mono) -> Option<usize> {
    if m.iter().sum::<u32>() > DEG || m.iter().sum::<u32>() == 0 {
        return None;
    }
    Some(table().1[m[0] as usize][m[1] as usize][m[2] as usize])
}

pub fn degree(i: usize) -> u32 {
    monomials()[i].iter().sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poly(pub [f64; NM]);

impl Default for Poly {
    fn default() -> Self {
        Poly([0.0; NM])
    }
}

impl Poly {
    pub fn var(k: usize) -> Self {
        let mut m = [0; 3];
        m[k] = 1;
        let mut p = Poly::default();
        p.0[idx(m)] = 1.0;
        p
    }

    pub fn coef(&self, m: Mono) -> f64 {
        self.0[idx(m)]
    }

    pub fn set(&mut self, m: Mono, v: f64) {
        self.0[idx(m)] = v;
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut r = *self;
        r.0.iter_mut().zip(o.0).for_each(|(a, b)| *a += b);
        r
    }

    pub fn scale(&self, s: f64) -> Poly {
        let mut r = *self;
        r.0.iter_mut().for_each(|a| *a *= s);
        r
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mons = monomials();
        let mut r = Poly::default();
        for (i, a) in self.0.iter().enumerate().filter(|(_, a)| **a != 0.0) {
            for (j, b) in o.0.iter().enumerate().filter(|(_, b)| **b != 0.0) {
                let (mi, mj) = (mons[i], mons[j]);
                if let Some(k) = idx_opt([mi[0] + mj[0], mi[1] + mj[1], mi[2] + mj[2]]) {
                    r.0[k] += a * b;
                }
            }
        }
        r
    }

    /// Partial derivative, split into its constant and polynomial parts.
    pub fn deriv(&self, k: usize) -> (f64, Poly) {
        let mons = monomials();
        let mut c = 0.0;
        let mut r = Poly::default();
        for (i, a) in self.0.iter().enumerate().filter(|(_, a)| **a != 0.0) {
            let m = mons[i];
            if m[k] == 0 {
                continue;
            }
            let mut d = m;
            d[k] -= 1;
            let v = a * m[k] as f64;
            match idx_opt(d) {
                Some(j) => r.0[j] += v,
                None => c += v,
            }
        }
        (c, r)
    }

    pub fn eval(&self, u: &[f64; 3]) -> f64 {
        monomials().iter().zip(self.0).map(|(m, a)| a * u[0].powi(m[0] as i32) * u[1].powi(m[1] as i32) * u[2].powi(m[2] as i32)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, a| m.max(a.abs()))
    }
}

/// Map `u ↦ (P₀(u), P₁(u), P₂(u))`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PolyMap(pub [Poly; 3]);

impl PolyMap {
    pub fn identity() -> Self {
        PolyMap([Poly::var(0), Poly::var(1), Poly::var(2)])
    }

    pub fn linear(m: &[[f64; 3]; 3]) -> Self {
        let mut r = PolyMap::default();
        for c in 0..3 {
            for k in 0..3 {
                r.0[c].0[k] = m[c][k];
            }
        }
        r
    }

    /// Linear part; the first three monomials are u₀, u₁, u₂.
    pub fn lin(&self) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for c in 0..3 {
            for k in 0..3 {
                m[c][k] = self.0[c].0[k];
            }
        }
        m
    }

    pub fn add(&self, o: &PolyMap) -> PolyMap {
        PolyMap([0, 1, 2].map(|c| self.0[c].add(&o.0[c])))
    }

    pub fn sub(&self, o: &PolyMap) -> PolyMap {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> PolyMap {
        PolyMap([0, 1, 2].map(|c| self.0[c].scale(s)))
    }

    /// `self ∘ q`.
    pub fn compose(&self, q: &PolyMap) -> PolyMap {
        let mons = monomials();
        let mut pw = [Poly::default(); NM];
        for (i, m) in mons.iter().enumerate() {
            let mut acc: Option<Poly> = None;
            for k in 0..3 {
                for _ in 0..m[k] {
                    acc = Some(match acc {
                        None => q.0[k],
                        Some(a) => a.mul(&q.0[k]),
                    });
                }
            }
            pw[i] = acc.unwrap();
        }
        let mut out = PolyMap::default();
        for c in 0..3 {
            for (i, a) in self.0[c].0.iter().enumerate().filter(|(_, a)| **a != 0.0) {
                out.0[c] = out.0[c].add(&pw[i].scale(*a));
            }
        }
        out
    }

    /// Lie derivative `Dself · v`.
    pub fn lie(&self, v: &PolyMap) -> PolyMap {
        let mut out = PolyMap::default();
        for c in 0..3 {
            for k in 0..3 {
                let (c0, d) = self.0[c].deriv(k);
                out.0[c] = out.0[c].add(&v.0[k].scale(c0)).add(&d.mul(&v.0[k]));
            }
        }
        out
    }

    /// Time-one map of the truncated field, by its Lie series.
    pub fn time_one(&self) -> PolyMap {
        let mut g = PolyMap::identity();
        let mut term = PolyMap::identity();
        for n in 1..60 {
            term = term.lie(self).scale(1.0 / n as f64);
            g = g.add(&term);
            if term.max_abs() < 1e-300 {
                break;
            }
        }
        g
    }

    /// Truncated inverse of a map whose linear part is the identity.
    pub fn inverse_near_identity(&self) -> PolyMap {
        let h = self.sub(&PolyMap::identity());
        let mut inv = PolyMap::identity();
        for _ in 0..(DEG + 2) {
            inv = PolyMap::identity().sub(&h.compose(&inv));
        }
        inv
    }

    pub fn eval(&self, u: &[f64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|c| self.0[c].eval(u))
    }

    /// Jacobian at `u`.
    pub fn jac(&self, u: &[f64; 3]) -> [[f64; 3]; 3] {
        let mut j = [[0.0; 3]; 3];
        for c in 0..3 {
            for k in 0..3 {
                let (c0, d) = self.0[c].deriv(k);
                j[c][k] = c0 + d.eval(u);
            }
        }
        j
    }

    /// Solve `self(u) = w` by Newton from `u = w`.
    pub fn solve(&self, w: &[f64; 3]) -> Option<[f64; 3]> {
        let mut u = *w;
        for _ in 0..60 {
            let f = self.eval(&u);
            let r = [f[0] - w[0], f[1] - w[1], f[2] - w[2]];
            let scale = w.iter().fold(1e-300_f64, |m, v| m.max(v.abs()));
            if r.iter().all(|v| v.abs() <= 1e-16 * scale) {
                return Some(u);
            }
            let j = nalgebra::Matrix3::from_fn(|a, b| self.jac(&u)[a][b]);
            let d = j.lu().solve(&nalgebra::Vector3::new(r[0], r[1], r[2]))?;
            for k in 0..3 {
                u[k] -= d[k];
            }
        }
        let f = self.eval(&u);
        let ok = (0..3).all(|k| (f[k] - w[k]).abs() <= 1e-12 * w.iter().fold(1e-300_f64, |m, v| m.max(v.abs())));
        ok.then_some(u)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, p| m.max(p.max_abs()))
    }
}
