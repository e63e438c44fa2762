use crate::seed::{checked_saddle, seed_from};
use crate::split::ShootConfig;
use crate::FinderError;
use ode_engine::{solve, Direction, Flow, Nfy, SaddleData, State3, SystemParams, Trajectory};
use serde::{Deserialize, Serialize};

/// Radius of the ball around the origin where the flow is replaced by its linearisation.
pub const LINEAR_RADIUS: f64 = 1e-4;

/// The `X > 0` homoclinic loop; the other one is its reflection.
/// Time is shifted so that `Y` changes sign from `+` to `−` at `t = 0`.
#[derive(Debug, Clone)]
pub struct HomoclinicOrbit {
    pub params: SystemParams,
    pub saddle: SaddleData,
    pub samples: Trajectory,
    pub seed: State3,
    pub t_seed: f64,
    pub seed_distance: f64,
    pub t_entry: f64,
    pub entry: State3,
    /// Strong stable and unstable amplitudes of the entry point in the linear zone.
    pub tail_strong: f64,
    pub tail_unstable: f64,
    pub miss: f64,
    /// `(λ, miss)` for every splitting evaluation of the root search.
    pub iterations: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitSummary {
    pub alpha: f64,
    pub lambda: f64,
    pub beta: f64,
    pub miss: f64,
    pub t_seed: f64,
    pub t_entry: f64,
    pub seed_distance: f64,
    pub tail_strong: f64,
    pub tail_unstable: f64,
    pub entry: State3,
}

impl HomoclinicOrbit {
    pub fn summary(&self) -> OrbitSummary {
        OrbitSummary {
            alpha: self.params.alpha,
            lambda: self.params.lambda,
            beta: self.params.beta,
            miss: self.miss,
            t_seed: self.t_seed,
            t_entry: self.t_entry,
            seed_distance: self.seed_distance,
            tail_strong: self.tail_strong,
            tail_unstable: self.tail_unstable,
            entry: self.entry,
        }
    }

    /// State on the loop at any time; linear asymptotics outside the integrated span.
    pub fn state(&self, t: f64) -> State3 {
        let g = self.saddle.gamma;
        let p = &self.params;
        if t <= self.t_seed {
            let x = self.seed[0] * (g * (t - self.t_seed)).exp();
            return [x, g * x, self.saddle.wu_quadratic * x * x];
        }
        if t >= self.t_entry {
            let dt = t - self.t_entry;
            let b = self.tail_strong;
            let e = (-dt / g).exp();
            let k = p.beta * b * b / (p.alpha - 2.0 / g);
            return [b * e, -b / g * e, (self.entry[2] - k) * (-p.alpha * dt).exp() + k * e * e];
        }
        self.samples.eval(t).expect("inside the integrated span")
    }

    /// `(x, z)` along the loop, the coefficients entering the variational equations.
    pub fn x_z(&self, t: f64) -> (f64, f64) {
        let s = self.state(t);
        (s[0], s[2])
    }

    /// Time before which `|X| < level` on the incoming tail.
    pub fn time_below(&self, level: f64) -> f64 {
        self.t_seed + (level / self.seed[0].abs()).ln() / self.saddle.gamma
    }

    /// Time after which `|X| < level` on the outgoing tail.
    pub fn time_after(&self, level: f64) -> f64 {
        self.t_entry + self.saddle.gamma * (self.tail_strong.abs() / level).ln().max(0.0)
    }
}

/// Integrate the separatrix from its seed into the linear zone.
pub fn build_orbit(p: &SystemParams, cfg: &ShootConfig, miss: f64, iterations: Vec<(f64, f64)>) -> Result<HomoclinicOrbit, FinderError> {
    let saddle = checked_saddle(p)?;
    if !saddle.z_leading {
        return Err(FinderError::StrongEntry);
    }
    let seed = seed_from(&saddle, 1.0, cfg.d0);
    let sys = Nfy(*p);
    let norm = |y: &[f64; 3]| y.iter().map(|a| a * a).sum::<f64>().sqrt();
    // First pass: time of the peak of X.
    let mut far = false;
    let peak = solve(&sys, 0.0, seed, cfg.t_max, &cfg.opts, |v| {
        if norm(&v.y1) > 0.1 {
            far = true;
        }
        match v.crossings(1, 0.0, Direction::Down).first() {
            Some(c) if far => Flow::StopAt(c.t),
            _ => Flow::Continue,
        }
    })
    .map_err(|e| e.error)?;
    if !peak.stopped_early {
        return Err(FinderError::NoArrival);
    }
    let t_seed = -peak.t;
    let mut o = cfg.opts;
    o.keep_dense = true;
    let mut far = false;
    let samples = solve(&sys, t_seed, seed, t_seed + cfg.t_max, &o, |v| {
        let r1 = norm(&v.y1);
        if r1 > 0.1 {
            far = true;
        }
        if far && r1 < LINEAR_RADIUS {
            // Bisection on the dense output for the entry time.
            let (mut a, mut b) = (v.t0, v.t1());
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                if norm(&v.interpolate(m)) > LINEAR_RADIUS {
                    a = m;
                } else {
                    b = m;
                }
            }
            Flow::StopAt(b)
        } else {
            Flow::Continue
        }
    })
    .map_err(|e| e.error)?;
    if !samples.stopped_early {
        return Err(FinderError::NoArrival);
    }
    let entry = samples.y;
    let g = saddle.gamma;
    // (X, Y) = a (1, γ) + b (1, −1/γ)
    let det = -1.0 / g - g;
    let a = (entry[0] * (-1.0 / g) - entry[1]) / det;
    let b = (entry[1] - g * entry[0]) / det;
    if entry[2] <= 0.0 {
        return Err(FinderError::StrongEntry);
    }
    // |X|/Z must fall along the last decade of the integrated tail.
    let tail: Vec<f64> = samples.nodes.iter().filter(|n| norm(&n.1) < 10.0 * LINEAR_RADIUS && n.0 > 0.0).map(|n| n.1[0].abs() / n.1[2]).collect();
    if tail.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-9)) {
        return Err(FinderError::StrongEntry);
    }
    Ok(HomoclinicOrbit {
        params: *p,
        saddle,
        t_entry: samples.t,
        samples,
        seed,
        t_seed,
        seed_distance: cfg.d0,
        entry,
        tail_strong: b,
        tail_unstable: a,
        miss,
        iterations,
    })
}
