use crate::chart::SectionChart;
use crate::seed::{checked_saddle, seed_from, slaved_params};
use crate::FinderError;
use ode_engine::{solve, Direction, Flow, Nfy, OdeError, OdeOptions, State3, SystemParams};
use serde::{Deserialize, Serialize};

/// Returned (with the sign of `X`) when the separatrix escapes instead of returning.
pub const ESCAPE_SENTINEL: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootConfig {
    pub d0: f64,
    pub t_max: f64,
    pub beta_guard: f64,
    pub opts: OdeOptions,
}

impl Default for ShootConfig {
    fn default() -> Self {
        Self { d0: 1e-6, t_max: 200.0, beta_guard: 0.05, opts: OdeOptions { rtol: 1e-13, atol: 1e-16, ..Default::default() } }
    }
}

/// First downward crossing of `Z = β/α` by the unstable separatrix on `side`.
pub fn first_return(p: &SystemParams, side: f64, cfg: &ShootConfig) -> Result<(f64, State3), FinderError> {
    let s = checked_saddle(p)?;
    if !(cfg.d0 > 0.0 && cfg.d0 <= 1e-4) {
        return Err(FinderError::SeedDistance(cfg.d0));
    }
    let level = p.beta / p.alpha;
    let sol = solve(&Nfy(*p), 0.0, seed_from(&s, side, cfg.d0), cfg.t_max, &cfg.opts, |v| match v.crossings(2, level, Direction::Down).first() {
        Some(c) => Flow::StopAt(c.t),
        None => Flow::Continue,
    });
    match sol {
        Ok(s) if s.stopped_early => Ok((s.t, s.y)),
        Ok(_) => Err(FinderError::NoReturn { t_max: cfg.t_max }),
        Err(f) => Err(FinderError::Ode(f.error)),
    }
}

/// Signed chart coordinate `u` of the first return of the separatrix on `side`.
pub fn splitting_value(p: &SystemParams, chart: &SectionChart, side: f64, cfg: &ShootConfig) -> Result<f64, FinderError> {
    match first_return(p, side, cfg) {
        Ok((_, m)) => Ok(chart.to_chart([m[0], m[1]])?.u),
        Err(FinderError::Ode(OdeError::Escaped { .. })) => {
            // Re-run to learn the escape side.
            let s = checked_saddle(p)?;
            let o = cfg.opts;
            let f = solve(&Nfy(*p), 0.0, seed_from(&s, side, cfg.d0), cfg.t_max, &o, |_| Flow::Continue).unwrap_err();
            Ok(ESCAPE_SENTINEL * f.partial.y[0].signum())
        }
        Err(e) => Err(e),
    }
}

/// Splitting of the `X > 0` separatrix with `α` slaved to zero saddle value.
pub fn splitting_function(lambda: f64, beta: f64, cfg: &ShootConfig) -> Result<f64, FinderError> {
    if !(beta > 0.0 && beta <= cfg.beta_guard) {
        return Err(FinderError::BetaGuard(beta));
    }
    let p = slaved_params(lambda, beta)?;
    let chart = SectionChart::build(&p)?;
    splitting_value(&p, &chart, 1.0, cfg)
}
