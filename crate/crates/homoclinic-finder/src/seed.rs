use crate::FinderError;
use ode_engine::{equilibrium_analysis, SaddleData, State3, SystemParams};

/// The `α` at which the unstable eigenvalue equals `α`, so the saddle value vanishes.
pub fn alpha_for_zero_sigma(lambda: f64) -> f64 {
    // Same root as the unstable eigenvalue, written without cancellation for λ > 0.
    if lambda >= 0.0 {
        2.0 / (lambda + (lambda * lambda + 4.0).sqrt())
    } else {
        (-lambda + (lambda * lambda + 4.0).sqrt()) / 2.0
    }
}

/// Parameters on the zero saddle value line.
pub fn slaved_params(lambda: f64, beta: f64) -> Result<SystemParams, FinderError> {
    Ok(SystemParams::new(alpha_for_zero_sigma(lambda), lambda, beta)?)
}

pub fn checked_saddle(p: &SystemParams) -> Result<SaddleData, FinderError> {
    let s = equilibrium_analysis(p);
    if s.resonant {
        return Err(FinderError::Resonant { gap: (s.lambda1 - s.lambda2).abs() });
    }
    Ok(s)
}

/// Point at distance `d0` along the local unstable manifold, `side = +1` for the branch with `X > 0`.
pub fn unstable_seed(p: &SystemParams, side: f64, d0: f64) -> Result<State3, FinderError> {
    if !(d0 > 0.0 && d0 <= 1e-4) {
        return Err(FinderError::SeedDistance(d0));
    }
    let s = checked_saddle(p)?;
    Ok(seed_from(&s, side, d0))
}

pub(crate) fn seed_from(s: &SaddleData, side: f64, d0: f64) -> State3 {
    let x = side.signum() * d0 * s.eigvec_u[0];
    [x, side.signum() * d0 * s.eigvec_u[1], s.wu_quadratic * x * x]
}
