use homoclinic_finder::FinderError;
use ode_engine::OdeError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConeError {
    #[error(transparent)]
    Finder(#[from] FinderError),
    #[error("integration failed: {0}")]
    Ode(#[from] OdeError),
    #[error("point (u, v) = ({u:e}, {v}) did not return within t = {t_max}")]
    NoReturn { u: f64, v: f64, t_max: f64 },
    #[error("u = 0 lies on the stable manifold; the return map is undefined there")]
    OnStableManifold,
    #[error("saddle-value unfolding parameter {0} must lie in (0, 1)")]
    BadEps(f64),
    #[error("empty wedge for separatrix value {a}: no small mu satisfies the invariance bound")]
    EmptyWedge { a: f64 },
    #[error("no sign change while bracketing {what}")]
    NoBracket { what: &'static str },
    #[error("domain half-width {u_max:e} does not exceed the cusp strip {u_floor:e}")]
    DomainInsideCusp { u_max: f64, u_floor: f64 },
}
