use ode_engine::{OdeError, ParamError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FinderError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("stable eigenvalues collide (gap {gap:e}); leading direction undefined")]
    Resonant { gap: f64 },
    #[error("seed distance {0} outside (0, 1e-4]")]
    SeedDistance(f64),
    #[error("beta = {0} outside the guard (0, 0.05]")]
    BetaGuard(f64),
    #[error("integration failed: {0}")]
    Ode(#[from] OdeError),
    #[error("no return to the section within t = {t_max}")]
    NoReturn { t_max: f64 },
    #[error("point ({x}, {y}) lies beyond the end of the stable-manifold trace")]
    OffTrace { x: f64, y: f64 },
    #[error("stable-manifold trace parameter {xi} does not reach the section")]
    TraceEnded { xi: f64 },
    #[error("foot-point iteration did not converge")]
    FootNotConverged,
    #[error("no sign change of the splitting function on the expanded bracket")]
    NoBracket { scan: Vec<(f64, f64)> },
    #[error("secant iteration stalled at lambda = {lambda} with miss {miss:e}")]
    NotConverged { lambda: f64, miss: f64 },
    #[error("orbit enters the saddle along the strong stable direction")]
    StrongEntry,
    #[error("orbit did not reach the linear zone")]
    NoArrival,
}
