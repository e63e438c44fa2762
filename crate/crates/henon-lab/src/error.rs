use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error, Serialize, Deserialize)]
pub enum HenonError {
    #[error("orbit left every bounded set at iterate {index}")]
    Diverged { index: usize },
    #[error("rho1 = {rho1} is not positive: no real time scale")]
    NoTimeScale { rho1: f64 },
    #[error("cubic degeneracy: G = {g} vanishes")]
    CubicDegenerate { g: f64 },
    #[error("a - b + c and a - c both vanish: codimension five or more")]
    Codimension5,
    #[error("the case requires {what} bounded away from zero, got {value}")]
    CaseMismatch { what: &'static str, value: f64 },
    #[error("normal-form solve failed: {0}")]
    Singular(&'static str),
    #[error("parameter inversion did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("integration failed: {0}")]
    Ode(String),
}
