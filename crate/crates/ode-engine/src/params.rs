use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error, Serialize, Deserialize)]
pub enum ParamError {
    #[error("alpha must be positive and finite, got {0}")]
    Alpha(f64),
    #[error("non-finite parameter {0}")]
    NonFinite(&'static str),
    #[error("singular conversion: {0}")]
    Singular(&'static str),
    #[error("scale B must be positive, got {0}")]
    Scale(f64),
}

/// Parameters of `Ẋ = Y, Ẏ = X − λY − XZ − X³, Ż = −αZ + βX²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub alpha: f64,
    pub lambda: f64,
    pub beta: f64,
}

impl SystemParams {
    pub fn new(alpha: f64, lambda: f64, beta: f64) -> Result<Self, ParamError> {
        let p = Self { alpha, lambda, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !self.lambda.is_finite() {
            return Err(ParamError::NonFinite("lambda"));
        }
        if !self.beta.is_finite() {
            return Err(ParamError::NonFinite("beta"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(ParamError::Alpha(self.alpha));
        }
        Ok(())
    }

    /// True when `α < 1`, so the Z-direction is the leading stable one near `λ = 0`.
    pub fn z_leading(&self) -> bool {
        self.alpha < 1.0
    }

    /// Damping that makes the saddle value vanish for this `α`.
    pub fn zero_saddle_lambda(alpha: f64) -> f64 {
        1.0 / alpha - alpha
    }
}

/// Five-parameter extended Lorenz family `(α, β, γ, δ, λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtendedParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub lambda: f64,
}

/// Classical Lorenz `(σ, r, b)` in extended form.
pub fn classical_to_extended(sigma: f64, r: f64, b: f64) -> Result<ExtendedParams, ParamError> {
    if !(sigma.is_finite() && r.is_finite() && b.is_finite()) {
        return Err(ParamError::NonFinite("sigma, r or b"));
    }
    if sigma == 0.0 {
        return Err(ParamError::Singular("sigma = 0"));
    }
    if r == 1.0 {
        return Err(ParamError::Singular("r = 1"));
    }
    let g = sigma * (r - 1.0);
    Ok(ExtendedParams { alpha: b, beta: (2.0 * sigma - b) / g, gamma: g, delta: 1.0, lambda: sigma + 1.0 })
}

/// Rescale the `B`-normalised form to unit cubic coefficient.
pub fn sst_to_nfy(alpha: f64, lambda: f64, b: f64) -> Result<SystemParams, ParamError> {
    if !(b > 0.0) {
        return Err(ParamError::Scale(b));
    }
    SystemParams::new(alpha, lambda, alpha / b)
}
