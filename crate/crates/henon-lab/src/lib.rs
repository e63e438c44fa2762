//! Three-dimensional Hénon-like maps near a fixed point with multipliers `(+1, −1, −1)`:
//! spectra, degeneracy functionals, the reduction of the second iterate to a flow,
//! Lyapunov spectra and a scan for discrete Lorenz-like attractors.

mod coeffs;
mod error;
mod lyap;
mod map;
mod normal;
pub mod poly;
mod roots;
mod scan;

pub use coeffs::{eps4, psi_fn, Case, TaylorCoeffs, G_fn};
pub use error::HenonError;
pub use lyap::{lyapunov_spectrum, LyapunovConfig, LyapunovReport};
pub use map::*;
pub use normal::*;
pub use scan::*;
