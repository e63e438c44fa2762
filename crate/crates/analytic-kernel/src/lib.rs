//! Closed forms of the first-order homoclinic expansion of the extended Lorenz
//! system, with an adaptive quadrature engine that reproduces each of them.

pub mod closed;
pub mod general;
pub mod quadrature;
pub mod series;

pub use closed::{
    a1_exact, butterfly_curve_prediction, eps_of_beta, first_order_correction, homogeneous_pair, melnikov_deficit, melnikov_integrand,
    melnikov_limit, split_integrals_exact, surface_slope, x0_jet, z1, zeroth_order_series, zeroth_order_series_dot,
    Correction, FirstOrderPoint, HomogeneousPair, Jet, KernelError, K,
};
pub use general::{general_melnikov, GeneralModel};
pub use quadrature::{QuadError, QuadResult, Quadrature};
pub use series::{forcings, separatrix_slope, variation_coefficients, SlopeReport};
