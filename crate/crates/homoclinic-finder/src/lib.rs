//! Numerical location of the symmetric homoclinic butterfly of the extended
//! Lorenz normal form on its zero saddle value line.

pub mod chart;
mod error;
pub mod finder;
pub mod orbit;
pub mod seed;
pub mod split;

pub use chart::{ChartPoint, SectionChart};
pub use error::FinderError;
pub use finder::{curve_csv, find_butterfly, find_lambda, trace_bifurcation_curve, CurvePoint, CurveReport, FindConfig};
pub use orbit::{build_orbit, HomoclinicOrbit, OrbitSummary, LINEAR_RADIUS};
pub use seed::{alpha_for_zero_sigma, checked_saddle, slaved_params, unstable_seed};
pub use split::{first_return, splitting_function, splitting_value, ShootConfig, ESCAPE_SENTINEL};
