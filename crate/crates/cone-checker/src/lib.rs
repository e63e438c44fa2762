//! Return map near a symmetric homoclinic butterfly, the Lorenz-attractor
//! parameter wedge, and sampled checks of the invariant-cone inequalities.

mod cones;
mod error;
mod map;
mod model;

pub use cones::*;
pub use error::ConeError;
pub use map::{build_chart, return_map, return_on_fiber, Fiber, ReturnConfig, ReturnPoint};
pub use model::*;
