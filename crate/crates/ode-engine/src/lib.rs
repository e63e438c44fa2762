//! Extended Lorenz normal form: vector field, parameter conversions,
//! a 9th order dense-output integrator, plane events and saddle spectra.

pub mod export;
pub mod field;
pub mod params;
pub mod rk;
pub mod saddle;
mod tableau;

pub use export::{to_json, write_csv, Trajectory};
pub use field::{det3, jacobian, nfy_field, pack_tangent, reflect, unpack_tangent, Nfy, NfyTangent, State3};
pub use params::{classical_to_extended, sst_to_nfy, ExtendedParams, ParamError, SystemParams};
pub use rk::{integrate, solve, Crossing, DenseStep, Direction, Flow, OdeError, OdeFailure, OdeOptions, Rhs, Solution, StepView, Stats};
pub use saddle::{equilibrium_analysis, SaddleData, RESONANCE_GAP};

/// Integrate the normal form.
pub fn integrate_nfy(s0: State3, p: &SystemParams, t0: f64, t1: f64, opts: &OdeOptions) -> Result<Trajectory, OdeFailure<3>> {
    integrate(&Nfy(*p), t0, s0, t1, opts)
}

/// Tangent-flow result: the augmented solution and the final fundamental matrix.
#[derive(Debug, Clone)]
pub struct TangentRun {
    pub solution: Solution<12>,
    pub state: State3,
    pub matrix: [[f64; 3]; 3],
}

pub fn integrate_with_tangent(
    s0: State3,
    m0: [[f64; 3]; 3],
    p: &SystemParams,
    t0: f64,
    t1: f64,
    opts: &OdeOptions,
) -> Result<TangentRun, OdeFailure<12>> {
    let mut o = *opts;
    if o.escape_dims == 0 {
        o.escape_dims = 3;
    }
    let solution = integrate(&NfyTangent(*p), t0, pack_tangent(&s0, &m0), t1, &o)?;
    let (state, matrix) = unpack_tangent(&solution.y);
    Ok(TangentRun { solution, state, matrix })
}

/// Crossings of the plane `Z = level` with `Ż` of the requested sign along a dense trajectory.
pub fn plane_crossings(traj: &Trajectory, p: &SystemParams, level: f64, dir: Direction) -> Vec<Crossing<3>> {
    let sys = Nfy(*p);
    let mut out = Vec::new();
    for d in &traj.dense {
        let y1 = d.eval(d.t1());
        let mut k = d.k.clone();
        let mut view = StepView::from_dense(&sys, d, y1, &mut k);
        out.extend(view.crossings(2, level, dir));
    }
    out
}

/// Crossings of the section `Z = β/α`.
pub fn section_crossings(traj: &Trajectory, p: &SystemParams, dir: Direction) -> Vec<Crossing<3>> {
    plane_crossings(traj, p, p.beta / p.alpha, dir)
}
