use crate::rk::Solution;
use serde::Serialize;
use std::io::{self, Write};

/// Trajectory of the three-dimensional system.
pub type Trajectory = Solution<3>;

pub fn write_csv<W: Write, const N: usize>(sol: &Solution<N>, names: &[&str], mut w: W) -> io::Result<()> {
    write!(w, "t")?;
    for n in names.iter().take(N) {
        write!(w, ",{n}")?;
    }
    writeln!(w)?;
    for (t, y) in &sol.nodes {
        write!(w, "{t:.17e}")?;
        for v in y {
            write!(w, ",{v:.17e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct StepMeta {
    t0: f64,
    h: f64,
    stages: usize,
}

#[derive(Serialize)]
struct Export<'a> {
    t: Vec<f64>,
    y: Vec<&'a [f64]>,
    steps: Vec<StepMeta>,
    accepted: usize,
    rejected: usize,
    evals: usize,
    stopped_early: bool,
}

pub fn to_json<const N: usize>(sol: &Solution<N>) -> serde_json::Result<String> {
    let e = Export {
        t: sol.nodes.iter().map(|n| n.0).collect(),
        y: sol.nodes.iter().map(|n| &n.1[..]).collect(),
        steps: sol.dense.iter().map(|d| StepMeta { t0: d.t0, h: d.h, stages: d.k.len() }).collect(),
        accepted: sol.stats.accepted,
        rejected: sol.stats.rejected,
        evals: sol.stats.evals,
        stopped_early: sol.stopped_early,
    };
    serde_json::to_string(&e)
}
