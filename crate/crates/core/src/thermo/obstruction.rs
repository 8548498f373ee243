use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::potential::CylinderPotential;

pub const MAX_OBSTRUCTION_PERIOD: usize = 12;
pub const OBSTRUCTION_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicObstruction {
    /// One period, as the lexicographically least rotation.
    pub orbit: Vec<usize>,
    /// `psi_n(x) / n - mean`.
    pub obstruction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObstructionScan {
    pub max_period: usize,
    pub mean: f64,
    pub orbits: Vec<PeriodicObstruction>,
    pub max_abs: f64,
    pub vanishes: bool,
}

/// Primitive periodic orbits of period `1..=max_period`, each listed once.
pub fn periodic_orbits(g: &DirectedGraph, max_period: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for n in 1..=max_period {
        for s in 0..g.len() {
            let mut path = vec![s];
            extend(g, s, n, &mut path, &mut out);
        }
    }
    out
}

fn extend(g: &DirectedGraph, s: usize, n: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let last = *path.last().expect("nonempty");
    if path.len() == n {
        if g.has_edge(last, s) && is_least_primitive(path) {
            out.push(path.clone());
        }
        return;
    }
    for &v in g.successors(last) {
        if v >= s {
            path.push(v);
            extend(g, s, n, path, out);
            path.pop();
        }
    }
}

fn is_least_primitive(w: &[usize]) -> bool {
    let n = w.len();
    (1..n).all(|r| {
        let rotated = w[r..].iter().chain(&w[..r]);
        rotated.cmp(w.iter()) == std::cmp::Ordering::Greater
    })
}

/// Normalized periodic-orbit averages of `psi` against `mean`.
pub fn coboundary_obstruction_scan(
    g: &DirectedGraph,
    psi: &CylinderPotential,
    mean: f64,
    max_period: usize,
) -> Result<ObstructionScan> {
    psi.validate(g)?;
    if max_period > MAX_OBSTRUCTION_PERIOD {
        return Err(Error::precondition(
            "coboundary_obstruction_scan",
            format!("period bound {max_period} exceeds {MAX_OBSTRUCTION_PERIOD}"),
        ));
    }
    let orbits: Vec<PeriodicObstruction> = periodic_orbits(g, max_period)
        .into_iter()
        .map(|orbit| {
            let obstruction = psi.periodic_sum(&orbit) / orbit.len() as f64 - mean;
            PeriodicObstruction { orbit, obstruction }
        })
        .collect();
    let max_abs = orbits.iter().map(|o| o.obstruction.abs()).fold(0.0, f64::max);
    Ok(ObstructionScan {
        max_period,
        mean,
        vanishes: max_abs <= OBSTRUCTION_TOLERANCE,
        orbits,
        max_abs,
    })
}
