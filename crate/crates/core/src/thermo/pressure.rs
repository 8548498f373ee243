use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::graph::DirectedGraph;
use crate::potential::CylinderPotential;

use super::measure::pressure;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PressureSample {
    pub t: f64,
    /// `None` where the eigen-solver failed; the message is kept instead.
    pub pressure: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PressureCurve {
    pub samples: Vec<PressureSample>,
    /// Smallest second difference over consecutive valid samples.
    pub min_second_difference: f64,
    /// Largest third difference, a smoothness probe.
    pub max_third_difference: f64,
    pub convex: bool,
}

pub const CONVEXITY_TOLERANCE: f64 = 1e-9;

impl PressureCurve {
    pub fn valid(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.samples.iter().filter_map(|s| s.pressure.map(|p| (s.t, p)))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,P\n");
        for (t, p) in self.valid() {
            writeln!(s, "{t},{p}").unwrap();
        }
        s
    }
}

/// `P(t) = log rho(B_{phi + t psi})` on a grid of `t` values.
pub fn pressure_curve(
    g: &DirectedGraph,
    phi: &CylinderPotential,
    psi: &CylinderPotential,
    ts: &[f64],
) -> Result<PressureCurve> {
    phi.validate(g)?;
    psi.validate(g)?;
    let samples: Vec<PressureSample> = ts
        .par_iter()
        .map(|&t| {
            let value = phi.add_scaled(g, psi, t).and_then(|pot| pressure(g, &pot));
            match value {
                Ok(p) => PressureSample {
                    t,
                    pressure: Some(p),
                    error: None,
                },
                Err(e) => PressureSample {
                    t,
                    pressure: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let pts: Vec<(f64, f64)> = samples.iter().filter_map(|s| s.pressure.map(|p| (s.t, p))).collect();
    let second: Vec<f64> = pts
        .windows(3)
        .map(|w| {
            let (t0, p0) = w[0];
            let (t1, p1) = w[1];
            let (t2, p2) = w[2];
            let a = (p1 - p0) / (t1 - t0);
            let b = (p2 - p1) / (t2 - t1);
            (b - a) * (t2 - t0) / 2.0
        })
        .collect();
    let min_second_difference = second.iter().copied().fold(f64::INFINITY, f64::min);
    let max_third_difference = second.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0f64, f64::max);
    Ok(PressureCurve {
        convex: second.iter().all(|&d| d >= -CONVEXITY_TOLERANCE),
        samples,
        min_second_difference: if second.is_empty() { 0.0 } else { min_second_difference },
        max_third_difference,
    })
}

/// `n + 1` equally spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}
