use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::potential::{higher_block_recode, CylinderPotential};
use crate::thermo::measure::{equilibrium_measure, parry_measure};
use crate::thermo::variance::{asymptotic_variance, VarianceMethod};

use super::checks::DEGENERATE_SIGMA;
use super::report::{SampleInfo, StatReport};

pub const SHARP_RATIO_WINDOW: f64 = 0.05;
pub const SHARP_RATIO_TOLERANCE: f64 = 0.05;
pub const VALIDATION_SLACK: f64 = 0.05;
pub const VALIDATION_REFINEMENT: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErgodicityPoint {
    pub t: f64,
    /// `|mu(psi) - nu_t(psi)|`.
    pub delta: f64,
    /// `h(mu) - h(nu_t)`.
    pub entropy_defect: f64,
    /// `delta / sqrt(2 sigma^2 entropy_defect)`, when defined.
    pub sharp_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErgodicityScan {
    pub sigma2: f64,
    /// Fitted constant in `delta <= K sqrt(entropy_defect)`.
    pub k_fit: f64,
    pub points: Vec<ErgodicityPoint>,
    pub reports: Vec<StatReport>,
}

/// Compare the maximal entropy measure with the equilibrium states of
/// `t psi` along a grid of `t`.
pub fn effective_ergodicity_scan(g: &DirectedGraph, psi: &CylinderPotential, ts: &[f64]) -> Result<ErgodicityScan> {
    const OP: &str = "effective_ergodicity_scan";
    if ts.len() < 2 {
        return Err(Error::precondition(OP, "needs at least two t values"));
    }
    psi.validate(g)?;
    let rec = higher_block_recode(g, psi)?;
    let (g, psi) = (&rec.graph, &rec.potential);
    let mu = parry_measure(g)?;
    let sigma2 = asymptotic_variance(&mu, psi, VarianceMethod::GreenKubo)?
        .sigma2
        .max(0.0);
    let mean = mu.expectation(psi);
    let point = |t: f64| -> Result<ErgodicityPoint> {
        let eq = equilibrium_measure(g, &CylinderPotential::zero(g).add_scaled(g, psi, t)?)?;
        let delta = (mean - eq.measure.expectation(psi)).abs();
        let entropy_defect = mu.entropy - eq.measure.entropy;
        let denom = (2.0 * sigma2 * entropy_defect).sqrt();
        Ok(ErgodicityPoint {
            t,
            delta,
            entropy_defect,
            sharp_ratio: (denom > 0.0).then(|| delta / denom),
        })
    };
    let points: Vec<ErgodicityPoint> = ts.par_iter().map(|&t| point(t)).collect::<Result<_>>()?;
    let mut sorted_ts = ts.to_vec();
    sorted_ts.sort_by(f64::total_cmp);
    let refined: Vec<f64> = sorted_ts
        .windows(2)
        .flat_map(|w| {
            (0..VALIDATION_REFINEMENT).map(move |i| w[0] + (w[1] - w[0]) * i as f64 / VALIDATION_REFINEMENT as f64)
        })
        .chain(sorted_ts.last().copied())
        .collect();
    let check: Vec<ErgodicityPoint> = refined.par_iter().map(|&t| point(t)).collect::<Result<_>>()?;

    let ratio = |p: &ErgodicityPoint| {
        if p.entropy_defect > 1e-14 {
            p.delta / p.entropy_defect.sqrt()
        } else {
            0.0
        }
    };
    let k_fit = points.iter().map(ratio).fold(0.0, f64::max);
    let meta = SampleInfo {
        n: ts.len(),
        replicas: 0,
        seed: 0,
    };
    let mut reports = Vec::new();
    let min_defect = check.iter().map(|p| p.entropy_defect).fold(f64::INFINITY, f64::min);
    reports.push(StatReport::new(
        "entropy_defect_nonnegative",
        (-min_defect).max(0.0),
        0.0,
        "h(mu) is maximal",
        1e-12,
        meta,
    ));
    if sigma2.sqrt() < DEGENERATE_SIGMA {
        let max_delta = check.iter().map(|p| p.delta).fold(0.0, f64::max);
        reports.push(StatReport::new(
            "delta_vanishes",
            max_delta,
            0.0,
            "zero variance",
            1e-10,
            meta,
        ));
    } else {
        let worst = check.iter().map(ratio).fold(0.0, f64::max);
        reports.push(
            StatReport::new(
                "entropy_gap_bound_excess",
                (worst / k_fit - 1.0).max(0.0),
                0.0,
                "delta <= K sqrt(h(mu) - h(nu_t)) on a refined grid",
                VALIDATION_SLACK,
                meta,
            )
            .with_note(format!("K = {k_fit}")),
        );
        for p in &points {
            if p.t != 0.0 && p.t.abs() <= SHARP_RATIO_WINDOW + 1e-12 {
                reports.push(StatReport::new(
                    format!("sharp_ratio_t={}", p.t),
                    p.sharp_ratio.unwrap_or(f64::NAN),
                    1.0,
                    "delta / sqrt(2 sigma^2 (h(mu) - h(nu_t))) -> 1",
                    SHARP_RATIO_TOLERANCE,
                    meta,
                ));
            }
        }
    }
    Ok(ErgodicityScan {
        sigma2,
        k_fit,
        points,
        reports,
    })
}
