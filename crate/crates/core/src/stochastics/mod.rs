//! Sampling stationary Markov chains and checking limit laws of Birkhoff
//! sums against their exact or asymptotic references.

pub mod checks;
pub mod ergodicity;
pub mod report;
pub mod sampler;

pub use checks::{
    arcsine_check, clt_check, empirical_tail_check, fclt_check, laplace_check, ldp_empirical, lil_strassen_check,
    records_check, variance_from_summaries, Complex64,
};
pub use ergodicity::{effective_ergodicity_scan, ErgodicityScan};
pub use report::{all_pass, SampleInfo, StatReport};
pub use sampler::{birkhoff_summaries, return_times, sample, BirkhoffSummary, LilScale, Sampler, TrajectoryBatch};

use crate::error::Result;
use crate::potential::CylinderPotential;
use crate::thermo::measure::MarkovMeasure;

/// `Var(psi_n) / n` over `replicas` stationary paths, with standard error.
pub fn empirical_variance(
    m: &MarkovMeasure,
    psi: &CylinderPotential,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let summaries = birkhoff_summaries(m, psi, n, replicas, seed, None)?;
    Ok(variance_from_summaries(&summaries, n))
}
