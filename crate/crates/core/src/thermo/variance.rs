use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{irreducible_component, period};
use crate::linalg::{compensated_sum, perron, SparseMatrix};
use crate::potential::{higher_block_recode, CylinderPotential};

use super::measure::MarkovMeasure;
use super::transfer::{covariance_sequence, spectral_gap, TransferOperator};

/// Bring a measure and an observable to a common range-2 presentation.
pub fn prepare_observable(m: &MarkovMeasure, psi: &CylinderPotential) -> Result<(MarkovMeasure, CylinderPotential)> {
    let g = m.graph();
    psi.validate(&g)?;
    if psi.range() <= 2 {
        return Ok((m.clone(), psi.clone()));
    }
    let rec = higher_block_recode(&g, psi)?;
    Ok((m.lift(&rec)?, rec.potential))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum VarianceMethod {
    GreenKubo,
    LinearResponse,
    Empirical { n: usize, replicas: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum VarianceDetail {
    GreenKubo {
        period: usize,
        /// Number of `p`-step covariance terms summed.
        truncation: usize,
        rho_p_step: f64,
        var_psi_p: f64,
        tail_bound: f64,
    },
    LinearResponse {
        step_coarse: f64,
        step_fine: f64,
        raw_coarse: f64,
        raw_fine: f64,
    },
    Empirical {
        n: usize,
        replicas: usize,
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarianceEstimate {
    pub sigma2: f64,
    pub standard_error: Option<f64>,
    pub detail: VarianceDetail,
}

pub const GREEN_KUBO_TAIL: f64 = 1e-12;
pub const LINEAR_RESPONSE_STEPS: (f64, f64) = (1e-2, 1e-3);
const MAX_GREEN_KUBO_TERMS: usize = 1_000_000;

pub fn asymptotic_variance(
    m: &MarkovMeasure,
    psi: &CylinderPotential,
    method: VarianceMethod,
) -> Result<VarianceEstimate> {
    let (m, psi) = prepare_observable(m, psi)?;
    match method {
        VarianceMethod::GreenKubo => green_kubo(&m, &psi),
        VarianceMethod::LinearResponse => linear_response(&m, &psi),
        VarianceMethod::Empirical { n, replicas, seed } => {
            let (sigma2, se) = crate::stochastics::empirical_variance(&m, &psi, n, replicas, seed)?;
            Ok(VarianceEstimate {
                sigma2,
                standard_error: Some(se),
                detail: VarianceDetail::Empirical { n, replicas, seed },
            })
        }
    }
}

/// `(1/p) [Var(psi_p) + 2 sum_{n >= 1} Cov(psi_p, psi_p o sigma^{np})]`.
fn green_kubo(m: &MarkovMeasure, psi: &CylinderPotential) -> Result<VarianceEstimate> {
    const OP: &str = "asymptotic_variance";
    let g = m.graph();
    let comp = irreducible_component(&g, OP)?;
    let p = period(&g, &comp)?;
    let gap = spectral_gap(&TransferOperator::from_measure(m)?)?;
    let rho_p = gap.rho_p_step;
    let grouped = |cov: &[f64], base: usize| -> f64 {
        compensated_sum((0..p).flat_map(|i| (0..p).map(move |j| (i, j))).map(|(i, j)| {
            let d = (base + j) as isize - i as isize;
            cov[d.unsigned_abs()]
        }))
    };
    let head = covariance_sequence(m, psi, psi, p);
    let var_psi_p = grouped(&head, 0).max(0.0);
    let truncation = if var_psi_p <= GREEN_KUBO_TAIL || rho_p == 0.0 {
        0
    } else if rho_p >= 1.0 - 1e-12 {
        return Err(Error::degenerate(OP, "no spectral gap for the p-step operator"));
    } else {
        ((GREEN_KUBO_TAIL / var_psi_p).ln() / rho_p.ln()).ceil().max(0.0) as usize
    };
    let terms = (truncation + m.len() + 2).min(MAX_GREEN_KUBO_TERMS);
    let cov = covariance_sequence(m, psi, psi, terms * p + p);
    let sum = compensated_sum((1..=terms).map(|n| grouped(&cov, n * p)));
    let sigma2 = (var_psi_p + 2.0 * sum) / p as f64;
    Ok(VarianceEstimate {
        sigma2,
        standard_error: None,
        detail: VarianceDetail::GreenKubo {
            period: p,
            truncation: terms,
            rho_p_step: rho_p,
            var_psi_p,
            tail_bound: var_psi_p * rho_p.powi(terms as i32),
        },
    })
}

/// `log rho(P_uv e^{t psi(u, v)})`: the log-moment generating function of
/// Birkhoff sums of `psi` under `m`.
pub fn log_moment_generating(m: &MarkovMeasure, psi: &CylinderPotential, t: f64) -> Result<f64> {
    let rows = m
        .rows
        .iter()
        .enumerate()
        .map(|(u, r)| {
            r.iter()
                .map(|tr| (tr.to, tr.prob * (t * psi.edge_value(u, tr.to)).exp()))
                .collect()
        })
        .collect();
    Ok(perron(&SparseMatrix::new(m.len(), rows), "linear_response")?
        .lambda
        .ln())
}

fn linear_response(m: &MarkovMeasure, psi: &CylinderPotential) -> Result<VarianceEstimate> {
    let (h1, h2) = LINEAR_RESPONSE_STEPS;
    let p0 = log_moment_generating(m, psi, 0.0)?;
    let second = |h: f64| -> Result<f64> {
        let up = log_moment_generating(m, psi, h)?;
        let down = log_moment_generating(m, psi, -h)?;
        Ok(((up - p0) + (down - p0)) / (h * h))
    };
    let d1 = second(h1)?;
    let d2 = second(h2)?;
    let ratio = (h1 / h2).powi(2);
    let sigma2 = d2 + (d2 - d1) / (ratio - 1.0);
    Ok(VarianceEstimate {
        sigma2,
        standard_error: None,
        detail: VarianceDetail::LinearResponse {
            step_coarse: h1,
            step_fine: h2,
            raw_coarse: d1,
            raw_fine: d2,
        },
    })
}
