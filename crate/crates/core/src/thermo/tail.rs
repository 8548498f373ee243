use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{compensated_sum, spectral_radius, SparseMatrix};

use super::measure::MarkovMeasure;

/// Survival function of the first return time `tau_a = inf{k >= 1 : x_k = a}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReturnTail {
    pub vertex: usize,
    /// `mu[tau_a > n]` for `n = 0..=horizon`, stationary start.
    pub unconditional: Vec<f64>,
    /// `mu[tau_a > n | x_0 = a]` for `n = 1..=horizon`.
    pub conditioned: Vec<f64>,
    /// Ratio of the last two positive tail values (0 for a finite tail).
    pub theta: f64,
    /// Spectral radius of the taboo matrix.
    pub theta_exact: f64,
}

pub fn return_time_tail(m: &MarkovMeasure, a: usize, horizon: usize) -> Result<ReturnTail> {
    const OP: &str = "return_time_tail";
    if a >= m.len() {
        return Err(Error::DanglingVertex { id: a, count: m.len() });
    }
    if m.initial[a] <= 0.0 {
        return Err(Error::precondition(OP, format!("vertex {a} has zero stationary mass")));
    }
    let taboo = taboo_matrix(m, a);
    // x_n = x Q^n; the tail is x_n . 1.
    let mut x = m.initial.clone();
    let mut unconditional = vec![1.0];
    let mut y = vec![0.0; m.len()];
    y[a] = 1.0;
    let mut conditioned = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        x = taboo.vec_mul(&x);
        y = taboo.vec_mul(&y);
        unconditional.push(compensated_sum(x.iter().copied()));
        conditioned.push(compensated_sum(y.iter().copied()));
    }
    let theta_exact = spectral_radius(&taboo, OP)?;
    let positive: Vec<f64> = unconditional.iter().copied().filter(|&v| v > 0.0).collect();
    let theta = if positive.len() < unconditional.len() || positive.len() < 2 {
        0.0
    } else {
        positive[positive.len() - 1] / positive[positive.len() - 2]
    };
    if theta >= 1.0 {
        return Err(Error::degenerate(OP, format!("tail ratio {theta} is not below 1")));
    }
    Ok(ReturnTail {
        vertex: a,
        unconditional,
        conditioned,
        theta,
        theta_exact,
    })
}

/// `P` with column `a` removed.
pub fn taboo_matrix(m: &MarkovMeasure, a: usize) -> SparseMatrix {
    let rows = m
        .rows
        .iter()
        .map(|r| r.iter().filter(|t| t.to != a).map(|t| (t.to, t.prob)).collect())
        .collect();
    SparseMatrix::new(m.len(), rows)
}
