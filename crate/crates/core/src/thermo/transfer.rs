use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{compensated_sum, dot, spectrum};
use crate::potential::CylinderPotential;

use super::measure::MarkovMeasure;

/// Normalized transfer operator of a Markov measure, acting on functions of
/// the first coordinate: `(L f)(x) = sum_{y -> x} g(y, x) f(y)` with
/// `g(y, x) = p_y P_yx / p_x`, so that `sum_y g(y, x) = 1`.
#[derive(Clone, Debug)]
pub struct TransferOperator {
    pub matrix: DMatrix<f64>,
    /// `lambda = e^P` of the unnormalized operator (1 for a bare measure).
    pub lambda: f64,
    /// Eigenfunction of the unnormalized operator.
    pub eigenfunction: Vec<f64>,
    /// Eigenmeasure weights of the unnormalized operator.
    pub eigenmeasure: Vec<f64>,
    /// `max_x |sum_y g(y, x) - 1|`.
    pub normalization_defect: f64,
}

impl TransferOperator {
    pub fn from_measure(m: &MarkovMeasure) -> Result<Self> {
        let n = m.len();
        if m.initial.iter().any(|&p| p <= 0.0) {
            return Err(Error::degenerate("transfer_operator", "measure has a null state"));
        }
        let mut matrix = DMatrix::zeros(n, n);
        for (y, row) in m.rows.iter().enumerate() {
            for t in row {
                matrix[(t.to, y)] += m.initial[y] * t.prob / m.initial[t.to];
            }
        }
        let normalization_defect = (0..n)
            .map(|x| (compensated_sum(matrix.row(x).iter().copied()) - 1.0).abs())
            .fold(0.0f64, f64::max);
        let (lambda, eigenfunction, eigenmeasure) = match &m.eigen {
            Some(e) => (e.lambda, e.left.clone(), e.right.clone()),
            None => (1.0, m.initial.clone(), vec![1.0; n]),
        };
        Ok(TransferOperator {
            matrix,
            lambda,
            eigenfunction,
            eigenmeasure,
            normalization_defect,
        })
    }
}

/// Spectral data of a normalized operator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralGap {
    /// Leading eigenvalue (1 after normalization).
    pub leading: f64,
    /// Largest modulus off the unit circle, per step.
    pub rho: f64,
    /// Eigenvalues on the unit circle, `(re, im)`.
    pub peripheral: Vec<(f64, f64)>,
    /// Number of peripheral eigenvalues: the period of the chain.
    pub period: usize,
    /// Gap of the `p`-step operator, `rho^p`.
    pub rho_p_step: f64,
    pub eigenvalues: Vec<(f64, f64)>,
}

pub const PERIPHERAL_TOLERANCE: f64 = 1e-9;

pub fn spectral_gap(op: &TransferOperator) -> Result<SpectralGap> {
    let ev = spectrum(&op.matrix);
    if ev.is_empty() {
        return Err(Error::degenerate("spectral_gap", "empty operator"));
    }
    let leading = ev[0].norm();
    let (peripheral, rest): (Vec<&Complex<f64>>, Vec<&Complex<f64>>) = ev
        .iter()
        .partition(|z| (z.norm() - leading).abs() <= PERIPHERAL_TOLERANCE);
    let rho = rest.iter().map(|z| z.norm()).fold(0.0f64, f64::max) / leading;
    let period = peripheral.len();
    Ok(SpectralGap {
        leading,
        rho,
        peripheral: peripheral.iter().map(|z| (z.re, z.im)).collect(),
        period,
        rho_p_step: rho.powi(period as i32),
        eigenvalues: ev.iter().map(|z| (z.re, z.im)).collect(),
    })
}

/// `Cov(phi, psi o sigma^d)` for `d = 0..=max_lag`, exactly from matrix
/// powers. Both observables must have range at most 2. The constant mode is
/// projected out after every step so tiny covariances keep full relative
/// accuracy.
pub fn covariance_sequence(
    m: &MarkovMeasure,
    phi: &CylinderPotential,
    psi: &CylinderPotential,
    max_lag: usize,
) -> Vec<f64> {
    let n = m.len();
    let m_phi = m.expectation(phi);
    let m_psi = m.expectation(psi);
    let pair = |u: usize, v: usize, f: &CylinderPotential| f.edge_value(u, v);
    let c0 = compensated_sum(m.rows.iter().enumerate().flat_map(|(u, r)| {
        r.iter()
            .map(move |t| m.initial[u] * t.prob * (pair(u, t.to, phi) - m_phi) * (pair(u, t.to, psi) - m_psi))
    }));
    let mut out = vec![c0];
    if max_lag == 0 {
        return out;
    }
    // F(w) = E[psi(x_0, x_1) | x_0 = w] - m_psi; G(v) = sum_u p_u P_uv (phi(u, v) - m_phi).
    let mut f: Vec<f64> = (0..n)
        .map(|w| compensated_sum(m.rows[w].iter().map(|t| t.prob * pair(w, t.to, psi))) - m_psi)
        .collect();
    let mut parts: Vec<Vec<f64>> = vec![Vec::new(); n];
    for (u, r) in m.rows.iter().enumerate() {
        for t in r {
            parts[t.to].push(m.initial[u] * t.prob * (pair(u, t.to, phi) - m_phi));
        }
    }
    let g: Vec<f64> = parts.into_iter().map(compensated_sum).collect();
    for d in 1..=max_lag {
        if d > 1 {
            f = m.apply(&f);
        }
        let mean = dot(&m.initial, &f);
        f.iter_mut().for_each(|x| *x -= mean);
        out.push(dot(&g, &f));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families;
    use crate::thermo::measure::parry_measure;

    #[test]
    fn full_shift_is_rank_one() {
        let op = TransferOperator::from_measure(&parry_measure(&families::full_shift(2)).unwrap()).unwrap();
        let gap = spectral_gap(&op).unwrap();
        assert!((gap.leading - 1.0).abs() < 1e-12);
        assert!(gap.rho < 1e-12);
        assert!(op.normalization_defect < 1e-12);
    }

    #[test]
    fn golden_mean_gap() {
        let op = TransferOperator::from_measure(&parry_measure(&families::golden_mean()).unwrap()).unwrap();
        let gap = spectral_gap(&op).unwrap();
        let s5 = 5f64.sqrt();
        assert!((gap.rho - (s5 - 1.0) / (s5 + 1.0)).abs() < 1e-12);
        assert_eq!(gap.period, 1);
    }

    #[test]
    fn cycle_is_all_peripheral() {
        let op = TransferOperator::from_measure(&parry_measure(&families::cycle(3)).unwrap()).unwrap();
        let gap = spectral_gap(&op).unwrap();
        assert_eq!(gap.period, 3);
        assert_eq!(gap.rho, 0.0);
        assert_eq!(gap.rho_p_step, 0.0);
    }

    #[test]
    fn golden_mean_correlations_decay_at_gap_rate() {
        let g = families::golden_mean();
        let m = parry_measure(&g).unwrap();
        let ind = CylinderPotential::indicator(&g, 0);
        let cov = covariance_sequence(&m, &ind, &ind, 50);
        let s5 = 5f64.sqrt();
        let rho = (s5 - 1.0) / (s5 + 1.0);
        for n in 10..50 {
            assert!(((cov[n + 1] / cov[n]).abs() - rho).abs() < 1e-9, "lag {n}");
        }
    }
}
