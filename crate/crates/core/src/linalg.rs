//! Numerical kernels: deterministic summation, sparse nonnegative matrices,
//! Perron eigendata by shifted power iteration, and full spectra.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::graph::{strongly_connected_components, DirectedGraph};

/// Neumaier-compensated sum in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Pairwise sum with a fixed splitting tree; identical for any thread count.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 16 {
        return compensated_sum(values.iter().copied());
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    compensated_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

/// Row-compressed sparse matrix with nonnegative entries.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn new(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        assert_eq!(rows.len(), n);
        SparseMatrix { n, rows }
    }

    /// Adjacency matrix with multiplicities, optionally weighted per edge.
    pub fn from_graph(g: &DirectedGraph, weight: impl Fn(usize, usize) -> f64) -> Self {
        let rows = (0..g.len())
            .map(|u| {
                g.successors(u)
                    .iter()
                    .map(|&v| (v, g.multiplicity(u, v) as f64 * weight(u, v)))
                    .collect()
            })
            .collect();
        SparseMatrix { n: g.len(), rows }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, u: usize) -> &[(usize, f64)] {
        &self.rows[u]
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.rows[u].iter().find(|&&(w, _)| w == v).map_or(0.0, |&(_, x)| x)
    }

    /// `y = M x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| compensated_sum(r.iter().map(|&(v, a)| a * x[v])))
            .collect()
    }

    /// `y = x^T M`.
    pub fn vec_mul(&self, x: &[f64]) -> Vec<f64> {
        let mut parts: Vec<Vec<f64>> = vec![Vec::new(); self.n];
        for (u, r) in self.rows.iter().enumerate() {
            for &(v, a) in r {
                parts[v].push(x[u] * a);
            }
        }
        parts.into_iter().map(compensated_sum).collect()
    }

    /// Principal submatrix on `keep` (sorted), renumbered.
    pub fn restrict(&self, keep: &[usize]) -> SparseMatrix {
        let mut index = vec![usize::MAX; self.n];
        for (i, &v) in keep.iter().enumerate() {
            index[v] = i;
        }
        let rows = keep
            .iter()
            .map(|&u| {
                self.rows[u]
                    .iter()
                    .filter(|&&(v, _)| index[v] != usize::MAX)
                    .map(|&(v, a)| (index[v], a))
                    .collect()
            })
            .collect();
        SparseMatrix { n: keep.len(), rows }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (u, r) in self.rows.iter().enumerate() {
            for &(v, a) in r {
                m[(u, v)] += a;
            }
        }
        m
    }

    fn support_graph(&self) -> DirectedGraph {
        let edges: Vec<_> = self
            .rows
            .iter()
            .enumerate()
            .flat_map(|(u, r)| r.iter().filter(|e| e.1 > 0.0).map(move |&(v, _)| (u, v)))
            .collect();
        DirectedGraph::from_edges(self.n, &edges).expect("support graph is well formed")
    }
}

/// Leading eigendata of an irreducible nonnegative matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Perron {
    pub lambda: f64,
    /// Left eigenvector `l M = lambda l`, normalized with `l . r = 1`.
    pub left: Vec<f64>,
    /// Right eigenvector `M r = lambda r`, normalized to unit max entry.
    pub right: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

pub const POWER_TOLERANCE: f64 = 1e-12;
pub const POWER_MAX_ITERATIONS: usize = 100_000;

struct PowerRun {
    vector: Vec<f64>,
    iterations: usize,
    residual: f64,
    trace: Vec<f64>,
}

fn normalize_max(x: &mut [f64]) -> f64 {
    let m = x.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if m > 0.0 {
        x.iter_mut().for_each(|v| *v /= m);
    }
    m
}

/// Power iteration for `M + sI` from the all-ones vector. After the
/// residual drops below tolerance the iteration continues while it still
/// improves, so the returned vector is as accurate as rounding allows.
fn power_run(apply: impl Fn(&[f64]) -> Vec<f64>, n: usize, shift: f64) -> PowerRun {
    let mut x = vec![1.0; n];
    let mut trace = Vec::new();
    let mut best = f64::INFINITY;
    let mut converged_at = None;
    let mut stagnant = 0usize;
    let mut iterations = 0usize;
    while iterations < POWER_MAX_ITERATIONS {
        iterations += 1;
        let mx = apply(&x);
        let mut y: Vec<f64> = mx.iter().zip(&x).map(|(a, b)| a + shift * b).collect();
        normalize_max(&mut y);
        let residual = y.iter().zip(&x).fold(0.0f64, |a, (p, q)| a.max((p - q).abs()));
        x = y;
        if iterations.is_multiple_of(1000) || iterations < 16 {
            trace.push(residual);
        }
        if residual < best * (1.0 - 1e-3) {
            best = residual;
            stagnant = 0;
        } else {
            stagnant += 1;
        }
        if converged_at.is_none() && residual < POWER_TOLERANCE {
            converged_at = Some(iterations);
        }
        if let Some(at) = converged_at {
            if residual == 0.0 || stagnant >= 8 || iterations >= at + 2000 {
                break;
            }
        }
    }
    PowerRun {
        vector: x,
        iterations,
        residual: best,
        trace,
    }
}

/// Perron eigendata of an irreducible nonnegative matrix.
pub fn perron(m: &SparseMatrix, op: &'static str) -> Result<Perron> {
    let n = m.dim();
    if n == 0 {
        return Err(Error::degenerate(op, "empty matrix"));
    }
    let total: f64 = (0..n).map(|u| m.row(u).iter().map(|e| e.1).sum::<f64>()).sum();
    let shift = (total / n as f64).max(f64::MIN_POSITIVE);
    let r = power_run(|x| m.mul_vec(x), n, shift);
    let l = power_run(|x| m.vec_mul(x), n, shift);
    for run in [&r, &l] {
        if run.residual >= POWER_TOLERANCE && run.iterations >= POWER_MAX_ITERATIONS {
            return Err(Error::NoConvergence {
                op,
                iterations: run.iterations,
                residual: run.residual,
                trace: run.trace.clone(),
            });
        }
    }
    let right = r.vector;
    let mut left = l.vector;
    if right.iter().chain(&left).any(|&v| v <= 0.0) {
        return Err(Error::degenerate(
            op,
            "Perron vector has a zero entry; matrix is reducible",
        ));
    }
    let mr = m.mul_vec(&right);
    let lambda = dot(&left, &mr) / dot(&left, &right);
    let lr = dot(&left, &right);
    left.iter_mut().for_each(|v| *v /= lr);
    let residual = mr
        .iter()
        .zip(&right)
        .fold(0.0f64, |a, (p, q)| a.max((p - lambda * q).abs()))
        / lambda.max(f64::MIN_POSITIVE);
    Ok(Perron {
        lambda,
        left,
        right,
        iterations: r.iterations.max(l.iterations),
        residual,
    })
}

/// Spectral radius of a nonnegative matrix, reducible or not: the largest
/// Perron root over the irreducible diagonal blocks, 0 if nilpotent.
pub fn spectral_radius(m: &SparseMatrix, op: &'static str) -> Result<f64> {
    let support = m.support_graph();
    let mut rho = 0.0f64;
    for comp in strongly_connected_components(&support) {
        if comp.wandering {
            continue;
        }
        let block = m.restrict(&comp.vertices);
        rho = rho.max(perron(&block, op)?.lambda);
    }
    Ok(rho)
}

/// Whether the support of `m` has no cycle (so `m` is nilpotent).
pub fn is_nilpotent(m: &SparseMatrix) -> bool {
    strongly_connected_components(&m.support_graph())
        .iter()
        .all(|c| c.wandering)
}

/// All eigenvalues, sorted by decreasing modulus then decreasing real part.
pub fn spectrum(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let mut ev: Vec<Complex<f64>> = m.clone().complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| {
        b.norm()
            .partial_cmp(&a.norm())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.re.partial_cmp(&a.re).unwrap_or(std::cmp::Ordering::Equal))
    });
    ev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families;

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
        let w: Vec<f64> = (0..1000).map(|i| 0.1 * i as f64).collect();
        assert!((pairwise_sum(&w) - 49950.0).abs() < 1e-9);
    }

    #[test]
    fn perron_golden_mean() {
        let g = families::golden_mean();
        let a = SparseMatrix::from_graph(&g, |_, _| 1.0);
        let p = perron(&a, "test").unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((p.lambda - phi).abs() < 1e-14);
        assert!((dot(&p.left, &p.right) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn perron_periodic_cycle() {
        let a = SparseMatrix::from_graph(&families::cycle(5), |_, _| 1.0);
        let p = perron(&a, "test").unwrap();
        assert!((p.lambda - 1.0).abs() < 1e-14);
    }

    #[test]
    fn radius_of_reducible_and_nilpotent() {
        let g = DirectedGraph::from_edges(3, &[(0, 0), (0, 1), (1, 2), (2, 1)]).unwrap();
        let a = SparseMatrix::from_graph(&g, |_, _| 1.0);
        assert!((spectral_radius(&a, "test").unwrap() - 1.0).abs() < 1e-14);
        let chain = DirectedGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let c = SparseMatrix::from_graph(&chain, |_, _| 1.0);
        assert!(is_nilpotent(&c));
        assert_eq!(spectral_radius(&c, "test").unwrap(), 0.0);
    }

    #[test]
    fn spectrum_sorted_by_modulus() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 0.0]);
        let ev = spectrum(&m);
        assert!((ev[0].re - 1.618033988749895).abs() < 1e-12);
        assert!((ev[1].re + 0.618033988749895).abs() < 1e-12);
    }
}
