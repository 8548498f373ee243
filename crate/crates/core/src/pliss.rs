//! Pliss points, tempered envelopes and optimal Pesin constants for scalar
//! observables and 2x2 linear cocycles over periodic orbits.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::serde_ext::extended_f64;

pub const BOUND_TOLERANCE: f64 = 1e-12;
/// Window multiplier: `n in [-3q, 3q]`, `k in [0, 3q]`.
pub const WINDOW_PERIODS: usize = 3;

/// Data carried along one period of a periodic orbit; the orbit measure is
/// uniform on its points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CocycleOrbit {
    Scalar {
        values: Vec<f64>,
    },
    /// `matrices[i]` maps the fiber at point `i` to the fiber at `i + 1`,
    /// row-major `[a, b, c, d]`.
    Matrix {
        matrices: Vec<[f64; 4]>,
    },
}

impl CocycleOrbit {
    pub fn period(&self) -> usize {
        match self {
            CocycleOrbit::Scalar { values } => values.len(),
            CocycleOrbit::Matrix { matrices } => matrices.len(),
        }
    }

    pub fn scalar(&self) -> Result<&[f64]> {
        match self {
            CocycleOrbit::Scalar { values } => Ok(values),
            _ => Err(Error::precondition("cocycle_orbit", "expected scalar values")),
        }
    }

    pub fn matrices(&self) -> Result<Vec<Matrix2<f64>>> {
        match self {
            CocycleOrbit::Matrix { matrices } => {
                let ms: Vec<Matrix2<f64>> = matrices.iter().map(|m| Matrix2::new(m[0], m[1], m[2], m[3])).collect();
                if ms.is_empty() {
                    return Err(Error::precondition("cocycle_orbit", "empty orbit"));
                }
                if let Some(i) = ms
                    .iter()
                    .position(|m| m.determinant().abs() < 1e-300 || !m.iter().all(|x| x.is_finite()))
                {
                    return Err(Error::precondition(
                        "cocycle_orbit",
                        format!("matrix {i} is not invertible"),
                    ));
                }
                Ok(ms)
            }
            _ => Err(Error::precondition("cocycle_orbit", "expected matrices")),
        }
    }
}

/// An orbit together with its total mass in an ensemble measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedOrbit {
    pub weight: f64,
    pub orbit: CocycleOrbit,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlissPoints {
    /// Indices `j` with `phi_k(T^j x) >= beta k` for all `k >= 0`.
    pub points: Vec<usize>,
    pub measure: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Pliss points of a periodic scalar sequence and the lower bound
/// `(int phi - beta - kappa ||phi - A||) / (A - beta)` on their measure.
pub fn pliss_points(values: &[f64], beta: f64, a: f64, kappa: f64) -> Result<PlissPoints> {
    const OP: &str = "pliss_points";
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::precondition(OP, "values must be finite and nonempty"));
    }
    if beta >= a {
        return Err(Error::precondition(OP, format!("beta = {beta} must be below A = {a}")));
    }
    let q = values.len();
    let qf = q as f64;
    let above = values.iter().filter(|&&v| v > a).count() as f64 / qf;
    if above > kappa + BOUND_TOLERANCE {
        return Err(Error::precondition(
            OP,
            format!("nu(phi > A) = {above} exceeds kappa = {kappa}"),
        ));
    }
    let mean = values.iter().sum::<f64>() / qf;
    let points: Vec<usize> = if mean < beta {
        Vec::new()
    } else {
        // S_{k+q} - (k+q) beta >= S_k - k beta, so k < q suffices.
        (0..q)
            .filter(|&j| {
                let mut s = 0.0;
                (1..q).all(|k| {
                    s += values[(j + k - 1) % q] - beta;
                    s >= -BOUND_TOLERANCE
                })
            })
            .collect()
    };
    let sup_dev = values.iter().map(|v| (v - a).abs()).fold(0.0, f64::max);
    let bound = (mean - beta - kappa * sup_dev) / (a - beta);
    let measure = points.len() as f64 / qf;
    Ok(PlissPoints {
        holds: measure >= bound - BOUND_TOLERANCE,
        points,
        measure,
        bound,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TemperedEnvelope {
    pub values: Vec<f64>,
    /// `max |log Pi(Tx) - log Pi(x)|`.
    pub c0: f64,
    pub factor: f64,
    /// Largest `nu(Pi_eps > t) / nu(Pi > t)` over jump points `t`.
    pub worst_ratio: f64,
    pub holds: bool,
}

/// `Pi_eps(x) = sup_n e^{-|n| eps} Pi(T^n x)` on a periodic orbit.
pub fn tempered_envelope(pi: &[f64], eps: f64) -> Result<TemperedEnvelope> {
    const OP: &str = "tempered_envelope";
    if eps <= 0.0 {
        return Err(Error::precondition(OP, "epsilon must be positive"));
    }
    if pi.is_empty() || pi.iter().any(|&p| p <= 0.0 || p.is_nan()) {
        return Err(Error::precondition(OP, "Pi must be positive"));
    }
    let q = pi.len();
    let values: Vec<f64> = if pi.iter().any(|p| p.is_infinite()) {
        vec![f64::INFINITY; q]
    } else {
        (0..q)
            .map(|j| {
                (-(q as isize) + 1..q as isize)
                    .map(|n| {
                        (-(n.unsigned_abs() as f64) * eps).exp() * pi[(j as isize + n).rem_euclid(q as isize) as usize]
                    })
                    .fold(0.0, f64::max)
            })
            .collect()
    };
    let c0 = (0..q)
        .map(|j| {
            let d = pi[(j + 1) % q].ln() - pi[j].ln();
            if d.is_nan() {
                0.0
            } else {
                d.abs()
            }
        })
        .fold(0.0, f64::max);
    let factor = 4.0 * (c0 / eps).max(1.0);
    let (worst_ratio, holds) = tail_comparison(&[(1.0, pi.to_vec(), values.clone())], factor);
    Ok(TemperedEnvelope {
        values,
        c0,
        factor,
        worst_ratio,
        holds,
    })
}

/// Check `nu(E > t) <= factor nu(P > t)` at every jump point for an
/// ensemble of `(weight, P, E)` orbits with uniform orbit measures.
fn tail_comparison(orbits: &[(f64, Vec<f64>, Vec<f64>)], factor: f64) -> (f64, bool) {
    let mut ts: Vec<f64> = orbits
        .iter()
        .flat_map(|(_, p, e)| p.iter().chain(e.iter()).copied())
        .filter(|t| t.is_finite())
        .collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mass = |t: f64, pick: fn(&(f64, Vec<f64>, Vec<f64>)) -> &Vec<f64>| -> f64 {
        orbits
            .iter()
            .map(|o| o.0 * pick(o).iter().filter(|&&v| v > t).count() as f64 / pick(o).len() as f64)
            .sum()
    };
    let mut worst = 0.0f64;
    let mut holds = true;
    for &t in &ts {
        let env = mass(t, |o| &o.2);
        let base = mass(t, |o| &o.1);
        if env > factor * base * (1.0 + 1e-12) + 1e-15 {
            holds = false;
        }
        if env > 0.0 {
            worst = worst.max(if base > 0.0 { env / base } else { f64::INFINITY });
        }
    }
    (worst, holds)
}

/// Eigen-splitting of a periodic 2x2 cocycle with per-step scalar
/// multipliers along each line.
#[derive(Clone, Debug, PartialEq)]
pub struct Splitting {
    pub lambda_s: f64,
    pub lambda_u: f64,
    /// Unit vectors spanning `E^s(x_i)` and `E^u(x_i)`.
    pub stable: Vec<Vector2<f64>>,
    pub unstable: Vec<Vector2<f64>>,
    /// `log ||A_i v|| for unit v in E^s(x_i)`.
    pub log_s: Vec<f64>,
    pub log_u: Vec<f64>,
}

fn eigenvector(m: &Matrix2<f64>, lambda: f64) -> Vector2<f64> {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let v1 = Vector2::new(b, lambda - a);
    let v2 = Vector2::new(lambda - d, c);
    let v = if v1.norm() >= v2.norm() { v1 } else { v2 };
    if v.norm() > 1e-300 {
        v.normalize()
    } else if (a - lambda).abs() <= (d - lambda).abs() {
        Vector2::new(1.0, 0.0)
    } else {
        Vector2::new(0.0, 1.0)
    }
}

/// Real eigenvalues of a 2x2 matrix ordered by modulus, refusing complex,
/// repeated-modulus or unit-modulus spectra.
pub fn hyperbolic_eigenvalues(m: &Matrix2<f64>) -> Result<(f64, f64)> {
    const OP: &str = "optimal_pesin_constant";
    let tr = m.trace();
    let det = m.determinant();
    let disc = tr * tr - 4.0 * det;
    if disc <= 0.0 {
        return Err(Error::precondition(
            OP,
            "return matrix has non-real or repeated eigenvalues",
        ));
    }
    let root = disc.sqrt();
    let (l1, l2) = if tr >= 0.0 {
        let big = (tr + root) / 2.0;
        (det / big, big)
    } else {
        let big = (tr - root) / 2.0;
        (det / big, big)
    };
    let (s, u) = if l1.abs() <= l2.abs() { (l1, l2) } else { (l2, l1) };
    if s.abs().ln().abs() < 1e-12 || u.abs().ln().abs() < 1e-12 || (s.abs() - u.abs()).abs() < 1e-12 * u.abs() {
        return Err(Error::precondition(OP, "return matrix has a unit-modulus eigenvalue"));
    }
    Ok((s, u))
}

pub fn return_matrix(ms: &[Matrix2<f64>], start: usize) -> Matrix2<f64> {
    let q = ms.len();
    (0..q).fold(Matrix2::identity(), |acc, i| ms[(start + i) % q] * acc)
}

pub fn splitting(ms: &[Matrix2<f64>]) -> Result<Splitting> {
    let q = ms.len();
    let r = return_matrix(ms, 0);
    let (lambda_s, lambda_u) = hyperbolic_eigenvalues(&r)?;
    let push = |v0: Vector2<f64>| -> (Vec<Vector2<f64>>, Vec<f64>) {
        let mut vs = Vec::with_capacity(q);
        let mut logs = Vec::with_capacity(q);
        let mut v = v0;
        for m in ms {
            vs.push(v);
            let w = m * v;
            logs.push(w.norm().ln());
            v = w.normalize();
        }
        (vs, logs)
    };
    let (stable, log_s) = push(eigenvector(&r, lambda_s));
    let (unstable, log_u) = push(eigenvector(&r, lambda_u));
    Ok(Splitting {
        lambda_s,
        lambda_u,
        stable,
        unstable,
        log_s,
        log_u,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PesinCertificate {
    pub chi: f64,
    pub epsilon: f64,
    /// `K_*` at each point of the orbit.
    #[serde(serialize_with = "crate::serde_ext::extended_f64_vec")]
    pub k_star: Vec<f64>,
    /// `(n, k)` ranges checked.
    pub window_n: (isize, isize),
    pub window_k: (usize, usize),
    pub stable_lines: Vec<[f64; 2]>,
    pub unstable_lines: Vec<[f64; 2]>,
    /// `e^{-eps} K_*(x) <= K_*(Tx) <= e^{eps} K_*(x)` along the orbit.
    pub tempered: bool,
    #[serde(with = "extended_f64")]
    pub max_k_star: f64,
}

/// `log K_*` at point `j` from the per-step log multipliers.
fn log_k_star_at(sp: &Splitting, j: usize, chi: f64, eps: f64) -> f64 {
    let q = sp.log_s.len() as isize;
    let w = WINDOW_PERIODS as isize * q;
    let idx = |i: isize| i.rem_euclid(q) as usize;
    let period_s: f64 = sp.log_s.iter().sum::<f64>() + chi * q as f64;
    let period_u: f64 = -sp.log_u.iter().sum::<f64>() + chi * q as f64;
    if period_s > 1e-12 || period_u > 1e-12 {
        return f64::INFINITY;
    }
    let mut best = f64::NEG_INFINITY;
    for n in -w..=w {
        let base = j as isize + n;
        let pen = -eps * n.unsigned_abs() as f64;
        let mut ls = 0.0;
        let mut lu = 0.0;
        best = best.max(pen);
        for k in 1..=w {
            ls += sp.log_s[idx(base + k - 1)];
            lu -= sp.log_u[idx(base - k)];
            let kc = chi * k as f64;
            best = best.max(ls.max(lu) + kc + pen);
        }
    }
    best
}

pub fn optimal_pesin_constant(orbit: &CocycleOrbit, chi: f64, eps: f64) -> Result<PesinCertificate> {
    const OP: &str = "optimal_pesin_constant";
    if eps < 0.0 || chi < 0.0 {
        return Err(Error::precondition(OP, "chi and epsilon must be nonnegative"));
    }
    let ms = orbit.matrices()?;
    let sp = splitting(&ms)?;
    let q = ms.len();
    let k_star: Vec<f64> = (0..q).map(|j| log_k_star_at(&sp, j, chi, eps).exp()).collect();
    let tempered = (0..q).all(|j| {
        let (a, b) = (k_star[j], k_star[(j + 1) % q]);
        if a.is_infinite() || b.is_infinite() {
            return a.is_infinite() && b.is_infinite();
        }
        let e = eps.exp() * (1.0 + 1e-12);
        b <= e * a && a <= e * b
    });
    let w = (WINDOW_PERIODS * q) as isize;
    Ok(PesinCertificate {
        chi,
        epsilon: eps,
        max_k_star: k_star.iter().copied().fold(0.0, f64::max),
        k_star,
        window_n: (-w, w),
        window_k: (0, w as usize),
        stable_lines: sp.stable.iter().map(|v| [v[0], v[1]]).collect(),
        unstable_lines: sp.unstable.iter().map(|v| [v[0], v[1]]).collect(),
        tempered,
    })
}

/// `K_*` at point `j` by bisection on `K`, checking every `(n, k)` in the
/// window with full matrix products and eigenvectors of the return map at
/// each point.
pub fn brute_force_k_star(orbit: &CocycleOrbit, j: usize, chi: f64, eps: f64) -> Result<f64> {
    let ms = orbit.matrices()?;
    let q = ms.len();
    let w = (WINDOW_PERIODS * q) as isize;
    let idx = |i: isize| i.rem_euclid(q as isize) as usize;
    let lines: Vec<(Vector2<f64>, Vector2<f64>)> = (0..q)
        .map(|i| {
            let r = return_matrix(&ms, i);
            let (s, u) = hyperbolic_eigenvalues(&r)?;
            Ok((eigenvector(&r, s), eigenvector(&r, u)))
        })
        .collect::<Result<_>>()?;
    let mut needed: Vec<(f64, f64)> = Vec::new();
    for n in -w..=w {
        let at = j as isize + n;
        let (vs, vu) = lines[idx(at)];
        let mut fwd = Matrix2::identity();
        let mut back = Matrix2::identity();
        for k in 0..=w {
            if k > 0 {
                fwd = ms[idx(at + k - 1)] * fwd;
                back *= ms[idx(at - k)];
            }
            let s_norm = (fwd * vs).norm();
            let inv = back.try_inverse().expect("invertible");
            let u_norm = (inv * vu).norm();
            needed.push((s_norm.max(u_norm), -chi * k as f64 + eps * n.unsigned_abs() as f64));
        }
    }
    let feasible = |k: f64| needed.iter().all(|&(norm, e)| norm <= k * e.exp());
    let mut hi = 1.0;
    while !feasible(hi) {
        hi *= 2.0;
        if hi > 1e300 {
            return Ok(f64::INFINITY);
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PesinBlockComparison {
    pub n0: usize,
    pub chi: f64,
    pub epsilon: f64,
    /// `max_{k <= n0} max(||A^k||, ||A^-k||) e^{chi k}` over the ensemble.
    pub c: f64,
    pub c0: f64,
    pub factor: f64,
    pub nu_pliss: f64,
    pub nu_not_pliss: f64,
    pub nu_not_block: f64,
    /// `P_{n0}` is empty, so the inequality holds trivially.
    pub vacuous: bool,
    pub holds: bool,
}

fn spectral_norm(m: &Matrix2<f64>) -> f64 {
    m.singular_values().max()
}

/// Compare the Pesin block `{Pi_eps <= C}` with the Pliss set `P_{n0}`.
pub fn pliss_set_to_block(ensemble: &[WeightedOrbit], n0: usize, chi: f64, eps: f64) -> Result<PesinBlockComparison> {
    const OP: &str = "pliss_set_to_block";
    if n0 == 0 || eps <= 0.0 || chi < 0.0 {
        return Err(Error::precondition(OP, "needs n0 >= 1, epsilon > 0, chi >= 0"));
    }
    let total: f64 = ensemble.iter().map(|o| o.weight).sum();
    if ensemble.is_empty() || ensemble.iter().any(|o| o.weight < 0.0) || total <= 0.0 {
        return Err(Error::precondition(
            OP,
            "weights must be nonnegative with positive total",
        ));
    }
    let mut c = 0.0f64;
    let mut log_norm_sup = 0.0f64;
    let mut data = Vec::with_capacity(ensemble.len());
    for o in ensemble {
        let ms = o.orbit.matrices()?;
        let q = ms.len();
        for i in 0..q {
            let m = ms[i];
            let inv = m.try_inverse().expect("invertible");
            log_norm_sup = log_norm_sup.max(spectral_norm(&m).ln()).max(spectral_norm(&inv).ln());
            let mut fwd = Matrix2::identity();
            let mut back = Matrix2::identity();
            for k in 0..=n0 {
                if k > 0 {
                    fwd = ms[(i + k - 1) % q] * fwd;
                    back *= ms[(i + q * k - k) % q];
                }
                let inv_back = back.try_inverse().expect("invertible");
                c = c.max(spectral_norm(&fwd).max(spectral_norm(&inv_back)) * (chi * k as f64).exp());
            }
        }
        data.push((o.weight / total, ms));
    }
    let c0 = chi + log_norm_sup;
    let factor = 4.0 * (c0 / eps).max(1.0);
    let mut nu_pliss = 0.0;
    let mut nu_not_block = 0.0;
    for (w, ms) in &data {
        let q = ms.len();
        let sp = splitting(ms)?;
        let qf = q as f64;
        let hyperbolic =
            sp.log_s.iter().sum::<f64>() + chi * qf <= 1e-12 && -sp.log_u.iter().sum::<f64>() + chi * qf <= 1e-12;
        let pi: Vec<f64> = (0..q)
            .map(|j| {
                if hyperbolic {
                    pesin_function(&sp, j, chi)
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        let env = tempered_envelope(&pi, eps)?;
        let lcm = q / gcd(q, n0) * n0;
        let in_pliss = |j: usize| -> bool {
            let mut ls = 0.0;
            let mut lu = 0.0;
            (1..=lcm).all(|k| {
                ls += sp.log_s[(j + k - 1) % q];
                lu -= sp.log_u[(j + q * lcm - k) % q];
                k % n0 != 0 || (ls + chi * k as f64 <= 1e-12 && lu + chi * k as f64 <= 1e-12)
            })
        };
        nu_pliss += w * (0..q).filter(|&j| in_pliss(j)).count() as f64 / qf;
        nu_not_block += w * env.values.iter().filter(|&&v| v > c * (1.0 + 1e-12)).count() as f64 / qf;
    }
    let nu_not_pliss = 1.0 - nu_pliss;
    let vacuous = nu_pliss == 0.0;
    Ok(PesinBlockComparison {
        n0,
        chi,
        epsilon: eps,
        c,
        c0,
        factor,
        nu_pliss,
        nu_not_pliss,
        nu_not_block,
        vacuous,
        holds: nu_not_block <= factor * nu_not_pliss + 1e-12,
    })
}

/// `Pi(x_j) = max(sup_k ||A^k|E^s|| e^{chi k}, sup_k ||A^-k|E^u|| e^{chi k})`.
fn pesin_function(sp: &Splitting, j: usize, chi: f64) -> f64 {
    let q = sp.log_s.len();
    let mut best = 0.0f64;
    let mut ls = 0.0;
    let mut lu = 0.0;
    for k in 1..=q {
        ls += sp.log_s[(j + k - 1) % q];
        lu -= sp.log_u[(j + q * k - k) % q];
        best = best.max(ls.max(lu) + chi * k as f64);
    }
    best.exp()
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(a: f64, d: f64) -> [f64; 4] {
        [a, 0.0, 0.0, d]
    }

    #[test]
    fn pliss_two_point_orbit() {
        let r = pliss_points(&[1.0, 0.0], 0.0, 1.0, 0.0).unwrap();
        assert_eq!(r.measure, 1.0);
        assert_eq!(r.bound, 0.5);
        assert!(r.holds);
        assert!(pliss_points(&[1.0], 1.0, 1.0, 0.0).is_err());
        let c = pliss_points(&[0.7; 3], 0.2, 0.7, 0.0).unwrap();
        assert_eq!(c.measure, 1.0);
        assert!(c.bound <= 1.0);
    }

    #[test]
    fn tempered_three_cycle() {
        let e1 = std::f64::consts::E;
        let env = tempered_envelope(&[1.0, e1, e1 * e1], 0.5).unwrap();
        // From point 0 the best is e^2 at n = -1: e^{1.5}.
        assert!((env.values[0] - 1.5f64.exp()).abs() < 1e-12);
        assert!((env.values[2] - e1 * e1).abs() < 1e-12);
        assert!((env.c0 - 2.0).abs() < 1e-12);
        assert!(env.holds);
        let flat = tempered_envelope(&[1.0, 1.2, 1.1], 1.0).unwrap();
        assert_eq!(flat.values, vec![1.0, 1.2, 1.1]);
    }

    #[test]
    fn diagonal_cocycle_has_unit_constant() {
        let chi: f64 = 0.3;
        let orbit = CocycleOrbit::Matrix {
            matrices: vec![diag((-2.0 * chi).exp(), (2.0 * chi).exp())],
        };
        let cert = optimal_pesin_constant(&orbit, chi, 0.1).unwrap();
        assert!((cert.k_star[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn alternating_cocycle_matches_oracle() {
        let chi: f64 = 0.2;
        let orbit = CocycleOrbit::Matrix {
            matrices: vec![
                diag((-chi).exp(), chi.exp()),
                diag((-3.0 * chi).exp(), (3.0 * chi).exp()),
            ],
        };
        let cert = optimal_pesin_constant(&orbit, 1.5 * chi, 0.05).unwrap();
        for j in 0..2 {
            let oracle = brute_force_k_star(&orbit, j, 1.5 * chi, 0.05).unwrap();
            assert!((cert.k_star[j] - oracle).abs() <= 1e-9 * oracle);
        }
        assert!(cert.tempered);
    }

    #[test]
    fn conjugated_hyperbolic_matrix() {
        let a = Matrix2::new(2.0, 1.0, 1.0, 1.0);
        let orbit = CocycleOrbit::Matrix {
            matrices: vec![[a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]]],
        };
        let cert = optimal_pesin_constant(&orbit, 0.5, 0.1).unwrap();
        let oracle = brute_force_k_star(&orbit, 0, 0.5, 0.1).unwrap();
        assert!((cert.k_star[0] - oracle).abs() <= 1e-9 * oracle);
    }

    #[test]
    fn rotation_is_refused() {
        let orbit = CocycleOrbit::Matrix {
            matrices: vec![[0.0, -1.0, 1.0, 0.0]],
        };
        assert!(optimal_pesin_constant(&orbit, 0.1, 0.1).is_err());
    }

    #[test]
    fn uniformly_hyperbolic_block() {
        let ensemble = vec![WeightedOrbit {
            weight: 1.0,
            orbit: CocycleOrbit::Matrix {
                matrices: vec![diag(0.25, 4.0)],
            },
        }];
        let r = pliss_set_to_block(&ensemble, 2, 0.5, 0.2).unwrap();
        assert_eq!(r.nu_pliss, 1.0);
        assert_eq!(r.nu_not_block, 0.0);
        assert!(r.holds && !r.vacuous);
    }

    #[test]
    fn neutral_stretch_ensemble() {
        let mut long = vec![diag(1.0, 1.0); 6];
        long.push(diag(0.01, 100.0));
        let ensemble = vec![
            WeightedOrbit {
                weight: 0.5,
                orbit: CocycleOrbit::Matrix {
                    matrices: vec![diag(0.5, 2.0)],
                },
            },
            WeightedOrbit {
                weight: 0.5,
                orbit: CocycleOrbit::Matrix {
                    matrices: long.to_vec(),
                },
            },
        ];
        let r = pliss_set_to_block(&ensemble, 1, 0.3, 0.5).unwrap();
        assert!(r.holds);
        assert!(r.nu_not_pliss > 0.0);
    }
}
