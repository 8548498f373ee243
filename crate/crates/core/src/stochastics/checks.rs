use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::linalg::{pairwise_sum, perron, SparseMatrix};
use crate::potential::CylinderPotential;
use crate::thermo::measure::MarkovMeasure;
use crate::thermo::rate::{exact_ldp_tails, least_squares_slope, RateFunction};
use crate::thermo::tail::ReturnTail;
use crate::thermo::variance::prepare_observable;

use super::report::{SampleInfo, StatReport};
use super::sampler::{replica_rng, BirkhoffSummary, Sampler};

pub type Complex64 = nalgebra::Complex<f64>;

pub const ARCSINE_TOLERANCE: f64 = 0.02;
pub const RECORDS_TOLERANCE: f64 = 0.02;
pub const LAPLACE_TOLERANCE: f64 = 0.02;
pub const MOMENT_STANDARD_ERRORS: f64 = 5.0;
pub const TAIL_STANDARD_ERRORS: f64 = 3.0;
pub const LIL_BRACKET: (f64, f64) = (0.7, 1.3);
pub const STRASSEN_TOLERANCE: f64 = 0.1;
pub const MIN_LIL_LENGTH: usize = 10_000_000;
pub const LDP_RELATIVE_TOLERANCE: f64 = 0.1;
pub const LDP_ABSOLUTE_FLOOR: f64 = 1e-3;
/// Below this `sigma` the degenerate branch is taken.
pub const DEGENERATE_SIGMA: f64 = 1e-6;

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("valid parameters")
}

/// Critical value of the Kolmogorov-Smirnov statistic at level 1%.
pub fn ks_critical_1pct(samples: usize) -> f64 {
    1.6276 / (samples as f64).sqrt()
}

/// `sup_x |F_emp(x) - F(x)|` for samples sorted ascending.
pub fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let r = sorted.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let f = cdf(x);
        d = d.max((f - i as f64 / r).abs()).max((j as f64 / r - f).abs());
        i = j;
    }
    d
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn mean(v: &[f64]) -> f64 {
    pairwise_sum(v) / v.len() as f64
}

/// Gaussian moments `E Z^k`.
fn gaussian_moment(k: u32) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        (1..k).step_by(2).map(|j| j as f64).product()
    }
}

fn info(summaries: &[BirkhoffSummary], n: usize, seed: u64) -> SampleInfo {
    SampleInfo {
        n,
        replicas: summaries.len(),
        seed,
    }
}

/// `psi_n / sqrt(n)` concentrates at 0: every replica within `bound`.
pub fn concentration_check(summaries: &[BirkhoffSummary], n: usize, seed: u64, bound: f64) -> StatReport {
    let max = summaries
        .iter()
        .map(|s| s.final_sum.abs().max(s.max_sum.abs()) / (n as f64).sqrt())
        .fold(0.0, f64::max);
    StatReport::new(
        "zero_variance_concentration",
        max,
        0.0,
        "psi_n / sqrt(n) -> 0 for a zero-variance observable",
        bound,
        info(summaries, n, seed),
    )
}

/// Kolmogorov-Smirnov and moment checks of `psi_n / (sigma sqrt(n))`.
pub fn clt_check(
    summaries: &[BirkhoffSummary],
    n: usize,
    seed: u64,
    sigma: f64,
    degenerate_bound: f64,
) -> Vec<StatReport> {
    if sigma < DEGENERATE_SIGMA {
        return vec![concentration_check(summaries, n, seed, degenerate_bound)];
    }
    let meta = info(summaries, n, seed);
    let scale = sigma * (n as f64).sqrt();
    let z: Vec<f64> = summaries.iter().map(|s| s.final_sum / scale).collect();
    let r = z.len() as f64;
    let normal = std_normal();
    let ks = ks_distance(&sorted(z.clone()), |x| normal.cdf(x));
    let mut out = vec![StatReport::new(
        "clt_ks",
        ks,
        0.0,
        "standard normal law",
        ks_critical_1pct(z.len()),
        meta,
    )];
    for k in 1..=4u32 {
        let powers: Vec<f64> = z.iter().map(|x| x.powi(k as i32)).collect();
        let mk = gaussian_moment(k);
        let se = ((gaussian_moment(2 * k) - mk * mk) / r).sqrt();
        out.push(
            StatReport::new(
                format!("clt_moment_{k}"),
                mean(&powers),
                mk,
                format!("Gaussian moment E Z^{k}"),
                MOMENT_STANDARD_ERRORS * se,
                meta,
            )
            .with_standard_error(se),
        );
    }
    out
}

pub fn arcsine_cdf(s: f64) -> f64 {
    2.0 / std::f64::consts::PI * s.clamp(0.0, 1.0).sqrt().asin()
}

/// Law of the fraction of time `psi_k > 0` against the arcsine law.
pub fn arcsine_check(
    summaries: &[BirkhoffSummary],
    n: usize,
    seed: u64,
    sigma: f64,
    s_grid: &[f64],
) -> Result<Vec<StatReport>> {
    if sigma < DEGENERATE_SIGMA {
        return Err(Error::precondition("arcsine_check", "needs sigma > 0"));
    }
    let meta = info(summaries, n, seed);
    let d = sorted(summaries.iter().map(|s| s.positive_steps as f64 / n as f64).collect());
    let ecdf = |s: f64| d.partition_point(|&x| x <= s) as f64 / d.len() as f64;
    let mut out: Vec<StatReport> = s_grid
        .iter()
        .map(|&s| {
            StatReport::new(
                format!("arcsine_cdf_s={s}"),
                ecdf(s),
                arcsine_cdf(s),
                "2/pi arcsin(sqrt(s))",
                ARCSINE_TOLERANCE,
                meta,
            )
        })
        .collect();
    let sup = out.iter().map(|r| (r.estimate - r.reference).abs()).fold(0.0, f64::max);
    out.insert(
        0,
        StatReport::new(
            "arcsine_sup_deviation",
            sup,
            0.0,
            "arcsine law",
            ARCSINE_TOLERANCE,
            meta,
        ),
    );
    Ok(out)
}

/// `P[max_{k <= n} psi_k >= s sqrt(n)] = 2 (1 - Phi(s / sigma))`.
pub fn records_check(
    summaries: &[BirkhoffSummary],
    n: usize,
    seed: u64,
    sigma: f64,
    s_grid: &[f64],
) -> Result<Vec<StatReport>> {
    if sigma < DEGENERATE_SIGMA {
        return Err(Error::precondition("records_check", "needs sigma > 0"));
    }
    let meta = info(summaries, n, seed);
    let normal = std_normal();
    let root = (n as f64).sqrt();
    Ok(s_grid
        .iter()
        .map(|&s| {
            let hits = summaries.iter().filter(|x| x.max_sum >= s * root).count();
            StatReport::new(
                format!("records_s={s}"),
                hits as f64 / summaries.len() as f64,
                (2.0 * (1.0 - normal.cdf(s / sigma))).min(1.0),
                "half-normal tail sqrt(2/(pi sigma^2)) int_s^inf exp(-t^2/(2 sigma^2)) dt",
                RECORDS_TOLERANCE,
                meta,
            )
        })
        .collect())
}

/// Brownian functionals of the interpolated path: time average against
/// `N(0, 1/3)` and supremum against the law of `|N(0, 1)|`.
pub fn fclt_check(
    summaries: &[BirkhoffSummary],
    n: usize,
    seed: u64,
    sigma: f64,
    degenerate_bound: f64,
) -> Vec<StatReport> {
    if sigma < DEGENERATE_SIGMA {
        return vec![concentration_check(summaries, n, seed, degenerate_bound)];
    }
    let meta = info(summaries, n, seed);
    let scale = sigma * (n as f64).sqrt();
    let normal = std_normal();
    let crit = ks_critical_1pct(summaries.len());
    let avg = sorted(summaries.iter().map(|s| s.mean_path / scale * 3f64.sqrt()).collect());
    let sup = sorted(summaries.iter().map(|s| s.max_sum / scale).collect());
    vec![
        StatReport::new(
            "fclt_time_average_ks",
            ks_distance(&avg, |x| normal.cdf(x)),
            0.0,
            "int_0^1 B dt ~ N(0, 1/3)",
            crit,
            meta,
        ),
        StatReport::new(
            "fclt_supremum_ks",
            ks_distance(&sup, |x| if x <= 0.0 { 0.0 } else { 2.0 * normal.cdf(x) - 1.0 }),
            0.0,
            "sup_[0,1] B ~ |N(0, 1)|",
            crit,
            meta,
        ),
    ]
}

pub fn strassen_reference(c: f64) -> f64 {
    1.0 - (-4.0 * (c.powi(-2) - 1.0)).exp()
}

/// Iterated-logarithm bracket and Strassen occupation fraction.
pub fn lil_strassen_check(summaries: &[BirkhoffSummary], n: usize, seed: u64, c: f64) -> Result<Vec<StatReport>> {
    const OP: &str = "lil_strassen_check";
    if n < MIN_LIL_LENGTH {
        return Err(Error::precondition(OP, format!("n = {n} is below {MIN_LIL_LENGTH}")));
    }
    if !(0.0 < c && c < 1.0) {
        return Err(Error::precondition(OP, "needs 0 < c < 1"));
    }
    let lil: Vec<f64> = summaries.iter().filter_map(|s| s.lil_max).collect();
    let fractions: Vec<f64> = summaries
        .iter()
        .filter_map(|s| s.strassen_count)
        .map(|k| k as f64 / n as f64)
        .collect();
    if lil.len() != summaries.len() || lil.is_empty() {
        return Err(Error::precondition(
            OP,
            "summaries were computed without an iterated-logarithm scale",
        ));
    }
    let meta = info(summaries, n, seed);
    let (lo, hi) = LIL_BRACKET;
    Ok(vec![
        StatReport::new(
            "lil_running_max",
            mean(&lil),
            0.5 * (lo + hi),
            "limsup psi_k / (sigma sqrt(2 k log log k)) = 1",
            0.5 * (hi - lo),
            meta,
        )
        .with_note("mean over trajectories; log log convergence is slow"),
        StatReport::new(
            format!("strassen_fraction_c={c}"),
            mean(&fractions),
            strassen_reference(c),
            "1 - exp(-4 (c^-2 - 1))",
            STRASSEN_TOLERANCE,
            meta,
        )
        .with_note("finite-N surrogate: fraction averaged over trajectories"),
    ])
}

/// `E exp(z psi_n / sqrt(n))` against `exp(sigma^2 z^2 / 2)`.
pub fn laplace_check(
    summaries: &[BirkhoffSummary],
    n: usize,
    seed: u64,
    sigma2: f64,
    zs: &[Complex64],
) -> Vec<StatReport> {
    let meta = info(summaries, n, seed);
    let root = (n as f64).sqrt();
    zs.iter()
        .map(|&z| {
            let values: Vec<Complex64> = summaries.iter().map(|s| (z * s.final_sum / root).exp()).collect();
            let re = pairwise_sum(&values.iter().map(|v| v.re).collect::<Vec<_>>());
            let im = pairwise_sum(&values.iter().map(|v| v.im).collect::<Vec<_>>());
            let emp = Complex64::new(re, im) / values.len() as f64;
            let reference = (z * z * sigma2 / 2.0).exp();
            StatReport::new(
                format!("laplace_z={z}"),
                (emp - reference).norm(),
                0.0,
                "exp(sigma^2 z^2 / 2)",
                LAPLACE_TOLERANCE,
                meta,
            )
        })
        .collect()
}

/// `Var(psi_n) / n` over replicas, with its standard error.
pub fn variance_from_summaries(summaries: &[BirkhoffSummary], n: usize) -> (f64, f64) {
    let x: Vec<f64> = summaries.iter().map(|s| s.final_sum).collect();
    let r = x.len() as f64;
    let m = mean(&x);
    let c2: Vec<f64> = x.iter().map(|v| (v - m).powi(2)).collect();
    let c4: Vec<f64> = x.iter().map(|v| (v - m).powi(4)).collect();
    let var = pairwise_sum(&c2) / (r - 1.0);
    let m4 = mean(&c4);
    let se = ((m4 - var * var).max(0.0) / r).sqrt();
    (var / n as f64, se / n as f64)
}

/// Empirical survival of return times against the exact taboo tail.
pub fn empirical_tail_check(times: &[Option<usize>], seed: u64, exact: &ReturnTail, max_n: usize) -> Vec<StatReport> {
    let r = times.len() as f64;
    let meta = SampleInfo {
        n: max_n,
        replicas: times.len(),
        seed,
    };
    (1..=max_n.min(exact.unconditional.len() - 1))
        .map(|n| {
            let p = exact.unconditional[n];
            let survived = times.iter().filter(|t| t.is_none_or(|k| k > n)).count() as f64 / r;
            let se = (p * (1.0 - p) / r).sqrt();
            StatReport::new(
                format!("return_tail_n={n}"),
                survived,
                p,
                "taboo matrix p Q^n 1",
                TAIL_STANDARD_ERRORS * se,
                meta,
            )
            .with_standard_error(se)
        })
        .collect()
}

/// Slope of `(1/n) log mu[psi_n >= n a]` against `-I(a)`. Lattice-valued
/// observables use exact tails; others use importance sampling under the
/// tilted measure.
#[allow(clippy::too_many_arguments)]
pub fn ldp_empirical(
    m: &MarkovMeasure,
    psi: &CylinderPotential,
    rate: &RateFunction,
    a: f64,
    ns: &[usize],
    replicas: usize,
    seed: u64,
) -> Result<StatReport> {
    crate::thermo::rate::check_ldp_domain(rate, a)?;
    let reference = -rate.eval(a);
    let tolerance = (LDP_RELATIVE_TOLERANCE * reference.abs()).max(LDP_ABSOLUTE_FLOOR);
    let n_max = ns.iter().copied().max().unwrap_or(0);
    match exact_ldp_tails(m, psi, a, ns) {
        Ok(exact) => Ok(StatReport::new(
            format!("ldp_slope_a={a}"),
            exact.slope,
            reference,
            "-I(a) from the Legendre transform of the pressure",
            tolerance,
            SampleInfo {
                n: n_max,
                replicas: 0,
                seed,
            },
        )
        .with_note(format!("exact convolution on lattice 1/{}", exact.lattice))),
        Err(Error::Precondition { .. }) => {
            let (m, psi) = prepare_observable(m, psi)?;
            let t = rate.tilt_for(a);
            let log_probs = tilted_tail_estimates(&m, &psi, a, t, ns, replicas, seed)?;
            let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
            let correction = if a != 0.0 { 0.5 } else { 0.0 };
            let ys: Vec<f64> = ns
                .iter()
                .zip(&log_probs)
                .map(|(&n, lp)| lp + correction * (n as f64).ln())
                .collect();
            Ok(StatReport::new(
                format!("ldp_slope_a={a}"),
                least_squares_slope(&xs, &ys),
                reference,
                "-I(a) from the Legendre transform of the pressure",
                tolerance,
                SampleInfo {
                    n: n_max,
                    replicas,
                    seed,
                },
            )
            .with_note(format!("importance sampling at tilt t = {t}")))
        }
        Err(e) => Err(e),
    }
}

/// `log mu[psi_n >= n a]` at each `n`, sampling paths from the measure
/// tilted by `t psi` and reweighting by the exact likelihood ratio.
fn tilted_tail_estimates(
    m: &MarkovMeasure,
    psi: &CylinderPotential,
    a: f64,
    t: f64,
    ns: &[usize],
    replicas: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let g = m.graph();
    let tilted_matrix = SparseMatrix::new(
        m.len(),
        m.rows
            .iter()
            .enumerate()
            .map(|(u, r)| {
                r.iter()
                    .map(|tr| (tr.to, tr.prob * (t * psi.edge_value(u, tr.to)).exp()))
                    .collect()
            })
            .collect(),
    );
    let pf = perron(&tilted_matrix, "ldp_empirical")?;
    let nu = MarkovMeasure::from_transitions(&g, |u, v| {
        tilted_matrix.get(u, v) * pf.right[v] / (pf.lambda * pf.right[u])
    })?;
    let sampler = Sampler::new(&nu)?;
    let n_max = ns.iter().copied().max().unwrap_or(0);
    let log_ratio: Vec<Vec<f64>> = m
        .rows
        .iter()
        .zip(&nu.rows)
        .map(|(mr, nr)| mr.iter().zip(nr).map(|(x, y)| (x.prob / y.prob).ln()).collect())
        .collect();
    let values: Vec<Vec<f64>> = m
        .rows
        .iter()
        .enumerate()
        .map(|(u, r)| r.iter().map(|tr| psi.edge_value(u, tr.to)).collect())
        .collect();
    let weights: Vec<Vec<f64>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, r as u64);
            let mut x = sampler.start(&mut rng);
            let mut lw = (m.initial[x] / nu.initial[x]).ln();
            let mut s = 0.0;
            let mut out = Vec::with_capacity(ns.len());
            for k in 1..=n_max {
                let i = sampler.step_index(x, &mut rng);
                lw += log_ratio[x][i];
                s += values[x][i];
                x = m.rows[x][i].to;
                if ns.contains(&k) {
                    out.push(if s >= k as f64 * a - 1e-9 { lw.exp() } else { 0.0 });
                }
            }
            out
        })
        .collect();
    let mut sorted_ns: Vec<usize> = ns.to_vec();
    sorted_ns.sort_unstable();
    sorted_ns.dedup();
    Ok(ns
        .iter()
        .map(|n| {
            let j = sorted_ns.binary_search(n).expect("present");
            let col: Vec<f64> = weights.iter().map(|w| w[j]).collect();
            (pairwise_sum(&col) / replicas as f64).ln()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arcsine_spot_values() {
        assert!((arcsine_cdf(0.25) - 1.0 / 3.0).abs() < 1e-15);
        assert!((arcsine_cdf(0.5) - 0.5).abs() < 1e-15);
        assert_eq!(arcsine_cdf(1.0), 1.0);
    }

    #[test]
    fn strassen_values() {
        assert!((strassen_reference(0.5) - 0.999_993_856).abs() < 1e-8);
        assert!((strassen_reference(0.5f64.sqrt()) - (1.0 - (-4f64).exp())).abs() < 1e-12);
        assert!(strassen_reference(0.999_999) < 1e-5);
    }

    #[test]
    fn records_reference_at_sigma() {
        let normal = std_normal();
        assert!((2.0 * (1.0 - normal.cdf(1.0)) - 0.3173).abs() < 1e-4);
    }

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let normal = std_normal();
        let r = 1000;
        let q: Vec<f64> = (0..r)
            .map(|i| normal.inverse_cdf((i as f64 + 0.5) / r as f64))
            .collect();
        assert!(ks_distance(&q, |x| normal.cdf(x)) <= 0.5 / r as f64 + 1e-6);
    }

    #[test]
    fn gaussian_moments() {
        assert_eq!(gaussian_moment(4), 3.0);
        assert_eq!(gaussian_moment(8), 105.0);
        assert_eq!(gaussian_moment(3), 0.0);
    }
}
