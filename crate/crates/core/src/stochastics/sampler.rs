use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::CylinderPotential;
use crate::thermo::measure::MarkovMeasure;
use crate::thermo::variance::prepare_observable;

/// Paths beyond this many stored symbols must be streamed.
pub const STORE_LIMIT: usize = 50_000_000;

/// Generator for replica `replica` of a run seeded with `seed`: ChaCha8
/// keyed by the seed, on stream `replica`.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// Inverse-CDF tables for a Markov measure.
#[derive(Clone, Debug)]
pub struct Sampler {
    initial_cdf: Vec<f64>,
    targets: Vec<Vec<usize>>,
    cdfs: Vec<Vec<f64>>,
}

fn cdf(probs: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = probs
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = f64::INFINITY;
    }
    out
}

fn draw(cdf: &[f64], u: f64) -> usize {
    if cdf.len() <= 16 {
        cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
    } else {
        cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
    }
}

impl Sampler {
    pub fn new(m: &MarkovMeasure) -> Result<Self> {
        m.validate()?;
        Ok(Sampler {
            initial_cdf: cdf(m.initial.iter().copied()),
            targets: m.rows.iter().map(|r| r.iter().map(|t| t.to).collect()).collect(),
            cdfs: m.rows.iter().map(|r| cdf(r.iter().map(|t| t.prob))).collect(),
        })
    }

    pub fn start<R: Rng>(&self, rng: &mut R) -> usize {
        draw(&self.initial_cdf, rng.gen::<f64>())
    }

    /// Index into the successor list of `u`.
    pub fn step_index<R: Rng>(&self, u: usize, rng: &mut R) -> usize {
        draw(&self.cdfs[u], rng.gen::<f64>())
    }

    pub fn step<R: Rng>(&self, u: usize, rng: &mut R) -> usize {
        self.targets[u][self.step_index(u, rng)]
    }

    /// Stationary path `x_0 .. x_n`.
    pub fn path<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        let mut x = self.start(rng);
        let mut out = Vec::with_capacity(n + 1);
        out.push(x);
        for _ in 0..n {
            x = self.step(x, rng);
            out.push(x);
        }
        out
    }
}

/// `replicas` independent stationary paths of `n` steps.
#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryBatch {
    pub n: usize,
    pub replicas: usize,
    pub seed: u64,
    pub paths: Vec<Vec<usize>>,
}

pub fn sample(m: &MarkovMeasure, n: usize, replicas: usize, seed: u64) -> Result<TrajectoryBatch> {
    if n == 0 || replicas == 0 {
        return Err(Error::precondition("sample", "n and R must be at least 1"));
    }
    if (n + 1).saturating_mul(replicas) > STORE_LIMIT {
        return Err(Error::precondition(
            "sample",
            format!("{replicas} paths of length {n} exceed the storage limit; use streamed summaries"),
        ));
    }
    let sampler = Sampler::new(m)?;
    let paths = (0..replicas)
        .into_par_iter()
        .map(|r| sampler.path(n, &mut replica_rng(seed, r as u64)))
        .collect();
    Ok(TrajectoryBatch {
        n,
        replicas,
        seed,
        paths,
    })
}

/// Per-replica statistics of the Birkhoff sums `psi_k`, `k = 0..=n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BirkhoffSummary {
    pub final_sum: f64,
    pub max_sum: f64,
    /// `#{1 <= k <= n : psi_k > 0}`.
    pub positive_steps: usize,
    /// `(1/n) sum` of the trapezoid rule applied to `k -> psi_k`.
    pub mean_path: f64,
    /// `max_{k >= LIL_START} psi_k / (sigma sqrt(2 k log log k))`.
    pub lil_max: Option<f64>,
    /// `#{k <= n : psi_k > c sigma sqrt(2 k log log k)}`.
    pub strassen_count: Option<usize>,
}

pub const LIL_START: usize = 1000;

/// Scaling used by the iterated-logarithm statistics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LilScale {
    pub sigma: f64,
    pub c: f64,
}

/// Per-step observable values aligned with a sampler's successor lists.
#[derive(Clone, Debug)]
struct StepValues {
    sampler: Sampler,
    values: Vec<Vec<f64>>,
}

impl StepValues {
    fn new(m: &MarkovMeasure, psi: &CylinderPotential) -> Result<Self> {
        let (m, psi) = prepare_observable(m, psi)?;
        let values = m
            .rows
            .iter()
            .enumerate()
            .map(|(u, r)| r.iter().map(|t| psi.edge_value(u, t.to)).collect())
            .collect();
        Ok(StepValues {
            sampler: Sampler::new(&m)?,
            values,
        })
    }

    fn run(&self, n: usize, rng: &mut ChaCha8Rng, lil: Option<LilScale>) -> BirkhoffSummary {
        let mut x = self.sampler.start(rng);
        let mut s = 0.0f64;
        let mut max_sum = 0.0f64;
        let mut positive_steps = 0;
        let mut area = 0.0f64;
        let mut lil_max = f64::NEG_INFINITY;
        let mut strassen = 0usize;
        for k in 1..=n {
            let i = self.sampler.step_index(x, rng);
            s += self.values[x][i];
            x = self.sampler.targets[x][i];
            if s > 0.0 {
                positive_steps += 1;
            }
            max_sum = max_sum.max(s);
            area += if k < n { s } else { 0.5 * s };
            if let Some(scale) = lil {
                if k >= 3 {
                    let kf = k as f64;
                    let envelope = scale.sigma * (2.0 * kf * kf.ln().ln()).sqrt();
                    if k >= LIL_START {
                        lil_max = lil_max.max(s / envelope);
                    }
                    if s > scale.c * envelope {
                        strassen += 1;
                    }
                }
            }
        }
        BirkhoffSummary {
            final_sum: s,
            max_sum,
            positive_steps,
            mean_path: area / n as f64,
            lil_max: lil.map(|_| lil_max),
            strassen_count: lil.map(|_| strassen),
        }
    }
}

/// Streamed Birkhoff-sum summaries of `psi` over `replicas` stationary
/// paths. Replica `r` follows the same random stream as in [`sample`].
pub fn birkhoff_summaries(
    m: &MarkovMeasure,
    psi: &CylinderPotential,
    n: usize,
    replicas: usize,
    seed: u64,
    lil: Option<LilScale>,
) -> Result<Vec<BirkhoffSummary>> {
    if n == 0 || replicas == 0 {
        return Err(Error::precondition("sample", "n and R must be at least 1"));
    }
    let steps = StepValues::new(m, psi)?;
    Ok((0..replicas)
        .into_par_iter()
        .map(|r| steps.run(n, &mut replica_rng(seed, r as u64), lil))
        .collect())
}

/// First return times `tau_a = inf{k >= 1 : x_k = a}` from stationary
/// starts, `None` when no return happens within `cap` steps.
pub fn return_times(m: &MarkovMeasure, a: usize, cap: usize, replicas: usize, seed: u64) -> Result<Vec<Option<usize>>> {
    if a >= m.len() {
        return Err(Error::DanglingVertex { id: a, count: m.len() });
    }
    let sampler = Sampler::new(m)?;
    Ok((0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, r as u64);
            let mut x = sampler.start(&mut rng);
            for k in 1..=cap {
                x = sampler.step(x, &mut rng);
                if x == a {
                    return Some(k);
                }
            }
            None
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families;
    use crate::thermo::measure::parry_measure;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let m = parry_measure(&families::golden_mean()).unwrap();
        let a = sample(&m, 50, 3, 11).unwrap();
        let b = sample(&m, 50, 3, 11).unwrap();
        assert_eq!(a.paths, b.paths);
        assert_ne!(a.paths[0], a.paths[1]);
    }

    #[test]
    fn cycle_is_deterministic() {
        let m = parry_measure(&families::cycle(3)).unwrap();
        let batch = sample(&m, 9, 4, 1).unwrap();
        for p in &batch.paths {
            for w in p.windows(2) {
                assert_eq!(w[1], (w[0] + 1) % 3);
            }
        }
    }

    #[test]
    fn streamed_sums_match_stored_paths() {
        let g = families::golden_mean();
        let m = parry_measure(&g).unwrap();
        let psi = CylinderPotential::indicator(&g, 0);
        let batch = sample(&m, 40, 5, 3).unwrap();
        let sums = birkhoff_summaries(&m, &psi, 40, 5, 3, None).unwrap();
        for (p, s) in batch.paths.iter().zip(&sums) {
            assert_eq!(psi.birkhoff_sum(p, 40), s.final_sum);
        }
    }

    #[test]
    fn symbol_frequencies() {
        let g = families::golden_mean();
        let m = parry_measure(&g).unwrap();
        let batch = sample(&m, 1_000_000, 1, 5).unwrap();
        let zeros = batch.paths[0][..1_000_000].iter().filter(|&&x| x == 0).count() as f64 / 1e6;
        let p0 = m.initial[0];
        // Correlated chain: allow a generous multiple of the i.i.d. error.
        assert!((zeros - p0).abs() < 10.0 * (p0 * (1.0 - p0) / 1e6).sqrt());
    }
}
