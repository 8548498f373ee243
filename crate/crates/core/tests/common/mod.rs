#![allow(dead_code)]

use num_bigint::BigUint;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use spr_shift_core::graph::{families, BouquetRule, DirectedGraph, GraphDescription};
use spr_shift_core::pliss::{hyperbolic_eigenvalues, return_matrix, CocycleOrbit};

pub fn corpus() -> Vec<(&'static str, DirectedGraph)> {
    let bouquet = |rule, n| DirectedGraph::build(&GraphDescription::bouquet(rule, n)).unwrap();
    vec![
        ("golden_mean", families::golden_mean()),
        ("full_shift_2", families::full_shift(2)),
        ("full_shift_3", families::full_shift(3)),
        ("cycle_3", families::cycle(3)),
        ("bipartite_square", families::bipartite_square()),
        (
            "tadpole",
            DirectedGraph::from_edges(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2), (1, 1)]).unwrap(),
        ),
        ("bouquet_m1", bouquet(BouquetRule::CeilPow2OverNsq { m: 1 }, 12)),
        ("bouquet_m3", bouquet(BouquetRule::CeilPow2OverNsq { m: 3 }, 10)),
        ("ruette", bouquet(BouquetRule::Ruette, 16)),
    ]
}

/// Closed walks at `a` of length `n` and those avoiding `a` in between,
/// by explicit depth-first enumeration with edge multiplicities.
pub fn enumerate_loops(g: &DirectedGraph, a: usize, n: usize) -> (BigUint, BigUint) {
    fn walk(
        g: &DirectedGraph,
        a: usize,
        at: usize,
        left: usize,
        avoided: bool,
        acc: &mut (BigUint, BigUint),
        weight: &BigUint,
    ) {
        if left == 0 {
            if at == a {
                acc.0 += weight;
                if avoided {
                    acc.1 += weight;
                }
            }
            return;
        }
        for &v in g.successors(at) {
            let w = weight * g.multiplicity(at, v);
            let still = avoided && (v != a || left == 1);
            walk(g, a, v, left - 1, still, acc, &w);
        }
    }
    let mut acc = (BigUint::from(0u32), BigUint::from(0u32));
    walk(g, a, a, n, true, &mut acc, &BigUint::from(1u32));
    acc
}

/// Random invertible 2x2 cocycle on a periodic orbit whose return matrix
/// has real eigenvalues of distinct moduli away from 1.
pub fn random_cocycle(rng: &mut ChaCha8Rng, max_period: usize) -> CocycleOrbit {
    loop {
        let q = rng.gen_range(1..=max_period);
        let matrices: Vec<[f64; 4]> = (0..q)
            .map(|_| loop {
                let m: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
                if (m[0] * m[3] - m[1] * m[2]).abs() > 0.2 {
                    break m;
                }
            })
            .collect();
        let orbit = CocycleOrbit::Matrix { matrices };
        let ms = orbit.matrices().unwrap();
        if hyperbolic_eigenvalues(&return_matrix(&ms, 0)).is_ok() {
            return orbit;
        }
    }
}

/// Largest `chi` for which the Pesin constant of the orbit is finite.
pub fn critical_chi(orbit: &CocycleOrbit) -> f64 {
    let ms = orbit.matrices().unwrap();
    let (s, u) = hyperbolic_eigenvalues(&return_matrix(&ms, 0)).unwrap();
    (-s.abs().ln()).min(u.abs().ln()) / ms.len() as f64
}
