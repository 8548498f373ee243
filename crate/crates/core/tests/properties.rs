mod common;

use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spr_shift_core::census::{bouquet_census, convergence_radii, count_loops};
use spr_shift_core::graph::{
    period, spectral_decomposition, strongly_connected_components, BouquetRule, DirectedGraph, GraphDescription,
};
use spr_shift_core::pliss::{optimal_pesin_constant, pliss_points, tempered_envelope};
use spr_shift_core::potential::admissible_words;
use spr_shift_core::spr::vere_jones_test;
use spr_shift_core::thermo::{pressure, MarkovMeasure};
use spr_shift_core::CylinderPotential;

/// Irreducible graph: a Hamiltonian cycle plus extra edges, multiplicities
/// up to 3.
fn irreducible_graph() -> impl Strategy<Value = DirectedGraph> {
    (1usize..=6)
        .prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec((0..n, 0..n), 0..=2 * n),
                prop::collection::vec(1u64..=3, n),
            )
        })
        .prop_map(|(n, extra, mult)| {
            let mut edges: Vec<Vec<u64>> = (0..n).map(|u| vec![u as u64, ((u + 1) % n) as u64, mult[u]]).collect();
            for (u, v) in extra {
                if v != (u + 1) % n && !edges.iter().any(|e| e[0] == u as u64 && e[1] == v as u64) {
                    edges.push(vec![u as u64, v as u64]);
                }
            }
            let desc = GraphDescription {
                vertices: (0..n).collect(),
                edges,
                ..Default::default()
            };
            DirectedGraph::build(&desc).unwrap()
        })
}

fn graph_with_potential() -> impl Strategy<Value = (DirectedGraph, Vec<f64>, Vec<f64>)> {
    irreducible_graph().prop_flat_map(|g| {
        let n = g.len();
        (
            Just(g),
            prop::collection::vec(-2.0f64..2.0, n * n),
            prop::collection::vec(0.05f64..1.0, n * n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn renewal_identity_on_random_graphs(g in irreducible_graph()) {
        let c = count_loops(&g, 0, 40).unwrap();
        prop_assert!(c.renewal_holds());
        for n in 1..=8 {
            let (z, zs) = common::enumerate_loops(&g, 0, n);
            prop_assert_eq!(&z, c.z_at(n));
            prop_assert_eq!(&zs, c.zstar_at(n));
        }
    }

    #[test]
    fn period_divides_every_loop_length(g in irreducible_graph()) {
        let comp = &strongly_connected_components(&g)[0];
        let p = period(&g, comp).unwrap();
        let c = count_loops(&g, 0, 36).unwrap();
        for n in 1..=36 {
            if n % p != 0 {
                prop_assert!(c.z_at(n) == &BigUint::from(0u32));
            }
        }
        let gcd = (1..=36).filter(|&n| c.z_at(n) > &BigUint::from(0u32)).fold(0, num_integer_gcd);
        prop_assert_eq!(gcd, p);
    }

    #[test]
    fn loop_counts_are_supermultiplicative(g in irreducible_graph()) {
        let comp = &strongly_connected_components(&g)[0];
        let p = period(&g, comp).unwrap();
        let c = count_loops(&g, 0, 16 * p).unwrap();
        for m in 1..=8 {
            for n in 1..=8 {
                prop_assert!(c.z_at(p * (m + n)) >= &(c.z_at(p * m) * c.z_at(p * n)));
            }
        }
    }

    #[test]
    fn cyclic_classes_advance_along_edges(g in irreducible_graph()) {
        let comp = &strongly_connected_components(&g)[0];
        let d = spectral_decomposition(&g, comp).unwrap();
        for u in 0..g.len() {
            for &v in g.successors(u) {
                let (i, j) = (d.class_of(u).unwrap(), d.class_of(v).unwrap());
                prop_assert_eq!(j, (i + 1) % d.period);
            }
        }
    }

    #[test]
    fn descriptions_round_trip(g in irreducible_graph()) {
        let text = g.to_description().to_json();
        let back = DirectedGraph::build(&GraphDescription::from_json(&text).unwrap()).unwrap();
        prop_assert_eq!(back.to_description().to_json(), text);
        for u in 0..g.len() {
            for v in 0..g.len() {
                prop_assert_eq!(back.multiplicity(u, v), g.multiplicity(u, v));
            }
        }
    }

    #[test]
    fn variational_principle((g, phi, weights) in graph_with_potential()) {
        let n = g.len();
        let pot = CylinderPotential::from_fn(&g, 2, |w| phi[w[0] * n + w[1]]).unwrap();
        let p = pressure(&g, &pot).unwrap();
        let row_total = |u: usize| -> f64 {
            g.successors(u).iter().map(|&v| weights[u * n + v]).sum()
        };
        let nu = MarkovMeasure::from_transitions(&g, |u, v| weights[u * n + v] / row_total(u)).unwrap();
        prop_assert!(nu.entropy + nu.expectation(&pot) <= p + 1e-10);
    }

    #[test]
    fn cylinder_masses_sum_to_one((g, _phi, weights) in graph_with_potential(), k in 1usize..=4) {
        let n = g.len();
        let row_total = |u: usize| -> f64 {
            g.successors(u).iter().map(|&v| weights[u * n + v]).sum()
        };
        let nu = MarkovMeasure::from_transitions(&g, |u, v| weights[u * n + v] / row_total(u)).unwrap();
        let total: f64 = admissible_words(&g, k).iter().map(|w| nu.word_mass(w)).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vere_jones_partial_sums_grow_with_horizon(m in 1usize..=40, n1 in 8usize..=40, extra in 1usize..=24) {
        let rule = BouquetRule::CeilPow2OverNsq { m };
        let n1 = n1.max(m);
        let short = bouquet_census(&rule, n1).unwrap();
        let long = bouquet_census(&rule, n1 + extra).unwrap();
        let a = vere_jones_test(&short, &convergence_radii(&short).unwrap()).unwrap();
        let b = vere_jones_test(&long, &convergence_radii(&long).unwrap()).unwrap();
        prop_assert!(b.partial_sum >= a.partial_sum);
        if let (Some(ta), Some(tb)) = (a.tail_bound, b.tail_bound) {
            prop_assert!(b.partial_sum + tb <= a.partial_sum + ta + 1e-12);
        }
    }

    #[test]
    fn pliss_bound_holds(
        values in prop::collection::vec(-2.0f64..2.0, 1..=16),
        a in -1.0f64..2.5,
        gap in 0.01f64..3.0,
        slack in 0.0f64..0.3,
    ) {
        let above = values.iter().filter(|&&v| v > a).count() as f64 / values.len() as f64;
        let r = pliss_points(&values, a - gap, a, above + slack).unwrap();
        prop_assert!(r.holds, "{:?}", r);
    }

    #[test]
    fn envelope_dominates_and_is_tempered(logs in prop::collection::vec(0.0f64..4.0, 1..=16), eps in 0.01f64..2.0) {
        let pi: Vec<f64> = logs.iter().map(|l| l.exp()).collect();
        let env = tempered_envelope(&pi, eps).unwrap();
        let q = pi.len();
        for j in 0..q {
            prop_assert!(env.values[j] >= pi[j]);
            let step = (env.values[(j + 1) % q] / env.values[j]).ln().abs();
            prop_assert!(step <= eps + 1e-12);
        }
        prop_assert!(env.holds);
    }

    #[test]
    fn pesin_constant_is_monotone(seed in any::<u64>(), shrink in 0.0f64..1.0, widen in 1.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let orbit = common::random_cocycle(&mut rng, 5);
        let chi = common::critical_chi(&orbit).max(0.0) * 0.9;
        let eps = 0.2;
        let base = optimal_pesin_constant(&orbit, chi, eps).unwrap();
        let relaxed = optimal_pesin_constant(&orbit, chi * shrink, eps * widen).unwrap();
        for (r, b) in relaxed.k_star.iter().zip(&base.k_star) {
            prop_assert!(r <= &(b * (1.0 + 1e-12)));
            prop_assert!(*r >= 1.0);
        }
    }
}

fn num_integer_gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        num_integer_gcd(b, a % b)
    }
}
