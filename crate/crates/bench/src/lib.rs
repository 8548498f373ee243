//! Benchmark fixtures shared by the criterion targets in `benches/`.

use spr_shift_core::graph::{families, BouquetRule, DirectedGraph, GraphDescription};

/// Graphs exercised by the benchmarks, keyed by a short name.
pub fn corpus() -> Vec<(&'static str, DirectedGraph)> {
    vec![
        ("golden_mean", families::golden_mean()),
        ("full_shift_4", families::full_shift(4)),
        ("cycle_12", families::cycle(12)),
        (
            "bouquet_m1_n12",
            DirectedGraph::build(&GraphDescription::bouquet(BouquetRule::CeilPow2OverNsq { m: 1 }, 12))
                .expect("bouquet truncation builds"),
        ),
    ]
}
