use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use spr_shift_bench::corpus;
use spr_shift_core::stochastics::sample;
use spr_shift_core::thermo::{asymptotic_variance, linspace, parry_measure, pressure_curve, VarianceMethod};
use spr_shift_core::CylinderPotential;

fn measures(c: &mut Criterion) {
    for (name, g) in corpus() {
        c.bench_function(&format!("parry_measure/{name}"), |b| {
            b.iter(|| parry_measure(black_box(&g)).unwrap())
        });
    }
}

fn pressure(c: &mut Criterion) {
    let (_, g) = corpus().swap_remove(1);
    let zero = CylinderPotential::zero(&g);
    let psi = CylinderPotential::indicator(&g, 0);
    let ts = linspace(-2.0, 2.0, 40);
    c.bench_function("pressure_curve/full_shift_4/41", |b| {
        b.iter(|| pressure_curve(&g, &zero, black_box(&psi), &ts).unwrap())
    });
    let m = parry_measure(&g).unwrap();
    c.bench_function("green_kubo/full_shift_4", |b| {
        b.iter(|| asymptotic_variance(&m, black_box(&psi), VarianceMethod::GreenKubo).unwrap())
    });
}

fn sampling(c: &mut Criterion) {
    let (_, g) = corpus().swap_remove(0);
    let m = parry_measure(&g).unwrap();
    let mut group = c.benchmark_group("sample");
    group.sample_size(20);
    group.bench_function("golden_mean/1000x100", |b| {
        b.iter(|| sample(black_box(&m), 1000, 100, 1).unwrap())
    });
    group.finish();
}

criterion_group!(benches, measures, pressure, sampling);
criterion_main!(benches);
