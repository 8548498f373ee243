//! Acceptance suite: one PASS/FAIL line per criterion on stdout, nonzero
//! exit if any criterion fails.

mod common;

use std::io::Write;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spr_shift_core::census::{avoiding_word_counts, bouquet_census, count_loops};
use spr_shift_core::graph::{families, BouquetRule, BouquetSpec, DirectedGraph};
use spr_shift_core::pliss::{
    brute_force_k_star, optimal_pesin_constant, pliss_points, pliss_set_to_block, tempered_envelope, WeightedOrbit,
};
use spr_shift_core::spr::{spr_from_census, spr_gate, Verdict};
use spr_shift_core::stochastics::{
    arcsine_check, birkhoff_summaries, clt_check, effective_ergodicity_scan, empirical_tail_check, lil_strassen_check,
    records_check, return_times, LilScale, StatReport,
};
use spr_shift_core::thermo::{
    asymptotic_variance, coboundary_obstruction_scan, covariance_sequence, exact_ldp_tails, linspace, parry_measure,
    pressure_curve, rate_function, return_time_tail, spectral_gap, TransferOperator, VarianceMethod,
};
use spr_shift_core::CylinderPotential;

const SEED: u64 = 20_241_017;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            pass: true,
            detail: String::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl AsRef<str>) {
        if !ok {
            self.pass = false;
            self.detail.push_str(&format!(" [failed: {}]", what.as_ref()));
        }
    }

    fn note(&mut self, what: impl AsRef<str>) {
        self.detail.push_str(&format!(" {};", what.as_ref()));
    }

    fn reports(&mut self, reports: &[StatReport]) {
        for r in reports {
            self.check(
                r.pass,
                format!(
                    "{} = {:.6} vs {:.6} +- {:.3e}",
                    r.name, r.estimate, r.reference, r.tolerance
                ),
            );
        }
    }
}

fn close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol
}

fn bouquet(rule: BouquetRule, n: usize) -> DirectedGraph {
    DirectedGraph::bouquet(&BouquetSpec { base: 0, rule }, n).unwrap()
}

fn criterion_1() -> Outcome {
    let mut out = Outcome::new();
    let g = bouquet(BouquetRule::CeilPow2OverNsq { m: 1 }, 12);
    let m1 = spr_gate(&g, 0, 12, None).unwrap();
    out.check(m1.verdict == Verdict::Spr, format!("M=1 verdict {:?}", m1.verdict));
    out.check(m1.vere_jones.partial_sum >= 1.25, "M=1 partial sum >= 1.25");
    out.note(format!("M=1 partial {:.6}", m1.vere_jones.partial_sum));

    let c30 = bouquet_census(&BouquetRule::CeilPow2OverNsq { m: 30 }, 64).unwrap();
    let m30 = spr_from_census(&c30).unwrap();
    out.check(
        m30.verdict == Verdict::NotSpr,
        format!("M=30 verdict {:?}", m30.verdict),
    );
    let closed_tail: f64 =
        (30..2_000_000u64).map(|n| 1.0 / (n * n) as f64).sum::<f64>() + 1.0 / 1_999_999.0 + 2f64.powi(-29);
    out.check(closed_tail < 1.0, "closed-form tail < 1");
    let bound = m30.vere_jones.partial_sum + m30.vere_jones.tail_bound.unwrap_or(f64::INFINITY);
    out.check(bound < 1.0, format!("M=30 partial + tail = {bound}"));
    out.note(format!("M=30 F(1/2) <= {bound:.6}"));

    let cr = bouquet_census(&BouquetRule::Ruette, 64).unwrap();
    let ru = spr_from_census(&cr).unwrap();
    out.check(
        ru.verdict == Verdict::PositiveRecurrentNotSpr,
        format!("Ruette verdict {:?}", ru.verdict),
    );
    let f = ru.vere_jones.partial_sum + ru.vere_jones.tail_bound.unwrap_or(f64::NAN);
    let df = ru.vere_jones.derivative.unwrap_or(f64::NAN);
    out.check(close(f, 1.0, 1e-12), format!("Ruette F(1/2) = {f}"));
    out.check(close(df, 12.0, 1e-9), format!("Ruette F'(1/2) = {df}"));
    out.note(format!("Ruette F = {f:.15}, F' = {df:.12}"));
    out
}

fn criterion_2() -> Outcome {
    let mut out = Outcome::new();
    let g = families::golden_mean();
    let m = parry_measure(&g).unwrap();
    let a = nalgebra::Matrix2::<f64>::new(1.0, 1.0, 1.0, 0.0);
    let lambda: f64 = a.symmetric_eigen().eigenvalues.max();
    let l2 = lambda * lambda;
    for (name, got, want) in [
        ("p00", m.prob(0, 0), 1.0 / lambda),
        ("p01", m.prob(0, 1), 1.0 / l2),
        ("p10", m.prob(1, 0), 1.0),
        ("p0", m.initial[0], l2 / (l2 + 1.0)),
        ("entropy", m.entropy_formula(), lambda.ln()),
    ] {
        out.check(close(got, want, 1e-10), format!("{name} = {got} vs {want}"));
    }
    out.note(format!("h = {:.12}", m.entropy_formula()));
    out
}

fn criterion_3() -> Outcome {
    let mut out = Outcome::new();
    let mut checked = 0;
    for (name, g) in common::corpus() {
        let horizon = if g.len() > 1000 { 40 } else { 64 };
        let c = count_loops(&g, 0, horizon).unwrap();
        for n in 1..=horizon {
            let mut rhs = c.zstar_at(n).clone();
            for k in 1..n {
                rhs += c.zstar_at(k) * c.z_at(n - k);
            }
            out.check(&rhs == c.z_at(n), format!("{name} renewal at n = {n}"));
        }
        for n in 1..=10 {
            let (z, zs) = common::enumerate_loops(&g, 0, n);
            out.check(
                &z == c.z_at(n) && &zs == c.zstar_at(n),
                format!("{name} enumeration at n = {n}"),
            );
        }
        checked += 1;
    }
    out.note(format!("{checked} graphs"));
    out
}

fn criterion_4() -> Outcome {
    let mut out = Outcome::new();
    let g = families::golden_mean();
    let m = parry_measure(&g).unwrap();
    let psi = CylinderPotential::indicator(&g, 0);
    let cov = covariance_sequence(&m, &psi, &psi, 51);
    let gap = spectral_gap(&TransferOperator::from_measure(&m).unwrap()).unwrap();
    let target = (5f64.sqrt() - 1.0) / (5f64.sqrt() + 1.0);
    out.check(close(gap.rho, target, 1e-6), format!("subleading modulus {}", gap.rho));
    let mut worst = 0.0f64;
    for n in 10..50 {
        let ratio = (cov[n + 1] / cov[n]).abs();
        worst = worst.max((ratio - gap.rho).abs());
    }
    out.check(worst <= 1e-6, format!("covariance ratio deviation {worst:e}"));
    out.note(format!("max |ratio - rho| = {worst:.2e}"));
    out
}

fn criterion_5() -> Outcome {
    let mut out = Outcome::new();
    let g = families::full_shift(2);
    let m = parry_measure(&g).unwrap();
    let psi = CylinderPotential::indicator(&g, 0);
    let gk = asymptotic_variance(&m, &psi, VarianceMethod::GreenKubo).unwrap().sigma2;
    let lr = asymptotic_variance(&m, &psi, VarianceMethod::LinearResponse)
        .unwrap()
        .sigma2;
    out.check(close(gk, 0.25, 1e-6), format!("green-kubo {gk}"));
    out.check(close(lr, 0.25, 1e-6), format!("linear response {lr}"));
    let emp = asymptotic_variance(
        &m,
        &psi,
        VarianceMethod::Empirical {
            n: 10_000,
            replicas: 10_000,
            seed: SEED,
        },
    )
    .unwrap();
    let se = emp.standard_error.unwrap();
    out.check(
        close(emp.sigma2, 0.25, 3.0 * se),
        format!("empirical {} +- {se}", emp.sigma2),
    );
    out.note(format!("GK {gk:.9}, LR {lr:.9}, emp {:.5} (se {se:.5})", emp.sigma2));

    let cob = CylinderPotential::coboundary(&g, &[0.7, -1.3]).unwrap();
    let s2 = asymptotic_variance(&m, &cob, VarianceMethod::GreenKubo).unwrap().sigma2;
    out.check(s2.abs() <= 1e-8, format!("coboundary sigma^2 = {s2:e}"));
    let scan = coboundary_obstruction_scan(&g, &cob, m.expectation(&cob), 10).unwrap();
    out.check(scan.vanishes, format!("obstruction max {:e}", scan.max_abs));
    out.note(format!("coboundary sigma^2 {s2:.1e}, {} orbits", scan.orbits.len()));
    out
}

fn binary_rate(s: f64) -> f64 {
    std::f64::consts::LN_2 + (0.5 + s) * (0.5 + s).ln() + (0.5 - s) * (0.5 - s).ln()
}

fn criterion_6() -> Outcome {
    let mut out = Outcome::new();
    let g = families::full_shift(2);
    let m = parry_measure(&g).unwrap();
    let psi = CylinderPotential::symbolwise(&g, &[0.5, -0.5]).unwrap();
    let ns: Vec<usize> = (1..=16).map(|k| 64 * k).collect();
    let exact = exact_ldp_tails(&m, &psi, 0.2, &ns).unwrap();
    out.check(
        close(exact.slope, -0.0823, 0.1 * 0.0823),
        format!("tail slope {}", exact.slope),
    );
    let curve = pressure_curve(&g, &CylinderPotential::zero(&g), &psi, &linspace(-3.0, 3.0, 6000)).unwrap();
    let rate = rate_function(&curve, 0.25, 0.5, 0.5, &linspace(-0.24, 0.24, 97)).unwrap();
    let curvature_err = (rate.curvature_at_zero * 0.25 - 1.0).abs();
    out.check(curvature_err <= 0.05, format!("I''(0) sigma^2 - 1 = {curvature_err}"));
    let worst = rate
        .points
        .iter()
        .map(|&(s, i)| (i - binary_rate(s)).abs())
        .fold(0.0f64, f64::max);
    out.check(worst <= 1e-6, format!("binary entropy deviation {worst:e}"));
    out.note(format!(
        "slope {:.5}, I(0.2) = {:.5}, I''(0) = {:.4}, pointwise {worst:.1e}",
        exact.slope,
        rate.eval(0.2),
        rate.curvature_at_zero
    ));
    out
}

fn criterion_7() -> Outcome {
    let mut out = Outcome::new();
    let g = families::full_shift(2);
    let m = parry_measure(&g).unwrap();
    let tail = return_time_tail(&m, 0, 30).unwrap();
    let words = avoiding_word_counts(&g, 0, 30);
    for n in 0..=30 {
        // words of length n + 1 avoiding 0 after the first symbol: 2 for every n.
        let exact_words = words[n] == BigUint::from(2u32);
        let dyadic = tail.unconditional[n] == 0.5f64.powi(n as i32);
        let rational = words[n].to_f64().unwrap() * 0.5f64.powi(n as i32 + 1) == tail.unconditional[n];
        out.check(exact_words && dyadic && rational, format!("tail at n = {n}"));
    }
    let times = return_times(&m, 0, 64, 1_000_000, SEED).unwrap();
    let reports = empirical_tail_check(&times, SEED, &tail, 20);
    out.reports(&reports);
    let worst = reports
        .iter()
        .map(|r| (r.estimate - r.reference).abs() / r.standard_error.unwrap().max(1e-300))
        .fold(0.0f64, f64::max);
    out.note(format!("max deviation {worst:.2} s.e. over n <= 20"));
    out
}

fn criterion_8() -> Outcome {
    let mut out = Outcome::new();
    let g = families::full_shift(2);
    let m = parry_measure(&g).unwrap();
    let psi = CylinderPotential::symbolwise(&g, &[1.0, -1.0]).unwrap();
    let (n, r) = (10_000, 10_000);
    let sigma = 1.0;
    let sums = birkhoff_summaries(&m, &psi, n, r, SEED, None).unwrap();
    let clt = clt_check(&sums, n, SEED, sigma, 0.0);
    out.reports(&clt);
    let arcsine = arcsine_check(&sums, n, SEED, sigma, &linspace(0.05, 0.95, 18)).unwrap();
    out.reports(&arcsine);
    let spots = arcsine_check(&sums, n, SEED, sigma, &[0.25, 0.5]).unwrap();
    out.check(close(spots[1].reference, 1.0 / 3.0, 1e-12), "arcsine reference at 1/4");
    out.check(close(spots[2].reference, 0.5, 1e-12), "arcsine reference at 1/2");
    out.reports(&spots);
    let records = records_check(&sums, n, SEED, sigma, &linspace(0.25, 2.5, 9)).unwrap();
    out.reports(&records);
    out.note(format!(
        "KS {:.4} (crit {:.4}), arcsine sup {:.4}, F(1/4) {:.4}, F(1/2) {:.4}",
        clt[0].estimate, clt[0].tolerance, arcsine[0].estimate, spots[1].estimate, spots[2].estimate
    ));

    let long = 10_000_000;
    let c = 0.5;
    let lil = birkhoff_summaries(&m, &psi, long, 100, SEED, Some(LilScale { sigma, c })).unwrap();
    let strassen = lil_strassen_check(&lil, long, SEED, c).unwrap();
    out.reports(&strassen);
    out.note(format!(
        "LIL mean max {:.3}, Strassen fraction {:.4} vs {:.6}",
        strassen[0].estimate, strassen[1].estimate, strassen[1].reference
    ));
    out
}

fn criterion_9() -> Outcome {
    let mut out = Outcome::new();
    let g = families::golden_mean();
    let psi = CylinderPotential::indicator(&g, 0);
    let scan = effective_ergodicity_scan(&g, &psi, &linspace(-1.0, 1.0, 40)).unwrap();
    out.reports(&scan.reports);
    let sharp: Vec<f64> = scan
        .points
        .iter()
        .filter(|p| close(p.t.abs(), 0.05, 1e-9))
        .filter_map(|p| p.sharp_ratio)
        .collect();
    out.check(sharp.len() == 2, "ratio evaluated at t = +-0.05");
    for r in &sharp {
        out.check(close(*r, 1.0, 0.05), format!("sharp ratio {r}"));
    }
    out.note(format!("K = {:.4}, ratios {sharp:.4?}", scan.k_fit));
    out
}

fn criterion_10() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let trials = 10_000;
    let mut violations = [0usize; 4];

    for _ in 0..trials {
        let q = rng.gen_range(1..=12);
        let values: Vec<f64> = (0..q).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let a = rng.gen_range(-1.0..2.5);
        let beta = a - rng.gen_range(0.01..3.0);
        let above = values.iter().filter(|&&v| v > a).count() as f64 / q as f64;
        let kappa = above + rng.gen_range(0.0..0.3);
        if !pliss_points(&values, beta, a, kappa).unwrap().holds {
            violations[0] += 1;
        }

        let pi: Vec<f64> = (0..q).map(|_| rng.gen_range(0.0f64..4.0).exp()).collect();
        let eps = rng.gen_range(0.01..2.0);
        if !tempered_envelope(&pi, eps).unwrap().holds {
            violations[1] += 1;
        }

        let orbit = common::random_cocycle(&mut rng, 6);
        let chi = common::critical_chi(&orbit).max(0.0) * rng.gen_range(0.0..1.2);
        let eps = rng.gen_range(0.01..1.0);
        if !optimal_pesin_constant(&orbit, chi, eps).unwrap().tempered {
            violations[2] += 1;
        }

        let k = rng.gen_range(1..=3);
        let ensemble: Vec<WeightedOrbit> = (0..k)
            .map(|_| WeightedOrbit {
                weight: rng.gen_range(0.1..1.0),
                orbit: common::random_cocycle(&mut rng, 5),
            })
            .collect();
        let chi = common::critical_chi(&ensemble[0].orbit).max(0.0) * rng.gen_range(0.0..1.2);
        let n0 = rng.gen_range(1..=4);
        if !pliss_set_to_block(&ensemble, n0, chi, eps).unwrap().holds {
            violations[3] += 1;
        }
    }
    for (name, v) in ["pliss bound", "tempered tail", "K_* temperedness", "block inclusion"]
        .iter()
        .zip(violations)
    {
        out.check(v == 0, format!("{name}: {v} violations"));
    }

    let mut worst = 0.0f64;
    let mut compared = 0;
    while compared < 100 {
        let orbit = common::random_cocycle(&mut rng, 5);
        let chi = common::critical_chi(&orbit) * rng.gen_range(0.0..0.95);
        if chi <= 0.0 {
            continue;
        }
        let eps = rng.gen_range(0.01..1.0);
        let cert = optimal_pesin_constant(&orbit, chi, eps).unwrap();
        for (j, k) in cert.k_star.iter().enumerate() {
            let oracle = brute_force_k_star(&orbit, j, chi, eps).unwrap();
            worst = worst.max((k - oracle).abs() / oracle);
        }
        compared += 1;
    }
    out.check(worst <= 1e-9, format!("K_* vs brute force relative error {worst:e}"));
    out.note(format!("{trials} instances per property, oracle error {worst:.1e}"));
    out
}

fn main() {
    type Criterion = (usize, fn() -> Outcome, Duration);
    let criteria: [Criterion; 10] = [
        (1, criterion_1, Duration::from_secs(1)),
        (2, criterion_2, Duration::from_millis(100)),
        (3, criterion_3, Duration::from_secs(5)),
        (4, criterion_4, Duration::from_millis(100)),
        (5, criterion_5, Duration::from_secs(30)),
        (6, criterion_6, Duration::from_secs(10)),
        (7, criterion_7, Duration::from_secs(10)),
        (8, criterion_8, Duration::from_secs(600)),
        (9, criterion_9, Duration::from_secs(1)),
        (10, criterion_10, Duration::from_secs(60)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let stdout = std::io::stdout();
    for (k, run, budget) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == &k.to_string()) {
            continue;
        }
        let start = Instant::now();
        let mut outcome = run();
        let elapsed = start.elapsed();
        outcome.check(elapsed <= budget, format!("runtime {elapsed:?} over {budget:?}"));
        if !outcome.pass {
            failed += 1;
        }
        let mut lock = stdout.lock();
        writeln!(
            lock,
            "{} criterion {k:>2} ({:.3}s):{}",
            if outcome.pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            outcome.detail
        )
        .unwrap();
        lock.flush().unwrap();
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
