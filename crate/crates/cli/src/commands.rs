use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;

use spr_shift_core::census::{convergence_radii, count_loops, gurevich_entropy};
use spr_shift_core::graph::{period, spectral_decomposition, strongly_connected_components};
use spr_shift_core::pliss::{
    optimal_pesin_constant, pliss_points, pliss_set_to_block, tempered_envelope, CocycleOrbit, WeightedOrbit,
};
use spr_shift_core::spr::{spr_gate, weighted_census, Verdict};
use spr_shift_core::stochastics::{
    all_pass, arcsine_check, birkhoff_summaries, clt_check, effective_ergodicity_scan, empirical_tail_check,
    fclt_check, laplace_check, ldp_empirical, lil_strassen_check, records_check, return_times, sample, Complex64,
    LilScale, SampleInfo, StatReport,
};
use spr_shift_core::thermo::{
    asymptotic_variance, coboundary_obstruction_scan, equilibrium_measure, linspace, parry_measure, pressure_curve,
    rate_function, return_time_tail, VarianceMethod,
};
use spr_shift_core::{CylinderPotential, MarkovMeasure};

use crate::bundle::{run_name, short_hash, Bundle};
use crate::inputs::{load_graph, load_potential, parse_grid, parse_list, LoadedGraph};
use crate::{Common, GraphArgs};

pub const VARIANCE_AGREEMENT: f64 = 1e-6;
pub const EMPIRICAL_STANDARD_ERRORS: f64 = 3.0;
pub const COBOUNDARY_VARIANCE: f64 = 1e-8;
pub const OBSTRUCTION_PERIOD: usize = 10;
pub const DOMAIN_CONSTANT: f64 = 0.5;

type Output = (Bundle, String);

fn finish(sub: &str, hash: &str, c: &Common, bundle: Bundle) -> Output {
    (bundle, run_name(sub, hash, c.seed))
}

struct Setup {
    loaded: LoadedGraph,
    potential: Option<CylinderPotential>,
}

impl Setup {
    fn new(args: &GraphArgs) -> Result<Self> {
        let loaded = load_graph(&args.graph)?;
        let potential = match &args.potential {
            Some(p) => Some(load_potential(p, &loaded.graph)?),
            None => None,
        };
        Ok(Setup { loaded, potential })
    }

    fn hash(&self) -> String {
        match &self.potential {
            None => self.loaded.hash.clone(),
            Some(p) => {
                let text = format!(
                    "{}{}",
                    self.loaded.hash,
                    serde_json::to_string(p).expect("potential serializes")
                );
                short_hash(text.as_bytes())
            }
        }
    }

    /// Equilibrium measure of the potential, or the Parry measure.
    fn measure(&self) -> Result<MarkovMeasure> {
        let g = &self.loaded.graph;
        match &self.potential {
            None => Ok(parry_measure(g)?),
            Some(phi) => {
                let eq = equilibrium_measure(g, phi)?;
                if !eq.recoding.is_identity() {
                    bail!("equilibrium_measure: precondition violated: potentials of range > 2 are only supported by `pressure` and `spr`");
                }
                Ok(eq.measure)
            }
        }
    }

    fn observable(&self, path: &Path) -> Result<CylinderPotential> {
        load_potential(path, &self.loaded.graph)
    }
}

pub fn graph(c: &Common, args: &GraphArgs) -> Result<Output> {
    let s = Setup::new(args)?;
    let g = &s.loaded.graph;
    let mut components = Vec::new();
    for comp in strongly_connected_components(g) {
        if comp.wandering {
            components.push(json!({ "vertices": comp.vertices, "wandering": true }));
            continue;
        }
        let p = period(g, &comp)?;
        let dec = spectral_decomposition(g, &comp)?;
        components.push(json!({
            "vertices": comp.vertices,
            "wandering": false,
            "period": p,
            "cyclic_classes": dec.classes,
        }));
    }
    let summary = json!({
        "vertices": g.len(),
        "edges": g.edge_count(),
        "irreducible": g.is_irreducible(),
        "proper": g.is_proper(),
        "locally_finite": g.is_locally_finite(),
        "multi_edges": g.has_multi_edges(),
        "components": components,
    });
    Ok(finish("graph", &s.hash(), c, Bundle::new(summary, true)?))
}

pub fn entropy(c: &Common, args: &GraphArgs, base: usize, horizon: usize) -> Result<Output> {
    let s = Setup::new(args)?;
    let census = count_loops(&s.loaded.graph, base, horizon)?;
    let est = gurevich_entropy(&census, census.period)?;
    let radii = convergence_radii(&census)?;
    let summary = json!({
        "base": base,
        "horizon": horizon,
        "period": census.period,
        "exact": census.exact,
        "renewal_holds": census.renewal_holds(),
        "first_return_finite_support": census.zstar_finite_support(),
        "entropy": est,
        "radii": radii,
    });
    let bundle = Bundle::new(summary, census.renewal_holds())?.with_curve("census", census.to_csv());
    Ok(finish("entropy", &s.hash(), c, bundle))
}

pub fn spr(c: &Common, args: &GraphArgs, base: usize, horizon: usize, w: Option<&str>) -> Result<Output> {
    let s = Setup::new(args)?;
    let w: Option<Vec<usize>> = w.map(|t| parse_list(t, "--w")).transpose()?;
    let g = &s.loaded.graph;
    let verdict = spr_gate(g, base, horizon, w.as_deref())?;
    let weighted = match &s.potential {
        Some(phi) => Some(weighted_census(g, base, phi, horizon)?),
        None => None,
    };
    let pass = verdict.verdict != Verdict::Inconclusive && verdict.consistent;
    let summary = json!({ "verdict": verdict, "weighted": weighted });
    Ok(finish("spr", &s.hash(), c, Bundle::new(summary, pass)?))
}

pub fn mme(c: &Common, args: &GraphArgs, obs: Option<&Path>, t: &str) -> Result<Output> {
    let s = Setup::new(args)?;
    let g = &s.loaded.graph;
    let m = s.measure()?;
    let lambda = m
        .eigen
        .as_ref()
        .map(|e| e.lambda)
        .context("measure carries no eigendata")?;
    let identity = StatReport::new(
        "entropy_identity",
        m.entropy_formula(),
        lambda.ln(),
        "log of the Perron eigenvalue",
        1e-10,
        SampleInfo::default(),
    );
    let mut reports = Vec::new();
    if s.potential.is_none() {
        reports.push(identity);
    }
    let scan = match obs {
        Some(path) => {
            if s.potential.is_some() {
                bail!("effective_ergodicity_scan: precondition violated: the scan is taken around the measure of maximal entropy");
            }
            let psi = s.observable(path)?;
            let scan = effective_ergodicity_scan(g, &psi, &parse_grid(t, "--t")?)?;
            reports.extend(scan.reports.iter().cloned());
            Some(scan)
        }
        None => None,
    };
    let pass = all_pass(&reports);
    let summary = json!({
        "measure": m.to_json(),
        "lambda": lambda,
        "reports": reports,
        "ergodicity": scan,
    });
    Ok(finish("mme", &s.hash(), c, Bundle::new(summary, pass)?))
}

pub fn pressure(c: &Common, args: &GraphArgs, obs: &Path, t: &str) -> Result<Output> {
    let s = Setup::new(args)?;
    let g = &s.loaded.graph;
    let phi = s.potential.clone().unwrap_or_else(|| CylinderPotential::zero(g));
    let psi = s.observable(obs)?;
    let ts = if t.trim().is_empty() {
        Vec::new()
    } else {
        parse_grid(t, "--t")?
    };
    if ts.is_empty() {
        let summary = json!({ "samples": 0 });
        return Ok(finish("pressure", &s.hash(), c, Bundle::new(summary, true)?));
    }
    let curve = pressure_curve(g, &phi, &psi, &ts)?;
    let failures = curve.samples.iter().filter(|x| x.pressure.is_none()).count();
    let summary = json!({
        "samples": curve.samples.len(),
        "failed_samples": failures,
        "convex": curve.convex,
        "min_second_difference": curve.min_second_difference,
        "max_third_difference": curve.max_third_difference,
    });
    let pass = curve.convex && failures == 0;
    let bundle = Bundle::new(summary, pass)?.with_curve("pressure", curve.to_csv());
    Ok(finish("pressure", &s.hash(), c, bundle))
}

pub fn variance(c: &Common, args: &GraphArgs, obs: &Path, methods: &str, n: usize, replicas: usize) -> Result<Output> {
    let s = Setup::new(args)?;
    let g = &s.loaded.graph;
    let m = s.measure()?;
    let psi = s.observable(obs)?;
    let methods: Vec<String> = parse_list(methods, "--methods")?;
    let mut estimates = BTreeMap::new();
    for method in &methods {
        let (key, vm) = match method.as_str() {
            "gk" => ("green_kubo", VarianceMethod::GreenKubo),
            "lr" => ("linear_response", VarianceMethod::LinearResponse),
            "emp" => (
                "empirical",
                VarianceMethod::Empirical {
                    n,
                    replicas,
                    seed: c.seed,
                },
            ),
            other => bail!("--methods: unknown method {other:?} (use gk, lr, emp)"),
        };
        estimates.insert(key, asymptotic_variance(&m, &psi, vm)?);
    }
    let mut reports = Vec::new();
    let gk = estimates.get("green_kubo").map(|e| e.sigma2);
    if let (Some(gk), Some(lr)) = (gk, estimates.get("linear_response")) {
        reports.push(StatReport::new(
            "linear_response_vs_green_kubo",
            lr.sigma2,
            gk,
            "Green-Kubo series",
            VARIANCE_AGREEMENT,
            SampleInfo::default(),
        ));
    }
    if let (Some(gk), Some(emp)) = (gk, estimates.get("empirical")) {
        let se = emp.standard_error.unwrap_or(0.0);
        reports.push(
            StatReport::new(
                "empirical_vs_green_kubo",
                emp.sigma2,
                gk,
                "Green-Kubo series",
                EMPIRICAL_STANDARD_ERRORS * se,
                SampleInfo {
                    n,
                    replicas,
                    seed: c.seed,
                },
            )
            .with_standard_error(se),
        );
    }
    let obstruction = match gk {
        Some(v) if v.abs() <= COBOUNDARY_VARIANCE => {
            let scan = coboundary_obstruction_scan(g, &psi, m.expectation(&psi), OBSTRUCTION_PERIOD)?;
            reports.push(StatReport::new(
                "periodic_obstruction",
                scan.max_abs,
                0.0,
                "zero variance forces zero periodic-orbit averages",
                spr_shift_core::thermo::obstruction::OBSTRUCTION_TOLERANCE,
                SampleInfo::default(),
            ));
            Some(scan)
        }
        _ => None,
    };
    let pass = all_pass(&reports);
    let summary = json!({ "estimates": estimates, "reports": reports, "obstruction": obstruction });
    Ok(finish("variance", &s.hash(), c, Bundle::new(summary, pass)?))
}

pub fn ldp(c: &Common, args: &GraphArgs, obs: &Path, a: Option<f64>, ns: &str, replicas: usize) -> Result<Output> {
    let s = Setup::new(args)?;
    let g = &s.loaded.graph;
    let m = s.measure()?;
    let psi = s.observable(obs)?;
    let centered = psi.shifted(m.expectation(&psi));
    let sigma2 = asymptotic_variance(&m, &centered, VarianceMethod::GreenKubo)?.sigma2;
    let sup = centered.sup_norm();
    if sigma2 <= 0.0 || sup == 0.0 {
        bail!("rate_function: precondition violated: observable has zero variance");
    }
    let bound = DOMAIN_CONSTANT * sigma2 * sigma2 / sup.powi(3);
    let phi = s.potential.clone().unwrap_or_else(|| CylinderPotential::zero(g));
    let t_max = 4.0 * bound / sigma2 + 1.0;
    let curve = pressure_curve(g, &phi, &centered, &linspace(-t_max, t_max, 6000))?;
    let s_grid = linspace(-0.96 * bound, 0.96 * bound, 48);
    let rate = rate_function(&curve, sigma2, sup, DOMAIN_CONSTANT, &s_grid)?;
    let a = a.unwrap_or(0.8 * bound);
    let ns: Vec<usize> = parse_list(ns, "--ns")?;
    let report = ldp_empirical(&m, &centered, &rate, a, &ns, replicas, c.seed)?;
    let pass = report.pass && rate.curvature_matches;
    let summary = json!({ "a": a, "rate": rate, "report": report });
    let bundle = Bundle::new(summary, pass)?.with_curve("rate", rate.to_csv());
    Ok(finish("ldp", &s.hash(), c, bundle))
}

pub fn tail(c: &Common, args: &GraphArgs, vertex: usize, horizon: usize, replicas: usize) -> Result<Output> {
    let s = Setup::new(args)?;
    let m = s.measure()?;
    let exact = return_time_tail(&m, vertex, horizon)?;
    let mut csv = String::from("n,unconditional,conditioned\n");
    for n in 0..=horizon {
        let cond = if n >= 1 {
            exact.conditioned[n - 1].to_string()
        } else {
            String::new()
        };
        writeln!(csv, "{n},{},{cond}", exact.unconditional[n]).unwrap();
    }
    let reports = if replicas > 0 {
        let times = return_times(&m, vertex, horizon + 1, replicas, c.seed)?;
        empirical_tail_check(&times, c.seed, &exact, horizon)
    } else {
        Vec::new()
    };
    let pass = all_pass(&reports);
    let summary = json!({ "tail": exact, "reports": reports });
    let bundle = Bundle::new(summary, pass)?.with_curve("tail", csv);
    Ok(finish("tail", &s.hash(), c, bundle))
}

pub fn simulate(c: &Common, args: &GraphArgs, n: usize, replicas: usize) -> Result<Output> {
    let s = Setup::new(args)?;
    let m = s.measure()?;
    let batch = sample(&m, n, replicas, c.seed)?;
    let mut counts = vec![0usize; m.len()];
    let mut csv = String::from("replica,path\n");
    for (r, path) in batch.paths.iter().enumerate() {
        for &x in path {
            counts[x] += 1;
        }
        let states: Vec<String> = path.iter().map(|x| x.to_string()).collect();
        writeln!(csv, "{r},{}", states.join(" ")).unwrap();
    }
    let total = counts.iter().sum::<usize>() as f64;
    let summary = json!({
        "n": n,
        "replicas": replicas,
        "seed": c.seed,
        "stationary": m.initial,
        "occupation": counts.iter().map(|&k| k as f64 / total).collect::<Vec<_>>(),
    });
    let bundle = Bundle::new(summary, true)?.with_curve("paths", csv);
    Ok(finish("simulate", &s.hash(), c, bundle))
}

#[allow(clippy::too_many_arguments)]
pub fn stats(
    c: &Common,
    args: &GraphArgs,
    obs: &Path,
    suite: &str,
    n: usize,
    replicas: usize,
    lil_c: f64,
    degenerate_bound: Option<f64>,
) -> Result<Output> {
    let s = Setup::new(args)?;
    let m = s.measure()?;
    let psi = s.observable(obs)?;
    let suite: Vec<String> = parse_list(suite, "--suite")?;
    for k in &suite {
        if !["clt", "fclt", "arcsine", "records", "lil", "laplace"].contains(&k.as_str()) {
            bail!("--suite: unknown check {k:?}");
        }
    }
    let centered = psi.shifted(m.expectation(&psi));
    let sigma2 = asymptotic_variance(&m, &centered, VarianceMethod::GreenKubo)?
        .sigma2
        .max(0.0);
    let sigma = sigma2.sqrt();
    let bound = degenerate_bound.unwrap_or((n as f64).powf(-0.25));
    let lil = suite.iter().any(|k| k == "lil").then_some(LilScale { sigma, c: lil_c });
    let sums = birkhoff_summaries(&m, &centered, n, replicas, c.seed, lil)?;
    let seed = c.seed;
    let mut reports: Vec<StatReport> = Vec::new();
    for k in &suite {
        match k.as_str() {
            "clt" => reports.extend(clt_check(&sums, n, seed, sigma, bound)),
            "fclt" => reports.extend(fclt_check(&sums, n, seed, sigma, bound)),
            "arcsine" => reports.extend(arcsine_check(&sums, n, seed, sigma, &linspace(0.05, 0.95, 18))?),
            "records" => reports.extend(records_check(&sums, n, seed, sigma, &linspace(0.25, 2.5, 9))?),
            "lil" => reports.extend(lil_strassen_check(&sums, n, seed, lil_c)?),
            "laplace" => {
                let zs = [
                    Complex64::new(0.5, 0.0),
                    Complex64::new(0.0, 1.0),
                    Complex64::new(0.5, 0.5),
                ];
                reports.extend(laplace_check(&sums, n, seed, sigma2, &zs));
            }
            _ => unreachable!(),
        }
    }
    let pass = all_pass(&reports);
    let summary = json!({ "sigma2": sigma2, "reports": reports });
    Ok(finish("stats", &s.hash(), c, Bundle::new(summary, pass)?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlissRequest {
    orbits: Vec<WeightedOrbit>,
    beta: Option<f64>,
    a: Option<f64>,
    #[serde(default)]
    kappa: f64,
    epsilon: Option<f64>,
    chi: Option<f64>,
    n0: Option<usize>,
}

#[derive(Serialize)]
struct ScalarResult {
    orbit: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pliss: Option<spr_shift_core::pliss::PlissPoints>,
    #[serde(skip_serializing_if = "Option::is_none")]
    envelope: Option<spr_shift_core::pliss::TemperedEnvelope>,
}

pub fn pliss(c: &Common, input: &Path) -> Result<Output> {
    let text = std::fs::read_to_string(input).with_context(|| format!("cannot read {}", input.display()))?;
    let req: PlissRequest =
        serde_json::from_str(&text).with_context(|| format!("pliss request {} is malformed", input.display()))?;
    if req.orbits.is_empty() {
        bail!("pliss: precondition violated: no orbits given");
    }
    let mut scalar = Vec::new();
    let mut pesin = Vec::new();
    let mut matrix_orbits = Vec::new();
    let mut pass = true;
    for (i, w) in req.orbits.iter().enumerate() {
        match &w.orbit {
            CocycleOrbit::Scalar { values } => {
                let pliss = match (req.beta, req.a) {
                    (Some(beta), Some(a)) => Some(pliss_points(values, beta, a, req.kappa)?),
                    _ => None,
                };
                let envelope = match req.epsilon {
                    Some(eps) if values.iter().all(|v| *v > 0.0) => Some(tempered_envelope(values, eps)?),
                    _ => None,
                };
                pass &= pliss.as_ref().is_none_or(|p| p.holds) && envelope.as_ref().is_none_or(|e| e.holds);
                scalar.push(ScalarResult {
                    orbit: i,
                    pliss,
                    envelope,
                });
            }
            CocycleOrbit::Matrix { .. } => {
                if let (Some(chi), Some(eps)) = (req.chi, req.epsilon) {
                    let cert = optimal_pesin_constant(&w.orbit, chi, eps)?;
                    pass &= cert.tempered;
                    pesin.push(json!({ "orbit": i, "certificate": cert }));
                }
                matrix_orbits.push(w.clone());
            }
        }
    }
    let block = match (req.n0, req.chi, req.epsilon) {
        (Some(n0), Some(chi), Some(eps)) if !matrix_orbits.is_empty() => {
            let r = pliss_set_to_block(&matrix_orbits, n0, chi, eps)?;
            pass &= r.holds;
            Some(r)
        }
        _ => None,
    };
    let summary = json!({ "scalar": scalar, "pesin": pesin, "block": block });
    let hash = short_hash(text.as_bytes());
    Ok(finish("pliss", &hash, c, Bundle::new(summary, pass)?))
}
