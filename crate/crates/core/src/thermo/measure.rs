use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{irreducible_component, DirectedGraph};
use crate::linalg::{compensated_sum, perron, SparseMatrix};
use crate::potential::{higher_block_recode, BlockRecoding, CylinderPotential};

/// One outgoing transition of a Markov measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Transition {
    pub to: usize,
    /// Total probability of moving to `to` (over all parallel edges).
    pub prob: f64,
    pub multiplicity: u32,
}

/// Perron eigendata the measure was built from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Eigendata {
    pub lambda: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

/// Stationary Markov measure on the vertex paths of a graph.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovMeasure {
    pub initial: Vec<f64>,
    /// Rows sorted by successor.
    pub rows: Vec<Vec<Transition>>,
    pub entropy: f64,
    pub eigen: Option<Eigendata>,
}

pub const STOCHASTIC_TOLERANCE: f64 = 1e-12;
pub const STATIONARITY_TOLERANCE: f64 = 1e-10;

impl MarkovMeasure {
    pub fn len(&self) -> usize {
        self.initial.len()
    }

    pub fn is_empty(&self) -> bool {
        self.initial.is_empty()
    }

    pub fn prob(&self, u: usize, v: usize) -> f64 {
        self.rows[u].iter().find(|t| t.to == v).map_or(0.0, |t| t.prob)
    }

    /// Build from row-stochastic transitions on `g`; the stationary vector
    /// is the normalized left Perron vector.
    pub fn from_transitions(g: &DirectedGraph, probs: impl Fn(usize, usize) -> f64) -> Result<Self> {
        irreducible_component(g, "markov_measure")?;
        let rows: Vec<Vec<Transition>> = (0..g.len())
            .map(|u| {
                g.successors(u)
                    .iter()
                    .map(|&v| Transition {
                        to: v,
                        prob: probs(u, v),
                        multiplicity: g.multiplicity(u, v),
                    })
                    .collect()
            })
            .collect();
        let m = SparseMatrix::new(
            g.len(),
            rows.iter()
                .map(|r| r.iter().map(|t| (t.to, t.prob)).collect())
                .collect(),
        );
        let pf = perron(&m, "markov_measure")?;
        let total: f64 = compensated_sum(pf.left.iter().copied());
        let initial: Vec<f64> = pf.left.iter().map(|x| x / total).collect();
        let mut mm = MarkovMeasure {
            initial,
            rows,
            entropy: 0.0,
            eigen: None,
        };
        mm.entropy = mm.entropy_formula();
        mm.validate()?;
        Ok(mm)
    }

    /// `-sum p_u P_uv log(P_uv / m_uv)`: parallel edges share `P_uv` evenly.
    pub fn entropy_formula(&self) -> f64 {
        -compensated_sum(self.rows.iter().enumerate().flat_map(|(u, r)| {
            let pu = self.initial[u];
            r.iter()
                .filter(|t| t.prob > 0.0)
                .map(move |t| pu * t.prob * (t.prob / t.multiplicity as f64).ln())
        }))
    }

    /// Row sums, total mass and stationarity.
    pub fn validate(&self) -> Result<()> {
        const OP: &str = "markov_measure";
        let total = compensated_sum(self.initial.iter().copied());
        if (total - 1.0).abs() > STOCHASTIC_TOLERANCE {
            return Err(Error::degenerate(OP, format!("initial mass {total}")));
        }
        for (u, r) in self.rows.iter().enumerate() {
            let s = compensated_sum(r.iter().map(|t| t.prob));
            if (s - 1.0).abs() > STOCHASTIC_TOLERANCE || r.iter().any(|t| t.prob < 0.0) {
                return Err(Error::degenerate(OP, format!("row {u} sums to {s}")));
            }
        }
        let pp = self.push_forward(&self.initial);
        let drift = pp
            .iter()
            .zip(&self.initial)
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        if drift > STATIONARITY_TOLERANCE {
            return Err(Error::degenerate(OP, format!("not stationary (drift {drift:e})")));
        }
        Ok(())
    }

    /// `x P`.
    pub fn push_forward(&self, x: &[f64]) -> Vec<f64> {
        let mut parts: Vec<Vec<f64>> = vec![Vec::new(); self.len()];
        for (u, r) in self.rows.iter().enumerate() {
            for t in r {
                parts[t.to].push(x[u] * t.prob);
            }
        }
        parts.into_iter().map(compensated_sum).collect()
    }

    /// `P f`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| compensated_sum(r.iter().map(|t| t.prob * f[t.to])))
            .collect()
    }

    pub fn transition_matrix(&self) -> SparseMatrix {
        SparseMatrix::new(
            self.len(),
            self.rows
                .iter()
                .map(|r| r.iter().map(|t| (t.to, t.prob)).collect())
                .collect(),
        )
    }

    /// Support graph of the transitions, with multiplicities.
    pub fn graph(&self) -> DirectedGraph {
        let desc = crate::graph::GraphDescription {
            vertices: (0..self.len()).collect(),
            edges: self
                .rows
                .iter()
                .enumerate()
                .flat_map(|(u, r)| {
                    r.iter().map(move |t| {
                        if t.multiplicity == 1 {
                            vec![u as u64, t.to as u64]
                        } else {
                            vec![u as u64, t.to as u64, t.multiplicity as u64]
                        }
                    })
                })
                .collect(),
            ..Default::default()
        };
        DirectedGraph::build(&desc).expect("measure support is a valid graph")
    }

    /// `E[psi]` for a potential of range at most 2.
    pub fn expectation(&self, psi: &CylinderPotential) -> f64 {
        compensated_sum(self.rows.iter().enumerate().flat_map(|(u, r)| {
            let pu = self.initial[u];
            r.iter().map(move |t| pu * t.prob * psi.edge_value(u, t.to))
        }))
    }

    /// Mass of the cylinder `[w_0 .. w_{n-1}]` as a product of transitions.
    pub fn word_mass(&self, word: &[usize]) -> f64 {
        match word.split_first() {
            None => 1.0,
            Some((&first, rest)) => {
                let mut mass = self.initial[first];
                let mut prev = first;
                for &v in rest {
                    mass *= self.prob(prev, v);
                    prev = v;
                }
                mass
            }
        }
    }

    /// Lift to the graph of admissible `(k-1)`-words of a recoding.
    pub fn lift(&self, rec: &BlockRecoding) -> Result<MarkovMeasure> {
        if rec.is_identity() {
            return Ok(self.clone());
        }
        let g = &rec.graph;
        let initial: Vec<f64> = rec.words.iter().map(|w| self.word_mass(w)).collect();
        let rows = (0..g.len())
            .map(|i| {
                let last = *rec.words[i].last().expect("nonempty");
                g.successors(i)
                    .iter()
                    .map(|&j| {
                        let v = *rec.words[j].last().expect("nonempty");
                        Transition {
                            to: j,
                            prob: self.prob(last, v),
                            multiplicity: g.multiplicity(i, j),
                        }
                    })
                    .collect()
            })
            .collect();
        let mut mm = MarkovMeasure {
            initial,
            rows,
            entropy: 0.0,
            eigen: None,
        };
        mm.entropy = mm.entropy_formula();
        Ok(mm)
    }

    /// JSON form `{entropy, p_uv: [[u, v, p], ..], p_v}`.
    pub fn to_json(&self) -> serde_json::Value {
        let p_uv: Vec<serde_json::Value> = self
            .rows
            .iter()
            .enumerate()
            .flat_map(|(u, r)| r.iter().map(move |t| serde_json::json!([u, t.to, t.prob])))
            .collect();
        serde_json::json!({
            "entropy": self.entropy,
            "p_uv": p_uv,
            "p_v": self.initial,
        })
    }
}

/// Measure built from the Perron data of a weighted adjacency matrix:
/// `P_uv = B_uv r_v / (lambda r_u)`, `p_v = l_v r_v`.
fn perron_measure(g: &DirectedGraph, b: &SparseMatrix, op: &'static str) -> Result<MarkovMeasure> {
    let pf = perron(b, op)?;
    let lambda = pf.lambda;
    let rows: Vec<Vec<Transition>> = (0..g.len())
        .map(|u| {
            b.row(u)
                .iter()
                .map(|&(v, w)| Transition {
                    to: v,
                    prob: w * pf.right[v] / (lambda * pf.right[u]),
                    multiplicity: g.multiplicity(u, v),
                })
                .collect()
        })
        .collect();
    let initial: Vec<f64> = pf.left.iter().zip(&pf.right).map(|(l, r)| l * r).collect();
    let mut mm = MarkovMeasure {
        initial,
        rows,
        entropy: 0.0,
        eigen: Some(Eigendata {
            lambda,
            left: pf.left,
            right: pf.right,
        }),
    };
    mm.entropy = mm.entropy_formula();
    mm.validate()?;
    Ok(mm)
}

pub const ENTROPY_TOLERANCE: f64 = 1e-10;
pub const VARIATIONAL_TOLERANCE: f64 = 1e-9;

/// Parry measure of maximal entropy of a finite irreducible graph.
pub fn parry_measure(g: &DirectedGraph) -> Result<MarkovMeasure> {
    const OP: &str = "parry_measure";
    irreducible_component(g, OP)?;
    let a = SparseMatrix::from_graph(g, |_, _| 1.0);
    let mm = perron_measure(g, &a, OP)?;
    let log_lambda = mm.eigen.as_ref().expect("eigendata").lambda.ln();
    if (mm.entropy - log_lambda).abs() > ENTROPY_TOLERANCE {
        return Err(Error::degenerate(
            OP,
            format!("entropy formula {} differs from log lambda {log_lambda}", mm.entropy),
        ));
    }
    Ok(mm)
}

/// Equilibrium state of a locally constant potential.
#[derive(Clone, Debug)]
pub struct Equilibrium {
    /// Measure on the block graph of the recoding (the original graph when
    /// the potential has range at most 2).
    pub measure: MarkovMeasure,
    pub pressure: f64,
    pub recoding: BlockRecoding,
    /// `h(mu) + mu(phi) - P`.
    pub variational_defect: f64,
}

/// Weighted adjacency `B_uv = A_uv exp(phi(u, v))` of a range-2 potential.
pub fn weighted_matrix(g: &DirectedGraph, phi: &CylinderPotential) -> SparseMatrix {
    SparseMatrix::from_graph(g, |u, v| phi.edge_value(u, v).exp())
}

pub fn equilibrium_measure(g: &DirectedGraph, phi: &CylinderPotential) -> Result<Equilibrium> {
    const OP: &str = "equilibrium_measure";
    irreducible_component(g, OP)?;
    phi.validate(g)?;
    let rec = higher_block_recode(g, phi)?;
    let b = weighted_matrix(&rec.graph, &rec.potential);
    let measure = perron_measure(&rec.graph, &b, OP)?;
    let pressure = measure.eigen.as_ref().expect("eigendata").lambda.ln();
    let variational_defect = measure.entropy + measure.expectation(&rec.potential) - pressure;
    if variational_defect.abs() > VARIATIONAL_TOLERANCE {
        return Err(Error::degenerate(
            OP,
            format!("variational identity off by {variational_defect:e}"),
        ));
    }
    Ok(Equilibrium {
        measure,
        pressure,
        recoding: rec,
        variational_defect,
    })
}

/// Topological pressure `log rho(B)` of a potential on `g`.
pub fn pressure(g: &DirectedGraph, phi: &CylinderPotential) -> Result<f64> {
    let rec = higher_block_recode(g, phi)?;
    let b = weighted_matrix(&rec.graph, &rec.potential);
    Ok(perron(&b, "pressure")?.lambda.ln())
}

/// Result of evaluating a cylinder mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CylinderMass {
    pub mass: f64,
    pub admissible: bool,
    /// Product-of-transitions value, for cross-checking.
    pub product: f64,
}

pub const CYLINDER_TOLERANCE: f64 = 1e-12;

/// `mu[v_0 .. v_{n-1}] = p_{v_0} lambda^{-(n-1)} (r_{v_{n-1}} / r_{v_0}) prod A`.
pub fn cylinder_mass(m: &MarkovMeasure, word: &[usize]) -> Result<CylinderMass> {
    if word.is_empty() {
        return Ok(CylinderMass {
            mass: 1.0,
            admissible: true,
            product: 1.0,
        });
    }
    if word.iter().any(|&v| v >= m.len()) {
        return Err(Error::DanglingVertex {
            id: *word.iter().max().expect("nonempty"),
            count: m.len(),
        });
    }
    let mut adjacency = 1.0;
    for w in word.windows(2) {
        match m.rows[w[0]].iter().find(|t| t.to == w[1]) {
            Some(t) => adjacency *= t.multiplicity as f64,
            None => {
                return Ok(CylinderMass {
                    mass: 0.0,
                    admissible: false,
                    product: 0.0,
                })
            }
        }
    }
    let product = m.word_mass(word);
    let mass = match &m.eigen {
        Some(e) => {
            let first = word[0];
            let last = *word.last().expect("nonempty");
            m.initial[first] * e.lambda.powi(-(word.len() as i32 - 1)) * e.right[last] / e.right[first] * adjacency
        }
        None => product,
    };
    if (mass - product).abs() > CYLINDER_TOLERANCE * mass.abs().max(1.0) {
        return Err(Error::degenerate(
            "cylinder_mass",
            format!("closed form {mass} and transition product {product} disagree"),
        ));
    }
    Ok(CylinderMass {
        mass,
        admissible: true,
        product,
    })
}
