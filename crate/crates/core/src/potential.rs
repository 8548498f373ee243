//! Locally constant potentials, their Hölder data, higher-block recoding and
//! the Sinai reduction of two-sided potentials.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;

/// All admissible vertex words of length `k >= 1`, in lexicographic order.
pub fn admissible_words(g: &DirectedGraph, k: usize) -> Vec<Vec<usize>> {
    let mut words: Vec<Vec<usize>> = (0..g.len()).map(|v| vec![v]).collect();
    for _ in 1..k {
        words = words
            .into_iter()
            .flat_map(|w| {
                let last = *w.last().expect("words are nonempty");
                g.successors(last).iter().map(move |&v| {
                    let mut next = w.clone();
                    next.push(v);
                    next
                })
            })
            .collect();
    }
    words
}

/// A real function of the first `range` coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderPotential {
    range: usize,
    #[serde(with = "table_serde")]
    table: BTreeMap<Vec<usize>, f64>,
    /// Hölder exponent used for the norm bound.
    #[serde(default = "default_beta")]
    pub beta: f64,
}

fn default_beta() -> f64 {
    1.0
}

mod table_serde {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry {
        value: f64,
        word: Vec<usize>,
    }

    pub fn serialize<S: Serializer>(t: &BTreeMap<Vec<usize>, f64>, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<Entry> = t.iter().map(|(w, &value)| Entry { value, word: w.clone() }).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Vec<usize>, f64>, D::Error> {
        Ok(Vec::<Entry>::deserialize(d)?
            .into_iter()
            .map(|e| (e.word, e.value))
            .collect())
    }
}

impl CylinderPotential {
    /// Tabulate `f` on every admissible word of length `range`.
    pub fn from_fn(g: &DirectedGraph, range: usize, f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        if range == 0 {
            return Err(Error::precondition("potential", "range must be at least 1"));
        }
        let table = admissible_words(g, range)
            .into_iter()
            .map(|w| {
                let v = f(&w);
                (w, v)
            })
            .collect();
        let p = CylinderPotential {
            range,
            table,
            beta: 1.0,
        };
        p.check_finite()?;
        Ok(p)
    }

    /// Build from explicit entries, which must cover exactly the admissible words.
    pub fn from_table(g: &DirectedGraph, range: usize, entries: Vec<(Vec<usize>, f64)>) -> Result<Self> {
        let table: BTreeMap<_, _> = entries.into_iter().collect();
        let p = CylinderPotential {
            range,
            table,
            beta: 1.0,
        };
        p.validate(g)?;
        Ok(p)
    }

    /// Check the table against `g`: exactly the admissible words, finite values.
    pub fn validate(&self, g: &DirectedGraph) -> Result<()> {
        if self.range == 0 {
            return Err(Error::precondition("potential", "range must be at least 1"));
        }
        let words = admissible_words(g, self.range);
        if words.len() != self.table.len() || words.iter().any(|w| !self.table.contains_key(w)) {
            return Err(Error::precondition(
                "potential",
                format!(
                    "table must cover exactly the {} admissible words of length {}",
                    words.len(),
                    self.range
                ),
            ));
        }
        self.check_finite()
    }

    fn check_finite(&self) -> Result<()> {
        match self.table.iter().find(|(_, v)| !v.is_finite()) {
            Some((w, _)) => Err(Error::precondition("potential", format!("non-finite value on {w:?}"))),
            None => Ok(()),
        }
    }

    pub fn zero(g: &DirectedGraph) -> Self {
        Self::constant(g, 0.0)
    }

    pub fn constant(g: &DirectedGraph, c: f64) -> Self {
        Self::from_fn(g, 1, |_| c).expect("constant potential")
    }

    /// Indicator of the cylinder `[symbol]`.
    pub fn indicator(g: &DirectedGraph, symbol: usize) -> Self {
        Self::from_fn(g, 1, |w| if w[0] == symbol { 1.0 } else { 0.0 }).expect("indicator")
    }

    /// `psi(x) = values[x_0]`.
    pub fn symbolwise(g: &DirectedGraph, values: &[f64]) -> Result<Self> {
        if values.len() != g.len() {
            return Err(Error::precondition("potential", "one value per vertex required"));
        }
        Self::from_fn(g, 1, |w| values[w[0]])
    }

    /// `psi = u - u o sigma` for `u` depending on `x_0`.
    pub fn coboundary(g: &DirectedGraph, u: &[f64]) -> Result<Self> {
        if u.len() != g.len() {
            return Err(Error::precondition(
                "potential",
                "one transfer value per vertex required",
            ));
        }
        Self::from_fn(g, 2, |w| u[w[0]] - u[w[1]])
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn table(&self) -> &BTreeMap<Vec<usize>, f64> {
        &self.table
    }

    /// Value on a word of length at least `range` (extra symbols ignored).
    pub fn value(&self, word: &[usize]) -> Option<f64> {
        self.table.get(&word[..self.range.min(word.len())]).copied()
    }

    /// Value on the edge `u -> v`; requires `range <= 2`.
    pub fn edge_value(&self, u: usize, v: usize) -> f64 {
        match self.range {
            1 => self.table[&vec![u]],
            2 => self.table[&vec![u, v]],
            _ => panic!("edge_value needs range <= 2"),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.table.values().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// `var_j = sup |psi(x) - psi(y)|` over `x, y` agreeing on coordinates
    /// `0..j`, for `j = 0..range`; zero from `j = range` on.
    pub fn variations(&self) -> Vec<f64> {
        (0..self.range)
            .map(|j| {
                let mut groups: BTreeMap<&[usize], (f64, f64)> = BTreeMap::new();
                for (w, &v) in &self.table {
                    let e = groups.entry(&w[..j]).or_insert((v, v));
                    e.0 = e.0.min(v);
                    e.1 = e.1.max(v);
                }
                groups.values().fold(0.0f64, |a, (lo, hi)| a.max(hi - lo))
            })
            .collect()
    }

    /// `||psi||_beta = sup|psi| + sup_{j >= 1} var_j e^{beta j}`.
    pub fn holder_norm(&self) -> f64 {
        let vars = self.variations();
        let hol = (1..self.range)
            .map(|j| vars[j] * (self.beta * j as f64).exp())
            .fold(0.0f64, f64::max);
        self.sup_norm() + hol
    }

    /// Same function viewed as a potential of a larger range.
    pub fn extend_range(&self, g: &DirectedGraph, range: usize) -> Result<Self> {
        if range < self.range {
            return Err(Error::precondition("potential", "cannot shrink the range"));
        }
        let mut p = Self::from_fn(g, range, |w| self.table[&w[..self.range]])?;
        p.beta = self.beta;
        Ok(p)
    }

    /// `self + t * other` on the common range.
    pub fn add_scaled(&self, g: &DirectedGraph, other: &CylinderPotential, t: f64) -> Result<Self> {
        let k = self.range.max(other.range);
        let mut p = Self::from_fn(g, k, |w| {
            self.table[&w[..self.range]] + t * other.table[&w[..other.range]]
        })?;
        p.beta = self.beta;
        Ok(p)
    }

    /// `psi - c`.
    pub fn shifted(&self, c: f64) -> Self {
        CylinderPotential {
            range: self.range,
            table: self.table.iter().map(|(w, v)| (w.clone(), v - c)).collect(),
            beta: self.beta,
        }
    }

    /// Birkhoff sum `sum_{i < n} psi(sigma^i x)` along a finite path holding
    /// at least `n + range - 1` symbols.
    pub fn birkhoff_sum(&self, path: &[usize], n: usize) -> f64 {
        crate::linalg::compensated_sum((0..n).map(|i| self.table[&path[i..i + self.range]]))
    }

    /// Birkhoff sum around a periodic orbit given by one period of symbols.
    pub fn periodic_sum(&self, cycle: &[usize]) -> f64 {
        let q = cycle.len();
        crate::linalg::compensated_sum((0..q).map(|i| {
            let w: Vec<usize> = (0..self.range).map(|j| cycle[(i + j) % q]).collect();
            self.table[&w]
        }))
    }
}

/// Range-2 presentation of a range-`k` potential on the graph of admissible
/// `(k-1)`-words.
#[derive(Clone, Debug)]
pub struct BlockRecoding {
    /// Original range.
    pub k: usize,
    pub graph: DirectedGraph,
    /// `words[i]` is the original word behind block vertex `i`.
    pub words: Vec<Vec<usize>>,
    /// Potential on block edges (range 2), or the original when `k <= 2`.
    pub potential: CylinderPotential,
}

impl BlockRecoding {
    pub fn is_identity(&self) -> bool {
        self.k <= 2
    }

    /// Block vertex index of an original word of length `k - 1`.
    pub fn index_of(&self, word: &[usize]) -> Option<usize> {
        self.words.binary_search_by(|w| w.as_slice().cmp(word)).ok()
    }

    /// Block path of a vertex path with at least `k - 1` symbols.
    pub fn lift_path(&self, path: &[usize]) -> Vec<usize> {
        if self.is_identity() {
            return path.to_vec();
        }
        let m = self.k - 1;
        (0..=path.len() - m)
            .map(|i| self.index_of(&path[i..i + m]).expect("admissible path"))
            .collect()
    }
}

/// Recode a range-`k` potential as a range-2 potential on the block graph.
pub fn higher_block_recode(g: &DirectedGraph, phi: &CylinderPotential) -> Result<BlockRecoding> {
    let k = phi.range();
    if k == 0 {
        return Err(Error::precondition("higher_block_recode", "range must be at least 1"));
    }
    if k <= 2 {
        return Ok(BlockRecoding {
            k,
            graph: g.clone(),
            words: (0..g.len()).map(|v| vec![v]).collect(),
            potential: phi.clone(),
        });
    }
    let words = admissible_words(g, k - 1);
    let index = |w: &[usize]| words.binary_search_by(|x| x.as_slice().cmp(w)).ok();
    let mut edges = Vec::new();
    let mut table = Vec::new();
    for (i, w) in words.iter().enumerate() {
        let last = *w.last().expect("nonempty word");
        for &v in g.successors(last) {
            let mut next: Vec<usize> = w[1..].to_vec();
            next.push(v);
            let j = index(&next).expect("overlap word is admissible");
            let mut full = w.clone();
            full.push(v);
            edges.push((i, j, g.multiplicity(last, v)));
            table.push((vec![i, j], phi.table()[&full]));
        }
    }
    let desc = crate::graph::GraphDescription {
        vertices: (0..words.len()).collect(),
        edges: edges
            .iter()
            .map(|&(u, v, m)| {
                if m == 1 {
                    vec![u as u64, v as u64]
                } else {
                    vec![u as u64, v as u64, m as u64]
                }
            })
            .collect(),
        ..Default::default()
    };
    let graph = DirectedGraph::build(&desc)?;
    let mut potential = CylinderPotential::from_table(&graph, 2, table)?;
    potential.beta = phi.beta;
    Ok(BlockRecoding {
        k,
        graph,
        words,
        potential,
    })
}

/// A two-sided potential depending on coordinates `-m..=m`, stored as a
/// table on admissible words `x_{-m} .. x_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoSidedPotential {
    pub m: usize,
    pub table: CylinderPotential,
}

impl TwoSidedPotential {
    pub fn new(g: &DirectedGraph, m: usize, f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        Ok(TwoSidedPotential {
            m,
            table: CylinderPotential::from_fn(g, 2 * m + 1, f)?,
        })
    }

    /// `psi(sigma^i x)` where `window` holds `x_{i-m} .. x_{i+m}`.
    pub fn value(&self, window: &[usize]) -> f64 {
        self.table.value(window).expect("admissible window")
    }
}

/// Output of the Sinai reduction.
#[derive(Clone, Debug)]
pub struct SinaiReduction {
    /// One-sided `psi~ = psi o sigma^m`, of range `2m + 1`.
    pub potential: CylinderPotential,
    pub m: usize,
    /// `|psi_n - psi~_n| <= telescope_bound` for every orbit and `n`.
    pub telescope_bound: f64,
}

/// `psi~(x_0..x_{2m}) = psi` evaluated with `x_m` as the centre.
pub fn sinai_reduction(psi: &TwoSidedPotential) -> SinaiReduction {
    SinaiReduction {
        potential: psi.table.clone(),
        m: psi.m,
        telescope_bound: 2.0 * psi.m as f64 * psi.table.sup_norm(),
    }
}

impl SinaiReduction {
    /// Largest `|psi_n(x) - psi~_n(x)|` along a finite path `y`, where
    /// `x_i = y_{i+m}`.
    pub fn max_birkhoff_gap(&self, psi: &TwoSidedPotential, path: &[usize]) -> f64 {
        let m = self.m;
        let width = 2 * m + 1;
        if path.len() < width + 2 * m {
            return 0.0;
        }
        let steps = path.len() - width - m + 1;
        let mut two = 0.0;
        let mut one = 0.0;
        let mut worst = 0.0f64;
        for i in 0..steps {
            two += psi.value(&path[i..i + width]);
            one += self.potential.value(&path[i + m..i + m + width]).expect("admissible");
            worst = worst.max((two - one).abs());
        }
        worst
    }
}
