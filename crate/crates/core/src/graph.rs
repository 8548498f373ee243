//! Directed graphs, their strongly connected components, periods and
//! cyclic (spectral) decompositions.
//!
//! Vertices are dense integer ids `0..n`. Successor lists are kept sorted
//! and duplicate-free. An edge may carry an integer multiplicity greater
//! than one; this is only needed for bouquet truncations that have several
//! first-return loops of length one at the base vertex, and every counting
//! or transfer-matrix routine uses the multiplicity as the adjacency entry.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest graph (in vertices) that a bouquet truncation may expand into.
pub const MAX_BOUQUET_VERTICES: usize = 2_000_000;

/// Rule producing the number of first-return loops of each length at the
/// base vertex of a bouquet graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BouquetRule {
    /// `ceil(2^n / n^2)` loops of length `n` for `n >= m`, none below.
    CeilPow2OverNsq { m: usize },
    /// `2^(n - sqrt n)` loops when `n` is a perfect square, none otherwise.
    Ruette,
    /// Explicit loop counts `lengths[n-1]` for `n = 1..=lengths.len()`.
    Table { lengths: Vec<u64> },
}

/// Radius of convergence of a power series with nonnegative coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Radius {
    Finite(f64),
    Infinite,
}

impl Radius {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Radius::Infinite)
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Radius::Finite(r) => Some(r),
            Radius::Infinite => None,
        }
    }
}

impl BouquetRule {
    /// Number of first-return loops of length `n >= 1`.
    pub fn loops(&self, n: usize) -> Result<BigUint> {
        if n == 0 {
            return Err(Error::BouquetRuleUndefined(0));
        }
        match self {
            BouquetRule::CeilPow2OverNsq { m } => {
                if n < *m {
                    return Ok(BigUint::zero());
                }
                let pow = BigUint::one() << n;
                let nsq = BigUint::from(n) * BigUint::from(n);
                Ok((pow + &nsq - BigUint::one()) / nsq)
            }
            BouquetRule::Ruette => match perfect_sqrt(n) {
                Some(k) => Ok(BigUint::one() << (n - k)),
                None => Ok(BigUint::zero()),
            },
            BouquetRule::Table { lengths } => lengths
                .get(n - 1)
                .map(|&c| BigUint::from(c))
                .ok_or(Error::BouquetRuleUndefined(n)),
        }
    }

    /// Exact radius of convergence of `F(t) = sum loops(n) t^n`.
    pub fn radius(&self) -> Radius {
        match self {
            BouquetRule::CeilPow2OverNsq { .. } | BouquetRule::Ruette => Radius::Finite(0.5),
            BouquetRule::Table { .. } => Radius::Infinite,
        }
    }

    /// True when the rule has only finitely many nonzero loop counts.
    pub fn finite_support(&self) -> bool {
        matches!(self, BouquetRule::Table { .. })
    }

    /// Rigorous upper bound on `sum_{n > horizon} loops(n) R^n` at the
    /// radius of convergence `R`, when one is known in closed form.
    pub fn tail_bound_at_radius(&self, horizon: usize) -> Option<f64> {
        match self {
            // ceil(2^n/n^2) 2^-n <= n^-2 + 2^-n, and sum_{n>N} n^-2 <= 1/N.
            BouquetRule::CeilPow2OverNsq { m } => {
                let start = (horizon + 1).max(*m).max(1);
                let n0 = (start - 1).max(1) as f64;
                Some(1.0 / n0 + 2f64.powi(-(start as i32) + 1))
            }
            // sum_{k > K} 2^{k^2-k} 2^{-k^2} = 2^-K exactly.
            BouquetRule::Ruette => Some(2f64.powi(-(isqrt(horizon) as i32))),
            BouquetRule::Table { lengths } => {
                if horizon >= lengths.len() {
                    Some(0.0)
                } else {
                    None
                }
            }
        }
    }

    /// True when `tail_bound_at_radius` is an exact value, not only a bound.
    pub fn tail_is_exact(&self) -> bool {
        matches!(self, BouquetRule::Ruette | BouquetRule::Table { .. })
    }

    /// Exact tail of `sum_{n > horizon} n loops(n) R^n` when finite and known.
    pub fn moment_tail_at_radius(&self, horizon: usize) -> Option<f64> {
        match self {
            // sum_{k > K} k^2 2^-k = 2^-K (K^2 + 4K + 6).
            BouquetRule::Ruette => {
                let k = isqrt(horizon) as f64;
                Some(2f64.powi(-(k as i32)) * (k * k + 4.0 * k + 6.0))
            }
            BouquetRule::Table { lengths } if horizon >= lengths.len() => Some(0.0),
            _ => None,
        }
    }

    /// Exact Gurevich entropy when it follows from the closed form alone.
    pub fn closed_form_entropy(&self) -> Option<f64> {
        match self {
            // F(1/2) = 1 exactly, so r_a = R_a = 1/2.
            BouquetRule::Ruette => Some(std::f64::consts::LN_2),
            _ => None,
        }
    }

    /// Whether the closed-form tail bound certifies `F(R) < 1` style
    /// statements; tables have no radius to evaluate at.
    pub fn has_radius_tail(&self) -> bool {
        !matches!(self, BouquetRule::Table { .. })
    }
}

fn isqrt(n: usize) -> usize {
    let mut k = (n as f64).sqrt() as usize;
    while k * k > n {
        k -= 1;
    }
    while (k + 1) * (k + 1) <= n {
        k += 1;
    }
    k
}

fn perfect_sqrt(n: usize) -> Option<usize> {
    let k = isqrt(n);
    (k * k == n).then_some(k)
}

/// Parametric bouquet: loops of prescribed lengths meeting only at the
/// base vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BouquetSpec {
    /// Base vertex id; truncations always place the base at vertex 0.
    #[serde(default)]
    pub base: usize,
    pub rule: BouquetRule,
}

/// Serializable description of a graph. Keys are emitted in sorted order
/// and edges sorted ascending, so the JSON form is byte-stable.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDescription {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bouquet: Option<BouquetSpec>,
    #[serde(default)]
    pub edges: Vec<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    #[serde(default)]
    pub vertices: Vec<usize>,
}

impl GraphDescription {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("description serializes");
        s.push('\n');
        s
    }

    /// Explicit description listing `n` vertices and the given edges.
    pub fn explicit(n: usize, edges: &[(usize, usize)]) -> Self {
        GraphDescription {
            vertices: (0..n).collect(),
            edges: edges.iter().map(|&(u, v)| vec![u as u64, v as u64]).collect(),
            ..Default::default()
        }
    }

    pub fn bouquet(rule: BouquetRule, truncation: usize) -> Self {
        GraphDescription {
            bouquet: Some(BouquetSpec { base: 0, rule }),
            truncation: Some(truncation),
            ..Default::default()
        }
    }
}

/// Where a graph came from; truncations remember their parametric family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphOrigin {
    Explicit,
    BouquetTruncation { spec: BouquetSpec, truncation: usize },
}

/// A finite directed graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedGraph {
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    multiplicity: BTreeMap<(usize, usize), u32>,
    labels: Option<Vec<String>>,
    proper: bool,
    locally_finite: bool,
    origin: GraphOrigin,
}

impl DirectedGraph {
    /// Build a graph from an explicit edge list with unit multiplicities.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::from_weighted_edges(n, edges.iter().map(|&(u, v)| (u, v, 1)))
    }

    fn from_weighted_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, u32)>) -> Result<Self> {
        let mut succ = vec![Vec::new(); n];
        let mut pred = vec![Vec::new(); n];
        let mut seen = BTreeSet::new();
        let mut multiplicity = BTreeMap::new();
        for (u, v, m) in edges {
            for id in [u, v] {
                if id >= n {
                    return Err(Error::DanglingVertex { id, count: n });
                }
            }
            if !seen.insert((u, v)) {
                return Err(Error::DuplicateEdge(u, v));
            }
            if m == 0 {
                return Err(Error::Parse(format!("edge {u} -> {v} has multiplicity 0")));
            }
            if m > 1 {
                multiplicity.insert((u, v), m);
            }
            succ[u].push(v);
            pred[v].push(u);
        }
        for list in succ.iter_mut().chain(pred.iter_mut()) {
            list.sort_unstable();
        }
        let proper = (0..n).all(|v| !succ[v].is_empty() && !pred[v].is_empty());
        Ok(DirectedGraph {
            succ,
            pred,
            multiplicity,
            labels: None,
            proper,
            locally_finite: true,
            origin: GraphOrigin::Explicit,
        })
    }

    /// Validate a description and build the graph it denotes.
    pub fn build(desc: &GraphDescription) -> Result<Self> {
        if let Some(spec) = &desc.bouquet {
            if !desc.edges.is_empty() || !desc.vertices.is_empty() {
                return Err(Error::Parse(
                    "a bouquet description may not also list vertices or edges".into(),
                ));
            }
            let truncation = desc
                .truncation
                .ok_or_else(|| Error::Parse("a bouquet description needs a truncation bound".into()))?;
            return Self::bouquet(spec, truncation);
        }
        let n = desc.vertices.len();
        for (i, &v) in desc.vertices.iter().enumerate() {
            if v != i {
                return Err(Error::Parse(format!(
                    "vertex ids must be dense and sorted: position {i} holds {v}"
                )));
            }
        }
        let mut edges = Vec::with_capacity(desc.edges.len());
        for e in &desc.edges {
            let (u, v, m) = match e.as_slice() {
                [u, v] => (*u, *v, 1),
                [u, v, m] => (*u, *v, *m),
                _ => return Err(Error::Parse(format!("malformed edge {e:?}"))),
            };
            let m = u32::try_from(m).map_err(|_| Error::Parse(format!("multiplicity {m} too large")))?;
            edges.push((u as usize, v as usize, m));
        }
        let mut g = Self::from_weighted_edges(n, edges)?;
        if let Some(labels) = &desc.labels {
            if labels.len() != n {
                return Err(Error::Parse(format!("{} labels given for {n} vertices", labels.len())));
            }
            g.labels = Some(labels.clone());
        }
        Ok(g)
    }

    /// Expand a bouquet truncated at loop length `truncation` into a graph.
    ///
    /// The base is vertex 0. A loop of length `n >= 2` contributes `n - 1`
    /// fresh vertices chained from and back to the base; loops of length 1
    /// become a self-loop at the base with the corresponding multiplicity.
    pub fn bouquet(spec: &BouquetSpec, truncation: usize) -> Result<Self> {
        if spec.base != 0 {
            return Err(Error::Parse("bouquet base vertex must be 0".into()));
        }
        if truncation == 0 {
            return Err(Error::Parse("bouquet truncation must be at least 1".into()));
        }
        let mut counts = Vec::with_capacity(truncation);
        let mut total = 1usize;
        for n in 1..=truncation {
            let c = spec.rule.loops(n)?;
            let c = c.to_usize().filter(|&c| {
                c.checked_mul(n.saturating_sub(1))
                    .and_then(|extra| total.checked_add(extra))
                    .is_some_and(|t| t <= MAX_BOUQUET_VERTICES)
            });
            let c = c.ok_or_else(|| {
                Error::precondition(
                    "build_graph",
                    format!("bouquet truncated at {truncation} exceeds {MAX_BOUQUET_VERTICES} vertices"),
                )
            })?;
            total += c * (n - 1);
            counts.push(c);
        }
        let mut edges = Vec::new();
        let mut next = 1usize;
        for (i, &c) in counts.iter().enumerate() {
            let n = i + 1;
            if n == 1 {
                if c > 0 {
                    let m = u32::try_from(c).map_err(|_| Error::Parse("too many length-1 loops".into()))?;
                    edges.push((0, 0, m));
                }
                continue;
            }
            for _ in 0..c {
                let mut prev = 0usize;
                for _ in 0..n - 1 {
                    edges.push((prev, next, 1));
                    prev = next;
                    next += 1;
                }
                edges.push((prev, 0, 1));
            }
        }
        let mut g = Self::from_weighted_edges(total, edges)?;
        g.locally_finite = spec.rule.finite_support();
        g.origin = GraphOrigin::BouquetTruncation {
            spec: spec.clone(),
            truncation,
        };
        Ok(g)
    }

    /// Explicit description of this graph (bouquets are expanded).
    pub fn to_description(&self) -> GraphDescription {
        let mut edges = Vec::new();
        for (u, list) in self.succ.iter().enumerate() {
            for &v in list {
                let m = self.multiplicity(u, v);
                if m == 1 {
                    edges.push(vec![u as u64, v as u64]);
                } else {
                    edges.push(vec![u as u64, v as u64, m as u64]);
                }
            }
        }
        GraphDescription {
            bouquet: None,
            edges,
            labels: self.labels.clone(),
            truncation: None,
            vertices: (0..self.len()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn predecessors(&self, v: usize) -> &[usize] {
        &self.pred[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.succ[u].binary_search(&v).is_ok()
    }

    /// Number of parallel edges `u -> v` (0 if absent).
    pub fn multiplicity(&self, u: usize, v: usize) -> u32 {
        if !self.has_edge(u, v) {
            return 0;
        }
        self.multiplicity.get(&(u, v)).copied().unwrap_or(1)
    }

    pub fn has_multi_edges(&self) -> bool {
        !self.multiplicity.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    /// In-degree counted with multiplicity.
    pub fn in_degree(&self, v: usize) -> u64 {
        self.pred[v].iter().map(|&u| self.multiplicity(u, v) as u64).sum()
    }

    /// Out-degree counted with multiplicity.
    pub fn out_degree(&self, v: usize) -> u64 {
        self.succ[v].iter().map(|&w| self.multiplicity(v, w) as u64).sum()
    }

    pub fn is_proper(&self) -> bool {
        self.proper
    }

    /// For truncations this records whether the parent countable graph is
    /// locally finite; explicit finite graphs always are.
    pub fn is_locally_finite(&self) -> bool {
        self.locally_finite
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn origin(&self) -> &GraphOrigin {
        &self.origin
    }

    /// Adjacency entries with multiplicity, as `(u, v, count)` triples.
    pub fn weighted_edges(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(move |(u, l)| l.iter().map(move |&v| (u, v, self.multiplicity(u, v))))
    }

    /// Subgraph induced on `keep` (sorted), with vertices renumbered in order.
    pub fn induced(&self, keep: &[usize]) -> DirectedGraph {
        let mut index = vec![usize::MAX; self.len()];
        for (i, &v) in keep.iter().enumerate() {
            index[v] = i;
        }
        let edges: Vec<_> = keep
            .iter()
            .flat_map(|&u| {
                let index = &index;
                self.succ[u]
                    .iter()
                    .filter(move |&&v| index[v] != usize::MAX)
                    .map(move |&v| (index[u], index[v], self.multiplicity(u, v)))
            })
            .collect();
        DirectedGraph::from_weighted_edges(keep.len(), edges).expect("induced subgraph is valid")
    }

    /// True when the graph is a single strongly connected component with at
    /// least one cycle.
    pub fn is_irreducible(&self) -> bool {
        let comps = strongly_connected_components(self);
        comps.len() == 1 && !comps[0].wandering
    }

    /// True if the subgraph on `vertices` has no directed cycle.
    pub fn is_acyclic_on(&self, vertices: &[usize]) -> bool {
        let sub = self.induced(vertices);
        strongly_connected_components(&sub).iter().all(|c| c.wandering)
    }
}

/// A strongly connected component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Component {
    /// Sorted vertex ids.
    pub vertices: Vec<usize>,
    /// Singleton without a self-loop.
    pub wandering: bool,
}

impl Component {
    pub fn base(&self) -> usize {
        self.vertices[0]
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }
}

/// Tarjan's algorithm, iterative. Components are returned ordered by their
/// minimal vertex id.
pub fn strongly_connected_components(g: &DirectedGraph) -> Vec<Component> {
    let n = g.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0usize;
    // (vertex, next successor position)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if let Some(&w) = g.succ[v].get(*pos) {
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut vertices = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    vertices.push(w);
                    if w == v {
                        break;
                    }
                }
                vertices.sort_unstable();
                let wandering = vertices.len() == 1 && !g.has_edge(vertices[0], vertices[0]);
                comps.push(Component { vertices, wandering });
            }
        }
    }
    comps.sort_by_key(Component::base);
    comps
}

/// BFS levels from the component's minimal vertex, restricted to it.
fn levels(g: &DirectedGraph, comp: &Component) -> Vec<Option<usize>> {
    let mut level = vec![None; g.len()];
    let a = comp.base();
    level[a] = Some(0);
    let mut queue = VecDeque::from([a]);
    while let Some(u) = queue.pop_front() {
        let lu = level[u].expect("queued vertices have levels");
        for &v in g.successors(u) {
            if comp.contains(v) && level[v].is_none() {
                level[v] = Some(lu + 1);
                queue.push_back(v);
            }
        }
    }
    level
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Period of a strongly connected component: gcd of its cycle lengths.
pub fn period(g: &DirectedGraph, comp: &Component) -> Result<usize> {
    if comp.wandering {
        return Err(Error::Acyclic { op: "period" });
    }
    let level = levels(g, comp);
    let mut p = 0usize;
    for &u in &comp.vertices {
        let lu = level[u].expect("component is strongly connected");
        for &v in g.successors(u) {
            if !comp.contains(v) {
                continue;
            }
            let lv = level[v].expect("component is strongly connected");
            p = gcd(p, (lu + 1).abs_diff(lv));
        }
    }
    if p == 0 {
        return Err(Error::Acyclic { op: "period" });
    }
    Ok(p)
}

/// Cyclic classes `S_0, ..., S_{p-1}` of an irreducible component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpectralDecomposition {
    pub period: usize,
    pub classes: Vec<Vec<usize>>,
}

impl SpectralDecomposition {
    /// Index of the class holding `v`, if `v` is in the component.
    pub fn class_of(&self, v: usize) -> Option<usize> {
        self.classes.iter().position(|c| c.binary_search(&v).is_ok())
    }
}

/// `S_i` holds the vertices reachable from the base in `n = i mod p` steps.
pub fn spectral_decomposition(g: &DirectedGraph, comp: &Component) -> Result<SpectralDecomposition> {
    let p = period(g, comp)?;
    let level = levels(g, comp);
    let mut classes = vec![Vec::new(); p];
    for &v in &comp.vertices {
        let l = level[v].expect("component is strongly connected");
        classes[l % p].push(v);
    }
    Ok(SpectralDecomposition { period: p, classes })
}

/// The unique non-wandering component of an irreducible graph.
pub(crate) fn irreducible_component(g: &DirectedGraph, op: &'static str) -> Result<Component> {
    let mut comps = strongly_connected_components(g);
    if comps.len() != 1 || comps[0].wandering {
        return Err(Error::Reducible { op });
    }
    Ok(comps.remove(0))
}

/// Component containing `a`, which must not be wandering.
pub(crate) fn component_containing(g: &DirectedGraph, a: usize, op: &'static str) -> Result<Component> {
    if a >= g.len() {
        return Err(Error::DanglingVertex { id: a, count: g.len() });
    }
    let comp = strongly_connected_components(g)
        .into_iter()
        .find(|c| c.contains(a))
        .expect("every vertex lies in a component");
    if comp.wandering {
        return Err(Error::Wandering { op, vertex: a });
    }
    Ok(comp)
}

/// Common small graphs used throughout tests, examples and benchmarks.
pub mod families {
    use super::DirectedGraph;

    /// `0 -> 0, 0 -> 1, 1 -> 0`.
    pub fn golden_mean() -> DirectedGraph {
        DirectedGraph::from_edges(2, &[(0, 0), (0, 1), (1, 0)]).unwrap()
    }

    /// Complete graph with loops on `k` symbols.
    pub fn full_shift(k: usize) -> DirectedGraph {
        let edges: Vec<_> = (0..k).flat_map(|u| (0..k).map(move |v| (u, v))).collect();
        DirectedGraph::from_edges(k, &edges).unwrap()
    }

    /// Directed cycle `0 -> 1 -> ... -> k-1 -> 0`.
    pub fn cycle(k: usize) -> DirectedGraph {
        let edges: Vec<_> = (0..k).map(|u| (u, (u + 1) % k)).collect();
        DirectedGraph::from_edges(k, &edges).unwrap()
    }

    /// Complete bipartite 4-cycle `{0,2} <-> {1,3}`; period 2.
    pub fn bipartite_square() -> DirectedGraph {
        DirectedGraph::from_edges(4, &[(0, 1), (0, 3), (1, 0), (1, 2), (2, 1), (2, 3), (3, 0), (3, 2)]).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::families::*;
    use super::*;

    #[test]
    fn golden_mean_is_proper_and_irreducible() {
        let g = golden_mean();
        assert_eq!(g.len(), 2);
        assert!(g.is_proper());
        assert!(g.is_irreducible());
        assert_eq!(g.successors(0), &[0, 1]);
    }

    #[test]
    fn full_shift_degrees() {
        let g = full_shift(2);
        assert!(g.is_proper());
        for v in 0..2 {
            assert_eq!(g.in_degree(v), 2);
            assert_eq!(g.out_degree(v), 2);
        }
    }

    #[test]
    fn bouquet_in_degree_counts_all_petals() {
        let rule = BouquetRule::CeilPow2OverNsq { m: 1 };
        let g = DirectedGraph::build(&GraphDescription::bouquet(rule.clone(), 12)).unwrap();
        let total: u64 = (1..=12).map(|n| rule.loops(n).unwrap().to_u64().unwrap()).sum();
        assert_eq!(g.in_degree(0), total);
        assert_eq!(g.out_degree(0), total);
        assert!(g.is_proper());
        assert!(!g.is_locally_finite());
        assert_eq!(g.multiplicity(0, 0), 2);
    }

    #[test]
    fn rejects_duplicates_and_dangling_ids() {
        let mut d = GraphDescription::explicit(2, &[(0, 1), (0, 1)]);
        assert_eq!(DirectedGraph::build(&d), Err(Error::DuplicateEdge(0, 1)));
        d.edges = vec![vec![0, 5]];
        assert!(matches!(
            DirectedGraph::build(&d),
            Err(Error::DanglingVertex { id: 5, .. })
        ));
        let table = GraphDescription::bouquet(BouquetRule::Table { lengths: vec![1, 1] }, 4);
        assert_eq!(DirectedGraph::build(&table), Err(Error::BouquetRuleUndefined(3)));
    }

    #[test]
    fn scc_examples() {
        assert_eq!(strongly_connected_components(&golden_mean()).len(), 1);
        let two =
            DirectedGraph::from_edges(4, &[(0, 0), (0, 1), (1, 0), (1, 1), (2, 2), (2, 3), (3, 2), (3, 3)]).unwrap();
        assert_eq!(strongly_connected_components(&two).len(), 2);
        let chain = DirectedGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let comps = strongly_connected_components(&chain);
        assert_eq!(comps.len(), 3);
        assert!(comps.iter().all(|c| c.wandering));
        assert_eq!(comps[2].vertices, vec![2]);
    }

    #[test]
    fn periods() {
        let p = |g: &DirectedGraph| period(g, &strongly_connected_components(g)[0]).unwrap();
        assert_eq!(p(&full_shift(2)), 1);
        assert_eq!(p(&cycle(3)), 3);
        assert_eq!(p(&golden_mean()), 1);
        assert_eq!(p(&bipartite_square()), 2);
        let chain = DirectedGraph::from_edges(2, &[(0, 1)]).unwrap();
        let c = &strongly_connected_components(&chain)[0];
        assert_eq!(period(&chain, c), Err(Error::Acyclic { op: "period" }));
    }

    #[test]
    fn decompositions() {
        let d = |g: &DirectedGraph| spectral_decomposition(g, &strongly_connected_components(g)[0]).unwrap();
        assert_eq!(d(&cycle(3)).classes, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(d(&full_shift(2)).classes, vec![vec![0, 1]]);
        let sq = d(&bipartite_square());
        assert_eq!(sq.period, 2);
        assert_eq!(sq.classes, vec![vec![0, 2], vec![1, 3]]);
    }

    #[test]
    fn description_json_is_byte_stable() {
        let d = GraphDescription::explicit(2, &[(0, 0), (0, 1), (1, 0)]);
        let text = d.to_json();
        assert_eq!(GraphDescription::from_json(&text).unwrap().to_json(), text);
        assert!(text.find("\"edges\"").unwrap() < text.find("\"vertices\"").unwrap());
    }
}
