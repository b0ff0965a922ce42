//! Scalarized minimum spanning trees under an edge coloring, and k-best ranking.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Infeasibility, Result};
use crate::model::{EdgeId, Instance};
use crate::rational::{lcm_of_denominators, Rational};

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; false if they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeState {
    Uncolored,
    /// Mandatory.
    Blue,
    /// Forbidden.
    Red,
}

impl fmt::Display for EdgeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeState::Uncolored => "uncolored",
            EdgeState::Blue => "blue",
            EdgeState::Red => "red",
        })
    }
}

impl std::str::FromStr for EdgeState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uncolored" | "u" | "-" => Ok(EdgeState::Uncolored),
            "blue" | "b" => Ok(EdgeState::Blue),
            "red" | "r" => Ok(EdgeState::Red),
            other => Err(Error::input(format!("unknown edge state '{other}'"))),
        }
    }
}

/// Partial Blue/Red coloring; `T(c)` is the set of spanning trees that
/// contain every Blue edge and no Red edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeColoring {
    states: Vec<EdgeState>,
}

impl EdgeColoring {
    pub fn new(m: usize) -> Self {
        EdgeColoring {
            states: vec![EdgeState::Uncolored; m],
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn get(&self, e: EdgeId) -> EdgeState {
        self.states[e]
    }

    pub fn set(&mut self, e: EdgeId, state: EdgeState) {
        self.states[e] = state;
    }

    pub fn with(&self, e: EdgeId, state: EdgeState) -> Self {
        let mut c = self.clone();
        c.set(e, state);
        c
    }

    pub fn states(&self) -> &[EdgeState] {
        &self.states
    }

    pub fn is_blue(&self, e: EdgeId) -> bool {
        self.states[e] == EdgeState::Blue
    }

    pub fn is_red(&self, e: EdgeId) -> bool {
        self.states[e] == EdgeState::Red
    }

    pub fn is_uncolored(&self, e: EdgeId) -> bool {
        self.states[e] == EdgeState::Uncolored
    }

    pub fn blue_count(&self) -> usize {
        self.states.iter().filter(|s| **s == EdgeState::Blue).count()
    }

    pub fn red_count(&self) -> usize {
        self.states.iter().filter(|s| **s == EdgeState::Red).count()
    }

    pub fn edges_in(&self, state: EdgeState) -> impl Iterator<Item = EdgeId> + '_ {
        self.states
            .iter()
            .enumerate()
            .filter(move |(_, s)| **s == state)
            .map(|(e, _)| e)
    }

    /// True if every tree of `T(self)` also lies in `T(coarser)`.
    pub fn refines(&self, coarser: &EdgeColoring) -> bool {
        self.states
            .iter()
            .zip(&coarser.states)
            .all(|(a, b)| *b == EdgeState::Uncolored || a == b)
    }

    /// True if `edges` is consistent with the coloring.
    pub fn admits(&self, edges: &[EdgeId]) -> bool {
        let mut in_tree = vec![false; self.states.len()];
        for &e in edges {
            in_tree[e] = true;
        }
        self.states.iter().zip(&in_tree).all(|(s, &t)| match s {
            EdgeState::Blue => t,
            EdgeState::Red => !t,
            EdgeState::Uncolored => true,
        })
    }

    /// One `edge_id state` line per edge.
    pub fn to_text(&self) -> String {
        self.states
            .iter()
            .enumerate()
            .map(|(e, s)| format!("{e} {s}\n"))
            .collect()
    }

    pub fn parse(text: &str, m: usize) -> Result<Self> {
        let mut c = EdgeColoring::new(m);
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut toks = line.split_whitespace();
            let (Some(id), Some(state), None) = (toks.next(), toks.next(), toks.next()) else {
                return Err(Error::parse(i + 1, "expected 'edge_id state'"));
            };
            let id: EdgeId = id
                .parse()
                .map_err(|_| Error::parse(i + 1, format!("bad edge id '{id}'")))?;
            if id >= m {
                return Err(Error::parse(i + 1, format!("edge id {id} out of range")));
            }
            c.set(id, state.parse().map_err(|e: Error| Error::parse(i + 1, e.to_string()))?);
        }
        Ok(c)
    }
}

/// Checks that Blue edges are acyclic and non-Red edges connect the graph.
pub fn validate_coloring(inst: &Instance, coloring: &EdgeColoring) -> Result<(), Infeasibility> {
    let mut uf = UnionFind::new(inst.n());
    for e in coloring.edges_in(EdgeState::Blue) {
        let (a, b) = inst.ends(e);
        if !uf.union(a, b) {
            return Err(Infeasibility::BlueCycle(e));
        }
    }
    let mut comps = inst.n() - coloring.blue_count();
    for e in coloring.edges_in(EdgeState::Uncolored) {
        let (a, b) = inst.ends(e);
        if uf.union(a, b) {
            comps -= 1;
        }
    }
    if comps == 1 {
        Ok(())
    } else {
        Err(Infeasibility::Disconnected)
    }
}

/// Exact per-edge weights, held as integer numerators over one common
/// positive denominator so Kruskal compares plain integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalarWeights {
    numer: Vec<i128>,
    denom: i128,
    order: Vec<EdgeId>,
}

impl ScalarWeights {
    pub fn from_integers(numer: Vec<i128>) -> Self {
        Self::with_denominator(numer, 1)
    }

    pub(crate) fn with_denominator(numer: Vec<i128>, denom: i128) -> Self {
        debug_assert!(denom > 0);
        let mut order: Vec<EdgeId> = (0..numer.len()).collect();
        order.sort_by_key(|&e| (numer[e], e));
        ScalarWeights { numer, denom, order }
    }

    pub fn len(&self) -> usize {
        self.numer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numer.is_empty()
    }

    pub fn weight(&self, e: EdgeId) -> Rational {
        Rational::new(self.numer[e], self.denom)
    }

    /// Edge ids by non-decreasing weight, lower id first among ties.
    pub fn order(&self) -> &[EdgeId] {
        &self.order
    }

    fn total(&self, edges: &[EdgeId]) -> Rational {
        Rational::new(edges.iter().map(|&e| self.numer[e]).sum(), self.denom)
    }
}

/// Values every edge by `sum_i lambda_i * v_i^e`.
pub fn scalarize(inst: &Instance, lambda: &[Rational]) -> Result<ScalarWeights> {
    if lambda.len() != inst.p() {
        return Err(Error::input(format!(
            "scalarization has {} coefficients for {} objectives",
            lambda.len(),
            inst.p()
        )));
    }
    let denom = lcm_of_denominators(lambda);
    let coef: Vec<i128> = lambda
        .iter()
        .map(|l| l.numer() * (denom / l.denom()))
        .collect();
    let numer = inst
        .edges()
        .iter()
        .map(|e| {
            e.cost
                .as_slice()
                .iter()
                .zip(&coef)
                .map(|(&v, c)| v as i128 * c)
                .sum()
        })
        .collect();
    Ok(ScalarWeights::with_denominator(numer, denom))
}

/// Values every edge by `sum_i v_i^e`.
pub fn summed_weights(inst: &Instance) -> ScalarWeights {
    ScalarWeights::from_integers(inst.edges().iter().map(|e| e.cost.sum() as i128).collect())
}

/// Values every edge by its `i`-th cost.
pub fn objective_weights(inst: &Instance, i: usize) -> ScalarWeights {
    ScalarWeights::from_integers(inst.edges().iter().map(|e| e.cost.as_slice()[i] as i128).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpanningTree {
    /// Sorted edge ids.
    pub edges: Vec<EdgeId>,
    pub total: Rational,
}

impl Ord for SpanningTree {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.total, &self.edges).cmp(&(other.total, &other.edges))
    }
}

impl PartialOrd for SpanningTree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum spanning tree among the trees of `T(coloring)`.
///
/// Kruskal with Blue edges inserted first and Red edges skipped; equal
/// weights go to the lower edge id, so the result is deterministic.
pub fn mst(inst: &Instance, weights: &ScalarWeights, coloring: &EdgeColoring) -> Result<SpanningTree> {
    if weights.len() != inst.m() || coloring.len() != inst.m() {
        return Err(Error::input("weights/coloring length differs from edge count"));
    }
    kruskal(inst, weights, coloring).map_err(Error::from)
}

pub(crate) fn kruskal(
    inst: &Instance,
    weights: &ScalarWeights,
    coloring: &EdgeColoring,
) -> Result<SpanningTree, Infeasibility> {
    let n = inst.n();
    let mut uf = UnionFind::new(n);
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    for e in coloring.edges_in(EdgeState::Blue) {
        let (a, b) = inst.ends(e);
        if !uf.union(a, b) {
            return Err(Infeasibility::BlueCycle(e));
        }
        edges.push(e);
    }
    for &e in weights.order() {
        if edges.len() + 1 >= n {
            break;
        }
        if !coloring.is_uncolored(e) {
            continue;
        }
        let (a, b) = inst.ends(e);
        if uf.union(a, b) {
            edges.push(e);
        }
    }
    if edges.len() + 1 != n {
        return Err(Infeasibility::Disconnected);
    }
    edges.sort_unstable();
    let total = weights.total(&edges);
    Ok(SpanningTree { edges, total })
}

struct Subspace {
    tree: SpanningTree,
    coloring: EdgeColoring,
}

impl PartialEq for Subspace {
    fn eq(&self, other: &Self) -> bool {
        self.tree == other.tree
    }
}

impl Eq for Subspace {}

impl Ord for Subspace {
    // Reversed: BinaryHeap is a max-heap.
    fn cmp(&self, other: &Self) -> Ordering {
        other.tree.cmp(&self.tree)
    }
}

impl PartialOrd for Subspace {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The `k` cheapest spanning trees, by non-decreasing total.
///
/// Lawler-style partitioning: after a subspace's best tree is output, the
/// rest of that subspace is split by forbidding each of its free tree
/// edges in turn while fixing the earlier ones.
pub fn k_best(inst: &Instance, weights: &ScalarWeights, k: usize) -> Result<Vec<SpanningTree>> {
    k_best_within(inst, weights, &EdgeColoring::new(inst.m()), k)
}

/// [`k_best`] restricted to `T(coloring)`.
pub fn k_best_within(
    inst: &Instance,
    weights: &ScalarWeights,
    coloring: &EdgeColoring,
    k: usize,
) -> Result<Vec<SpanningTree>> {
    if k == 0 {
        return Err(Error::input("k must be at least 1"));
    }
    let root = mst(inst, weights, coloring)?;
    let mut heap = BinaryHeap::new();
    heap.push(Subspace {
        tree: root,
        coloring: coloring.clone(),
    });
    let mut out = Vec::with_capacity(k);
    while let Some(Subspace { tree, coloring }) = heap.pop() {
        let mut fixed = coloring;
        for &e in &tree.edges {
            if !fixed.is_uncolored(e) {
                continue;
            }
            let child = fixed.with(e, EdgeState::Red);
            if let Ok(t) = kruskal(inst, weights, &child) {
                heap.push(Subspace {
                    tree: t,
                    coloring: child,
                });
            }
            fixed.set(e, EdgeState::Blue);
        }
        out.push(tree);
        if out.len() == k {
            break;
        }
    }
    Ok(out)
}

/// Sum of all weights, handy as an upper bound on any tree total.
pub fn total_weight(weights: &ScalarWeights) -> Rational {
    (0..weights.len()).map(|e| weights.weight(e)).fold(Rational::zero(), |a, b| a + b)
}
