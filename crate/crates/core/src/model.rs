//! Problem data: multiobjective graphs, OWA weights, image and Lorenz vectors.

use std::collections::HashSet;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, Rational};

/// Position of an edge in the instance's edge list (0-based).
pub type EdgeId = usize;

/// Per-edge cost, one integer per objective.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CostVector(Vec<i64>);

impl CostVector {
    pub fn new(components: Vec<i64>) -> Self {
        CostVector(components)
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> i64 {
        self.0.iter().sum()
    }

    /// Componentwise `self - other`.
    pub fn minus(&self, other: &CostVector) -> Vec<i64> {
        self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    /// 1-based endpoint.
    pub u: usize,
    /// 1-based endpoint.
    pub v: usize,
    pub cost: CostVector,
}

/// A connected simple graph whose edges carry `p` integer costs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    n: usize,
    p: usize,
    edges: Vec<Edge>,
}

impl Instance {
    /// Validates and builds an instance.
    ///
    /// Rejects self-loops, parallel edges, out-of-range vertices, negative
    /// costs, disconnected graphs, and cost magnitudes whose totals could
    /// overflow 64-bit arithmetic.
    pub fn new(n: usize, p: usize, edges: Vec<Edge>) -> Result<Self> {
        if n < 1 {
            return Err(Error::input("instance needs at least one vertex"));
        }
        if p < 2 {
            return Err(Error::input(format!("need at least 2 objectives, got {p}")));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut objective_totals = vec![0i64; p];
        let mut grand_total = 0i64;
        for (id, e) in edges.iter().enumerate() {
            if e.u < 1 || e.u > n || e.v < 1 || e.v > n {
                return Err(Error::input(format!(
                    "edge {id}: vertex out of range 1..{n} in [{},{}]",
                    e.u, e.v
                )));
            }
            if e.u == e.v {
                return Err(Error::input(format!("edge {id}: self-loop at vertex {}", e.u)));
            }
            if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(Error::input(format!(
                    "edge {id}: duplicate edge [{},{}]",
                    e.u, e.v
                )));
            }
            if e.cost.len() != p {
                return Err(Error::input(format!(
                    "edge {id}: expected {p} costs, got {}",
                    e.cost.len()
                )));
            }
            for (i, &c) in e.cost.as_slice().iter().enumerate() {
                if c < 0 {
                    return Err(Error::input(format!("edge {id}: negative cost {c}")));
                }
                objective_totals[i] = objective_totals[i]
                    .checked_add(c)
                    .ok_or_else(|| Error::input("cost totals overflow 64-bit range"))?;
                grand_total = grand_total
                    .checked_add(c)
                    .ok_or_else(|| Error::input("cost totals overflow 64-bit range"))?;
            }
        }
        let inst = Instance { n, p, edges };
        if !inst.is_connected() {
            return Err(Error::input("graph is not connected"));
        }
        Ok(inst)
    }

    /// Reads the whitespace-delimited text format: a header `p n m`
    /// followed by `m` lines `u v c1 .. cp`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing header line 'p n m'"))?;
        let head = parse_ints::<usize>(hline, header)?;
        let [p, n, m] = head[..] else {
            return Err(Error::parse(hline, "header must be 'p n m'"));
        };
        let mut edges = Vec::with_capacity(m);
        for (lineno, line) in lines {
            if edges.len() == m {
                return Err(Error::parse(lineno, format!("more than {m} edge lines")));
            }
            let vals = parse_ints::<i64>(lineno, line)?;
            if vals.len() != p + 2 {
                return Err(Error::parse(
                    lineno,
                    format!("expected {} fields, got {}", p + 2, vals.len()),
                ));
            }
            if vals[0] < 1 || vals[1] < 1 {
                return Err(Error::parse(lineno, "vertex ids are 1-based"));
            }
            edges.push(Edge {
                u: vals[0] as usize,
                v: vals[1] as usize,
                cost: CostVector::new(vals[2..].to_vec()),
            });
        }
        if edges.len() != m {
            return Err(Error::parse(
                text.lines().count().max(1),
                format!("expected {m} edges, found {}", edges.len()),
            ));
        }
        Instance::new(n, p, edges)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.p, self.n, self.edges.len());
        for e in &self.edges {
            out.push_str(&format!("{} {}", e.u, e.v));
            for c in e.cost.as_slice() {
                out.push_str(&format!(" {c}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    pub fn cost(&self, id: EdgeId) -> &[i64] {
        self.edges[id].cost.as_slice()
    }

    /// Id of the edge joining `u` and `v`, if any.
    pub fn find_edge(&self, u: usize, v: usize) -> Option<EdgeId> {
        self.edges
            .iter()
            .position(|e| (e.u == u && e.v == v) || (e.u == v && e.v == u))
    }

    /// 0-based endpoints of an edge.
    pub(crate) fn ends(&self, id: EdgeId) -> (usize, usize) {
        let e = &self.edges[id];
        (e.u - 1, e.v - 1)
    }

    fn is_connected(&self) -> bool {
        let mut uf = crate::mst::UnionFind::new(self.n);
        let mut comps = self.n;
        for id in 0..self.m() {
            let (a, b) = self.ends(id);
            if uf.union(a, b) {
                comps -= 1;
            }
        }
        comps == 1
    }
}

fn parse_ints<T: std::str::FromStr>(line: usize, text: &str) -> Result<Vec<T>> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<T>()
                .map_err(|_| Error::parse(line, format!("not an integer: '{tok}'")))
        })
        .collect()
}

/// How much structure a weight vector has; later stages depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WeightClass {
    /// `w_1 > w_2 > ... > w_p > 0`
    StrictlyDecreasing,
    /// `w_1 >= w_2 >= ... >= w_p`
    NonIncreasing,
    Arbitrary,
}

impl WeightClass {
    /// True when OWA is convex, i.e. the cut/cycle conditions apply.
    pub fn is_non_increasing(self) -> bool {
        !matches!(self, WeightClass::Arbitrary)
    }
}

impl fmt::Display for WeightClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightClass::StrictlyDecreasing => "strictly-decreasing",
            WeightClass::NonIncreasing => "non-increasing",
            WeightClass::Arbitrary => "arbitrary",
        })
    }
}

/// Normalized nonnegative OWA weights, stored exactly.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OwaWeights {
    w: Vec<Rational>,
    class: WeightClass,
}

impl OwaWeights {
    /// Validates `w` (nonnegative, summing to exactly one) and classifies it.
    pub fn new(w: Vec<Rational>) -> Result<Self> {
        if w.len() < 2 {
            return Err(Error::input(format!("need at least 2 weights, got {}", w.len())));
        }
        if let Some(neg) = w.iter().find(|x| **x < Rational::zero()) {
            return Err(Error::input(format!("negative weight {}", format_rational(neg))));
        }
        let total: Rational = w.iter().sum();
        if !total.is_one() {
            return Err(Error::input(format!(
                "weights sum to {}, not 1",
                format_rational(&total)
            )));
        }
        let strictly = w.windows(2).all(|p| p[0] > p[1]) && w.iter().all(|x| !x.is_zero());
        let non_inc = w.windows(2).all(|p| p[0] >= p[1]);
        let class = if strictly {
            WeightClass::StrictlyDecreasing
        } else if non_inc {
            WeightClass::NonIncreasing
        } else {
            WeightClass::Arbitrary
        };
        Ok(OwaWeights { w, class })
    }

    /// One decimal per line.
    pub fn parse(text: &str) -> Result<Self> {
        let w = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim().starts_with('#'))
            .flat_map(|(i, l)| l.split_whitespace().map(move |tok| (i + 1, tok)))
            .map(|(line, tok)| parse_rational(tok).map_err(|e| Error::parse(line, e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(w)
    }

    /// Parses a comma- or whitespace-separated list such as `0.5,0.3,0.2`.
    pub fn parse_list(text: &str) -> Result<Self> {
        let w = text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(parse_rational)
            .collect::<Result<Vec<_>>>()?;
        Self::new(w)
    }

    /// Hurwicz criterion `alpha * max + (1 - alpha) * min` as OWA weights.
    pub fn hurwicz(alpha: Rational, p: usize) -> Result<Self> {
        if alpha < Rational::zero() || alpha > Rational::one() {
            return Err(Error::input(format!(
                "Hurwicz alpha {} outside [0,1]",
                format_rational(&alpha)
            )));
        }
        if p < 2 {
            return Err(Error::input("Hurwicz weights need p >= 2"));
        }
        let mut w = vec![Rational::zero(); p];
        w[0] += alpha;
        w[p - 1] += Rational::one() - alpha;
        Self::new(w)
    }

    /// `w_i = 1/p`, the arithmetic mean.
    pub fn uniform(p: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::input("need p >= 2"));
        }
        Self::new(vec![Rational::new(1, p as i128); p])
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn class(&self) -> WeightClass {
        self.class
    }

    /// `W_k = w_1 + ... + w_k` for `k = 1..=p`.
    pub fn prefix_sums(&self) -> Vec<Rational> {
        self.w
            .iter()
            .scan(Rational::zero(), |acc, x| {
                *acc += x;
                Some(*acc)
            })
            .collect()
    }

    /// OWA value of `y`; errors on length mismatch.
    pub fn owa(&self, y: &[i64]) -> Result<Rational> {
        if y.len() != self.w.len() {
            return Err(Error::input(format!(
                "vector of length {} for {} weights",
                y.len(),
                self.w.len()
            )));
        }
        Ok(self.eval(y))
    }

    pub(crate) fn eval(&self, y: &[i64]) -> Rational {
        debug_assert_eq!(y.len(), self.w.len());
        let mut sorted = y.to_vec();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        self.w
            .iter()
            .zip(&sorted)
            .map(|(w, &v)| w * Rational::from_integer(v as i128))
            .sum()
    }

    pub fn to_text(&self) -> String {
        self.w.iter().map(|x| format_rational(x) + "\n").collect()
    }
}

/// Ordered weighted average of `y` under `w`.
pub fn owa(w: &OwaWeights, y: &ImageVector) -> Result<Rational> {
    w.owa(y.as_slice())
}

/// Componentwise totals of a tree's cost vectors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ImageVector(Vec<i64>);

impl ImageVector {
    pub fn new(y: Vec<i64>) -> Self {
        ImageVector(y)
    }

    pub fn zeros(p: usize) -> Self {
        ImageVector(vec![0; p])
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<i64> {
        self.0
    }
}

impl fmt::Display for ImageVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// `L_i = ` sum of the `i` largest components.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LorenzVector(Vec<i64>);

impl LorenzVector {
    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }
}

pub fn lorenz(y: &[i64]) -> LorenzVector {
    let mut sorted = y.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    LorenzVector(
        sorted
            .iter()
            .scan(0i64, |acc, v| {
                *acc += v;
                Some(*acc)
            })
            .collect(),
    )
}

/// Sum of the cost vectors of `edge_ids`.
pub fn tree_image(inst: &Instance, edge_ids: &[EdgeId]) -> Result<ImageVector> {
    let mut y = vec![0i64; inst.p()];
    for &id in edge_ids {
        if id >= inst.m() {
            return Err(Error::input(format!("unknown edge id {id}")));
        }
        for (acc, c) in y.iter_mut().zip(inst.cost(id)) {
            *acc += c;
        }
    }
    Ok(ImageVector(y))
}

/// A spanning tree together with its image and OWA value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Solution {
    edges: Vec<EdgeId>,
    image: ImageVector,
    value: Rational,
}

impl Solution {
    /// Checks that `edges` form a spanning tree and evaluates it.
    pub fn new(inst: &Instance, w: &OwaWeights, mut edges: Vec<EdgeId>) -> Result<Self> {
        edges.sort_unstable();
        edges.dedup();
        if edges.len() + 1 != inst.n() {
            return Err(Error::Validation(format!(
                "{} edges cannot span {} vertices",
                edges.len(),
                inst.n()
            )));
        }
        let mut uf = crate::mst::UnionFind::new(inst.n());
        for &id in &edges {
            if id >= inst.m() {
                return Err(Error::input(format!("unknown edge id {id}")));
            }
            let (a, b) = inst.ends(id);
            if !uf.union(a, b) {
                return Err(Error::Validation(format!("edge {id} closes a cycle")));
            }
        }
        Ok(Self::from_tree_unchecked(inst, w, edges))
    }

    pub(crate) fn from_tree_unchecked(inst: &Instance, w: &OwaWeights, edges: Vec<EdgeId>) -> Self {
        let image = tree_image(inst, &edges).expect("edge ids come from the instance");
        let value = w.eval(image.as_slice());
        Solution { edges, image, value }
    }

    /// Sorted edge ids.
    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn image(&self) -> &ImageVector {
        &self.image
    }

    pub fn value(&self) -> Rational {
        self.value
    }

    /// Strictly better value, ties broken by lexicographic edge set.
    pub fn improves_on(&self, other: &Solution) -> bool {
        (self.value, &self.edges) < (other.value, &other.edges)
    }
}

/// Objective order shared by every edge's cost vector, if one exists:
/// a permutation `pi` with `v[pi[0]] >= v[pi[1]] >= ...` for all edges.
pub fn comonotonic_order(inst: &Instance) -> Option<Vec<usize>> {
    let p = inst.p();
    // i must precede j when some edge has v_i > v_j; the instance is
    // comonotonic iff this relation is acyclic.
    let mut before = vec![vec![false; p]; p];
    for e in inst.edges() {
        let c = e.cost.as_slice();
        for i in 0..p {
            for j in 0..p {
                if c[i] > c[j] {
                    before[i][j] = true;
                }
            }
        }
    }
    let mut order = Vec::with_capacity(p);
    let mut placed = vec![false; p];
    while order.len() < p {
        let next = (0..p).find(|&j| !placed[j] && (0..p).all(|i| placed[i] || i == j || !before[i][j]))?;
        placed[next] = true;
        order.push(next);
    }
    Some(order)
}
