//! Brute-force ground truth for small instances.
//!
//! Nothing here calls into the solver's MST, bounding or OWA code, so the
//! checks stay independent of what they check.

use std::fmt;

use num_integer::Integer;
use num_traits::Zero;

use crate::error::{Error, Infeasibility, Result};
use crate::model::{EdgeId, Instance, OwaWeights, Solution};
use crate::mst::{EdgeColoring, EdgeState};
use crate::rational::{format_rational, Rational};
use crate::search::{SearchOutcome, Stage};

struct Frame {
    /// Component label per vertex (0-based).
    label: Vec<usize>,
    /// Edges whose ends lie in different components and are still allowed.
    active: Vec<EdgeId>,
    chosen: Vec<EdgeId>,
}

/// Every spanning tree of `T(coloring)` exactly once, as sorted edge ids.
///
/// Deletion/contraction: the lowest active edge is either contracted or,
/// unless it is a bridge, deleted. Every branch keeps the graph connected,
/// so each leaf is a tree and no work is spent on dead ends.
pub struct TreeEnumerator<'a> {
    inst: &'a Instance,
    stack: Vec<Frame>,
}

impl<'a> TreeEnumerator<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        Self::within(inst, &EdgeColoring::new(inst.m()))
    }

    pub fn within(inst: &'a Instance, coloring: &EdgeColoring) -> Self {
        let mut frame = Frame {
            label: (0..inst.n()).collect(),
            active: Vec::new(),
            chosen: Vec::new(),
        };
        let mut stack = Vec::new();
        let blue_ok = (0..inst.m())
            .filter(|&e| coloring.get(e) == EdgeState::Blue)
            .all(|e| contract(inst, &mut frame, e));
        if blue_ok {
            frame.active = (0..inst.m())
                .filter(|&e| coloring.get(e) == EdgeState::Uncolored)
                .collect();
            prune_loops(inst, &mut frame);
            if connected(inst, &frame.label, &frame.active, None) {
                stack.push(frame);
            }
        }
        TreeEnumerator { inst, stack }
    }
}

fn ends(inst: &Instance, e: EdgeId) -> (usize, usize) {
    let edge = &inst.edges()[e];
    (edge.u - 1, edge.v - 1)
}

/// Merges the components joined by `e`; false if they were already one.
fn contract(inst: &Instance, frame: &mut Frame, e: EdgeId) -> bool {
    let (a, b) = ends(inst, e);
    let (la, lb) = (frame.label[a], frame.label[b]);
    if la == lb {
        return false;
    }
    for l in frame.label.iter_mut() {
        if *l == lb {
            *l = la;
        }
    }
    frame.chosen.push(e);
    true
}

fn prune_loops(inst: &Instance, frame: &mut Frame) {
    let label = &frame.label;
    frame.active.retain(|&e| {
        let (a, b) = ends(inst, e);
        label[a] != label[b]
    });
}

/// Whether the components stay connected through `active`, minus `skip`.
fn connected(inst: &Instance, label: &[usize], active: &[EdgeId], skip: Option<EdgeId>) -> bool {
    let n = label.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &e in active {
        if Some(e) == skip {
            continue;
        }
        let (a, b) = ends(inst, e);
        adj[label[a]].push(label[b]);
        adj[label[b]].push(label[a]);
    }
    let mut is_comp = vec![false; n];
    for &l in label {
        is_comp[l] = true;
    }
    let comps = is_comp.iter().filter(|&&c| c).count();
    if comps <= 1 {
        return true;
    }
    let first = label[0];
    let mut seen = vec![false; n];
    seen[first] = true;
    let mut reached = 1;
    let mut todo = vec![first];
    while let Some(c) = todo.pop() {
        for &d in &adj[c] {
            if !seen[d] {
                seen[d] = true;
                reached += 1;
                todo.push(d);
            }
        }
    }
    reached == comps
}

impl Iterator for TreeEnumerator<'_> {
    type Item = Vec<EdgeId>;

    fn next(&mut self) -> Option<Vec<EdgeId>> {
        while let Some(mut frame) = self.stack.pop() {
            if frame.chosen.len() + 1 >= self.inst.n() {
                frame.chosen.sort_unstable();
                return Some(frame.chosen);
            }
            let e = frame.active[0];
            let bridge = !connected(self.inst, &frame.label, &frame.active, Some(e));
            if !bridge {
                let deleted = Frame {
                    label: frame.label.clone(),
                    active: frame.active[1..].to_vec(),
                    chosen: frame.chosen.clone(),
                };
                self.stack.push(deleted);
            }
            contract(self.inst, &mut frame, e);
            prune_loops(self.inst, &mut frame);
            self.stack.push(frame);
        }
        None
    }
}

pub fn enumerate_trees(inst: &Instance) -> TreeEnumerator<'_> {
    TreeEnumerator::new(inst)
}

/// Number of spanning trees by the matrix-tree theorem, using
/// fraction-free elimination on the reduced Laplacian.
pub fn count_trees_matrix_tree(inst: &Instance) -> i128 {
    let n = inst.n();
    if n <= 1 {
        return 1;
    }
    let k = n - 1;
    let mut a = vec![vec![0i128; k]; k];
    for e in 0..inst.m() {
        let (u, v) = ends(inst, e);
        for (x, y) in [(u, v), (v, u)] {
            if x > 0 {
                a[x - 1][x - 1] += 1;
                if y > 0 {
                    a[x - 1][y - 1] -= 1;
                }
            }
        }
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for i in 0..k {
        if a[i][i] == 0 {
            let Some(r) = (i + 1..k).find(|&r| a[r][i] != 0) else {
                return 0;
            };
            a.swap(i, r);
            sign = -sign;
        }
        for r in i + 1..k {
            for c in i + 1..k {
                a[r][c] = (a[r][c] * a[i][i] - a[r][i] * a[i][c]) / prev;
            }
            a[r][i] = 0;
        }
        prev = a[i][i];
    }
    sign * a[k - 1][k - 1]
}

/// OWA computed from scratch: scaled integer weights against the sorted image.
struct Scorer {
    weights: Vec<i128>,
    denom: i128,
}

impl Scorer {
    fn new(w: &OwaWeights) -> Self {
        let denom = w.as_slice().iter().fold(1i128, |acc, x| acc.lcm(x.denom()));
        let weights = w
            .as_slice()
            .iter()
            .map(|x| (x * Rational::from_integer(denom)).to_integer())
            .collect();
        Scorer { weights, denom }
    }

    fn scaled(&self, image: &[i64]) -> i128 {
        let mut y = image.to_vec();
        y.sort_unstable_by(|a, b| b.cmp(a));
        y.iter().zip(&self.weights).map(|(&v, &w)| v as i128 * w).sum()
    }

    fn value(&self, scaled: i128) -> Rational {
        Rational::new(scaled, self.denom)
    }
}

fn image_of(inst: &Instance, edges: &[EdgeId]) -> Vec<i64> {
    let mut y = vec![0i64; inst.p()];
    for &e in edges {
        for (acc, c) in y.iter_mut().zip(inst.edges()[e].cost.as_slice()) {
            *acc += c;
        }
    }
    y
}

fn infeasible(inst: &Instance, coloring: &EdgeColoring) -> Error {
    let mut label: Vec<usize> = (0..inst.n()).collect();
    for e in (0..inst.m()).filter(|&e| coloring.get(e) == EdgeState::Blue) {
        let (a, b) = ends(inst, e);
        let (la, lb) = (label[a], label[b]);
        if la == lb {
            return Error::Infeasible(Infeasibility::BlueCycle(e));
        }
        label.iter_mut().filter(|l| **l == lb).for_each(|l| *l = la);
    }
    Error::Infeasible(Infeasibility::Disconnected)
}

/// Minimum OWA tree of `T(coloring)` by exhaustive enumeration; ties go to
/// the lexicographically smallest edge set.
pub fn brute_force_optimum(inst: &Instance, w: &OwaWeights, coloring: &EdgeColoring) -> Result<Solution> {
    if w.len() != inst.p() {
        return Err(Error::Input(format!("{} weights for {} objectives", w.len(), inst.p())));
    }
    let scorer = Scorer::new(w);
    let best = TreeEnumerator::within(inst, coloring)
        .map(|t| (scorer.scaled(&image_of(inst, &t)), t))
        .min()
        .ok_or_else(|| infeasible(inst, coloring))?;
    let sol = Solution::new(inst, w, best.1)?;
    debug_assert_eq!(sol.value(), scorer.value(best.0));
    Ok(sol)
}

/// Every spanning tree of an instance with up to 64 edges, as edge masks
/// with their images, for repeated subproblem queries.
pub struct TreeTable {
    edges: usize,
    masks: Vec<u64>,
    images: Vec<Vec<i64>>,
}

fn mask_of(edges: &[EdgeId]) -> u64 {
    edges.iter().fold(0u64, |m, &e| m | (1 << e))
}

fn edges_of(mask: u64) -> Vec<EdgeId> {
    (0..64).filter(|&e| mask >> e & 1 == 1).collect()
}

impl TreeTable {
    pub fn new(inst: &Instance) -> Result<Self> {
        if inst.m() > 64 {
            return Err(Error::Input(format!("tree table supports at most 64 edges, got {}", inst.m())));
        }
        let mut masks = Vec::new();
        let mut images = Vec::new();
        for t in enumerate_trees(inst) {
            masks.push(mask_of(&t));
            images.push(image_of(inst, &t));
        }
        Ok(TreeTable {
            edges: inst.m(),
            masks,
            images,
        })
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    /// Trees sorted by OWA value under `w`, ties by edge set.
    pub fn rank(&self, w: &OwaWeights) -> RankedTrees {
        let scorer = Scorer::new(w);
        // Among equal-size edge sets, the lexicographically smaller one owns
        // the lowest edge where two masks differ, hence the larger
        // bit-reversed mask.
        let mut order: Vec<(i128, std::cmp::Reverse<u64>, u64)> = self
            .masks
            .iter()
            .zip(&self.images)
            .map(|(&m, y)| (scorer.scaled(y), std::cmp::Reverse(m.reverse_bits()), m))
            .collect();
        order.sort_unstable();
        let words = order.len().div_ceil(64);
        let mut contains = vec![vec![0u64; words]; self.edges];
        for (k, &(_, _, mask)) in order.iter().enumerate() {
            let mut rest = mask;
            while rest != 0 {
                contains[rest.trailing_zeros() as usize][k / 64] |= 1 << (k % 64);
                rest &= rest - 1;
            }
        }
        RankedTrees {
            scaled: order.iter().map(|(v, _, _)| *v).collect(),
            denom: scorer.denom,
            masks: order.into_iter().map(|(_, _, m)| m).collect(),
            contains,
        }
    }
}

/// A [`TreeTable`] ordered for one weight vector.
pub struct RankedTrees {
    masks: Vec<u64>,
    /// Values times `denom`, ascending.
    scaled: Vec<i128>,
    denom: i128,
    /// Per edge, a bitset over ranks of the trees containing it.
    contains: Vec<Vec<u64>>,
}

impl RankedTrees {
    /// Optimal value and tree of `T(coloring)`, `None` when it is empty.
    pub fn optimum(&self, coloring: &EdgeColoring) -> Option<(Rational, Vec<EdgeId>)> {
        let blue: Vec<&[u64]> = coloring.edges_in(EdgeState::Blue).map(|e| self.contains[e].as_slice()).collect();
        let red: Vec<&[u64]> = coloring.edges_in(EdgeState::Red).map(|e| self.contains[e].as_slice()).collect();
        let len = self.masks.len();
        for j in 0..len.div_ceil(64) {
            let mut acc = if (j + 1) * 64 > len { (1u64 << (len % 64)) - 1 } else { !0 };
            for b in &blue {
                acc &= b[j];
            }
            for r in &red {
                acc &= !r[j];
            }
            if acc != 0 {
                let k = j * 64 + acc.trailing_zeros() as usize;
                return Some((Rational::new(self.scaled[k], self.denom), edges_of(self.masks[k])));
            }
        }
        None
    }

    /// All tree values in ascending order.
    pub fn values(&self) -> Vec<Rational> {
        self.scaled.iter().map(|&v| Rational::new(v, self.denom)).collect()
    }
}

/// Membership in the scalarization polytope by checking every subset:
/// `lambda >= 0` and `sum_{j in S} lambda_j <= w_1 + .. + w_|S|`.
pub fn subset_lambda_feasible(lambda: &[Rational], w: &OwaWeights) -> bool {
    let p = lambda.len();
    if p != w.len() || lambda.iter().any(|l| *l < Rational::zero()) {
        return false;
    }
    let ws = w.as_slice();
    (1u32..1 << p).all(|s| {
        let members: Vec<usize> = (0..p).filter(|&j| s >> j & 1 == 1).collect();
        let lhs: Rational = members.iter().map(|&j| lambda[j]).sum();
        let cap: Rational = ws[..members.len()].iter().sum();
        lhs <= cap
    })
}

/// All permutations of `0..p` in lexicographic order.
pub fn permutations(p: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..p).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (1..p).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..p).rev().find(|&j| cur[j] > cur[i - 1]).expect("successor exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// The returned edge set is not a spanning tree of the instance.
    InvalidTree(String),
    /// The returned value differs from the true optimum.
    WrongValue { claimed: Rational, optimum: Rational },
    /// A bound exceeds the optimum of its subproblem.
    BoundTooHigh {
        stage: Stage,
        coloring: EdgeColoring,
        bound: Rational,
        optimum: Rational,
    },
    /// A fixing step lost every optimal tree.
    ColoringLosesOptimum {
        label: String,
        coloring: EdgeColoring,
        optimum: Option<Rational>,
        expected: Rational,
    },
    /// A discarded subproblem held a tree better than the returned one.
    PrunedBetter {
        coloring: EdgeColoring,
        optimum: Rational,
        returned: Rational,
    },
    /// An incumbent value below the optimum, which no tree can have.
    ImpossibleIncumbent { value: Rational, optimum: Rational },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = format_rational;
        match self {
            Violation::InvalidTree(msg) => write!(f, "invalid tree: {msg}"),
            Violation::WrongValue { claimed, optimum } => {
                write!(f, "value {} but optimum is {}", q(claimed), q(optimum))
            }
            Violation::BoundTooHigh {
                stage, bound, optimum, ..
            } => write!(f, "{stage:?} bound {} above subproblem optimum {}", q(bound), q(optimum)),
            Violation::ColoringLosesOptimum {
                label, optimum, expected, ..
            } => match optimum {
                Some(v) => write!(f, "{label} coloring raises optimum from {} to {}", q(expected), q(v)),
                None => write!(f, "{label} coloring leaves no tree"),
            },
            Violation::PrunedBetter { optimum, returned, .. } => {
                write!(f, "pruned subproblem has {} below returned {}", q(optimum), q(returned))
            }
            Violation::ImpossibleIncumbent { value, optimum } => {
                write!(f, "incumbent {} below optimum {}", q(value), q(optimum))
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub violations: Vec<Violation>,
    /// Bounds and colorings examined.
    pub checks: usize,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Audits a solver run against brute force. Bounds and colorings are
/// checked when the outcome carries a trace.
pub fn verify_run(inst: &Instance, w: &OwaWeights, outcome: &SearchOutcome) -> Result<VerifyReport> {
    let ranked = TreeTable::new(inst)?.rank(w);
    Ok(verify_run_ranked(inst, w, &ranked, outcome))
}

/// [`verify_run`] against a precomputed ranking of the instance's trees.
pub fn verify_run_ranked(inst: &Instance, w: &OwaWeights, ranked: &RankedTrees, outcome: &SearchOutcome) -> VerifyReport {
    let mut report = VerifyReport::default();
    let Some((optimum, _)) = ranked.optimum(&EdgeColoring::new(inst.m())) else {
        report.violations.push(Violation::InvalidTree("instance has no spanning tree".into()));
        return report;
    };
    let sol = &outcome.solution;
    match Solution::new(inst, w, sol.edges().to_vec()) {
        Err(e) => report.violations.push(Violation::InvalidTree(e.to_string())),
        Ok(fresh) if fresh.value() != sol.value() || fresh.image() != sol.image() => {
            report
                .violations
                .push(Violation::InvalidTree("stored image or value does not match the edges".into()));
        }
        Ok(_) => {}
    }
    let scorer = Scorer::new(w);
    let recomputed = scorer.value(scorer.scaled(&image_of(inst, sol.edges())));
    if recomputed != optimum {
        report.violations.push(Violation::WrongValue {
            claimed: recomputed,
            optimum,
        });
    }
    let Some(trace) = &outcome.trace else {
        return report;
    };
    for rec in &trace.bounds {
        report.checks += 1;
        if let Some((sub, _)) = ranked.optimum(&rec.coloring) {
            if rec.value > sub {
                report.violations.push(Violation::BoundTooHigh {
                    stage: rec.stage,
                    coloring: rec.coloring.clone(),
                    bound: rec.value,
                    optimum: sub,
                });
            }
            if rec.pruned && sub < recomputed {
                report.violations.push(Violation::PrunedBetter {
                    coloring: rec.coloring.clone(),
                    optimum: sub,
                    returned: recomputed,
                });
            }
        }
    }
    for (label, coloring) in &trace.colorings {
        report.checks += 1;
        let sub = ranked.optimum(coloring).map(|(v, _)| v);
        if sub != Some(optimum) {
            report.violations.push(Violation::ColoringLosesOptimum {
                label: label.clone(),
                coloring: coloring.clone(),
                optimum: sub,
                expected: optimum,
            });
        }
    }
    for &value in &trace.incumbents {
        if value < optimum {
            report.violations.push(Violation::ImpossibleIncumbent { value, optimum });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use crate::fixtures::{example1, example1_weights};
    use crate::generate::clique_with;
    use crate::model::Edge;

    fn path(n: usize) -> Instance {
        let edges = (1..n)
            .map(|u| Edge {
                u,
                v: u + 1,
                cost: crate::model::CostVector::new(vec![1, 2]),
            })
            .collect();
        Instance::new(n, 2, edges).unwrap()
    }

    #[test]
    fn clique_counts() {
        for (n, count) in [(2, 1), (3, 3), (4, 16), (5, 125), (6, 1296)] {
            let inst = clique_with(n, 2, |_, _| 1);
            let trees: Vec<_> = enumerate_trees(&inst).collect();
            assert_eq!(trees.len(), count);
            assert_eq!(trees.iter().collect::<HashSet<_>>().len(), count);
            assert_eq!(count_trees_matrix_tree(&inst), count as i128);
        }
    }

    #[test]
    fn tree_input_has_one_tree() {
        let inst = path(6);
        assert_eq!(enumerate_trees(&inst).collect::<Vec<_>>(), vec![vec![0, 1, 2, 3, 4]]);
        assert_eq!(count_trees_matrix_tree(&inst), 1);
    }

    #[test]
    fn example_optimum() {
        let inst = example1();
        let w = example1_weights();
        let sol = brute_force_optimum(&inst, &w, &EdgeColoring::new(6)).unwrap();
        assert_eq!(sol.value(), Rational::from_integer(7));
        assert_eq!(sol.edges(), &[0, 2, 3]);
        let red12 = EdgeColoring::new(6).with(0, EdgeState::Red);
        let sol = brute_force_optimum(&inst, &w, &red12).unwrap();
        assert_eq!(sol.value(), Rational::new(37, 5));
    }

    #[test]
    fn infeasible_colorings() {
        let inst = example1();
        let w = example1_weights();
        let cyc = EdgeColoring::new(6)
            .with(0, EdgeState::Blue)
            .with(1, EdgeState::Blue)
            .with(3, EdgeState::Blue);
        assert!(brute_force_optimum(&inst, &w, &cyc).unwrap_err().is_infeasible());
        let cut = EdgeColoring::new(6)
            .with(2, EdgeState::Red)
            .with(4, EdgeState::Red)
            .with(5, EdgeState::Red);
        assert!(brute_force_optimum(&inst, &w, &cut).unwrap_err().is_infeasible());
    }

    #[test]
    fn ranked_matches_brute_force() {
        let inst = example1();
        let w = example1_weights();
        let ranked = TreeTable::new(&inst).unwrap().rank(&w);
        assert_eq!(ranked.values().len(), 16);
        for e in 0..6 {
            for s in [EdgeState::Blue, EdgeState::Red] {
                let c = EdgeColoring::new(6).with(e, s);
                let bf = brute_force_optimum(&inst, &w, &c).ok().map(|s| (s.value(), s.edges().to_vec()));
                assert_eq!(ranked.optimum(&c), bf);
            }
        }
    }

    #[test]
    fn subset_check_small() {
        let w = example1_weights();
        let q = |a, b| Rational::new(a, b);
        assert!(subset_lambda_feasible(&[q(1, 2), q(3, 10), q(1, 5)], &w));
        assert!(subset_lambda_feasible(&[q(1, 3), q(1, 3), q(1, 3)], &w));
        assert!(!subset_lambda_feasible(&[q(1, 2), q(1, 2), q(0, 1)], &w));
        assert!(!subset_lambda_feasible(&[q(-1, 10), q(1, 2), q(0, 1)], &w));
    }

    #[test]
    fn permutation_listing() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(4).iter().collect::<HashSet<_>>().len(), 24);
        assert_eq!(permutations(1), vec![vec![0]]);
    }
}
