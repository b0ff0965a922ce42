//! Lower bounds on `min OWA(f(T))` over a colored subproblem `T(c)`.
//!
//! Two relaxations are available:
//!
//! * **Image set.** Replace the set of tree images by the polyhedron
//!   `{y : y_i >= b_i, sum_i y_i >= b_0}` built from the ideal point, and
//!   minimize OWA over it. OWA is linear on each comonotonic cone, and the
//!   cone in which `b` itself is sorted always holds an optimum, so a
//!   single chain-constrained LP gives the exact relaxed value.
//! * **Objective function.** Any `lambda >= 0` whose `k` largest
//!   components never sum past `w_1 + .. + w_k` satisfies
//!   `lambda . y <= OWA(y)` for `y >= 0`, so the scalarized MST value
//!   `z(lambda)` is a bound. We push `z` upward with projected
//!   supergradient steps and keep the best certified value.
//!
//! Both bounds hold for any nonnegative weights. Every spanning tree met
//! along the way is returned as a witness for incumbent updates.

use std::collections::{HashMap, HashSet};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome};
use crate::model::{EdgeId, Instance, OwaWeights, Solution};
use crate::mst::{self, EdgeColoring, ScalarWeights, SpanningTree};
use crate::rational::{lcm_of_denominators, Rational};

/// Per-objective minima `b_i` and the minimum `b_0` of the summed cost.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IdealPoint {
    pub b: Vec<i64>,
    pub b0: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMethod {
    /// Image-set relaxation.
    Image,
    /// Objective-function relaxation.
    Objective,
}

impl std::str::FromStr for BoundMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "image" => Ok(BoundMethod::Image),
            "objective" => Ok(BoundMethod::Objective),
            other => Err(Error::input(format!("unknown bound method '{other}'"))),
        }
    }
}

impl std::fmt::Display for BoundMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BoundMethod::Image => "image",
            BoundMethod::Objective => "objective",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundResult {
    pub value: Rational,
    /// Scalarization certifying `value` (objective relaxation only).
    pub lambda: Option<Vec<Rational>>,
    /// Distinct spanning trees of the subproblem found while bounding.
    pub witnesses: Vec<Solution>,
}

impl BoundResult {
    /// Best witness by OWA value (ties: lexicographic edge set).
    pub fn best_witness(&self) -> Option<&Solution> {
        self.witnesses
            .iter()
            .min_by(|a, b| (a.value(), a.edges()).cmp(&(b.value(), b.edges())))
    }
}

/// `p + 1` colored MSTs: one per objective, one for the summed cost.
/// The witnesses come back in that order.
pub fn ideal_point(inst: &Instance, coloring: &EdgeColoring) -> Result<(IdealPoint, Vec<Vec<EdgeId>>)> {
    let weights = ideal_weights(inst);
    ideal_point_with(inst, coloring, &weights)
}

fn ideal_weights(inst: &Instance) -> Vec<ScalarWeights> {
    (0..inst.p())
        .map(|i| mst::objective_weights(inst, i))
        .chain(std::iter::once(mst::summed_weights(inst)))
        .collect()
}

fn ideal_point_with(
    inst: &Instance,
    coloring: &EdgeColoring,
    weights: &[ScalarWeights],
) -> Result<(IdealPoint, Vec<Vec<EdgeId>>)> {
    let mut totals = Vec::with_capacity(weights.len());
    let mut trees = Vec::with_capacity(weights.len());
    for w in weights {
        let t = mst::mst(inst, w, coloring)?;
        totals.push(t.total.to_integer() as i64);
        trees.push(t.edges);
    }
    let b0 = totals.pop().expect("p + 1 entries");
    Ok((IdealPoint { b: totals, b0 }, trees))
}

/// Optimal value of the relaxation restricted to the cone where
/// `y_{perm[0]} >= y_{perm[1]} >= ...`:
///
/// `min sum_i w_i y_{perm[i]}` s.t. the chain, `y >= b`, `sum y >= b_0`.
pub fn image_relaxation_for_order(ideal: &IdealPoint, w: &OwaWeights, perm: &[usize]) -> Rational {
    let p = ideal.b.len();
    assert_eq!(perm.len(), p, "permutation length");
    assert_eq!(w.len(), p, "weight length");
    // Shift to slack variables s = y - b >= 0 and maximize the negated cost.
    let ws = w.as_slice();
    let mut objective = vec![Rational::zero(); p];
    let mut base = Rational::zero();
    for (i, &j) in perm.iter().enumerate() {
        objective[j] = -ws[i];
        base += ws[i] * Rational::from_integer(ideal.b[j] as i128);
    }
    let mut lp = LinearProgram::new(objective);
    for k in 0..p.saturating_sub(1) {
        let (hi, lo) = (perm[k], perm[k + 1]);
        let mut row = vec![Rational::zero(); p];
        row[lo] = Rational::one();
        row[hi] = -Rational::one();
        lp.add_row(row, Rational::from_integer((ideal.b[hi] - ideal.b[lo]) as i128));
    }
    let sum_b: i128 = ideal.b.iter().map(|&x| x as i128).sum();
    lp.add_row(vec![-Rational::one(); p], Rational::from_integer(sum_b - ideal.b0 as i128));
    match lp.solve() {
        LpOutcome::Optimal { value, .. } => base - value,
        // Raising every y equally satisfies all rows, and the cost is
        // bounded below by w.b because w >= 0.
        other => unreachable!("relaxation LP is feasible and bounded: {other:?}"),
    }
}

/// Permutation sorting `b` non-increasingly, lower index first on ties.
pub fn sorting_permutation(b: &[i64]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..b.len()).collect();
    perm.sort_by(|&i, &j| b[j].cmp(&b[i]).then(i.cmp(&j)));
    perm
}

/// Image-set relaxation bound from an ideal point.
pub fn bound_image_relaxation(ideal: &IdealPoint, w: &OwaWeights) -> Rational {
    image_relaxation_for_order(ideal, w, &sorting_permutation(&ideal.b))
}

/// Image-set bound on `T(coloring)` together with the `p + 1` ideal-point trees.
pub fn bound_image(inst: &Instance, coloring: &EdgeColoring, w: &OwaWeights) -> Result<BoundResult> {
    let (ideal, trees) = ideal_point(inst, coloring)?;
    Ok(image_result(inst, w, &ideal, trees))
}

fn image_result(inst: &Instance, w: &OwaWeights, ideal: &IdealPoint, trees: Vec<Vec<EdgeId>>) -> BoundResult {
    let mut witnesses: Vec<Solution> = Vec::with_capacity(trees.len());
    for t in trees {
        if witnesses.iter().all(|s| s.edges() != t.as_slice()) {
            witnesses.push(Solution::from_tree_unchecked(inst, w, t));
        }
    }
    BoundResult {
        value: bound_image_relaxation(ideal, w),
        lambda: None,
        witnesses,
    }
}

/// Membership in the scalarization polytope: `lambda >= 0` and, for every
/// `k`, the `k` largest components sum to at most `w_1 + .. + w_k`.
///
/// The cap depends only on the subset size, so the sorted prefixes are the
/// binding subsets.
pub fn lambda_feasible(lambda: &[Rational], w: &OwaWeights) -> bool {
    if lambda.len() != w.len() || lambda.iter().any(|l| *l < Rational::zero()) {
        return false;
    }
    let mut sorted = lambda.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut acc = Rational::zero();
    sorted
        .iter()
        .zip(w.prefix_sums())
        .all(|(l, cap)| {
            acc += l;
            acc <= cap
        })
}

/// `z(lambda) = min over T(c) of lambda . f(T)`, with the minimizing tree.
pub fn z_value(inst: &Instance, coloring: &EdgeColoring, lambda: &[Rational]) -> Result<(Rational, SpanningTree)> {
    let weights = mst::scalarize(inst, lambda)?;
    let tree = mst::mst(inst, &weights, coloring)?;
    Ok((tree.total, tree))
}

/// When a bound computation may stop early.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cutoff {
    /// Stop once the bound reaches the value (enough to prune).
    AtLeast(Rational),
    /// Stop once the bound strictly exceeds the value.
    Above(Rational),
}

impl Cutoff {
    pub fn reached(&self, bound: &Rational) -> bool {
        match self {
            Cutoff::AtLeast(v) => bound >= v,
            Cutoff::Above(v) => bound > v,
        }
    }
}

/// Schedule of the supergradient ascent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectiveBoundConfig {
    pub max_iterations: usize,
    /// Stop after this many iterations without improving the best bound.
    pub stall_iterations: usize,
    /// Rounds of prefix repair before falling back to radial scaling.
    pub repair_rounds: usize,
    pub cutoff: Option<Cutoff>,
}

impl Default for ObjectiveBoundConfig {
    fn default() -> Self {
        ObjectiveBoundConfig {
            max_iterations: 200,
            stall_iterations: 25,
            repair_rounds: 50,
            cutoff: None,
        }
    }
}

/// Resolution of the lambda grid beyond the weights' own denominators.
const LAMBDA_GRID: i128 = 1 << 20;

/// Objective-function relaxation bound on `T(coloring)`.
///
/// Starts from `lambda_i = min_k W_k / k`, which is always feasible, and
/// alternates a supergradient step (the current MST image) with a repair
/// back into the polytope. Each MST image `y` also proposes the
/// scalarization that puts `w` on the components of `y` in sorted order,
/// whose value `z` equals `OWA(y)` whenever that tree is optimal. Only
/// values at verified-feasible lambdas are accepted.
pub fn bound_objective_relaxation(
    inst: &Instance,
    coloring: &EdgeColoring,
    w: &OwaWeights,
    cfg: &ObjectiveBoundConfig,
) -> Result<BoundResult> {
    if w.len() != inst.p() {
        return Err(Error::input("weight count differs from objective count"));
    }
    mst::validate_coloring(inst, coloring)?;
    let mut run = Ascent::new(inst, coloring, w, cfg);
    run.execute()?;
    Ok(run.finish())
}

/// Lambdas are held as integer numerators over the fixed denominator
/// `grid`, a multiple of every weight denominator, so the caps are integers
/// and every feasibility test and `z` evaluation is exact and cheap.
struct Ascent<'a> {
    inst: &'a Instance,
    coloring: &'a EdgeColoring,
    w: &'a OwaWeights,
    cfg: &'a ObjectiveBoundConfig,
    grid: i128,
    /// `W_k * grid`.
    caps: Vec<i128>,
    /// `w_k * grid`.
    weights: Vec<i128>,
    best: Rational,
    best_lambda: Vec<i128>,
    best_witness_value: Option<Rational>,
    witnesses: Vec<Solution>,
    seen_trees: HashSet<Vec<EdgeId>>,
    seen_lambdas: HashSet<Vec<i128>>,
}

impl<'a> Ascent<'a> {
    fn new(inst: &'a Instance, coloring: &'a EdgeColoring, w: &'a OwaWeights, cfg: &'a ObjectiveBoundConfig) -> Self {
        let grid = lcm_of_denominators(w.as_slice()) * LAMBDA_GRID;
        let scale = |r: &Rational| (r * Rational::from_integer(grid)).to_integer();
        Ascent {
            inst,
            coloring,
            w,
            cfg,
            grid,
            caps: w.prefix_sums().iter().map(scale).collect(),
            weights: w.as_slice().iter().map(scale).collect(),
            best: Rational::zero(),
            best_lambda: vec![0; inst.p()],
            best_witness_value: None,
            witnesses: Vec::new(),
            seen_trees: HashSet::new(),
            seen_lambdas: HashSet::new(),
        }
    }

    fn start(&self) -> Vec<i128> {
        let c = self
            .caps
            .iter()
            .enumerate()
            .map(|(k, cap)| cap.div_euclid(k as i128 + 1))
            .min()
            .expect("p >= 2");
        vec![c; self.inst.p()]
    }

    fn feasible(&self, lambda: &[i128]) -> bool {
        if lambda.iter().any(|&l| l < 0) {
            return false;
        }
        let mut sorted = lambda.to_vec();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let mut acc = 0;
        sorted.iter().zip(&self.caps).all(|(l, cap)| {
            acc += l;
            acc <= *cap
        })
    }

    /// Evaluates `z` at a feasible lambda, records the tree, updates the best.
    fn probe(&mut self, lambda: &[i128]) -> Result<(bool, Vec<i64>)> {
        debug_assert!(self.feasible(lambda));
        let numer = self
            .inst
            .edges()
            .iter()
            .map(|e| e.cost.as_slice().iter().zip(lambda).map(|(&v, l)| v as i128 * l).sum())
            .collect();
        let weights = ScalarWeights::with_denominator(numer, self.grid);
        let tree = mst::mst(self.inst, &weights, self.coloring)?;
        let image: Vec<i64> = (0..self.inst.p())
            .map(|i| tree.edges.iter().map(|&e| self.inst.cost(e)[i]).sum())
            .collect();
        if self.seen_trees.insert(tree.edges.clone()) {
            let sol = Solution::from_tree_unchecked(self.inst, self.w, tree.edges);
            if self.best_witness_value.is_none_or(|v| sol.value() < v) {
                self.best_witness_value = Some(sol.value());
            }
            self.witnesses.push(sol);
        }
        let improved = tree.total > self.best;
        if improved {
            self.best = tree.total;
            self.best_lambda = lambda.to_vec();
        }
        Ok((improved, image))
    }

    fn done(&self) -> bool {
        // The bound never exceeds a witness value; equality certifies it.
        self.best_witness_value.is_some_and(|v| self.best >= v)
            || self.cfg.cutoff.is_some_and(|c| c.reached(&self.best))
    }

    fn execute(&mut self) -> Result<()> {
        let mut lambda = self.start();
        self.seen_lambdas.insert(lambda.clone());
        let (_, mut image) = self.probe(&lambda)?;
        let mut stall = 0;
        for t in 1..=self.cfg.max_iterations {
            if self.done() {
                break;
            }
            let mut improved = false;

            let sorted = self.sorted_weights_for(&image);
            if let Some(cand) = self.make_feasible(sorted) {
                if self.seen_lambdas.insert(cand.clone()) {
                    let (imp, _) = self.probe(&cand)?;
                    improved |= imp;
                    if self.done() {
                        break;
                    }
                }
            }

            // Step 1/t along y / max(y).
            let scale = image.iter().copied().max().unwrap_or(0).max(1) as i128 * t as i128;
            let raw: Vec<i128> = lambda
                .iter()
                .zip(&image)
                .map(|(l, &yi)| l + (yi as i128 * self.grid).div_euclid(scale))
                .collect();
            let next = self.make_feasible(raw).unwrap_or_else(|| lambda.clone());
            let (imp, next_image) = if self.seen_lambdas.insert(next.clone()) {
                self.probe(&next)?
            } else {
                (false, image.clone())
            };
            improved |= imp;
            lambda = next;
            image = next_image;

            stall = if improved { 0 } else { stall + 1 };
            if stall >= self.cfg.stall_iterations {
                break;
            }
        }
        Ok(())
    }

    /// `w` placed on the components of `y` from largest to smallest.
    fn sorted_weights_for(&self, y: &[i64]) -> Vec<i128> {
        let mut lambda = vec![0; y.len()];
        for (rank, idx) in sorting_permutation(y).into_iter().enumerate() {
            lambda[idx] = self.weights[rank];
        }
        lambda
    }

    /// Repairs `lambda` into the polytope: subtract each violated prefix's
    /// excess from its members, and if that does not settle, scale down.
    fn make_feasible(&self, mut lambda: Vec<i128>) -> Option<Vec<i128>> {
        let p = lambda.len();
        for _ in 0..self.cfg.repair_rounds {
            clip_negative(&mut lambda);
            if self.feasible(&lambda) {
                return Some(lambda);
            }
            let mut order: Vec<usize> = (0..p).collect();
            order.sort_by(|&i, &j| lambda[j].cmp(&lambda[i]).then(i.cmp(&j)));
            let mut prefix = 0;
            for k in 0..p {
                prefix += lambda[order[k]];
                let excess = prefix - self.caps[k];
                if excess > 0 {
                    let members = k as i128 + 1;
                    let cut = (excess + members - 1) / members;
                    for &i in &order[..=k] {
                        lambda[i] -= cut;
                    }
                    prefix -= cut * members;
                }
            }
        }
        clip_negative(&mut lambda);
        if !self.feasible(&lambda) {
            radial_scale(&mut lambda, &self.caps);
        }
        self.feasible(&lambda).then_some(lambda)
    }

    fn finish(self) -> BoundResult {
        let grid = self.grid;
        BoundResult {
            value: self.best,
            lambda: Some(self.best_lambda.iter().map(|&l| Rational::new(l, grid)).collect()),
            witnesses: self.witnesses,
        }
    }
}

fn clip_negative(lambda: &mut [i128]) {
    for l in lambda.iter_mut() {
        *l = (*l).max(0);
    }
}

/// Scales `lambda` by `min_k W_k / S_k` and rounds down, which is always
/// feasible: rounding only lowers the sums of the largest components.
fn radial_scale(lambda: &mut [i128], caps: &[i128]) {
    let mut sorted = lambda.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut prefix = 0;
    let mut factor = Rational::one();
    for (l, cap) in sorted.iter().zip(caps) {
        prefix += l;
        if prefix > 0 {
            factor = factor.min(Rational::new(*cap, prefix));
        }
    }
    for l in lambda.iter_mut() {
        *l = (Rational::from_integer(*l) * factor).floor().to_integer();
    }
}

/// Computes bounds for one solve, reusing per-objective weights and
/// ideal points across repeated colorings.
pub struct Bounder<'a> {
    inst: &'a Instance,
    w: &'a OwaWeights,
    ideal_weights: Vec<ScalarWeights>,
    ideal_cache: HashMap<EdgeColoring, (IdealPoint, Vec<Vec<EdgeId>>)>,
    pub objective: ObjectiveBoundConfig,
    computed: u64,
}

/// Ideal points kept per solve; shaving and search revisit few colorings.
const IDEAL_CACHE_LIMIT: usize = 4096;

impl<'a> Bounder<'a> {
    pub fn new(inst: &'a Instance, w: &'a OwaWeights, objective: ObjectiveBoundConfig) -> Self {
        Bounder {
            inst,
            w,
            ideal_weights: ideal_weights(inst),
            ideal_cache: HashMap::new(),
            objective,
            computed: 0,
        }
    }

    pub fn weights(&self) -> &'a OwaWeights {
        self.w
    }

    /// Number of bounds computed so far.
    pub fn computed(&self) -> u64 {
        self.computed
    }

    pub fn ideal_point(&mut self, coloring: &EdgeColoring) -> Result<(IdealPoint, Vec<Vec<EdgeId>>)> {
        if let Some(hit) = self.ideal_cache.get(coloring) {
            return Ok(hit.clone());
        }
        let res = ideal_point_with(self.inst, coloring, &self.ideal_weights)?;
        if self.ideal_cache.len() >= IDEAL_CACHE_LIMIT {
            self.ideal_cache.clear();
        }
        self.ideal_cache.insert(coloring.clone(), res.clone());
        Ok(res)
    }

    /// Bound on `T(coloring)`; infeasible colorings come back as errors.
    pub fn bound(&mut self, method: BoundMethod, coloring: &EdgeColoring, cutoff: Option<Cutoff>) -> Result<BoundResult> {
        self.computed += 1;
        match method {
            BoundMethod::Image => {
                let (ideal, trees) = self.ideal_point(coloring)?;
                Ok(image_result(self.inst, self.w, &ideal, trees))
            }
            BoundMethod::Objective => {
                let cfg = ObjectiveBoundConfig {
                    cutoff,
                    ..self.objective.clone()
                };
                bound_objective_relaxation(self.inst, coloring, self.w, &cfg)
            }
        }
    }
}
