//! Incumbent seeding, shaving and branch-and-bound, and the full pipeline.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::bounds::{BoundMethod, Bounder, Cutoff, ObjectiveBoundConfig};
use crate::error::{Error, Result};
use crate::model::{comonotonic_order, EdgeId, Instance, OwaWeights, Solution};
use crate::mst::{self, EdgeColoring, EdgeState};
use crate::preprocess;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    /// Bound used at branch-and-bound nodes for non-increasing weights.
    pub bound_method: BoundMethod,
    /// Bound used while shaving for non-increasing weights; `None` picks
    /// the objective relaxation.
    pub shave_bound: Option<BoundMethod>,
    /// Trees ranked for the initial incumbent; `None` uses [`default_k_seed`].
    pub k_seed: Option<usize>,
    pub preprocess: bool,
    pub shave: bool,
    /// Answer comonotonic instances with a single MST.
    pub fast_paths: bool,
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
    pub objective: ObjectiveBoundConfig,
    /// Keep every bound and coloring for later verification.
    pub record_trace: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            bound_method: BoundMethod::Image,
            shave_bound: None,
            k_seed: None,
            preprocess: true,
            shave: true,
            fast_paths: true,
            node_limit: None,
            time_limit: None,
            objective: ObjectiveBoundConfig::default(),
            record_trace: false,
        }
    }
}

/// Seeding depth by instance size: 500 up to 40 vertices, 2000 up to 70,
/// 5000 beyond.
pub fn default_k_seed(n: usize) -> usize {
    match n {
        0..=40 => 500,
        41..=70 => 2000,
        _ => 5000,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SearchStats {
    pub nodes_expanded: u64,
    pub nodes_pruned: u64,
    pub bounds_computed: u64,
    pub preprocess_blue: usize,
    pub preprocess_red: usize,
    pub shaved_blue: usize,
    pub shaved_red: usize,
    pub incumbent_updates: u64,
    pub wall_time_ms: f64,
    pub proven_optimal: bool,
    pub fast_path: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Shave,
    Branch,
}

/// A bound computed during a run, kept for audit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundRecord {
    pub stage: Stage,
    pub coloring: EdgeColoring,
    pub value: Rational,
    /// Whether the subproblem was discarded on the strength of this bound.
    pub pruned: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchTrace {
    pub bounds: Vec<BoundRecord>,
    /// Colorings claimed to preserve the optimum, labelled by stage.
    pub colorings: Vec<(String, EdgeColoring)>,
    /// Incumbent values in the order they were adopted.
    pub incumbents: Vec<Rational>,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub solution: Solution,
    pub stats: SearchStats,
    /// Coloring in force when branching started.
    pub coloring: EdgeColoring,
    pub trace: Option<SearchTrace>,
}

/// Best OWA tree among the `k` cheapest trees under the summed cost.
pub fn seed_incumbent(inst: &Instance, w: &OwaWeights, k: usize) -> Result<Solution> {
    seed_incumbent_within(inst, w, &EdgeColoring::new(inst.m()), k)
}

/// [`seed_incumbent`] restricted to `T(coloring)`.
pub fn seed_incumbent_within(inst: &Instance, w: &OwaWeights, coloring: &EdgeColoring, k: usize) -> Result<Solution> {
    check_weights(inst, w)?;
    let ranked = mst::k_best_within(inst, &mst::summed_weights(inst), coloring, k)?;
    ranked
        .into_iter()
        .map(|t| Solution::from_tree_unchecked(inst, w, t.edges))
        .reduce(|best, s| if s.value() < best.value() { s } else { best })
        .ok_or_else(|| Error::input("no spanning tree"))
}

fn check_weights(inst: &Instance, w: &OwaWeights) -> Result<()> {
    if w.len() != inst.p() {
        return Err(Error::input(format!(
            "{} weights for {} objectives",
            w.len(),
            inst.p()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ShaveTest {
    /// The edge was made mandatory.
    Mandatory,
    /// The edge was made forbidden.
    Forbidden,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShaveStep {
    pub edge: EdgeId,
    pub test: ShaveTest,
    /// `None` when the tested subproblem has no spanning tree.
    pub bound: Option<Rational>,
    pub colored: Option<EdgeState>,
}

#[derive(Debug, Clone)]
pub struct ShaveOutcome {
    pub coloring: EdgeColoring,
    pub incumbent: Solution,
    pub steps: Vec<ShaveStep>,
    pub incumbent_updates: u64,
    pub bounds_computed: u64,
}

/// Single pass over the uncolored edges in id order. Each edge is first
/// made mandatory: if that subproblem's bound exceeds the incumbent, the
/// edge turns Red. Otherwise it is made forbidden and turns Blue on the
/// same test. Bound witnesses that beat the incumbent replace it.
pub fn shave(
    inst: &Instance,
    coloring: &EdgeColoring,
    w: &OwaWeights,
    incumbent: Solution,
    method: BoundMethod,
    objective: &ObjectiveBoundConfig,
) -> Result<ShaveOutcome> {
    let mut bounder = Bounder::new(inst, w, objective.clone());
    let mut trace = None;
    shave_with(inst, coloring, incumbent, method, &mut bounder, &mut trace)
}

fn shave_with(
    inst: &Instance,
    coloring: &EdgeColoring,
    mut incumbent: Solution,
    method: BoundMethod,
    bounder: &mut Bounder<'_>,
    trace: &mut Option<SearchTrace>,
) -> Result<ShaveOutcome> {
    check_weights(inst, bounder.weights())?;
    if !coloring.admits(incumbent.edges()) {
        return Err(Error::Usage("incumbent does not respect the coloring".into()));
    }
    let mut coloring = coloring.clone();
    let mut steps = Vec::new();
    let mut updates = 0;
    let before = bounder.computed();
    for e in 0..inst.m() {
        if !coloring.is_uncolored(e) {
            continue;
        }
        for (test, trial_state, on_success) in [
            (ShaveTest::Mandatory, EdgeState::Blue, EdgeState::Red),
            (ShaveTest::Forbidden, EdgeState::Red, EdgeState::Blue),
        ] {
            let trial = coloring.with(e, trial_state);
            let bound = if mst::validate_coloring(inst, &trial).is_err() {
                None
            } else {
                // No early stop: a shaving test runs the ascent to completion.
                let res = bounder.bound(method, &trial, None)?;
                if let Some(best) = res.best_witness() {
                    if best.value() < incumbent.value() {
                        incumbent = best.clone();
                        updates += 1;
                        if let Some(t) = trace.as_mut() {
                            t.incumbents.push(incumbent.value());
                        }
                    }
                }
                Some(res.value)
            };
            let exceeds = bound.is_none_or(|b| b > incumbent.value());
            if let (Some(t), Some(b)) = (trace.as_mut(), bound) {
                t.bounds.push(BoundRecord {
                    stage: Stage::Shave,
                    coloring: trial.clone(),
                    value: b,
                    pruned: exceeds,
                });
            }
            steps.push(ShaveStep {
                edge: e,
                test,
                bound,
                colored: exceeds.then_some(on_success),
            });
            if exceeds {
                coloring.set(e, on_success);
                break;
            }
        }
    }
    Ok(ShaveOutcome {
        coloring,
        incumbent,
        steps,
        incumbent_updates: updates,
        bounds_computed: bounder.computed() - before,
    })
}

/// Depth-first branch-and-bound over `T(coloring)`.
///
/// Branches on the uncolored edge of least total cost (lower id on ties),
/// exploring the mandatory child first. A node is pruned when its bound
/// reaches the incumbent value, since equal-valued trees cannot improve it.
pub fn branch_and_bound(
    inst: &Instance,
    coloring: &EdgeColoring,
    w: &OwaWeights,
    incumbent: Solution,
    cfg: &SearchConfig,
) -> Result<SearchOutcome> {
    let start = Instant::now();
    let mut bounder = Bounder::new(inst, w, cfg.objective.clone());
    let mut stats = SearchStats::default();
    let mut trace = cfg.record_trace.then(SearchTrace::default);
    let solution = branch_with(inst, coloring, incumbent, cfg, &mut bounder, &mut stats, &mut trace, start)?;
    stats.bounds_computed = bounder.computed();
    stats.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(SearchOutcome {
        solution,
        stats,
        coloring: coloring.clone(),
        trace,
    })
}

#[allow(clippy::too_many_arguments)]
fn branch_with(
    inst: &Instance,
    coloring: &EdgeColoring,
    mut incumbent: Solution,
    cfg: &SearchConfig,
    bounder: &mut Bounder<'_>,
    stats: &mut SearchStats,
    trace: &mut Option<SearchTrace>,
    start: Instant,
) -> Result<Solution> {
    check_weights(inst, bounder.weights())?;
    if !coloring.admits(incumbent.edges()) {
        return Err(Error::Usage("incumbent does not respect the coloring".into()));
    }
    let w = bounder.weights();
    let n = inst.n();
    let edge_cost: Vec<i64> = inst.edges().iter().map(|e| e.cost.sum()).collect();
    let mut stack = vec![coloring.clone()];
    stats.proven_optimal = true;
    while let Some(node) = stack.pop() {
        if cfg.node_limit.is_some_and(|lim| stats.nodes_expanded >= lim)
            || cfg.time_limit.is_some_and(|lim| start.elapsed() >= lim)
        {
            stats.proven_optimal = false;
            break;
        }
        stats.nodes_expanded += 1;
        if mst::validate_coloring(inst, &node).is_err() {
            stats.nodes_pruned += 1;
            continue;
        }
        if node.blue_count() + 1 == n {
            let leaf = Solution::from_tree_unchecked(inst, w, node.edges_in(EdgeState::Blue).collect());
            if leaf.value() < incumbent.value() {
                incumbent = leaf;
                stats.incumbent_updates += 1;
                if let Some(t) = trace.as_mut() {
                    t.incumbents.push(incumbent.value());
                }
            }
            continue;
        }
        let res = bounder.bound(cfg.bound_method, &node, Some(Cutoff::AtLeast(incumbent.value())))?;
        if let Some(best) = res.best_witness() {
            if best.value() < incumbent.value() {
                incumbent = best.clone();
                stats.incumbent_updates += 1;
                if let Some(t) = trace.as_mut() {
                    t.incumbents.push(incumbent.value());
                }
            }
        }
        let pruned = res.value >= incumbent.value();
        if let Some(t) = trace.as_mut() {
            t.bounds.push(BoundRecord {
                stage: Stage::Branch,
                coloring: node.clone(),
                value: res.value,
                pruned,
            });
        }
        if pruned {
            stats.nodes_pruned += 1;
            continue;
        }
        let Some(e) = (0..inst.m())
            .filter(|&e| node.is_uncolored(e))
            .min_by_key(|&e| (edge_cost[e], e))
        else {
            continue;
        };
        stack.push(node.with(e, EdgeState::Red));
        stack.push(node.with(e, EdgeState::Blue));
    }
    Ok(incumbent)
}

/// Full pipeline.
///
/// Non-increasing weights: preprocessing, seeding, shaving, then
/// branch-and-bound on what is left. Other weights skip preprocessing,
/// whose conditions rely on convexity, and use the image bound for both
/// shaving and branching whatever the configuration says.
pub fn solve(inst: &Instance, w: &OwaWeights, cfg: &SearchConfig) -> Result<SearchOutcome> {
    check_weights(inst, w)?;
    let start = Instant::now();
    let mut stats = SearchStats::default();
    let mut trace = cfg.record_trace.then(SearchTrace::default);

    if cfg.fast_paths {
        if let Some(order) = comonotonic_order(inst) {
            let mut lambda = vec![Rational::from_integer(0); inst.p()];
            for (rank, &obj) in order.iter().enumerate() {
                lambda[obj] = w.as_slice()[rank];
            }
            let tree = mst::mst(inst, &mst::scalarize(inst, &lambda)?, &EdgeColoring::new(inst.m()))?;
            stats.fast_path = true;
            stats.proven_optimal = true;
            stats.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
            return Ok(SearchOutcome {
                solution: Solution::from_tree_unchecked(inst, w, tree.edges),
                stats,
                coloring: EdgeColoring::new(inst.m()),
                trace,
            });
        }
    }

    let convex = w.class().is_non_increasing();
    let mut coloring = EdgeColoring::new(inst.m());
    if convex && cfg.preprocess {
        coloring = preprocess::preprocess(inst, w)?;
        stats.preprocess_blue = coloring.blue_count();
        stats.preprocess_red = coloring.red_count();
        if let Some(t) = trace.as_mut() {
            t.colorings.push(("preprocess".into(), coloring.clone()));
        }
    }

    let k = cfg.k_seed.unwrap_or_else(|| default_k_seed(inst.n()));
    let mut incumbent = seed_incumbent_within(inst, w, &coloring, k)?;
    if let Some(t) = trace.as_mut() {
        t.incumbents.push(incumbent.value());
    }

    let mut bounder = Bounder::new(inst, w, cfg.objective.clone());
    if cfg.shave {
        let method = if convex {
            cfg.shave_bound.unwrap_or(BoundMethod::Objective)
        } else {
            BoundMethod::Image
        };
        let out = shave_with(inst, &coloring, incumbent, method, &mut bounder, &mut trace)?;
        coloring = out.coloring;
        incumbent = out.incumbent;
        stats.incumbent_updates += out.incumbent_updates;
        stats.shaved_blue = coloring.blue_count();
        stats.shaved_red = coloring.red_count();
        if let Some(t) = trace.as_mut() {
            t.colorings.push(("shave".into(), coloring.clone()));
        }
    }

    // With w_1 small the scalarization polytope collapses toward zero and
    // the objective relaxation stops pruning, so other weights branch on
    // the image relaxation as well.
    let branch_cfg = SearchConfig {
        bound_method: if convex { cfg.bound_method } else { BoundMethod::Image },
        ..cfg.clone()
    };
    let solution = branch_with(inst, &coloring, incumbent, &branch_cfg, &mut bounder, &mut stats, &mut trace, start)?;
    stats.bounds_computed = bounder.computed();
    stats.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(SearchOutcome {
        solution,
        stats,
        coloring,
        trace,
    })
}
