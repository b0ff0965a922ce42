use proptest::prelude::*;

use owa_core::bounds::{bound_image, bound_objective_relaxation, lambda_feasible, ObjectiveBoundConfig};
use owa_core::generate::clique_with;
use owa_core::mip::{read_solution, solution_text};
use owa_core::mst::{k_best, mst, objective_weights, summed_weights};
use owa_core::oracle::{
    brute_force_optimum, count_trees_matrix_tree, enumerate_trees, subset_lambda_feasible, verify_run,
};
use owa_core::preprocess::preprocess;
use owa_core::search::{seed_incumbent, shave};
use owa_core::{
    lorenz, solve, tree_image, BoundMethod, CostVector, Edge, EdgeColoring, EdgeState, Instance, OwaWeights,
    Rational, SearchConfig,
};

fn q(a: i128, b: i128) -> Rational {
    Rational::new(a, b)
}

fn weights_from(raw: &[u32]) -> OwaWeights {
    let total: i128 = raw.iter().map(|&x| x as i128).sum();
    if total == 0 {
        return OwaWeights::uniform(raw.len()).unwrap();
    }
    OwaWeights::new(raw.iter().map(|&x| q(x as i128, total)).collect()).unwrap()
}

fn sorted_desc(raw: &[u32]) -> Vec<u32> {
    let mut v = raw.to_vec();
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

fn clique(n: usize, p: usize, costs: &[i64]) -> Instance {
    let mut k = 0;
    clique_with(n, p, |_, _| {
        k += 1;
        costs[(k - 1) % costs.len()]
    })
}

/// A connected graph: a random spanning tree plus a random set of extra edges.
fn random_graph(n: usize, parents: &[usize], extra: &[(usize, usize)]) -> Instance {
    let mut pairs: Vec<(usize, usize)> = (1..n).map(|v| (parents[v - 1] % v, v)).collect();
    for &(a, b) in extra {
        let (a, b) = (a % n, b % n);
        let pair = (a.min(b), a.max(b));
        if a != b && !pairs.iter().any(|&(x, y)| (x.min(y), x.max(y)) == pair) {
            pairs.push(pair);
        }
    }
    let edges = pairs
        .iter()
        .map(|&(a, b)| Edge {
            u: a + 1,
            v: b + 1,
            cost: CostVector::new(vec![1, 1]),
        })
        .collect();
    Instance::new(n, 2, edges).unwrap()
}

fn owa_direct(w: &OwaWeights, y: &[i64]) -> Rational {
    let mut s = y.to_vec();
    s.sort_unstable_by(|a, b| b.cmp(a));
    s.iter().zip(w.as_slice()).map(|(&v, wi)| wi * Rational::from(v as i128)).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn owa_is_symmetric_monotone_and_homogeneous(
        raw in prop::collection::vec(0u32..20, 3),
        y in prop::collection::vec(0i64..100, 3),
        bump in 0usize..3,
        k in 1i64..5,
    ) {
        let w = weights_from(&raw);
        let v = w.owa(&y).unwrap();
        let mut rev = y.clone();
        rev.reverse();
        prop_assert_eq!(w.owa(&rev).unwrap(), v);
        let mut up = y.clone();
        up[bump] += 1;
        prop_assert!(w.owa(&up).unwrap() >= v);
        let scaled: Vec<i64> = y.iter().map(|x| x * k).collect();
        prop_assert_eq!(w.owa(&scaled).unwrap(), v * Rational::from(k as i128));
    }

    #[test]
    fn non_increasing_owa_is_the_max_over_rank_assignments(
        raw in prop::collection::vec(0u32..20, 4),
        y in prop::collection::vec(-50i64..100, 4),
        z in prop::collection::vec(-50i64..100, 4),
    ) {
        let w = weights_from(&sorted_desc(&raw));
        let v = w.owa(&y).unwrap();
        prop_assert_eq!(v, owa_direct(&w, &y));
        for perm in owa_core::oracle::permutations(4) {
            let s: Rational = perm.iter().zip(&y).map(|(&r, &yi)| w.as_slice()[r] * Rational::from(yi as i128)).sum();
            prop_assert!(s <= v);
        }
        // Subadditivity, i.e. convexity at the midpoint scaled by 2.
        let sum: Vec<i64> = y.iter().zip(&z).map(|(a, b)| a + b).collect();
        prop_assert!(w.owa(&sum).unwrap() <= v + w.owa(&z).unwrap());
    }

    #[test]
    fn lorenz_is_prefix_sums_of_sorted(y in prop::collection::vec(-20i64..50, 2..8)) {
        let l = lorenz(&y);
        let mut s = y.clone();
        s.sort_unstable_by(|a, b| b.cmp(a));
        let mut acc = 0;
        for (i, v) in s.iter().enumerate() {
            acc += v;
            prop_assert_eq!(l.as_slice()[i], acc);
        }
    }

    #[test]
    fn enumeration_matches_matrix_tree(
        n in 2usize..8,
        parents in prop::collection::vec(0usize..100, 7),
        extra in prop::collection::vec((0usize..8, 0usize..8), 0..12),
    ) {
        let inst = random_graph(n, &parents, &extra);
        let trees: Vec<_> = enumerate_trees(&inst).collect();
        let distinct: std::collections::HashSet<_> = trees.iter().cloned().collect();
        prop_assert_eq!(distinct.len(), trees.len());
        prop_assert_eq!(trees.len() as i128, count_trees_matrix_tree(&inst));
    }

    #[test]
    fn k_best_agrees_with_enumeration(costs in prop::collection::vec(1i64..10, 20), k in 1usize..20) {
        let inst = clique(5, 2, &costs);
        let mut totals: Vec<i64> = enumerate_trees(&inst)
            .map(|t| tree_image(&inst, &t).unwrap().as_slice().iter().sum())
            .collect();
        totals.sort_unstable();
        let ranked = k_best(&inst, &summed_weights(&inst), k).unwrap();
        prop_assert_eq!(ranked.len(), k.min(totals.len()));
        for (t, expect) in ranked.iter().zip(&totals) {
            prop_assert_eq!(t.total, Rational::from(*expect as i128));
        }
        let distinct: std::collections::HashSet<_> = ranked.iter().map(|t| t.edges.clone()).collect();
        prop_assert_eq!(distinct.len(), ranked.len());
    }

    #[test]
    fn scalarizations_in_the_polytope_never_exceed_owa(
        raw in prop::collection::vec(0u32..20, 3),
        lam in prop::collection::vec(0u32..20, 3),
        costs in prop::collection::vec(1i64..30, 18),
    ) {
        let w = weights_from(&raw);
        let lambda: Vec<Rational> = lam.iter().map(|&x| q(x as i128, 40)).collect();
        prop_assume!(subset_lambda_feasible(&lambda, &w));
        prop_assert!(lambda_feasible(&lambda, &w));
        let inst = clique(4, 3, &costs);
        for t in enumerate_trees(&inst) {
            let y = tree_image(&inst, &t).unwrap();
            let dot: Rational = y.as_slice().iter().zip(&lambda).map(|(&v, l)| l * Rational::from(v as i128)).sum();
            prop_assert!(dot <= w.owa(y.as_slice()).unwrap());
        }
    }

    #[test]
    fn bounds_never_exceed_subproblem_optimum(
        raw in prop::collection::vec(0u32..20, 3),
        costs in prop::collection::vec(1i64..50, 30),
        fixes in prop::collection::vec((0usize..10, any::<bool>()), 0..4),
    ) {
        let inst = clique(5, 3, &costs);
        let w = weights_from(&raw);
        let mut c = EdgeColoring::new(inst.m());
        for (e, blue) in fixes {
            c.set(e, if blue { EdgeState::Blue } else { EdgeState::Red });
        }
        let Ok(opt) = brute_force_optimum(&inst, &w, &c) else { return Ok(()); };
        let img = bound_image(&inst, &c, &w).unwrap();
        prop_assert!(img.value <= opt.value());
        let obj = bound_objective_relaxation(&inst, &c, &w, &ObjectiveBoundConfig::default()).unwrap();
        prop_assert!(obj.value <= opt.value());
        for s in img.witnesses.iter().chain(&obj.witnesses) {
            prop_assert!(c.admits(s.edges()));
            prop_assert!(s.value() >= opt.value());
        }
    }

    #[test]
    fn preprocessing_and_shaving_keep_the_optimum(
        raw in prop::collection::vec(1u32..20, 3),
        costs in prop::collection::vec(1i64..50, 45),
        objective in any::<bool>(),
    ) {
        let inst = clique(6, 3, &costs);
        let w = weights_from(&sorted_desc(&raw));
        let empty = EdgeColoring::new(inst.m());
        let opt = brute_force_optimum(&inst, &w, &empty).unwrap().value();
        let pre = preprocess(&inst, &w).unwrap();
        prop_assert_eq!(brute_force_optimum(&inst, &w, &pre).unwrap().value(), opt);
        let method = if objective { BoundMethod::Objective } else { BoundMethod::Image };
        let inc = seed_incumbent(&inst, &w, 3).unwrap();
        let out = shave(&inst, &empty, &w, inc, method, &ObjectiveBoundConfig::default()).unwrap();
        prop_assert!(out.coloring.blue_count() < inst.n());
        prop_assert_eq!(brute_force_optimum(&inst, &w, &out.coloring).unwrap().value(), opt);
        prop_assert!(out.coloring.admits(out.incumbent.edges()));
    }

    #[test]
    fn solution_files_round_trip(costs in prop::collection::vec(1i64..9, 20)) {
        let inst = clique(5, 2, &costs);
        let w = OwaWeights::parse_list("0.7,0.3").unwrap();
        for t in enumerate_trees(&inst).take(40) {
            let sol = read_solution(&inst, &w, &solution_text(&inst, &t)).unwrap();
            prop_assert_eq!(sol.edges(), t.as_slice());
            prop_assert_eq!(sol.value(), w.owa(tree_image(&inst, &t).unwrap().as_slice()).unwrap());
        }
    }

    #[test]
    fn lorenz_dual_at_a_fixed_tree(raw in prop::collection::vec(1u32..30, 4), y in prop::collection::vec(0i64..60, 4)) {
        // The inner minimization min i*r + sum_j max(0, y_j - r) attains L_i
        // at r = y_(i), so the linearized objective reproduces OWA when the
        // weight gaps are positive.
        let mut strict = sorted_desc(&raw);
        strict.dedup();
        prop_assume!(strict.len() == 4);
        let w = weights_from(&strict);
        let mut s = y.clone();
        s.sort_unstable_by(|a, b| b.cmp(a));
        let l = lorenz(&y);
        let ws = w.as_slice();
        let mut total = Rational::from(0);
        for i in 0..4 {
            let r = s[i];
            let inner: i64 = (i as i64 + 1) * r + y.iter().map(|&yj| (yj - r).max(0)).sum::<i64>();
            prop_assert_eq!(inner, l.as_slice()[i]);
            for cand in -5..65 {
                let other: i64 = (i as i64 + 1) * cand + y.iter().map(|&yj| (yj - cand).max(0)).sum::<i64>();
                prop_assert!(other >= inner);
            }
            let next = if i + 1 < 4 { ws[i + 1] } else { Rational::from(0) };
            total += (ws[i] - next) * Rational::from(inner as i128);
        }
        prop_assert_eq!(total, w.owa(&y).unwrap());
    }
}

fn no_shortcuts() -> SearchConfig {
    SearchConfig {
        fast_paths: false,
        record_trace: true,
        ..SearchConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn uniform_weights_reduce_to_summed_mst(costs in prop::collection::vec(1i64..100, 45)) {
        let inst = clique(6, 3, &costs);
        let w = OwaWeights::uniform(3).unwrap();
        let out = solve(&inst, &w, &no_shortcuts()).unwrap();
        let t = mst(&inst, &summed_weights(&inst), &EdgeColoring::new(inst.m())).unwrap();
        prop_assert_eq!(out.solution.value(), t.total / Rational::from(3));
    }

    #[test]
    fn min_criterion_is_the_best_single_objective_mst(costs in prop::collection::vec(1i64..100, 45)) {
        let inst = clique(6, 3, &costs);
        let w = OwaWeights::hurwicz(Rational::from(0), 3).unwrap();
        let out = solve(&inst, &w, &no_shortcuts()).unwrap();
        let best = (0..3)
            .map(|i| {
                let t = mst(&inst, &objective_weights(&inst, i), &EdgeColoring::new(inst.m())).unwrap();
                w.owa(tree_image(&inst, &t.edges).unwrap().as_slice()).unwrap()
            })
            .min()
            .unwrap();
        prop_assert_eq!(out.solution.value(), best);
    }

    #[test]
    fn comonotonic_fast_path_is_exact(
        base in prop::collection::vec(1i64..50, 15),
        gaps in prop::collection::vec((0i64..10, 0i64..10), 15),
        raw in prop::collection::vec(0u32..20, 3),
    ) {
        // Objective 1 >= objective 0 >= objective 2 on every edge.
        let costs: Vec<[i64; 3]> = base.iter().zip(&gaps).map(|(&b, &(g, h))| [b + h, b + h + g, b]).collect();
        let inst = clique_with(6, 3, |e, i| costs[e][i]);
        let w = weights_from(&raw);
        let fast = solve(&inst, &w, &SearchConfig::default()).unwrap();
        prop_assert!(fast.stats.fast_path);
        let opt = brute_force_optimum(&inst, &w, &EdgeColoring::new(inst.m())).unwrap();
        prop_assert_eq!(fast.solution.value(), opt.value());
    }

    #[test]
    fn incumbents_only_improve(costs in prop::collection::vec(1i64..100, 45), raw in prop::collection::vec(0u32..20, 3)) {
        let inst = clique(6, 3, &costs);
        let w = weights_from(&raw);
        let out = solve(&inst, &w, &no_shortcuts()).unwrap();
        let trace = out.trace.unwrap();
        prop_assert!(trace.incumbents.windows(2).all(|p| p[1] <= p[0]));
        prop_assert_eq!(trace.incumbents.last().copied(), Some(out.solution.value()));
    }
}

#[test]
fn verify_run_flags_injected_faults() {
    let inst = clique(5, 3, &[12, 40, 7, 33, 5, 18, 27, 9, 44, 21, 3, 38, 16, 29, 11]);
    let w = OwaWeights::parse_list("0.5,0.3,0.2").unwrap();
    let out = solve(&inst, &w, &no_shortcuts()).unwrap();
    assert!(verify_run(&inst, &w, &out).unwrap().is_clean());

    let mut inflated = out.clone();
    let rec = &mut inflated.trace.as_mut().unwrap().bounds[0];
    rec.value += Rational::from(1000);
    assert!(!verify_run(&inst, &w, &inflated).unwrap().is_clean());

    // Forbid edges of optimal trees until the optimal value is lost.
    let opt = brute_force_optimum(&inst, &w, &EdgeColoring::new(inst.m())).unwrap();
    let mut lossy = out.clone();
    let mut worse = EdgeColoring::new(inst.m());
    worse.set(opt.edges()[0], EdgeState::Red);
    while brute_force_optimum(&inst, &w, &worse).map(|s| s.value() == opt.value()).unwrap_or(false) {
        let next = brute_force_optimum(&inst, &w, &worse).unwrap();
        let e = next.edges().iter().copied().find(|&e| worse.is_uncolored(e)).unwrap();
        worse.set(e, EdgeState::Red);
    }
    lossy.trace.as_mut().unwrap().colorings.push(("injected".into(), worse));
    let report = verify_run(&inst, &w, &lossy).unwrap();
    assert!(report
        .violations
        .iter()
        .any(|v| matches!(v, owa_core::oracle::Violation::ColoringLosesOptimum { .. })));
}
