//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use owa_core::bounds::{
    bound_image, bound_objective_relaxation, bound_image_relaxation, ideal_point, image_relaxation_for_order,
    lambda_feasible, z_value, IdealPoint, ObjectiveBoundConfig,
};
use owa_core::fixtures::{example1, example1_weights, preset};
use owa_core::generate::{generate, Density};
use owa_core::mip::{build_mip, write_lp};
use owa_core::oracle::{permutations, subset_lambda_feasible, TreeTable};
use owa_core::preprocess::{cut_condition_holds, cycle_condition_holds, preprocess};
use owa_core::search::{seed_incumbent, shave, solve, ShaveTest};
use owa_core::{
    lorenz, BoundMethod, EdgeColoring, EdgeState, Instance, OwaWeights, Rational, SearchConfig, WeightClass,
};

type Check = Result<String, String>;

fn q(a: i128, b: i128) -> Rational {
    Rational::new(a, b)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn ids(inst: &Instance, pairs: &[(usize, usize)]) -> Vec<usize> {
    let mut v: Vec<usize> = pairs.iter().map(|&(a, b)| inst.find_edge(a, b).unwrap()).collect();
    v.sort_unstable();
    v
}

fn c1() -> Check {
    let start = Instant::now();
    let inst = example1();
    let w = example1_weights();
    let out = solve(&inst, &w, &SearchConfig::default()).map_err(|e| e.to_string())?;
    ensure(out.solution.value() == q(7, 1), || format!("value {}", out.solution.value()))?;
    let t4 = ids(&inst, &[(1, 2), (1, 4), (2, 3)]);
    ensure(out.solution.edges() == t4.as_slice(), || format!("tree {:?}", out.solution.edges()))?;
    let trees = [
        (ids(&inst, &[(1, 4), (2, 3), (3, 4)]), q(15, 2)),
        (ids(&inst, &[(1, 2), (1, 3), (1, 4)]), q(73, 10)),
        (ids(&inst, &[(1, 3), (2, 3), (3, 4)]), q(87, 10)),
        (t4, q(7, 1)),
    ];
    for (k, (t, expect)) in trees.iter().enumerate() {
        let y = owa_core::tree_image(&inst, t).unwrap();
        let v = owa_core::owa(&w, &y).unwrap();
        ensure(v == *expect, || format!("T{} has OWA {v}", k + 1))?;
    }
    within(Duration::from_secs(1), start)?;
    Ok("optimum 7 at {[1,2],[1,4],[2,3]}; T1..T4 = 7.5, 7.3, 8.7, 7".into())
}

fn c2() -> Check {
    let start = Instant::now();
    let inst = example1();
    let w = example1_weights();
    let c = preprocess(&inst, &w).map_err(|e| e.to_string())?;
    let e14 = inst.find_edge(1, 4).unwrap();
    let e24 = inst.find_edge(2, 4).unwrap();
    ensure(c.get(e14) == EdgeState::Blue, || "[1,4] not Blue".into())?;
    ensure(c.get(e24) == EdgeState::Red, || "[2,4] not Red".into())?;
    let empty = EdgeColoring::new(inst.m());
    ensure(
        cut_condition_holds(&inst, &empty, &w, e14).unwrap().is_some(),
        || "cut condition fails for [1,4]".into(),
    )?;
    ensure(
        cycle_condition_holds(&inst, &empty, &w, e24).unwrap().is_some(),
        || "cycle condition fails for [2,4]".into(),
    )?;
    let v = |a, b| inst.edge(inst.find_edge(a, b).unwrap()).cost.clone();
    let diffs = [
        (v(1, 4).minus(&v(2, 4)), q(-6, 10)),
        (v(1, 4).minus(&v(3, 4)), q(-1, 10)),
        (v(2, 3).minus(&v(2, 4)), q(-4, 10)),
        (v(3, 4).minus(&v(2, 4)), q(-5, 10)),
    ];
    for (d, expect) in &diffs {
        let got = w.owa(d).unwrap();
        ensure(got == *expect, || format!("OWA{d:?} = {got}, expected {expect}"))?;
    }
    within(Duration::from_secs(1), start)?;
    Ok("[1,4] Blue, [2,4] Red; differences -0.6, -0.1, -0.4, -0.5".into())
}

fn c3() -> Check {
    let start = Instant::now();
    let inst = example1();
    let w = example1_weights();
    let empty = EdgeColoring::new(inst.m());
    let (ideal, _) = ideal_point(&inst, &empty).map_err(|e| e.to_string())?;
    ensure(ideal.b == vec![4, 7, 3] && ideal.b0 == 19, || format!("ideal point {ideal:?}"))?;
    let img = bound_image(&inst, &empty, &w).map_err(|e| e.to_string())?;
    ensure(img.value == q(13, 2), || format!("image bound {}", img.value))?;
    let obj = bound_objective_relaxation(&inst, &empty, &w, &ObjectiveBoundConfig::default())
        .map_err(|e| e.to_string())?;
    ensure(obj.value >= q(13, 2) && obj.value <= q(7, 1), || format!("objective bound {}", obj.value))?;
    let lambda = obj.lambda.clone().ok_or("no lambda")?;
    ensure(lambda_feasible(&lambda, &w), || format!("lambda {lambda:?} rejected by prefix test"))?;
    ensure(subset_lambda_feasible(&lambda, &w), || format!("lambda {lambda:?} rejected by subset test"))?;
    let (z, _) = z_value(&inst, &empty, &lambda).map_err(|e| e.to_string())?;
    ensure(z == obj.value, || format!("z(lambda) = {z}, reported {}", obj.value))?;
    within(Duration::from_secs(1), start)?;
    Ok(format!(
        "b=(4,7,3), b0=19, image bound 6.5, objective bound {} at a feasible lambda",
        owa_core::format_rational(&obj.value)
    ))
}

fn c4() -> Check {
    let start = Instant::now();
    let inst = example1();
    let w = example1_weights();
    let inc = seed_incumbent(&inst, &w, 2).map_err(|e| e.to_string())?;
    let t4 = ids(&inst, &[(1, 2), (1, 4), (2, 3)]);
    ensure(inc.edges() == t4.as_slice(), || format!("k=2 seed {:?}", inc.edges()))?;
    let out = shave(
        &inst,
        &EdgeColoring::new(inst.m()),
        &w,
        inc,
        BoundMethod::Objective,
        &ObjectiveBoundConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    for (a, b) in [(1, 2), (1, 4), (2, 3)] {
        let e = inst.find_edge(a, b).unwrap();
        ensure(out.coloring.get(e) == EdgeState::Blue, || format!("[{a},{b}] not Blue"))?;
    }
    ensure(
        out.coloring.get(inst.find_edge(1, 3).unwrap()) == EdgeState::Red,
        || "[1,3] not Red".into(),
    )?;
    let expected = [
        ((1, 2), ShaveTest::Forbidden, q(37, 5)),
        ((1, 3), ShaveTest::Mandatory, q(73, 10)),
        ((1, 4), ShaveTest::Forbidden, q(83, 10)),
        ((2, 3), ShaveTest::Forbidden, q(73, 10)),
    ];
    for ((a, b), test, value) in expected {
        let e = inst.find_edge(a, b).unwrap();
        let step = out
            .steps
            .iter()
            .find(|s| s.edge == e && s.test == test && s.colored.is_some())
            .ok_or_else(|| format!("no coloring step for [{a},{b}]"))?;
        ensure(step.bound == Some(value), || format!("[{a},{b}] bound {:?}, expected {value}", step.bound))?;
    }
    within(Duration::from_secs(1), start)?;
    Ok("Blue [1,2],[1,4],[2,3]; Red [1,3]; bounds 7.4, 7.3, 8.3, 7.3".into())
}

struct Sweep {
    runs: usize,
    wrong: Vec<String>,
    bound_checks: usize,
    bound_violations: Vec<String>,
    coloring_checks: usize,
    coloring_violations: Vec<String>,
    elapsed: Duration,
}

fn weight_set(p: usize) -> Vec<(&'static str, OwaWeights)> {
    let strict = preset(if p == 3 { "w3a" } else { "w5" }).unwrap();
    vec![
        ("strict", strict),
        ("uniform", OwaWeights::uniform(p).unwrap()),
        ("min", OwaWeights::hurwicz(Rational::zero(), p).unwrap()),
        ("hurwicz0.4", OwaWeights::hurwicz(q(2, 5), p).unwrap()),
        ("hurwicz0.5", OwaWeights::hurwicz(q(1, 2), p).unwrap()),
        ("hurwicz0.6", OwaWeights::hurwicz(q(3, 5), p).unwrap()),
    ]
}

fn oracle_sweep() -> Sweep {
    let start = Instant::now();
    let mut s = Sweep {
        runs: 0,
        wrong: Vec::new(),
        bound_checks: 0,
        bound_violations: Vec::new(),
        coloring_checks: 0,
        coloring_violations: Vec::new(),
        elapsed: Duration::ZERO,
    };
    for n in 5..=8 {
        for p in [3, 5] {
            for i in 0..30u64 {
                let seed = 10_000 * n as u64 + 100 * p as u64 + i;
                let inst = generate(n, p, seed, Density::Clique).unwrap();
                let table = TreeTable::new(&inst).unwrap();
                for (wname, w) in weight_set(p) {
                    let ranked = table.rank(&w);
                    let tag = format!("n={n} p={p} seed={seed} w={wname}");
                    let optimum = ranked.optimum(&EdgeColoring::new(inst.m())).unwrap().0;
                    if w.class().is_non_increasing() {
                        let c = preprocess(&inst, &w).unwrap();
                        s.coloring_checks += 1;
                        if ranked.optimum(&c).map(|x| x.0) != Some(optimum) {
                            s.coloring_violations.push(format!("{tag}: preprocess"));
                        }
                    }
                    if !w.class().is_non_increasing() {
                        // solve branches on the image bound for these weights;
                        // audit the objective bound directly on the root and
                        // every single-edge fixing.
                        let mut colorings = vec![EdgeColoring::new(inst.m())];
                        for e in 0..inst.m() {
                            for st in [EdgeState::Blue, EdgeState::Red] {
                                colorings.push(EdgeColoring::new(inst.m()).with(e, st));
                            }
                        }
                        for c in &colorings {
                            let Some((sub, _)) = ranked.optimum(c) else { continue };
                            let b = bound_objective_relaxation(&inst, c, &w, &ObjectiveBoundConfig::default()).unwrap();
                            s.bound_checks += 1;
                            if b.value > sub {
                                s.bound_violations.push(format!("{tag}: objective bound {} > {sub}", b.value));
                            }
                        }
                    }
                    for method in [BoundMethod::Image, BoundMethod::Objective] {
                        let cfg = SearchConfig {
                            bound_method: method,
                            shave_bound: Some(method),
                            record_trace: true,
                            fast_paths: false,
                            ..Default::default()
                        };
                        let out = match solve(&inst, &w, &cfg) {
                            Ok(o) => o,
                            Err(e) => {
                                s.wrong.push(format!("{tag} {method}: error {e}"));
                                continue;
                            }
                        };
                        s.runs += 1;
                        if out.solution.value() != optimum || !out.stats.proven_optimal {
                            s.wrong.push(format!("{tag} {method}: {} vs {optimum}", out.solution.value()));
                        }
                        let report = owa_core::oracle::verify_run_ranked(&inst, &w, &ranked, &out);
                        let trace = out.trace.as_ref().unwrap();
                        s.bound_checks += trace.bounds.len();
                        s.coloring_checks += trace.colorings.len();
                        for v in &report.violations {
                            let msg = format!("{tag} {method}: {v}");
                            match v {
                                owa_core::oracle::Violation::ColoringLosesOptimum { .. } => {
                                    s.coloring_violations.push(msg)
                                }
                                owa_core::oracle::Violation::WrongValue { .. } => {}
                                _ => s.bound_violations.push(msg),
                            }
                        }
                    }
                }
            }
        }
    }
    s.elapsed = start.elapsed();
    s
}

fn c5(s: &Sweep) -> Check {
    ensure(s.wrong.is_empty(), || format!("{} mismatches, first: {}", s.wrong.len(), s.wrong[0]))?;
    ensure(s.elapsed < Duration::from_secs(300), || format!("sweep took {:?}", s.elapsed))?;
    Ok(format!("{} runs match brute force in {:.1?}", s.runs, s.elapsed))
}

fn c6(s: &Sweep) -> Check {
    ensure(s.bound_violations.is_empty(), || {
        format!("{} violations, first: {}", s.bound_violations.len(), s.bound_violations[0])
    })?;
    ensure(s.bound_checks > 0, || "no bounds recorded".into())?;
    Ok(format!("{} bounds at or below their subproblem optimum", s.bound_checks))
}

fn c7(s: &Sweep) -> Check {
    ensure(s.coloring_violations.is_empty(), || {
        format!("{} violations, first: {}", s.coloring_violations.len(), s.coloring_violations[0])
    })?;
    Ok(format!("{} preprocess/shave colorings keep the optimum value", s.coloring_checks))
}

fn random_weights(rng: &mut ChaCha8Rng, p: usize) -> OwaWeights {
    let raw: Vec<i128> = (0..p).map(|_| rng.gen_range(0..=20)).collect();
    let total: i128 = raw.iter().sum();
    if total == 0 {
        return OwaWeights::uniform(p).unwrap();
    }
    OwaWeights::new(raw.iter().map(|&x| q(x, total)).collect()).unwrap()
}

fn c8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut ties = 0;
    for p in [3, 4] {
        let perms = permutations(p);
        for _ in 0..200 {
            let b: Vec<i64> = (0..p).map(|_| rng.gen_range(0..=6)).collect();
            let mut sorted = b.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() < p {
                ties += 1;
            }
            let b0 = b.iter().sum::<i64>() + rng.gen_range(0..=12);
            let ideal = IdealPoint { b, b0 };
            let w = random_weights(&mut rng, p);
            let star = bound_image_relaxation(&ideal, &w);
            let best = perms
                .iter()
                .map(|perm| image_relaxation_for_order(&ideal, &w, perm))
                .min()
                .unwrap();
            ensure(star == best, || format!("{ideal:?} w={:?}: {star} vs {best}", w.as_slice()))?;
        }
    }
    ensure(ties > 0, || "no ties generated".into())?;
    Ok(format!("400 ideal points ({ties} with ties) agree with all permutation LPs"))
}

fn c9() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut yes, mut no) = (0, 0);
    for k in 0..200 {
        let p = 2 + k % 7;
        let w = random_weights(&mut rng, p);
        // Perturb a shuffled copy of w so both outcomes are frequent.
        let mut lambda: Vec<Rational> = w.as_slice().to_vec();
        for i in (1..p).rev() {
            lambda.swap(i, rng.gen_range(0..=i));
        }
        for l in lambda.iter_mut() {
            *l = (*l * q(rng.gen_range(80..=105), 100) + q(rng.gen_range(-2..=2), 100)).max(Rational::zero());
        }
        let fast = lambda_feasible(&lambda, &w);
        let slow = subset_lambda_feasible(&lambda, &w);
        ensure(fast == slow, || format!("lambda={lambda:?} w={:?}", w.as_slice()))?;
        if fast {
            yes += 1;
        } else {
            no += 1;
        }
    }
    ensure(yes > 0 && no > 0, || format!("one-sided sample: {yes} feasible, {no} not"))?;
    Ok(format!("200 pairs agree ({yes} feasible, {no} infeasible)"))
}

fn c10() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut arbitrary = 0;
    for _ in 0..1000 {
        let p = rng.gen_range(2..=8);
        let w = random_weights(&mut rng, p);
        if w.class() == WeightClass::Arbitrary {
            arbitrary += 1;
        }
        let y: Vec<i64> = (0..p).map(|_| rng.gen_range(-50..=200)).collect();
        let mut sorted = y.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let direct: Rational = sorted.iter().zip(w.as_slice()).map(|(&v, wi)| wi * Rational::from(v as i128)).sum();
        let ws = w.as_slice();
        let l = lorenz(&y);
        let telescoped: Rational = (0..p)
            .map(|i| {
                let next = if i + 1 < p { ws[i + 1] } else { Rational::zero() };
                (ws[i] - next) * Rational::from(l.as_slice()[i] as i128)
            })
            .sum();
        let lib = w.owa(&y).map_err(|e| e.to_string())?;
        ensure(direct == telescoped && lib == direct, || {
            format!("y={y:?} w={ws:?}: direct {direct}, telescoped {telescoped}, library {lib}")
        })?;
    }
    Ok(format!("1000 pairs ({arbitrary} with non-monotone weights) satisfy the identity"))
}

fn c11() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let n = rng.gen_range(2..=12);
        let p = rng.gen_range(2..=6);
        let inst = generate(n, p, rng.gen(), Density::Clique).unwrap();
        let mut raw: Vec<i128> = (0..p).map(|_| rng.gen_range(1..=1000)).collect();
        raw.sort_unstable_by(|a, b| b.cmp(a));
        raw.dedup();
        while raw.len() < p {
            let top = raw[0];
            raw.insert(0, top + 1);
        }
        let total: i128 = raw.iter().sum();
        let w = OwaWeights::new(raw.iter().map(|&x| q(x, total)).collect()).unwrap();
        let model = build_mip(&inst, &EdgeColoring::new(inst.m()), &w).map_err(|e| e.to_string())?;
        let m = inst.m();
        ensure(model.num_constraints() == p * p + n + 2 * m + 1, || {
            format!("n={n} p={p}: {} constraints", model.num_constraints())
        })?;
        ensure(model.num_variables() == p * p + p + 3 * m, || {
            format!("n={n} p={p}: {} variables", model.num_variables())
        })?;
    }
    let inst = example1();
    let model = build_mip(&inst, &EdgeColoring::new(inst.m()), &example1_weights()).map_err(|e| e.to_string())?;
    let first = write_lp(&model);
    let second = write_lp(&build_mip(&inst, &EdgeColoring::new(inst.m()), &example1_weights()).unwrap());
    let golden = include_str!("fixtures/example1.lp");
    ensure(first == second, || "two writes differ".into())?;
    ensure(first == golden, || "output differs from the golden file".into())?;
    Ok("20 random sizes match the count formula; golden file byte-identical".into())
}

fn c12() -> Check {
    let inst = generate(20, 3, 12, Density::Clique).unwrap();
    let w = preset("w3a").unwrap();
    let start = Instant::now();
    let out = solve(&inst, &w, &SearchConfig::default()).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    ensure(out.stats.proven_optimal, || "not proven optimal".into())?;
    ensure(took < Duration::from_secs(30), || format!("took {took:?}"))?;
    Ok(format!(
        "n=20 p=3 solved to optimality in {took:.2?} ({} nodes)",
        out.stats.nodes_expanded
    ))
}

fn main() {
    let mut failed = 0;
    let mut report = |k: usize, name: &str, r: Check| {
        match r {
            Ok(msg) => println!("criterion {k:>2} PASS  {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {k:>2} FAIL  {name}: {msg}");
            }
        }
    };
    report(1, "worked example", c1());
    report(2, "preprocessing", c2());
    report(3, "bounds", c3());
    report(4, "shaving", c4());
    let sweep = oracle_sweep();
    report(5, "oracle equivalence", c5(&sweep));
    report(6, "bound soundness", c6(&sweep));
    report(7, "coloring soundness", c7(&sweep));
    report(8, "sorted-order relaxation", c8());
    report(9, "lambda prefix test", c9());
    report(10, "Lorenz identity", c10());
    report(11, "MIP model", c11());
    report(12, "desk-scale performance", c12());
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
