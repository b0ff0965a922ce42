//! Edge fixing from the OWA cut and cycle optimality conditions.
//!
//! With non-increasing weights OWA is convex and positively homogeneous,
//! hence `OWA(y - y') >= OWA(y) - OWA(y')`. An exchange `T - e' + e` can
//! therefore only help when `OWA(v^e - v^e') <= 0`, which gives:
//!
//! * cut condition: if every non-Blue edge crossing some cut that `e`
//!   crosses satisfies `OWA(v^e - v^e') <= 0`, some optimal tree of `T(c)`
//!   contains `e` (color it Blue);
//! * cycle condition: if every other edge on some Red-free cycle through
//!   `e` satisfies `OWA(v^e' - v^e) <= 0`, dropping `e` keeps the optimum
//!   of `T(c)` (color it Red).
//!
//! Both are decided by one DFS over a partial graph. Red edges are treated
//! as deleted: they cannot enter a tree of `T(c)`, and a cycle used for
//! the exchange argument must avoid them.

use crate::error::{Error, Result};
use crate::model::{EdgeId, Instance, OwaWeights};
use crate::mst::{EdgeColoring, EdgeState};

/// A vertex partition separating the endpoints of the tested edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutWitness {
    /// 1-based vertices on the side of the tested edge's first endpoint.
    pub side: Vec<usize>,
    /// Non-red edges crossing the cut, including the tested edge.
    pub crossing: Vec<EdgeId>,
}

/// A Red-free cycle through the tested edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleWitness {
    pub edges: Vec<EdgeId>,
}

/// Integer image of the weights: `OWA(y) * denom = sum scaled_i * y_(i)`.
/// Only signs are needed here, so the common denominator is dropped.
struct SignTest {
    scaled: Vec<i128>,
}

impl SignTest {
    fn new(w: &OwaWeights) -> Self {
        let denom = crate::rational::lcm_of_denominators(w.as_slice());
        SignTest {
            scaled: w
                .as_slice()
                .iter()
                .map(|x| x.numer() * (denom / x.denom()))
                .collect(),
        }
    }

    /// `OWA(a - b)` up to a positive factor.
    fn owa_diff(&self, a: &[i64], b: &[i64], buf: &mut Vec<i64>) -> i128 {
        buf.clear();
        buf.extend(a.iter().zip(b).map(|(x, y)| x - y));
        buf.sort_unstable_by(|x, y| y.cmp(x));
        self.scaled.iter().zip(buf.iter()).map(|(w, &d)| w * d as i128).sum()
    }
}

fn require_convex(w: &OwaWeights, inst: &Instance) -> Result<()> {
    if !w.class().is_non_increasing() {
        return Err(Error::Usage(
            "cut/cycle conditions need non-increasing OWA weights".into(),
        ));
    }
    if w.len() != inst.p() {
        return Err(Error::input(format!(
            "{} weights for {} objectives",
            w.len(),
            inst.p()
        )));
    }
    Ok(())
}

fn require_uncolored(coloring: &EdgeColoring, e: EdgeId, inst: &Instance) -> Result<()> {
    if coloring.len() != inst.m() || e >= inst.m() {
        return Err(Error::input("edge or coloring does not match the instance"));
    }
    if !coloring.is_uncolored(e) {
        return Err(Error::Usage(format!("edge {e} is already {}", coloring.get(e))));
    }
    Ok(())
}

/// Adjacency lists over the edges accepted by `keep`; entries are
/// `(neighbor, edge id)` with 0-based vertices.
fn partial_graph(inst: &Instance, mut keep: impl FnMut(EdgeId) -> bool) -> Vec<Vec<(usize, EdgeId)>> {
    let mut adj = vec![Vec::new(); inst.n()];
    for id in 0..inst.m() {
        if keep(id) {
            let (a, b) = inst.ends(id);
            adj[a].push((b, id));
            adj[b].push((a, id));
        }
    }
    adj
}

/// Iterative DFS; returns the edge used to reach each vertex (`None` for
/// the root and unreached vertices) plus the visited flags.
fn dfs(adj: &[Vec<(usize, EdgeId)>], root: usize) -> (Vec<Option<(usize, EdgeId)>>, Vec<bool>) {
    let mut via = vec![None; adj.len()];
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![root];
    seen[root] = true;
    while let Some(x) = stack.pop() {
        for &(y, id) in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                via[y] = Some((x, id));
                stack.push(y);
            }
        }
    }
    (via, seen)
}

struct Tester<'a> {
    inst: &'a Instance,
    sign: SignTest,
    buf: Vec<i64>,
}

impl<'a> Tester<'a> {
    fn new(inst: &'a Instance, w: &OwaWeights) -> Self {
        Tester {
            inst,
            sign: SignTest::new(w),
            buf: Vec::with_capacity(inst.p()),
        }
    }

    fn cut(&mut self, coloring: &EdgeColoring, e: EdgeId) -> Option<CutWitness> {
        let inst = self.inst;
        let ve = inst.cost(e);
        let (sign, buf) = (&self.sign, &mut self.buf);
        let adj = partial_graph(inst, |f| match coloring.get(f) {
            EdgeState::Red => false,
            EdgeState::Blue => true,
            EdgeState::Uncolored => sign.owa_diff(ve, inst.cost(f), buf) > 0,
        });
        let (i, j) = inst.ends(e);
        let (_, seen) = dfs(&adj, i);
        if seen[j] {
            return None;
        }
        let side = (0..inst.n()).filter(|&x| seen[x]).map(|x| x + 1).collect();
        let crossing = (0..inst.m())
            .filter(|&f| !coloring.is_red(f))
            .filter(|&f| {
                let (a, b) = inst.ends(f);
                seen[a] != seen[b]
            })
            .collect();
        Some(CutWitness { side, crossing })
    }

    fn cycle(&mut self, coloring: &EdgeColoring, e: EdgeId) -> Option<CycleWitness> {
        let inst = self.inst;
        let ve = inst.cost(e);
        let (sign, buf) = (&self.sign, &mut self.buf);
        let adj = partial_graph(inst, |f| {
            f != e
                && match coloring.get(f) {
                    EdgeState::Red => false,
                    EdgeState::Blue => true,
                    EdgeState::Uncolored => sign.owa_diff(inst.cost(f), ve, buf) <= 0,
                }
        });
        let (i, j) = inst.ends(e);
        let (via, seen) = dfs(&adj, i);
        if !seen[j] {
            return None;
        }
        let mut edges = vec![e];
        let mut x = j;
        while let Some((prev, id)) = via[x] {
            edges.push(id);
            x = prev;
        }
        Some(CycleWitness { edges })
    }
}

/// Cut condition for the uncolored edge `e`, with the separating cut.
pub fn cut_condition_holds(
    inst: &Instance,
    coloring: &EdgeColoring,
    w: &OwaWeights,
    e: EdgeId,
) -> Result<Option<CutWitness>> {
    require_convex(w, inst)?;
    require_uncolored(coloring, e, inst)?;
    Ok(Tester::new(inst, w).cut(coloring, e))
}

/// Cycle condition for the uncolored edge `e`, with the cycle found.
pub fn cycle_condition_holds(
    inst: &Instance,
    coloring: &EdgeColoring,
    w: &OwaWeights,
    e: EdgeId,
) -> Result<Option<CycleWitness>> {
    require_convex(w, inst)?;
    require_uncolored(coloring, e, inst)?;
    Ok(Tester::new(inst, w).cycle(coloring, e))
}

/// One sweep in edge-id order: Blue if the cut condition holds, else Red
/// if the cycle condition holds. O(m^2) overall.
pub fn preprocess(inst: &Instance, w: &OwaWeights) -> Result<EdgeColoring> {
    preprocess_from(inst, w, EdgeColoring::new(inst.m()))
}

/// [`preprocess`] starting from an existing coloring.
pub fn preprocess_from(inst: &Instance, w: &OwaWeights, mut coloring: EdgeColoring) -> Result<EdgeColoring> {
    require_convex(w, inst)?;
    if coloring.len() != inst.m() {
        return Err(Error::input("coloring does not match the instance"));
    }
    let mut tester = Tester::new(inst, w);
    for e in 0..inst.m() {
        if !coloring.is_uncolored(e) {
            continue;
        }
        if tester.cut(&coloring, e).is_some() {
            coloring.set(e, EdgeState::Blue);
        } else if tester.cycle(&coloring, e).is_some() {
            coloring.set(e, EdgeState::Red);
        }
    }
    Ok(coloring)
}
