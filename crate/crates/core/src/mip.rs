//! Flow-based MIP for the OWA spanning tree problem, written in LP file
//! format for external solvers.
//!
//! Tree structure comes from a single-commodity flow: vertex 1 ships
//! `n - 1` units, every other vertex absorbs one, and an arc carries flow
//! only if its edge is selected. The objective uses the Lorenz form
//! `OWA(y) = sum_i (w_i - w_{i+1}) L_i(y)` with each `L_i(y)` replaced by
//! its LP dual `min i r_i + sum_j d_ij` over `r_i + d_ij >= y_j, d >= 0`.
//! This is exact only when every `w_i - w_{i+1}` is positive.

use std::fmt::Write as _;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::model::{EdgeId, Instance, OwaWeights, Solution, WeightClass};
use crate::mst::{EdgeColoring, EdgeState};
use crate::rational::{decimal_digits, format_rational, Rational};

/// Digits kept for coefficients with no finite decimal expansion.
const FALLBACK_DIGITS: u32 = 18;

/// Terms per line in the written model.
const TERMS_PER_LINE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    /// Nonnegative continuous.
    Continuous,
    /// Unbounded continuous.
    Free,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    /// Value the variable is fixed to, if any.
    pub fixed: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    /// `(variable index, coefficient)`, zero coefficients omitted.
    pub terms: Vec<(usize, Rational)>,
    pub sense: Sense,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MipModel {
    pub name: String,
    pub variables: Vec<Variable>,
    /// Minimized.
    pub objective: Vec<(usize, Rational)>,
    pub constraints: Vec<Constraint>,
}

impl MipModel {
    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }
}

pub fn edge_var(id: EdgeId) -> String {
    format!("x_E{id}")
}

fn push_var(vars: &mut Vec<Variable>, name: String, kind: VarKind) -> usize {
    vars.push(Variable { name, kind, fixed: None });
    vars.len() - 1
}

/// Builds the model for `T(coloring)`. Blue edges are fixed to 1 and Red
/// edges to 0; the rows are the same as for the empty coloring.
pub fn build_mip(inst: &Instance, coloring: &EdgeColoring, w: &OwaWeights) -> Result<MipModel> {
    if w.class() != WeightClass::StrictlyDecreasing {
        return Err(Error::Usage(format!(
            "the MIP model needs strictly decreasing weights, got {}",
            w.class()
        )));
    }
    if w.len() != inst.p() {
        return Err(Error::input(format!("{} weights for {} objectives", w.len(), inst.p())));
    }
    if coloring.len() != inst.m() {
        return Err(Error::input(format!(
            "coloring has {} entries for {} edges",
            coloring.len(),
            inst.m()
        )));
    }
    let (n, p, m) = (inst.n(), inst.p(), inst.m());
    let one = Rational::from_integer(1);
    let cap = Rational::from_integer(n as i128 - 1);

    let mut vars = Vec::with_capacity(p * p + p + 3 * m);
    let x: Vec<usize> = (0..m).map(|e| push_var(&mut vars, edge_var(e), VarKind::Binary)).collect();
    for (e, &xe) in x.iter().enumerate() {
        match coloring.get(e) {
            EdgeState::Blue => vars[xe].fixed = Some(1),
            EdgeState::Red => vars[xe].fixed = Some(0),
            EdgeState::Uncolored => {}
        }
    }
    // Arc (u, v) then (v, u) for each edge.
    let mut arcs = Vec::with_capacity(2 * m);
    for edge in inst.edges() {
        for (a, b) in [(edge.u, edge.v), (edge.v, edge.u)] {
            arcs.push((a, b, push_var(&mut vars, format!("f_{a}_{b}"), VarKind::Continuous)));
        }
    }
    let r: Vec<usize> = (1..=p)
        .map(|i| push_var(&mut vars, format!("r_{i}"), VarKind::Free))
        .collect();
    let d: Vec<Vec<usize>> = (1..=p)
        .map(|i| {
            (1..=p)
                .map(|j| push_var(&mut vars, format!("d_{i}_{j}"), VarKind::Continuous))
                .collect()
        })
        .collect();

    let ws = w.as_slice();
    let mut objective = Vec::new();
    for i in 0..p {
        let next = ws.get(i + 1).copied().unwrap_or_else(Rational::zero);
        let gap = ws[i] - next;
        let rank = Rational::from_integer(i as i128 + 1);
        push_term(&mut objective, r[i], gap * rank);
        for &dij in &d[i] {
            push_term(&mut objective, dij, gap);
        }
    }

    let mut constraints = Vec::with_capacity(p * p + n + 2 * m + 1);
    for i in 0..p {
        for (j, &dij) in d[i].iter().enumerate() {
            let mut terms = vec![(r[i], one), (dij, one)];
            for (e, &xe) in x.iter().enumerate() {
                push_term(&mut terms, xe, -Rational::from_integer(inst.cost(e)[j] as i128));
            }
            constraints.push(Constraint {
                name: format!("lorenz_{}_{}", i + 1, j + 1),
                terms,
                sense: Sense::Ge,
                rhs: Rational::zero(),
            });
        }
    }
    for v in 1..=n {
        // Net inflow: -(n - 1) at the source, 1 elsewhere.
        let mut terms = Vec::new();
        for &(a, b, f) in &arcs {
            if b == v {
                terms.push((f, one));
            } else if a == v {
                terms.push((f, -one));
            }
        }
        let rhs = if v == 1 { -cap } else { one };
        constraints.push(Constraint {
            name: format!("flow_{v}"),
            terms,
            sense: Sense::Eq,
            rhs,
        });
    }
    for (k, &(a, b, f)) in arcs.iter().enumerate() {
        constraints.push(Constraint {
            name: format!("cap_{a}_{b}"),
            terms: vec![(f, one), (x[k / 2], -cap)],
            sense: Sense::Le,
            rhs: Rational::zero(),
        });
    }
    // A spanning tree has n - 1 edges; a right-hand side of 1 here would
    // make the model infeasible for n > 2.
    constraints.push(Constraint {
        name: "card".into(),
        terms: x.iter().map(|&xe| (xe, one)).collect(),
        sense: Sense::Eq,
        rhs: cap,
    });

    Ok(MipModel {
        name: "owa_spanning_tree".into(),
        variables: vars,
        objective,
        constraints,
    })
}

fn push_term(terms: &mut Vec<(usize, Rational)>, var: usize, coeff: Rational) {
    if !coeff.is_zero() {
        terms.push((var, coeff));
    }
}

fn number(r: &Rational) -> String {
    match decimal_digits(r) {
        Some(_) => format_rational(r),
        None => {
            let scale = Rational::from_integer(10i128.pow(FALLBACK_DIGITS));
            format_rational(&((r * scale).round() / scale))
        }
    }
}

fn write_terms(out: &mut String, model: &MipModel, terms: &[(usize, Rational)]) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for (k, (var, coeff)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if coeff.is_negative() { '-' } else { '+' };
        let abs = coeff.abs();
        let name = &model.variables[*var].name;
        if k == 0 && sign == '+' {
            out.push(' ');
        } else {
            let _ = write!(out, " {sign} ");
        }
        if abs == Rational::from_integer(1) {
            out.push_str(name);
        } else {
            let _ = write!(out, "{} {name}", number(&abs));
        }
    }
}

/// Serializes `model` in LP file format. Output depends only on the model.
pub fn write_lp(model: &MipModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\Problem name: {}", model.name);
    out.push_str("\nMinimize\n obj:");
    write_terms(&mut out, model, &model.objective);
    out.push_str("\n\nSubject To\n");
    for c in &model.constraints {
        let _ = write!(out, " {}:", c.name);
        write_terms(&mut out, model, &c.terms);
        let _ = writeln!(out, " {} {}", c.sense.symbol(), number(&c.rhs));
    }
    out.push_str("\nBounds\n");
    for v in &model.variables {
        match (v.kind, v.fixed) {
            (_, Some(value)) => {
                let _ = writeln!(out, " {} = {value}", v.name);
            }
            (VarKind::Free, None) => {
                let _ = writeln!(out, " {} free", v.name);
            }
            _ => {}
        }
    }
    out.push_str("\nBinaries\n");
    let binaries: Vec<&str> = model
        .variables
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    for chunk in binaries.chunks(TERMS_PER_LINE) {
        let _ = writeln!(out, " {}", chunk.join(" "));
    }
    out.push_str("\nEnd\n");
    out
}

/// Rebuilds a tree from solver output given as `name value` lines.
///
/// Only `x_E{id}` entries are read; other names are skipped, as are blank
/// lines and lines starting with `#`. An edge is selected when its value
/// is at least 0.5. The image and value are recomputed from the instance.
pub fn read_solution(inst: &Instance, w: &OwaWeights, text: &str) -> Result<Solution> {
    let mut selected = vec![false; inst.m()];
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::parse(k + 1, format!("expected 'name value', got '{line}'")));
        };
        let Some(id) = name.strip_prefix("x_E") else {
            continue;
        };
        let id: EdgeId = id
            .parse()
            .map_err(|_| Error::parse(k + 1, format!("bad variable name '{name}'")))?;
        if id >= inst.m() {
            return Err(Error::parse(k + 1, format!("edge id {id} out of range")));
        }
        let value: f64 = value
            .parse()
            .map_err(|_| Error::parse(k + 1, format!("bad value '{value}'")))?;
        if !value.is_finite() {
            return Err(Error::parse(k + 1, format!("bad value '{value}'")));
        }
        selected[id] = value >= 0.5;
    }
    let edges: Vec<EdgeId> = (0..inst.m()).filter(|&e| selected[e]).collect();
    Solution::new(inst, w, edges)
}

/// `name value` lines selecting exactly `edges`, in the format read by
/// [`read_solution`].
pub fn solution_text(inst: &Instance, edges: &[EdgeId]) -> String {
    let mut out = String::new();
    for e in 0..inst.m() {
        let _ = writeln!(out, "{} {}", edge_var(e), u8::from(edges.contains(&e)));
    }
    out
}
