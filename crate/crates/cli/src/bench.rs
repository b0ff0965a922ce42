//! Desk-scale benchmark: seeded instances per cell, timings and coloring
//! counts, optional oracle check on small graphs.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::Args;
use serde::Serialize;

use owa_core::fixtures::preset;
use owa_core::generate::{generate, Density};
use owa_core::oracle::brute_force_optimum;
use owa_core::{format_rational, solve, BoundMethod, EdgeColoring, OwaWeights, SearchConfig};

use crate::SCHEMA_VERSION;

/// Largest vertex count checked against brute force.
const ORACLE_MAX_N: usize = 8;

#[derive(Args)]
pub struct BenchArgs {
    /// Vertex counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "8,10")]
    n: Vec<usize>,
    /// Weight presets, comma separated; each fixes p.
    #[arg(long, value_delimiter = ',', default_value = "w3a")]
    presets: Vec<String>,
    /// Branching bounds, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "image,objective")]
    methods: Vec<BoundMethod>,
    #[arg(long, default_value_t = 30)]
    instances: u64,
    /// Instance `i` of a cell uses generator seed `seed + i`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seconds per instance.
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    #[arg(long)]
    no_preprocess: bool,
    #[arg(long)]
    no_shave: bool,
    /// JSON report path; the aligned table always goes to stdout.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct InstanceRun {
    seed: u64,
    value: String,
    wall_time_ms: f64,
    proven_optimal: bool,
    nodes_expanded: u64,
    preprocess_blue: usize,
    preprocess_red: usize,
    shaved_blue: usize,
    shaved_red: usize,
    /// `None` when the instance is too large for enumeration.
    oracle_match: Option<bool>,
}

#[derive(Debug, Serialize)]
struct Cell {
    n: usize,
    p: usize,
    weights: String,
    method: BoundMethod,
    preprocess: bool,
    shave: bool,
    mean_ms: f64,
    min_ms: f64,
    max_ms: f64,
    mean_preprocess_blue: f64,
    mean_preprocess_red: f64,
    mean_shaved_blue: f64,
    mean_shaved_red: f64,
    proven_optimal: usize,
    oracle_verified: Option<usize>,
    runs: Vec<InstanceRun>,
}

#[derive(Debug, Serialize)]
struct Report {
    schema_version: u32,
    seed: u64,
    instances: u64,
    time_limit_s: f64,
    cells: Vec<Cell>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, k) = xs.fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
    if k == 0 {
        0.0
    } else {
        s / k as f64
    }
}

fn run_cell(
    args: &BenchArgs,
    n: usize,
    name: &str,
    w: &OwaWeights,
    method: BoundMethod,
) -> anyhow::Result<Cell> {
    let cfg = SearchConfig {
        bound_method: method,
        preprocess: !args.no_preprocess,
        shave: !args.no_shave,
        time_limit: Some(Duration::from_secs_f64(args.time_limit)),
        ..SearchConfig::default()
    };
    let mut runs = Vec::with_capacity(args.instances as usize);
    for i in 0..args.instances {
        let seed = args.seed.wrapping_add(i);
        let inst = generate(n, w.len(), seed, Density::Clique)?;
        let out = solve(&inst, w, &cfg)?;
        let s = &out.stats;
        let oracle_match = (n <= ORACLE_MAX_N).then(|| {
            brute_force_optimum(&inst, w, &EdgeColoring::new(inst.m()))
                .map(|best| best.value() == out.solution.value())
        });
        runs.push(InstanceRun {
            seed,
            value: format_rational(&out.solution.value()),
            wall_time_ms: s.wall_time_ms,
            proven_optimal: s.proven_optimal,
            nodes_expanded: s.nodes_expanded,
            preprocess_blue: s.preprocess_blue,
            preprocess_red: s.preprocess_red,
            shaved_blue: s.shaved_blue,
            shaved_red: s.shaved_red,
            oracle_match: oracle_match.transpose()?,
        });
    }
    let times = || runs.iter().map(|r| r.wall_time_ms);
    Ok(Cell {
        n,
        p: w.len(),
        weights: name.to_string(),
        method,
        preprocess: !args.no_preprocess,
        shave: !args.no_shave,
        mean_ms: mean(times()),
        min_ms: times().fold(f64::INFINITY, f64::min),
        max_ms: times().fold(0.0, f64::max),
        mean_preprocess_blue: mean(runs.iter().map(|r| r.preprocess_blue as f64)),
        mean_preprocess_red: mean(runs.iter().map(|r| r.preprocess_red as f64)),
        mean_shaved_blue: mean(runs.iter().map(|r| r.shaved_blue as f64)),
        mean_shaved_red: mean(runs.iter().map(|r| r.shaved_red as f64)),
        proven_optimal: runs.iter().filter(|r| r.proven_optimal).count(),
        oracle_verified: (n <= ORACLE_MAX_N).then(|| runs.iter().filter(|r| r.oracle_match == Some(true)).count()),
        runs,
    })
}

fn table(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>4} {:>3} {:>7} {:>9} {:>10} {:>10} {:>10} {:>13} {:>13} {:>7} {:>7}",
        "n", "p", "weights", "method", "mean_ms", "min_ms", "max_ms", "pp(#b-#r)", "sh(#b-#r)", "optimal", "oracle"
    );
    for c in &report.cells {
        let oracle = c
            .oracle_verified
            .map_or_else(|| "-".to_string(), |k| format!("{k}/{}", c.runs.len()));
        let _ = writeln!(
            out,
            "{:>4} {:>3} {:>7} {:>9} {:>10.2} {:>10.2} {:>10.2} {:>13} {:>13} {:>7} {:>7}",
            c.n,
            c.p,
            c.weights,
            c.method.to_string(),
            c.mean_ms,
            c.min_ms,
            c.max_ms,
            format!("({:.1}-{:.1})", c.mean_preprocess_blue, c.mean_preprocess_red),
            format!("({:.1}-{:.1})", c.mean_shaved_blue, c.mean_shaved_red),
            format!("{}/{}", c.proven_optimal, c.runs.len()),
            oracle,
        );
    }
    out
}

pub fn run(args: &BenchArgs) -> anyhow::Result<()> {
    if !(args.time_limit.is_finite() && args.time_limit > 0.0) {
        bail!("time limit must be positive, got {}", args.time_limit);
    }
    let mut weights = Vec::new();
    for name in &args.presets {
        let w = preset(name).with_context(|| format!("unknown preset '{name}'"))?;
        weights.push((name.as_str(), w));
    }
    let mut cells = Vec::new();
    for &n in &args.n {
        for (name, w) in &weights {
            for &method in &args.methods {
                cells.push(run_cell(args, n, name, w, method)?);
            }
        }
    }
    let report = Report {
        schema_version: SCHEMA_VERSION,
        seed: args.seed,
        instances: args.instances,
        time_limit_s: args.time_limit,
        cells,
    };
    print!("{}", table(&report));
    if let Some(path) = &args.json {
        fs::write(path, serde_json::to_string_pretty(&report)? + "\n")
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}
