//! `owa-st`: generate instances, solve them, and inspect each stage of the
//! pipeline.

mod bench;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use owa_core::bounds::{Bounder, ObjectiveBoundConfig};
use owa_core::fixtures::{preset, PRESET_NAMES};
use owa_core::generate::{generate, Density};
use owa_core::mip::{build_mip, read_solution, write_lp};
use owa_core::oracle::{brute_force_optimum, count_trees_matrix_tree, enumerate_trees};
use owa_core::search::{default_k_seed, seed_incumbent_within, shave};
use owa_core::{
    format_rational, parse_rational, solve, BoundMethod, EdgeColoring, Instance, OwaWeights, SearchConfig,
    SearchStats, Solution,
};

/// Bumped whenever a field of the JSON outputs changes meaning or goes away.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "owa-st", version, about = "Exact OWA-optimal spanning trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded random clique instance.
    Generate(GenerateArgs),
    /// Find an OWA-optimal spanning tree.
    Solve(SolveArgs),
    /// Color edges by the optimality conditions; prints `edge_id state` lines.
    Preprocess(PreprocessArgs),
    /// Run one shaving pass; prints `edge_id state` lines.
    Shave(ShaveArgs),
    /// Lower bound on the optimum of a colored subproblem.
    Bound(BoundArgs),
    /// Write the MIP model in LP file format.
    ExportMip(ExportArgs),
    /// Read a solver's `name value` output back into a tree.
    ReadSolution(ReadSolutionArgs),
    /// Count spanning trees and solve by enumeration.
    Oracle(OracleArgs),
    /// Time the pipeline over seeded instances.
    Bench(bench::BenchArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "clique")]
    density: String,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
struct WeightArgs {
    /// File with one weight per line.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Hurwicz weights `(alpha, 0, .., 0, 1 - alpha)`.
    #[arg(long)]
    hurwicz: Option<String>,
    /// Bundled preset: w3a, w3b, w5 or w10.
    #[arg(long)]
    preset: Option<String>,
}

impl WeightArgs {
    fn load(&self, p: usize) -> anyhow::Result<OwaWeights> {
        let w = if let Some(path) = &self.weights {
            OwaWeights::parse(&read(path)?)?
        } else if let Some(alpha) = &self.hurwicz {
            OwaWeights::hurwicz(parse_rational(alpha)?, p)?
        } else if let Some(name) = &self.preset {
            preset(name)
                .with_context(|| format!("unknown preset '{name}', expected one of {}", PRESET_NAMES.join(", ")))?
        } else {
            bail!("no weights given");
        };
        if w.len() != p {
            bail!("{} weights for {} objectives", w.len(), p);
        }
        Ok(w)
    }
}

#[derive(Args)]
struct Problem {
    /// Instance file.
    instance: PathBuf,
    #[command(flatten)]
    weights: WeightArgs,
}

impl Problem {
    fn load(&self) -> anyhow::Result<(Instance, OwaWeights)> {
        let inst = Instance::parse(&read(&self.instance)?)?;
        let w = self.weights.load(inst.p())?;
        Ok((inst, w))
    }
}

fn load_coloring(path: Option<&Path>, inst: &Instance) -> anyhow::Result<EdgeColoring> {
    match path {
        Some(p) => Ok(EdgeColoring::parse(&read(p)?, inst.m())?),
        None => Ok(EdgeColoring::new(inst.m())),
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: Problem,
    /// Bound used at branch-and-bound nodes.
    #[arg(long, default_value = "image")]
    bound: BoundMethod,
    /// Bound used while shaving.
    #[arg(long, default_value = "objective")]
    shave_bound: BoundMethod,
    #[arg(long)]
    no_preprocess: bool,
    #[arg(long)]
    no_shave: bool,
    /// Answer comonotonic instances by branch-and-bound too.
    #[arg(long)]
    no_fast_path: bool,
    #[arg(long)]
    k_seed: Option<usize>,
    /// Recorded in the stats; the solver itself is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    node_limit: Option<u64>,
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    stats_json: Option<PathBuf>,
    /// Write the MIP restricted to the coloring left after shaving.
    #[arg(long)]
    export_mip: Option<PathBuf>,
}

#[derive(Args)]
struct PreprocessArgs {
    #[command(flatten)]
    problem: Problem,
}

#[derive(Args)]
struct ShaveArgs {
    #[command(flatten)]
    problem: Problem,
    #[arg(long, default_value = "objective")]
    method: BoundMethod,
    /// Starting coloring as `edge_id state` lines.
    #[arg(long)]
    coloring: Option<PathBuf>,
    #[arg(long)]
    k_seed: Option<usize>,
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    problem: Problem,
    #[arg(long, default_value = "image")]
    method: BoundMethod,
    #[arg(long)]
    coloring: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    problem: Problem,
    #[arg(long)]
    coloring: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReadSolutionArgs {
    #[command(flatten)]
    problem: Problem,
    /// Solver output, one `name value` pair per line.
    solution: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    instance: PathBuf,
    /// Also solve by enumeration under these weights.
    #[command(flatten)]
    weights: OptionalWeights,
    #[arg(long)]
    coloring: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = false, multiple = false)]
struct OptionalWeights {
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long)]
    hurwicz: Option<String>,
    #[arg(long)]
    preset: Option<String>,
}

impl OptionalWeights {
    fn to_args(&self) -> Option<WeightArgs> {
        (self.weights.is_some() || self.hurwicz.is_some() || self.preset.is_some()).then(|| WeightArgs {
            weights: self.weights.clone(),
            hurwicz: self.hurwicz.clone(),
            preset: self.preset.clone(),
        })
    }
}

#[derive(Serialize)]
struct StatsJson<'a> {
    schema_version: u32,
    seed: u64,
    value: String,
    image: &'a [i64],
    edges: &'a [usize],
    #[serde(flatten)]
    stats: &'a SearchStats,
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_out(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn solution_lines(inst: &Instance, s: &Solution) -> String {
    let edges: Vec<String> = s
        .edges()
        .iter()
        .map(|&e| {
            let edge = inst.edge(e);
            format!("{e}:[{},{}]", edge.u, edge.v)
        })
        .collect();
    let image: Vec<String> = s.image().as_slice().iter().map(i64::to_string).collect();
    format!(
        "value {}\nimage {}\nedges {}\n",
        format_rational(&s.value()),
        image.join(" "),
        edges.join(" ")
    )
}

fn run_solve(args: &SolveArgs) -> anyhow::Result<()> {
    let (inst, w) = args.problem.load()?;
    let time_limit = match args.time_limit {
        Some(t) if !(t.is_finite() && t > 0.0) => bail!("time limit must be positive, got {t}"),
        t => t.map(Duration::from_secs_f64),
    };
    let cfg = SearchConfig {
        bound_method: args.bound,
        shave_bound: Some(args.shave_bound),
        k_seed: args.k_seed,
        preprocess: !args.no_preprocess,
        shave: !args.no_shave,
        fast_paths: !args.no_fast_path,
        node_limit: args.node_limit,
        time_limit,
        ..SearchConfig::default()
    };
    let out = solve(&inst, &w, &cfg)?;
    print!("{}", solution_lines(&inst, &out.solution));
    println!("proven_optimal {}", out.stats.proven_optimal);
    if let Some(path) = &args.stats_json {
        let json = StatsJson {
            schema_version: SCHEMA_VERSION,
            seed: args.seed,
            value: format_rational(&out.solution.value()),
            image: out.solution.image().as_slice(),
            edges: out.solution.edges(),
            stats: &out.stats,
        };
        fs::write(path, serde_json::to_string_pretty(&json)? + "\n")
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    if let Some(path) = &args.export_mip {
        let model = build_mip(&inst, &out.coloring, &w)?;
        write_out(Some(path), &write_lp(&model))?;
    }
    Ok(())
}

fn run_shave(args: &ShaveArgs) -> anyhow::Result<()> {
    let (inst, w) = args.problem.load()?;
    let start = load_coloring(args.coloring.as_deref(), &inst)?;
    let k = args.k_seed.unwrap_or_else(|| default_k_seed(inst.n()));
    let incumbent = seed_incumbent_within(&inst, &w, &start, k)?;
    let out = shave(&inst, &start, &w, incumbent, args.method, &ObjectiveBoundConfig::default())?;
    println!("# incumbent {}", format_rational(&out.incumbent.value()));
    println!("# blue {} red {}", out.coloring.blue_count(), out.coloring.red_count());
    print!("{}", out.coloring.to_text());
    Ok(())
}

fn run_bound(args: &BoundArgs) -> anyhow::Result<()> {
    let (inst, w) = args.problem.load()?;
    let coloring = load_coloring(args.coloring.as_deref(), &inst)?;
    let mut bounder = Bounder::new(&inst, &w, ObjectiveBoundConfig::default());
    let res = bounder.bound(args.method, &coloring, None)?;
    println!("bound {}", format_rational(&res.value));
    if let Some(lambda) = &res.lambda {
        let l: Vec<String> = lambda.iter().map(format_rational).collect();
        println!("lambda {}", l.join(" "));
    }
    for s in &res.witnesses {
        let e: Vec<String> = s.edges().iter().map(usize::to_string).collect();
        println!("witness {} {}", format_rational(&s.value()), e.join(","));
    }
    Ok(())
}

fn run_oracle(args: &OracleArgs) -> anyhow::Result<()> {
    let inst = Instance::parse(&read(&args.instance)?)?;
    let coloring = load_coloring(args.coloring.as_deref(), &inst)?;
    if args.coloring.is_none() {
        println!("trees {}", enumerate_trees(&inst).count());
        println!("matrix_tree {}", count_trees_matrix_tree(&inst));
    } else {
        println!("trees {}", owa_core::oracle::TreeEnumerator::within(&inst, &coloring).count());
    }
    if let Some(wargs) = args.weights.to_args() {
        let w = wargs.load(inst.p())?;
        let best = brute_force_optimum(&inst, &w, &coloring)?;
        print!("{}", solution_lines(&inst, &best));
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate(a) => {
            let density: Density = a.density.parse()?;
            let inst = generate(a.n, a.p, a.seed, density)?;
            write_out(a.output.as_deref(), &inst.to_text())
        }
        Command::Solve(a) => run_solve(&a),
        Command::Preprocess(a) => {
            let (inst, w) = a.problem.load()?;
            let c = owa_core::preprocess::preprocess(&inst, &w)?;
            print!("{}", c.to_text());
            Ok(())
        }
        Command::Shave(a) => run_shave(&a),
        Command::Bound(a) => run_bound(&a),
        Command::ExportMip(a) => {
            let (inst, w) = a.problem.load()?;
            let coloring = load_coloring(a.coloring.as_deref(), &inst)?;
            write_out(a.output.as_deref(), &write_lp(&build_mip(&inst, &coloring, &w)?))
        }
        Command::ReadSolution(a) => {
            let (inst, w) = a.problem.load()?;
            let s = read_solution(&inst, &w, &read(&a.solution)?)?;
            print!("{}", solution_lines(&inst, &s));
            Ok(())
        }
        Command::Oracle(a) => run_oracle(&a),
        Command::Bench(a) => bench::run(&a),
    }
}

/// `error kind=<tag> msg=<text>` on a single line.
fn error_line(err: &anyhow::Error) -> String {
    let kind = err
        .chain()
        .find_map(|e| e.downcast_ref::<owa_core::Error>())
        .map_or("cli", owa_core::Error::kind);
    let msg = format!("{err:#}").replace(['\n', '\r'], " ");
    format!("error kind={kind} msg={msg}")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let parts: Vec<&str> = msg
                .lines()
                .take_while(|l| !l.starts_with("Usage:"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            let msg = parts.join(" ");
            eprintln!("error kind=args msg={}", msg.strip_prefix("error: ").unwrap_or(&msg));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            ExitCode::FAILURE
        }
    }
}
