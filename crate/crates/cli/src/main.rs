mod input;
mod output;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use alpha_mst::bnc::{solve_with_tables, Limits, SolveOptions};
use alpha_mst::model::{build_initial_relaxation, dump_cuts};
use alpha_mst::oracle::verify_bound_chain;
use alpha_mst::{Alpha, FormulationKind, GeometryTables, Instance, Point, SolveReport, SolveStatus};
use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use input::{format_tree, load_instance, parse_tree, Window};
use output::{append_csv, num, report_json, solve_row, write_text, BOUNDS_HEADER, SOLVE_HEADER, SUMMARY_HEADER};

#[derive(Parser)]
#[command(name = "alpha-mst", version, about = "Exact solver for angular constrained minimum spanning trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance by branch and cut.
    Solve(SolveArgs),
    /// Compare the root relaxation bounds of all five formulations.
    Bounds(BoundsArgs),
    /// Check whether a tree file is an alpha-spanning tree.
    Check(CheckArgs),
    /// Write an instance in the native format.
    Gen(GenArgs),
    /// Solve every instance at every angle and formulation.
    Bench(BenchArgs),
}

#[derive(Args, Clone, Copy)]
struct WindowArgs {
    /// Keep only this many points.
    #[arg(long)]
    n: Option<usize>,
    /// Index of the first point kept.
    #[arg(long, default_value_t = 0)]
    offset: usize,
}

impl From<WindowArgs> for Window {
    fn from(w: WindowArgs) -> Self {
        Window {
            n: w.n,
            offset: w.offset,
        }
    }
}

#[derive(Args, Clone, Copy)]
struct LimitArgs {
    /// Wall-clock limit in seconds.
    #[arg(long, value_parser = parse_time_limit)]
    time_limit: Option<f64>,
    /// Maximum number of processed nodes.
    #[arg(long)]
    node_limit: Option<usize>,
}

impl From<LimitArgs> for Limits {
    fn from(l: LimitArgs) -> Self {
        Limits {
            time: l.time_limit.map(Duration::from_secs_f64),
            nodes: l.node_limit,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file (native or TSPLIB).
    instance: PathBuf,
    /// Angle as a rational multiple of pi, e.g. `2/3pi`.
    #[arg(long, value_parser = parse_alpha)]
    alpha: Alpha,
    /// One of fx, fx+, fx++, fxy*, fxy.
    #[arg(long, default_value = "fx++", value_parser = parse_kind)]
    formulation: FormulationKind,
    #[command(flatten)]
    limits: LimitArgs,
    #[command(flatten)]
    window: WindowArgs,
    /// Write the JSON report here (`-` for standard output).
    #[arg(long)]
    json: Option<PathBuf>,
    /// Append one result row to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the incumbent tree here, one `i j` pair per line.
    #[arg(long)]
    tree: Option<PathBuf>,
    /// Write every generated cut here, one line per cut.
    #[arg(long)]
    cuts: Option<PathBuf>,
    /// Write the initial relaxation here in LP format.
    #[arg(long)]
    export_lp: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    instance: PathBuf,
    /// Angles to evaluate, comma separated; defaults to the benchmark grid.
    #[arg(long, value_parser = parse_alpha, value_delimiter = ',')]
    alpha: Vec<Alpha>,
    #[command(flatten)]
    window: WindowArgs,
    /// Append one row per angle to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    instance: PathBuf,
    /// Tree file with one `i j` pair per line, 0-based.
    tree: PathBuf,
    #[arg(long, value_parser = parse_alpha)]
    alpha: Alpha,
    #[command(flatten)]
    window: WindowArgs,
}

#[derive(Args)]
struct GenArgs {
    /// TSPLIB or native source file.
    #[arg(required_unless_present = "random", conflicts_with = "random")]
    source: Option<PathBuf>,
    /// Draw this many uniform points in a 100 x 100 square instead.
    #[arg(long)]
    random: Option<usize>,
    /// Seed for `--random`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    window: WindowArgs,
    /// Output file; standard output when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(required = true)]
    instances: Vec<PathBuf>,
    /// Angles, comma separated; defaults to the benchmark grid.
    #[arg(long, value_parser = parse_alpha, value_delimiter = ',')]
    alpha: Vec<Alpha>,
    /// Formulations, comma separated.
    #[arg(long, value_parser = parse_kind, value_delimiter = ',', default_value = "fx,fx+,fx++,fxy*")]
    formulation: Vec<FormulationKind>,
    #[command(flatten)]
    limits: LimitArgs,
    #[command(flatten)]
    window: WindowArgs,
    /// Append one row per run to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Append one aggregate row per formulation and angle to this CSV file.
    #[arg(long)]
    summary: Option<PathBuf>,
}

fn parse_alpha(s: &str) -> Result<Alpha, String> {
    s.parse::<Alpha>().map_err(|e| e.to_string())
}

fn parse_kind(s: &str) -> Result<FormulationKind, String> {
    s.parse::<FormulationKind>().map_err(|e| e.to_string())
}

fn parse_time_limit(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number of seconds"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("time limit must be positive, got {s}"))
    }
}

/// Failure caused by the invocation rather than by the solver.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| anyhow!(UsageError(format!("{e:#}"))))
}

fn init_logging() -> Result<()> {
    let level = match std::env::var("ALPHA_MST_LOG").as_deref() {
        Err(_) => log::LevelFilter::Warn,
        Ok("quiet") => log::LevelFilter::Off,
        Ok("info") => log::LevelFilter::Info,
        Ok("debug") => log::LevelFilter::Debug,
        Ok(other) => {
            return usage(Err(anyhow!(
                "ALPHA_MST_LOG must be quiet, info or debug, not `{other}`"
            )))
        }
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_logging().and_then(|_| match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Check(a) => cmd_check(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Bench(a) => cmd_bench(a),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn pct(v: f64) -> String {
    if v.is_finite() {
        format!("{:.2} %", 100.0 * v)
    } else {
        "-".to_string()
    }
}

fn root_gap(r: &SolveReport) -> f64 {
    if !r.upper_bound.is_finite() {
        return f64::INFINITY;
    }
    (r.upper_bound - r.root_bound).max(0.0) / r.upper_bound.abs().max(1e-12)
}

fn run_solve(inst: &Instance<f64>, alpha: Alpha, kind: FormulationKind, limits: Limits, record: bool) -> Result<SolveReport> {
    let tables = GeometryTables::build(inst, alpha);
    let options = SolveOptions {
        kind,
        limits,
        record_cuts: record,
    };
    solve_with_tables(inst, &tables, &options).with_context(|| format!("solving {} at {alpha} with {kind}", inst.name()))
}

fn cmd_solve(a: SolveArgs) -> Result<ExitCode> {
    let inst = usage(load_instance(&a.instance, a.window.into()))?;
    if let Some(path) = &a.export_lp {
        let tables = GeometryTables::build(&inst, a.alpha);
        let lp = build_initial_relaxation(&inst, &tables, a.formulation)?;
        write_text(path, &lp.to_lp_format())?;
    }
    let report = run_solve(&inst, a.alpha, a.formulation, a.limits.into(), a.cuts.is_some())?;

    if let Some(path) = &a.cuts {
        // the last column is each cut's violation at the incumbent
        let mut x = vec![0.0; inst.m()];
        for &(i, j) in report.tree.iter().flatten() {
            x[inst.edges().id(i, j)] = 1.0;
        }
        write_text(path, &dump_cuts(&report.recorded_cuts, inst.edges(), &x))?;
    }
    if let (Some(path), Some(pairs)) = (&a.tree, &report.tree) {
        write_text(path, &format_tree(pairs))?;
    }
    if let Some(path) = &a.csv {
        append_csv(path, &SOLVE_HEADER, &[solve_row(&report)])?;
    }
    let mut report = report;
    report.recorded_cuts.clear();
    match a.json.as_deref() {
        Some(p) if p == Path::new("-") => print!("{}", report_json(&report)?),
        other => {
            if let Some(path) = other {
                write_text(path, &report_json(&report)?)?;
            }
            print_solve_summary(&report);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn print_solve_summary(r: &SolveReport) {
    println!("instance {} (n = {}), alpha {}, {}", r.instance, r.n, r.alpha, r.kind);
    println!(
        "status {}, lb {}, ub {}, gap {}, root {} (root gap {})",
        r.status.as_str(),
        num(r.lower_bound),
        num(r.upper_bound),
        pct(r.gap()),
        num(r.root_bound),
        pct(root_gap(r))
    );
    println!(
        "nodes {}, cuts sec {} lac {} cycle {}, lp solves {}, {:.3} s",
        r.nodes, r.cuts.sec, r.cuts.lac, r.cuts.odd_cycle, r.lp_solves, r.time_s
    );
}

fn cmd_bounds(a: BoundsArgs) -> Result<ExitCode> {
    let inst = usage(load_instance(&a.instance, a.window.into()))?;
    let alphas = if a.alpha.is_empty() {
        Alpha::benchmark_grid().to_vec()
    } else {
        a.alpha
    };
    println!(
        "{:<8} {:>12} {:>12} {:>12} {:>12} {:>12} {:>8}  t(fx+) t(fx++) t(fxy*) t(fxy) / t(fx)",
        "alpha", "fx", "fx+", "fx++", "fxy*", "fxy", "gap"
    );
    let mut rows = Vec::new();
    for alpha in alphas {
        let c = verify_bound_chain(&inst, alpha)?;
        let gap = (c.fx_plusplus - c.fx) / c.fx;
        let base = c.seconds[0].max(1e-9);
        let ratios: Vec<String> = c.seconds[1..].iter().map(|t| format!("{:.2}", t / base)).collect();
        println!(
            "{:<8} {:>12.4} {:>12.4} {:>12.4} {:>12.4} {:>12.4} {:>8}  {}",
            alpha.to_string(),
            c.fx,
            c.fx_plus,
            c.fx_plusplus,
            c.fxy_star,
            c.fxy,
            pct(gap),
            ratios.join(" ")
        );
        let mut row = vec![
            inst.name().to_string(),
            inst.n().to_string(),
            alpha.to_string(),
            num(c.fx),
            num(c.fx_plus),
            num(c.fx_plusplus),
            num(c.fxy_star),
            num(c.fxy),
            format!("{:.2}", 100.0 * gap),
            c.plus_equals_star.to_string(),
        ];
        row.extend(c.seconds.iter().map(|t| format!("{t:.4}")));
        row.push(c.cuts.len().to_string());
        rows.push(row);
    }
    if let Some(path) = &a.csv {
        append_csv(path, &BOUNDS_HEADER, &rows)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(a: CheckArgs) -> Result<ExitCode> {
    let inst = usage(load_instance(&a.instance, a.window.into()))?;
    let text = usage(std::fs::read_to_string(&a.tree).with_context(|| format!("cannot read {}", a.tree.display())))?;
    let edges = usage(parse_tree(&text, inst.edges()))?;
    let tables = GeometryTables::build(&inst, a.alpha);
    let check = match tables.check_tree(&edges) {
        Ok(c) => c,
        Err(e) => {
            println!("not a spanning tree: {e}");
            return Ok(ExitCode::FAILURE);
        }
    };
    let weight = inst.tree_weight(&edges);
    let worst = check.tree.theta.iter().copied().fold(0.0, f64::max);
    println!(
        "weight {}, widest sector {:.6} rad, alpha {} = {:.6} rad",
        num(weight),
        worst,
        a.alpha,
        a.alpha.radians::<f64>()
    );
    if check.is_feasible() {
        println!("feasible alpha-spanning tree");
        Ok(ExitCode::SUCCESS)
    } else {
        for &v in &check.violations {
            println!("vertex {v}: sector {:.6} rad exceeds alpha", check.tree.theta[v]);
        }
        println!("infeasible at {} vertices", check.violations.len());
        Ok(ExitCode::FAILURE)
    }
}

fn cmd_gen(a: GenArgs) -> Result<ExitCode> {
    let inst = match (a.random, &a.source) {
        (Some(n), _) => {
            if n < 2 {
                return usage(Err(anyhow!("--random needs at least 2 points")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let mut pts: Vec<Point<f64>> = Vec::with_capacity(n);
            while pts.len() < n {
                let p = Point::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0));
                if pts.iter().all(|q| q.distance(&p) > 1e-9) {
                    pts.push(p);
                }
            }
            Instance::new(format!("random-{n}-{}", a.seed), pts)?
        }
        (None, Some(src)) => usage(load_instance(src, a.window.into()))?,
        (None, None) => unreachable!("clap requires a source or --random"),
    };
    let text = inst.to_native();
    match &a.output {
        Some(path) => write_text(path, &text)?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Default)]
struct Aggregate {
    runs: usize,
    optimal: usize,
    gap: f64,
    root_gap: f64,
    nodes: f64,
    time: f64,
    max_time: f64,
}

fn cmd_bench(a: BenchArgs) -> Result<ExitCode> {
    let instances = a
        .instances
        .iter()
        .map(|p| usage(load_instance(p, a.window.into())))
        .collect::<Result<Vec<_>>>()?;
    let alphas = if a.alpha.is_empty() {
        Alpha::benchmark_grid().to_vec()
    } else {
        a.alpha.clone()
    };
    let mut groups: BTreeMap<(usize, usize), Aggregate> = BTreeMap::new();
    for (ai, &alpha) in alphas.iter().enumerate() {
        for (ki, &kind) in a.formulation.iter().enumerate() {
            for inst in &instances {
                let r = run_solve(inst, alpha, kind, a.limits.into(), false)?;
                println!(
                    "{} {} {}: {} lb {} ub {} gap {} nodes {} {:.3} s",
                    r.instance,
                    r.alpha,
                    r.kind,
                    r.status.as_str(),
                    num(r.lower_bound),
                    num(r.upper_bound),
                    pct(r.gap()),
                    r.nodes,
                    r.time_s
                );
                if let Some(path) = &a.csv {
                    append_csv(path, &SOLVE_HEADER, &[solve_row(&r)])?;
                }
                let g = groups.entry((ki, ai)).or_default();
                g.runs += 1;
                g.optimal += (r.status == SolveStatus::Optimal) as usize;
                g.gap += finite_or_zero(r.gap());
                g.root_gap += finite_or_zero(root_gap(&r));
                g.nodes += r.nodes as f64;
                g.time += r.time_s;
                g.max_time = g.max_time.max(r.time_s);
            }
        }
    }
    println!("{:<6} {:<8} {:>5} {:>8} {:>9} {:>9} {:>10} {:>10}", "kind", "alpha", "runs", "optimal", "gap", "root gap", "nodes", "time s");
    let mut rows = Vec::new();
    for ((ki, ai), g) in &groups {
        let runs = g.runs as f64;
        let (kind, alpha) = (a.formulation[*ki], alphas[*ai]);
        println!(
            "{:<6} {:<8} {:>5} {:>8} {:>9} {:>9} {:>10.1} {:>10.3}",
            kind.to_string(),
            alpha.to_string(),
            g.runs,
            g.optimal,
            pct(g.gap / runs),
            pct(g.root_gap / runs),
            g.nodes / runs,
            g.time / runs
        );
        rows.push(vec![
            kind.to_string(),
            alpha.to_string(),
            g.runs.to_string(),
            g.optimal.to_string(),
            format!("{:.2}", 100.0 * g.gap / runs),
            format!("{:.2}", 100.0 * g.root_gap / runs),
            format!("{:.1}", g.nodes / runs),
            format!("{:.3}", g.time / runs),
            format!("{:.3}", g.max_time),
        ]);
    }
    if let Some(path) = &a.summary {
        append_csv(path, &SUMMARY_HEADER, &rows)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn finite_or_zero(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        0.0
    }
}
