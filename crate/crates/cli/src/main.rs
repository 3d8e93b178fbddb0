//! `sawtooth`: compile networks to canonical piecewise-linear form, build
//! alternating-point datasets, compute exact errors and lower bounds, emit
//! plot polylines, and run the verification suites.
//!
//! Exit status contract (stable for CI): 0 success, 1 verification failure,
//! 2 usage or input-parse error.

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use sawtooth_core::{
    classification_error, n_ap, network_lower_bound, parse_rational, run_suite, strict_paper_n_ap,
    to_decimal, LabeledDataset, PwlFunction, Rational, RecurrentSpec, Suite, SuiteReport,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "sawtooth", version, about = "Exact sawtooth function algebra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a network JSON file to a canonical piecewise-linear function.
    Compile(CompileArgs),
    /// Write an alternating-point dataset as CSV.
    Dataset(DatasetArgs),
    /// Exact classification error of a compiled function on a dataset.
    Error(ErrorArgs),
    /// Theorem lower bound for given dataset size and architecture.
    Bound(BoundArgs),
    /// Write the polyline vertices of a compiled function as decimal CSV.
    Plot(PlotArgs),
    /// Run verification suites and print their JSON reports.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct CompileArgs {
    /// Network JSON (a plain network, or one with an "iterations" field).
    network: PathBuf,
    /// Output path for the compiled function JSON.
    output: PathBuf,
    /// Override the iteration count from the input file.
    #[arg(long)]
    iterations: Option<u32>,
}

#[derive(Args)]
struct DatasetArgs {
    /// Build the 2^k-ap.
    #[arg(long, conflicts_with = "n", required_unless_present = "n")]
    k: Option<u32>,
    /// Build the n-ap.
    #[arg(long)]
    n: Option<u64>,
    /// Output CSV path.
    #[arg(short, long)]
    output: PathBuf,
    /// Use the literal paper coordinates x_i = i * 2^-n, i = 1..n.
    #[arg(long)]
    strict_paper_coords: bool,
}

#[derive(Args)]
struct ErrorArgs {
    /// Compiled function JSON.
    pwl: PathBuf,
    /// Dataset CSV.
    dataset: PathBuf,
    /// Significant digits for the decimal rendering.
    #[arg(long, default_value_t = 12)]
    precision: usize,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    t: u64,
    #[arg(long)]
    m: u64,
    #[arg(long)]
    l: u32,
}

#[derive(Args)]
struct PlotArgs {
    /// Compiled function JSON.
    pwl: PathBuf,
    /// Left end of the plotted range (rational, e.g. "-1/2").
    #[arg(long)]
    lo: String,
    /// Right end of the plotted range (rational).
    #[arg(long)]
    hi: String,
    /// Output CSV path.
    #[arg(short, long)]
    output: PathBuf,
    /// Significant digits for decimal rendering (rendering only; vertices
    /// are computed exactly).
    #[arg(long, default_value_t = 12)]
    precision: usize,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name, or "all".
    #[arg(long)]
    suite: String,
    /// Cases per suite; defaults to each suite's own budget.
    #[arg(long)]
    cases: Option<u64>,
    /// RNG seed; falls back to $SAWTOOTH_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
}

/// Input/usage problems exit 2; suite failures exit 1.
enum Failure {
    Input(anyhow::Error),
    Verification,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(err: E) -> Self {
        Failure::Input(err.into())
    }
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Input(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Compile(args) => cmd_compile(args),
        Command::Dataset(args) => cmd_dataset(args),
        Command::Error(args) => cmd_error(args),
        Command::Bound(args) => cmd_bound(args),
        Command::Plot(args) => cmd_plot(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_text(path: &Path, content: &str) -> anyhow::Result<()> {
    std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

/// The single serialization point for JSON artifacts, so that re-parsing and
/// re-writing any output is byte-identical.
fn to_json_line<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string(value).expect("serialization is infallible");
    text.push('\n');
    text
}

fn cmd_compile(args: CompileArgs) -> Result<(), Failure> {
    let text = read_text(&args.network)?;
    let mut spec: RecurrentSpec = serde_json::from_str(&text)
        .with_context(|| format!("parsing network {}", args.network.display()))?;
    if let Some(iterations) = args.iterations {
        spec.iterations = iterations;
    }
    let compiled = spec.compile().context("compiling network")?;
    write_text(&args.output, &to_json_line(&compiled))?;
    println!(
        "pieces: {} (bound {})",
        compiled.piece_count(),
        spec.piece_bound()
    );
    Ok(())
}

fn cmd_dataset(args: DatasetArgs) -> Result<(), Failure> {
    let n = match (args.k, args.n) {
        (Some(k), None) => 1u64
            .checked_shl(k)
            .ok_or_else(|| anyhow!("--k {k} overflows the point count"))?,
        (None, Some(n)) => n,
        _ => unreachable!("clap enforces exactly one of --k/--n"),
    };
    let dataset = if args.strict_paper_coords {
        strict_paper_n_ap(n)
    } else {
        n_ap(n)
    }
    .context("building dataset")?;
    write_text(&args.output, &dataset.to_csv())?;
    println!("wrote {} points to {}", dataset.len(), args.output.display());
    Ok(())
}

fn cmd_error(args: ErrorArgs) -> Result<(), Failure> {
    let f: PwlFunction = serde_json::from_str(&read_text(&args.pwl)?)
        .with_context(|| format!("parsing function {}", args.pwl.display()))?;
    let dataset = LabeledDataset::from_csv(&read_text(&args.dataset)?)
        .with_context(|| format!("parsing dataset {}", args.dataset.display()))?;
    let error = classification_error(&f, &dataset);
    println!("exact: {error}");
    println!("decimal: {}", to_decimal(&error, args.precision));
    Ok(())
}

fn cmd_bound(args: BoundArgs) -> Result<(), Failure> {
    if args.n == 0 || args.t == 0 || args.m == 0 || args.l == 0 {
        return Err(anyhow!("n, t, m, l must all be positive").into());
    }
    let report = network_lower_bound(args.n, args.t, args.m, args.l);
    print!("{}", to_json_line(&report));
    Ok(())
}

fn cmd_plot(args: PlotArgs) -> Result<(), Failure> {
    let f: PwlFunction = serde_json::from_str(&read_text(&args.pwl)?)
        .with_context(|| format!("parsing function {}", args.pwl.display()))?;
    let lo = parse_rational(&args.lo).context("parsing --lo")?;
    let hi = parse_rational(&args.hi).context("parsing --hi")?;
    if lo >= hi {
        return Err(anyhow!("--lo must be < --hi").into());
    }

    let mut vertices: Vec<&Rational> = vec![&lo];
    vertices.extend(f.breakpoints().iter().filter(|b| lo < **b && **b < hi));
    vertices.push(&hi);

    let mut csv = String::from("x,y\n");
    for x in vertices {
        let y = f.eval(x);
        csv.push_str(&to_decimal(x, args.precision));
        csv.push(',');
        csv.push_str(&to_decimal(&y, args.precision));
        csv.push('\n');
    }
    write_text(&args.output, &csv)?;
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let seed = args.seed.or_else(seed_from_env).unwrap_or(0);
    let suites: Vec<Suite> = if args.suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![Suite::from_name(&args.suite)
            .ok_or_else(|| anyhow!("unknown suite {:?}", args.suite))?]
    };

    let mut all_passed = true;
    for suite in suites {
        let cases = args.cases.unwrap_or_else(|| suite.default_cases());
        let report: SuiteReport = run_suite(suite, cases, seed);
        print!("{}", to_json_line(&report));
        all_passed &= report.passed();
    }
    if all_passed {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn seed_from_env() -> Option<u64> {
    let text = std::env::var("SAWTOOTH_SEED").ok()?;
    text.trim().parse().ok()
}
