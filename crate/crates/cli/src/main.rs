//! `pbadd`: exact model counting for pseudo-Boolean formulas.
//!
//! Subcommands: `count` runs the ADD pipeline, `oracle` the independent
//! enumeration counters, `gen` writes benchmark instances, and `compare`
//! cross-checks counter against oracle. Stdout carries `c ...` comment
//! lines and a final machine-readable `s mc <count>` (or `s wmc
//! <numerator>/<denominator>` when counting weighted) line.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;

use pbadd::count::{count_formula, ClusterStrategy, CountConfig, CountResult};
use pbadd::generate::{generate, BenchFamily, GenSpec};
use pbadd::opb::{parse_opb, render_opb};
use pbadd::oracle::{brute_force_count, mitm_count_formula, OracleError};
use pbadd::weights::{parse_weights, WeightFunction};
use pbadd::{CompileMode, PbFormula};

const EXIT_INPUT: u8 = 2;
const EXIT_ORACLE_GUARD: u8 = 3;
const EXIT_MISMATCH: u8 = 4;

#[derive(Parser)]
#[command(
    name = "pbadd",
    version,
    about = "Exact pseudo-Boolean model counter over algebraic decision diagrams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Bottomup,
    Topdown,
    Dynamic,
}

impl From<ModeArg> for CompileMode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Bottomup => CompileMode::BottomUp,
            ModeArg::Topdown => CompileMode::TopDown,
            ModeArg::Dynamic => CompileMode::Dynamic,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClusterArg {
    List,
    Tree,
}

impl From<ClusterArg> for ClusterStrategy {
    fn from(cluster: ClusterArg) -> Self {
        match cluster {
            ClusterArg::List => ClusterStrategy::List,
            ClusterArg::Tree => ClusterStrategy::Tree,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Knapsack,
    Auction,
    Casestudy,
}

#[derive(Subcommand)]
enum Command {
    /// Count the models of an OPB file
    Count {
        input: PathBuf,
        /// Constraint compilation route
        #[arg(long = "compile", value_enum, default_value_t = ModeArg::Dynamic)]
        compile: ModeArg,
        /// Cluster merge strategy
        #[arg(long = "cluster", value_enum, default_value_t = ClusterArg::List)]
        cluster: ClusterArg,
        /// Skip the preprocessing phase
        #[arg(long)]
        no_preprocess: bool,
        /// Literal weights file; switches output to `s wmc`
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Emit per-run statistics as comment lines
        #[arg(long)]
        stats: bool,
    },
    /// Count with an independent oracle: exhaustive enumeration, falling
    /// back to meet-in-the-middle for single-constraint formulas
    Oracle {
        input: PathBuf,
        /// Literal weights file; switches output to `s wmc`
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Write a generated benchmark instance as an OPB file
    Gen {
        /// Benchmark family (for casestudy, -n is the threshold k)
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Item/variable count
        #[arg(short = 'n', long = "vars")]
        num_vars: u32,
        /// Constraint/participant count
        #[arg(short = 'm', long = "constraints", default_value_t = 1)]
        num_constraints: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Run counter and oracle and fail on mismatch
    Compare {
        input: PathBuf,
        #[arg(long = "compile", value_enum, default_value_t = ModeArg::Dynamic)]
        compile: ModeArg,
        #[arg(long = "cluster", value_enum, default_value_t = ClusterArg::List)]
        cluster: ClusterArg,
        #[arg(long)]
        no_preprocess: bool,
        #[arg(long)]
        weights: Option<PathBuf>,
    },
}

enum CliError {
    Input(String),
    OracleGuard(String),
    Mismatch(String),
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn load_formula(path: &Path) -> Result<PbFormula, CliError> {
    let text = read_to_string(path)?;
    parse_opb(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_weights(path: &Option<PathBuf>) -> Result<WeightFunction, CliError> {
    match path {
        None => Ok(WeightFunction::ones()),
        Some(path) => {
            let text = read_to_string(path)?;
            parse_weights(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
        }
    }
}

fn cache_limit_from_env() -> Result<usize, CliError> {
    match std::env::var("PBADD_CACHE_LIMIT") {
        Err(_) => Ok(0),
        Ok(value) => value
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("invalid PBADD_CACHE_LIMIT value `{value}`"))),
    }
}

/// Final solution line: `s mc <n>` for unweighted runs, `s wmc <n>/<d>`
/// when a weights file was given.
fn solution_line(count: &BigRational, weighted: bool) -> String {
    if weighted {
        format!("s wmc {}/{}", count.numer(), count.denom())
    } else {
        debug_assert!(count.is_integer());
        format!("s mc {}", count.to_integer())
    }
}

fn stats_lines(formula: &PbFormula, result: &CountResult) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "c vars {} constraints {}",
        formula.num_vars(),
        formula.constraints().len()
    );
    let _ = writeln!(
        out,
        "c preprocess forced {} unsat {}",
        result.stats.preprocess_forced, result.stats.preprocess_unsat
    );
    for (i, compile) in result.stats.compile.iter().enumerate() {
        let _ = writeln!(
            out,
            "c constraint {i} mode {} recursion_calls {} peak_expression_nodes {}",
            compile.mode, compile.recursion_calls, compile.peak_expression_nodes
        );
    }
    let _ = writeln!(out, "c apply_calls {}", result.stats.apply_calls);
    let _ = writeln!(out, "c peak_nodes {}", result.stats.peak_nodes);
    out
}

fn run_count(
    input: &Path,
    mode: ModeArg,
    cluster: ClusterArg,
    no_preprocess: bool,
    weights_path: &Option<PathBuf>,
    stats: bool,
) -> Result<(), CliError> {
    let formula = load_formula(input)?;
    let weights = load_weights(weights_path)?;
    let config = CountConfig {
        mode: mode.into(),
        strategy: cluster.into(),
        preprocess: !no_preprocess,
        cache_limit: cache_limit_from_env()?,
    };
    let result = count_formula(&formula, &weights, &config);
    if stats {
        print!("{}", stats_lines(&formula, &result));
    }
    println!("{}", solution_line(&result.count, weights_path.is_some()));
    Ok(())
}

/// Brute force within its guard; single-constraint unweighted formulas fall
/// back to meet-in-the-middle above it.
fn run_oracle_count(
    formula: &PbFormula,
    weights: &WeightFunction,
    weighted: bool,
) -> Result<(BigRational, &'static str), CliError> {
    match brute_force_count(formula, weights) {
        Ok(count) => Ok((count, "brute-force")),
        Err(OracleError::UniverseTooLarge { .. }) if !weighted => match mitm_count_formula(formula)
        {
            Ok(count) => Ok((BigRational::from_integer(count), "meet-in-the-middle")),
            Err(e) => Err(CliError::OracleGuard(e.to_string())),
        },
        Err(e) => Err(CliError::OracleGuard(e.to_string())),
    }
}

fn run_oracle(input: &Path, weights_path: &Option<PathBuf>) -> Result<(), CliError> {
    let formula = load_formula(input)?;
    let weights = load_weights(weights_path)?;
    let (count, method) = run_oracle_count(&formula, &weights, weights_path.is_some())?;
    println!("c oracle {method}");
    println!("{}", solution_line(&count, weights_path.is_some()));
    Ok(())
}

fn run_gen(
    family: FamilyArg,
    num_vars: u32,
    num_constraints: u32,
    seed: u64,
    output: &Path,
) -> Result<(), CliError> {
    let spec = match family {
        FamilyArg::Knapsack => GenSpec::knapsack(num_vars, num_constraints, seed),
        FamilyArg::Auction => GenSpec::auction(num_vars, num_constraints, seed),
        FamilyArg::Casestudy => GenSpec {
            family: BenchFamily::CaseStudy,
            num_vars,
            num_constraints,
            seed,
            coeff_lo: 0,
            coeff_hi: 0,
        },
    };
    let formula = generate(&spec);
    std::fs::write(output, render_opb(&formula))
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", output.display())))
}

fn run_compare(
    input: &Path,
    mode: ModeArg,
    cluster: ClusterArg,
    no_preprocess: bool,
    weights_path: &Option<PathBuf>,
) -> Result<(), CliError> {
    let formula = load_formula(input)?;
    let weights = load_weights(weights_path)?;
    let config = CountConfig {
        mode: mode.into(),
        strategy: cluster.into(),
        preprocess: !no_preprocess,
        cache_limit: cache_limit_from_env()?,
    };
    let counted = count_formula(&formula, &weights, &config);
    let (expected, method) = run_oracle_count(&formula, &weights, weights_path.is_some())?;
    if counted.count != expected {
        return Err(CliError::Mismatch(format!(
            "counter found {} but {method} oracle found {}",
            counted.count, expected
        )));
    }
    println!("c counter agrees with {method} oracle");
    println!("{}", solution_line(&counted.count, weights_path.is_some()));
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Count {
            input,
            compile,
            cluster,
            no_preprocess,
            weights,
            stats,
        } => run_count(&input, compile, cluster, no_preprocess, &weights, stats),
        Command::Oracle { input, weights } => run_oracle(&input, &weights),
        Command::Gen {
            family,
            num_vars,
            num_constraints,
            seed,
            output,
        } => run_gen(family, num_vars, num_constraints, seed, &output),
        Command::Compare {
            input,
            compile,
            cluster,
            no_preprocess,
            weights,
        } => run_compare(&input, compile, cluster, no_preprocess, &weights),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(CliError::OracleGuard(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_ORACLE_GUARD)
        }
        Err(CliError::Mismatch(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_MISMATCH)
        }
    }
}
