//! `pbadd-harness`: runs a set of OPB instances under one or more
//! compilation routes and emits one CSV row per (instance, route) pair for
//! cactus-style analysis:
//!
//! ```text
//! instance,mode,count,wall_time_s,peak_nodes
//! ```

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};

use pbadd::count::{count_formula, ClusterStrategy, CountConfig};
use pbadd::opb::parse_opb;
use pbadd::weights::WeightFunction;
use pbadd::CompileMode;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Bottomup,
    Topdown,
    Dynamic,
    /// Run every route on every instance.
    All,
}

#[derive(Parser)]
#[command(
    name = "pbadd-harness",
    version,
    about = "CSV benchmark harness for pbadd"
)]
struct Cli {
    /// OPB instances to run
    #[arg(required = true)]
    instances: Vec<PathBuf>,
    /// Compilation route(s)
    #[arg(long = "compile", value_enum, default_value_t = ModeArg::All)]
    compile: ModeArg,
    /// Cluster merge strategy
    #[arg(long = "cluster", value_enum, default_value_t = ClusterArg::List)]
    cluster: ClusterArg,
    /// Skip the preprocessing phase
    #[arg(long)]
    no_preprocess: bool,
    /// CSV output path (stdout if omitted)
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClusterArg {
    List,
    Tree,
}

fn modes(arg: ModeArg) -> Vec<(CompileMode, &'static str)> {
    match arg {
        ModeArg::Bottomup => vec![(CompileMode::BottomUp, "bottomup")],
        ModeArg::Topdown => vec![(CompileMode::TopDown, "topdown")],
        ModeArg::Dynamic => vec![(CompileMode::Dynamic, "dynamic")],
        ModeArg::All => vec![
            (CompileMode::BottomUp, "bottomup"),
            (CompileMode::TopDown, "topdown"),
            (CompileMode::Dynamic, "dynamic"),
        ],
    }
}

fn run(cli: &Cli) -> Result<String, String> {
    let mut csv = String::from("instance,mode,count,wall_time_s,peak_nodes\n");
    for path in &cli.instances {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let formula = parse_opb(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        for (mode, name) in modes(cli.compile) {
            let config = CountConfig {
                mode,
                strategy: match cli.cluster {
                    ClusterArg::List => ClusterStrategy::List,
                    ClusterArg::Tree => ClusterStrategy::Tree,
                },
                preprocess: !cli.no_preprocess,
                cache_limit: 0,
            };
            let started = Instant::now();
            let result = count_formula(&formula, &WeightFunction::ones(), &config);
            let elapsed = started.elapsed().as_secs_f64();
            csv.push_str(&format!(
                "{},{},{},{:.6},{}\n",
                path.display(),
                name,
                result.count.to_integer(),
                elapsed,
                result.stats.peak_nodes
            ));
        }
    }
    Ok(csv)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(csv) => match &cli.output {
            None => {
                print!("{csv}");
                ExitCode::SUCCESS
            }
            Some(path) => {
                match std::fs::File::create(path).and_then(|mut f| f.write_all(csv.as_bytes())) {
                    Ok(()) => ExitCode::SUCCESS,
                    Err(e) => {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        ExitCode::from(2)
                    }
                }
            }
        },
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
