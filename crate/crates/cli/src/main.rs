//! Batch command-line interface for the exact cover toolkit.
//!
//! Thin adapters only: every subcommand parses flags, calls the library, and
//! streams the library's own rendering to stdout; no numerical logic lives
//! here. Exit codes: 0 success, 1 domain error, 2 usage error. Randomized
//! commands default to seed 0 for reproducibility.

use clap::{Parser, Subcommand, ValueEnum};
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use xcover::census::census;
use xcover::experiments::{run as run_experiment, ExperimentConfig, ExperimentKind};
use xcover::model::{generate, read_instance, write_instance, FormulaInstance, ModelParams};
use xcover::solver::{solve_with_budget, write_result, SolveMode, DEFAULT_NODE_BUDGET};
use xcover::theory::theory_report;

#[derive(Parser)]
#[command(name = "xcover", version, about = "Random k-uniform d-regular exact cover toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
enum ModeArg {
    Decide,
    #[default]
    Count,
    Enumerate,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
enum FormatArg {
    #[default]
    Kv,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Psat,
    Moments,
    Cycles,
    Overlap,
}

impl From<KindArg> for ExperimentKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Psat => ExperimentKind::Psat,
            KindArg::Moments => ExperimentKind::Moments,
            KindArg::Cycles => ExperimentKind::Cycles,
            KindArg::Overlap => ExperimentKind::Overlap,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance from the configuration model
    Gen {
        /// Clause width (>= 3)
        #[arg(short)]
        k: u32,
        /// Variable degree
        #[arg(short)]
        d: u32,
        /// Variable count (k must divide n)
        #[arg(short)]
        n: u64,
        /// Generator seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file (stdout when absent)
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Solve an instance file: decide, count, or enumerate
    Solve {
        /// Instance file in `p xc` format (use `-` for stdin)
        file: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        mode: ModeArg,
        /// Shorthand for --mode count
        #[arg(long, conflicts_with_all = ["mode", "decide", "enumerate"])]
        count: bool,
        /// Shorthand for --mode decide
        #[arg(long, conflicts_with_all = ["mode", "count", "enumerate"])]
        decide: bool,
        /// Shorthand for --mode enumerate
        #[arg(long, conflicts_with_all = ["mode", "count", "decide"])]
        enumerate: bool,
        /// Search-node budget (exceeding it reports unknown, exit 1)
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        node_budget: u64,
    },
    /// Print every closed-form quantity for a (k, d) pair
    Theory {
        #[arg(short)]
        k: u32,
        #[arg(short)]
        d: u32,
        /// Longest cycle family index reported
        #[arg(long, default_value_t = 8)]
        max_i: u32,
        #[arg(long, value_enum, default_value_t)]
        format: FormatArg,
    },
    /// Count short cycles in an instance file
    Cycles {
        /// Instance file in `p xc` format (use `-` for stdin)
        file: PathBuf,
        #[arg(long, default_value_t = 8)]
        max_i: usize,
    },
    /// Run a Monte Carlo experiment and emit CSV
    Experiment {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(short)]
        k: u32,
        #[arg(short)]
        d: u32,
        /// Single variable count
        #[arg(short, conflicts_with = "n_list")]
        n: Option<u64>,
        /// Comma-separated ladder of variable counts
        #[arg(long, value_delimiter = ',')]
        n_list: Vec<u64>,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        /// Master seed; per-trial streams are derived from it
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        node_budget: u64,
        /// Census length for the cycles kind
        #[arg(long, default_value_t = 3)]
        max_i: usize,
        /// Worker threads (0 = available parallelism)
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// CSV output file (stdout when absent)
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn read_instance_arg(path: &Path) -> Result<FormulaInstance, String> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| e.to_string())?;
        read_instance(text.as_bytes()).map_err(|e| e.to_string())
    } else {
        let file = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
        read_instance(BufReader::new(file)).map_err(|e| e.to_string())
    }
}

fn with_sink<F>(out: Option<&Path>, write: F) -> Result<(), String>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let mut w = BufWriter::new(file);
            write(&mut w).and_then(|()| w.flush()).map_err(|e| e.to_string())
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            write(&mut w).and_then(|()| w.flush()).map_err(|e| e.to_string())
        }
    }
}

fn dispatch(command: Command) -> Result<(), String> {
    match command {
        Command::Gen { k, d, n, seed, out } => {
            let params = ModelParams::new(k, d, n).map_err(|e| e.to_string())?;
            let inst = generate(params, seed);
            with_sink(out.as_deref(), |w| write_instance(&inst, w))
        }
        Command::Solve {
            file,
            mode,
            count,
            decide,
            enumerate,
            node_budget,
        } => {
            let inst = read_instance_arg(&file)?;
            let mode = if count {
                SolveMode::Count
            } else if decide {
                SolveMode::Decide
            } else if enumerate {
                SolveMode::Enumerate
            } else {
                match mode {
                    ModeArg::Decide => SolveMode::Decide,
                    ModeArg::Count => SolveMode::Count,
                    ModeArg::Enumerate => SolveMode::Enumerate,
                }
            };
            let result = solve_with_budget(&inst, mode, node_budget).map_err(|e| e.to_string())?;
            with_sink(None, |w| write_result(&result, w))
        }
        Command::Theory {
            k,
            d,
            max_i,
            format,
        } => {
            let report = theory_report(k, d, max_i).map_err(|e| e.to_string())?;
            with_sink(None, |w| match format {
                FormatArg::Kv => report.write_kv(w),
                FormatArg::Csv => report.write_csv(w),
            })
        }
        Command::Cycles { file, max_i } => {
            let inst = read_instance_arg(&file)?;
            let counts = census(&inst, max_i).map_err(|e| e.to_string())?;
            with_sink(None, |w| counts.write_kv(w))
        }
        Command::Experiment {
            kind,
            k,
            d,
            n,
            n_list,
            trials,
            seed,
            node_budget,
            max_i,
            workers,
            out,
        } => {
            let n_values = match (n, n_list.is_empty()) {
                (Some(n), true) => vec![n],
                (None, false) => n_list,
                (None, true) => return Err("provide -n or --n-list".into()),
                (Some(_), false) => unreachable!("clap conflict"),
            };
            let mut cfg = ExperimentConfig::new(kind.into());
            cfg.k_values = vec![k];
            cfg.d_values = vec![d];
            cfg.n_values = n_values;
            cfg.trials = trials;
            cfg.master_seed = seed;
            cfg.node_budget = node_budget;
            cfg.max_i = max_i;
            cfg.workers = workers;
            let output = run_experiment(&cfg).map_err(|e| e.to_string())?;
            with_sink(out.as_deref(), |w| output.write_csv(w))
        }
    }
}
