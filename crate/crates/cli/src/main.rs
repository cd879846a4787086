mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kmsgraph::{GraphDocument, Mode, Rational};

use crate::commands::{Failure, Outcome};
use crate::output::{Diagnostics, Echo, ErrorRecord, OutputDocument, SCHEMA_VERSION};

#[derive(Debug, Parser)]
#[command(name = "kmsgraph", version, about = "Almost harmonic vectors of countable weighted graphs")]
pub struct Cli {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Graph file in the `kmsgraph v1` text format.
    #[arg(long, global = true, value_name = "FILE", conflicts_with = "gen")]
    pub graph: Option<PathBuf>,
    /// Built-in generator, e.g. "zwalk p=1/2 q=1/2".
    #[arg(long, global = true, value_name = "SPEC")]
    pub gen: Option<String>,
    /// Arithmetic; defaults to exact for tables and float for generators.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
}

#[derive(Debug, Args)]
pub struct NumericArgs {
    /// Eigenvalue parameter λ = e^β (decimal or p/q).
    #[arg(long, global = true, value_name = "L")]
    pub lambda: Option<String>,
    #[arg(long, global = true, default_value_t = 256, value_parser = clap::value_parser!(u64).range(1..))]
    pub depth: u64,
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    pub row_limit: u64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    Queue,
    Stack,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    #[value(name = "+")]
    Forward,
    #[value(name = "-")]
    Backward,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Standing assumptions, critical value and recurrence in one report.
    Analyze,
    /// Bounds on the critical value λ₀.
    Beta0,
    /// Recurrent or transient at λ₀.
    Classify,
    /// Truncated Green and first-passage series between two vertices.
    Green {
        #[arg(long)]
        v: String,
        #[arg(long)]
        w: String,
    },
    /// Extreme points of the normalized solution cone of a finite graph.
    Solve {
        #[arg(long)]
        v0: Option<String>,
    },
    /// Searches for a witness that no solution exists at λ.
    Certify,
    /// Extends a vector given on a hereditary set by the saturation sweep.
    Extend {
        #[arg(long, value_name = "FILE")]
        subset: PathBuf,
        #[arg(long, value_enum, default_value_t = OrderArg::Queue)]
        order: OrderArg,
        /// Probe radius for generators.
        #[arg(long)]
        window: Option<usize>,
    },
    /// Riesz decomposition of an almost harmonic vector.
    Riesz {
        #[arg(long, value_name = "FILE")]
        vector: PathBuf,
    },
    /// Martin kernel K_v(w) = G(v, w) / G(v0, w).
    Kernel {
        #[arg(long)]
        v0: Option<String>,
        #[arg(long)]
        target: String,
        /// Single vertex v; defaults to the probe window.
        #[arg(long)]
        v: Option<String>,
        #[arg(long, default_value_t = 5)]
        window: usize,
    },
    /// Kernels along a target sequence and their limit.
    KernelLimit {
        #[arg(long)]
        v0: Option<String>,
        /// One target vertex per line.
        #[arg(long, value_name = "FILE", conflicts_with = "family_direction")]
        targets_file: Option<PathBuf>,
        #[arg(long, value_enum, allow_hyphen_values = true)]
        family_direction: Option<Direction>,
        #[arg(long, default_value_t = 40)]
        count: usize,
        #[arg(long, default_value_t = 5)]
        window: usize,
    },
    /// Paths of the h-transformed chain and their kernel ratios.
    Sample {
        #[arg(long, value_name = "FILE")]
        psi: PathBuf,
        #[arg(long)]
        v0: Option<String>,
        #[arg(long, default_value_t = 200)]
        paths: usize,
        #[arg(long, default_value_t = 400)]
        horizon: usize,
        #[arg(long, default_value_t = 5)]
        window: usize,
        #[arg(long, default_value_t = 0.05)]
        closeness: f64,
        #[arg(long, default_value_t = 50)]
        stride: usize,
        /// Per-path step records for plotting.
        #[arg(long, value_name = "FILE")]
        tsv_out: Option<PathBuf>,
    },
    /// Runs an invariant suite, or checks a vector against the constraints.
    Check {
        #[arg(long, conflicts_with = "vector")]
        suite: Option<String>,
        #[arg(long, value_name = "FILE")]
        vector: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Beta0 => "beta0",
            Command::Classify => "classify",
            Command::Green { .. } => "green",
            Command::Solve { .. } => "solve",
            Command::Certify => "certify",
            Command::Extend { .. } => "extend",
            Command::Riesz { .. } => "riesz",
            Command::Kernel { .. } => "kernel",
            Command::KernelLimit { .. } => "kernel-limit",
            Command::Sample { .. } => "sample",
            Command::Check { .. } => "check",
        }
    }
}

fn usage(message: &str) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(2)
}

fn load_document(cli: &Cli) -> Result<Option<GraphDocument>, String> {
    match (&cli.source.graph, &cli.source.gen) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            GraphDocument::parse(&text).map(Some).map_err(|e| format!("{}: {e}", path.display()))
        }
        (None, Some(spec)) => GraphDocument::parse_generator(spec).map(Some).map_err(|e| e.to_string()),
        (None, None) => Ok(None),
        (Some(_), Some(_)) => Err("give exactly one of --graph and --gen".into()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let doc = match load_document(&cli) {
        Ok(doc) => doc,
        Err(e) => return usage(&e),
    };
    let suite_only = matches!(&cli.command, Command::Check { suite: Some(_), .. });
    if doc.is_none() && !suite_only {
        return usage("a graph source is required: --graph FILE or --gen SPEC");
    }
    let mode = doc.as_ref().map(|d| match cli.source.mode {
        Some(ModeArg::Exact) => Mode::Exact,
        Some(ModeArg::Float) => Mode::Float,
        None => d.mode(),
    });

    let outcome = match (&doc, mode) {
        (Some(d), Some(Mode::Exact)) => commands::run::<Rational>(&cli, Some(d)),
        (Some(d), _) => commands::run::<f64>(&cli, Some(d)),
        (None, _) => commands::run::<f64>(&cli, None),
    };

    let mut diagnostics = Diagnostics {
        mode: mode.map(|m| match m {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }),
        depth: cli.numeric.depth as usize,
        row_limit: cli.numeric.row_limit as usize,
        tol: cli.numeric.tol,
        seed: cli.numeric.seed,
        notes: Vec::new(),
    };
    let mut document = OutputDocument {
        schema_version: SCHEMA_VERSION,
        command: Echo { name: cli.command.name().into(), args: std::env::args().skip(1).collect() },
        result: None,
        error: None,
        diagnostics: diagnostics.clone(),
    };
    let (table, code) = match outcome {
        Ok(Outcome { result, table, notes }) => {
            diagnostics.notes = notes;
            document.result = Some(result);
            (Some(table), ExitCode::SUCCESS)
        }
        Err(Failure::Usage(message)) => return usage(&message),
        Err(Failure::Domain { kind, message, partial }) => {
            if let Some(partial) = partial {
                let Outcome { result, table, notes } = *partial;
                diagnostics.notes = notes;
                document.result = Some(result);
                document.error = Some(ErrorRecord { kind, message });
                (Some(table), ExitCode::from(1))
            } else {
                document.error = Some(ErrorRecord { kind, message });
                (None, ExitCode::from(1))
            }
        }
    };
    document.diagnostics = diagnostics;
    let text = match cli.format {
        Format::Json => document.to_json(),
        Format::Tsv => document.to_tsv(table.as_ref()),
    };
    print!("{text}");
    code
}
