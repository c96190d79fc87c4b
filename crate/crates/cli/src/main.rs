//! `rowball`: invariants of row contractions and automorphisms of the
//! noncommutative unit ball, reported as text or JSON.

mod commands;
mod io;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rowball_core::Tolerance;
use serde::Serialize;
use serde_json::Value;

#[derive(Parser, Debug)]
#[command(name = "rowball", version, about = "Unitary invariants of row contractions")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Seed for randomized searches.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Process several input files concurrently.
    #[arg(long, global = true)]
    parallel: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certify that each tuple is a row contraction.
    Check { files: Vec<PathBuf> },
    /// Compute Γ(T) = (p, m, q).
    Gamma { files: Vec<PathBuf> },
    /// Γ(T) together with the structural labels it implies.
    Classify { files: Vec<PathBuf> },
    /// Canonical triangularization of a polynomial tuple.
    Decompose { file: PathBuf },
    /// Characteristic function: degree by both methods, or coefficients.
    Charfun {
        file: PathBuf,
        #[arg(long, conflicts_with = "coeffs", required_unless_present = "coeffs")]
        degree: bool,
        /// Largest word length to list.
        #[arg(long, value_name = "L")]
        coeffs: Option<usize>,
    },
    /// Truncated Poisson kernel and its telescoping identity.
    Poisson {
        file: PathBuf,
        #[arg(long, value_name = "N")]
        depth: usize,
    },
    /// Wold decomposition of a row isometry.
    Wold { file: PathBuf },
    /// Structural models.
    #[command(subcommand)]
    Model(ModelCommand),
    /// Automorphisms of the unit ball.
    #[command(subcommand)]
    Aut(AutCommand),
    /// The projective representation on truncated Fock space.
    #[command(subcommand)]
    Projrep(ProjrepCommand),
    /// Compare two tuples through Γ and their characteristic functions.
    Coincide {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 3)]
        cutoff: usize,
        #[arg(long, default_value_t = 200)]
        iters: usize,
    },
}

#[derive(Subcommand, Debug)]
enum ModelCommand {
    /// Assemble the model tuple and its exclusion subspace.
    Realize { file: PathBuf },
    /// Predict Γ from the block structure and compare with the realization.
    Gamma { file: PathBuf },
}

#[derive(Subcommand, Debug)]
enum AutCommand {
    Compose { a: PathBuf, b: PathBuf },
    Invert { a: PathBuf },
    /// Evaluate the automorphism at a tuple.
    Apply { a: PathBuf, tuple: PathBuf },
    /// Interval bounds on d_E(a, b).
    Metric {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
}

#[derive(Subcommand, Debug)]
enum ProjrepCommand {
    Verify {
        a: PathBuf,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 2)]
        buffer: usize,
    },
    Cocycle {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 2)]
        buffer: usize,
    },
}

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Core(rowball_core::Error),
}

impl From<rowball_core::Error> for CliError {
    fn from(e: rowball_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(msg) => write!(f, "parse error: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_certification() => 3,
            _ => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "parse",
            CliError::Core(e) if e.is_certification() => "certification",
            CliError::Core(_) => "validation",
        }
    }
}

#[derive(Serialize)]
struct Digest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Report {
    command: String,
    inputs: Vec<Digest>,
    tolerance: Tolerance,
    results: Value,
}

/// Shared state handed to each command.
pub struct Ctx {
    pub seed: u64,
    pub parallel: bool,
    pub residual_override: Option<f64>,
    inputs: std::cell::RefCell<Vec<Digest>>,
}

impl Ctx {
    pub fn read(&self, path: &std::path::Path) -> Result<io::Input, CliError> {
        let input = io::read_input(path)?;
        self.inputs.borrow_mut().push(Digest { path: input.path.clone(), sha256: input.sha256.clone() });
        Ok(input)
    }

    pub fn tolerance(&self) -> Tolerance {
        let mut tol = Tolerance::default();
        if let Some(r) = self.residual_override {
            tol.residual_abs = r;
        }
        tol
    }
}

fn residual_override() -> Result<Option<f64>, CliError> {
    match std::env::var("ROWBALL_TOL") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(Some(v)),
            _ => Err(CliError::Parse(format!("ROWBALL_TOL: expected a positive number, got {s:?}"))),
        },
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::Gamma { .. } => "gamma",
            Command::Classify { .. } => "classify",
            Command::Decompose { .. } => "decompose",
            Command::Charfun { .. } => "charfun",
            Command::Poisson { .. } => "poisson",
            Command::Wold { .. } => "wold",
            Command::Model(ModelCommand::Realize { .. }) => "model realize",
            Command::Model(ModelCommand::Gamma { .. }) => "model gamma",
            Command::Aut(AutCommand::Compose { .. }) => "aut compose",
            Command::Aut(AutCommand::Invert { .. }) => "aut invert",
            Command::Aut(AutCommand::Apply { .. }) => "aut apply",
            Command::Aut(AutCommand::Metric { .. }) => "aut metric",
            Command::Projrep(ProjrepCommand::Verify { .. }) => "projrep verify",
            Command::Projrep(ProjrepCommand::Cocycle { .. }) => "projrep cocycle",
            Command::Coincide { .. } => "coincide",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = match residual_override() {
        Ok(r) => Ctx { seed: cli.seed, parallel: cli.parallel, residual_override: r, inputs: Default::default() },
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let outcome = commands::run(&cli.command, &ctx);
    let (results, code) = match outcome {
        Ok((v, code)) => (v, code),
        Err(e) => (
            serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } }),
            e.exit_code(),
        ),
    };
    let report = Report {
        command: cli.command.name().to_string(),
        inputs: ctx.inputs.take(),
        tolerance: ctx.tolerance(),
        results,
    };
    let text = match cli.format {
        Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
        Format::Text => render_text(&report),
    };
    // a closed pipe downstream is not an error worth reporting
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
    ExitCode::from(code)
}

fn render_text(report: &Report) -> String {
    let mut out = format!("command: {}\n", report.command);
    for d in &report.inputs {
        out += &format!("input: {} (sha256 {})\n", d.path, &d.sha256[..16]);
    }
    render_value(&mut out, "results", &report.results, 0);
    out
}

fn render_value(out: &mut String, key: &str, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            *out += &format!("{pad}{key}:\n");
            for (k, item) in map {
                render_value(out, k, item, indent + 1);
            }
        }
        Value::Array(items) if items.iter().any(|i| i.is_object()) => {
            *out += &format!("{pad}{key}:\n");
            for (i, item) in items.iter().enumerate() {
                render_value(out, &format!("[{i}]"), item, indent + 1);
            }
        }
        other => *out += &format!("{pad}{key}: {other}\n"),
    }
}
