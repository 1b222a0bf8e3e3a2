use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use isospec::cli::{run, Artifacts, Command, RunConfig};
use isospec::error::{Error, ErrorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Billiard dynamics, invariant circles and spectral invariants.
#[derive(Debug, Parser)]
#[command(name = "isospec", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Overrides the quadrature node count of the config.
    #[arg(long)]
    nodes: Option<usize>,
    /// Overrides the tolerance of the config.
    #[arg(long)]
    tol: Option<f64>,
}

fn execute(args: &Args) -> Result<(), Error> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    cfg.nodes = args.nodes.or(cfg.nodes);
    cfg.tol = args.tol.or(cfg.tol);
    let out = args.out.clone().or_else(|| cfg.out.clone());
    let artifacts: Artifacts = run(args.command, &cfg)?;
    let text = match args.format {
        Format::Csv => artifacts.table.to_csv()?,
        Format::Json => artifacts.to_json(args.command)? + "\n",
    };
    match out {
        Some(p) => std::fs::write(&p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Error::Io(e.to_string())),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = serde_json::json!({
                "error": e.code(),
                "kind": match e.kind() { ErrorKind::Validation => "validation", ErrorKind::Numerical => "numerical" },
                "message": e.to_string(),
            });
            eprintln!("{record}");
            ExitCode::from(match e.kind() {
                ErrorKind::Validation => 2,
                ErrorKind::Numerical => 3,
            })
        }
    }
}
