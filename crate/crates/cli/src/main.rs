use std::io::{ErrorKind, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use valf_cli::commands::{self, GrArg, Op};
use valf_cli::config::{Config, ConfigArgs};
use valf_cli::suites;
use valf_core::io::Document;

#[derive(Parser)]
#[command(name = "valf", version, about = "Valuations on convex bodies: verification suites and operators")]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and write its JSON report
    Verify,
    /// Apply an operator to JSON documents (`-` reads stdin)
    Apply {
        #[arg(value_enum)]
        op: Op,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Sample the Klain function of an even valuation on R³
    Klain {
        #[arg(long)]
        input: PathBuf,
        /// Defaults to the Grassmannian matching the valuation's degree
        #[arg(long, value_enum)]
        gr: Option<GrArg>,
    },
    /// Write CSV plot data for a document
    EmitPlotdata {
        #[arg(long)]
        input: PathBuf,
    },
    /// Show the configuration, sphere grid and registered cases
    Info,
}

fn read_document(path: &Path) -> Result<Document> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    };
    Document::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(config: &Config, text: &str) -> Result<()> {
    match &config.out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            let res = out.write_all(text.as_bytes()).and_then(|_| {
                if text.ends_with('\n') {
                    Ok(())
                } else {
                    out.write_all(b"\n")
                }
            });
            match res {
                // a closed pipe (`valf ... | head`) is not an error
                Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

/// Human-readable notes go to stderr when stdout carries the result.
fn note(config: &Config, text: &str) {
    if config.out.is_some() {
        println!("{text}");
    } else {
        eprintln!("{text}");
    }
}

fn run(cli: Cli) -> Result<bool> {
    let config = cli.config.resolve()?;
    match cli.command {
        Command::Verify => {
            let report = suites::verify(&config)?;
            for line in report.summary_lines() {
                note(&config, &line);
            }
            note(
                &config,
                &format!(
                    "{} of {} cases passed in {:.1} s; digest {}",
                    report.cases.iter().filter(|c| c.pass).count(),
                    report.cases.len(),
                    report.wall_time_s,
                    report.digest
                ),
            );
            emit(&config, &report.to_json())?;
            Ok(report.pass)
        }
        Command::Apply { op, inputs } => {
            let docs = inputs.iter().map(|p| read_document(p)).collect::<Result<Vec<_>>>()?;
            let (out, summary) = commands::apply(op, docs, &config)?;
            note(&config, &summary);
            emit(&config, &out.to_json())?;
            Ok(true)
        }
        Command::Klain { input, gr } => {
            let out = commands::klain(read_document(&input)?, gr)?;
            note(&config, &commands::summarize(&out)?);
            emit(&config, &out.to_json())?;
            Ok(true)
        }
        Command::EmitPlotdata { input } => {
            emit(&config, &commands::plotdata(read_document(&input)?, &config)?)?;
            Ok(true)
        }
        Command::Info => {
            emit(&config, &commands::info(&config))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
