//! Command-line scenario runner.
//!
//! `run` executes any scenario file; `sweep` and `ablate` run the BER sweep
//! and the framing ablation, from a file or from built-in defaults. With
//! `--check` the exit status is 1 when an acceptance check fails. Invalid
//! input exits with 2.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use qpsk_link::scenario::{run_scenario, Scenario, ScenarioKind, ScenarioOutcome};

#[derive(Parser)]
#[command(name = "qpsk-link", version, about = "Run QPSK link scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a scenario file.
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Genie-synchronized BER sweep against theory.
    Sweep {
        scenario: Option<PathBuf>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Framing ablation over differential coding, marker unpack order,
    /// loop bandwidth and forced lock rotation.
    Ablate {
        scenario: Option<PathBuf>,
        #[command(flatten)]
        opts: RunOpts,
    },
}

#[derive(Args)]
struct RunOpts {
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the scenario output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit nonzero unless every acceptance check passes.
    #[arg(long)]
    check: bool,
}

enum Failure {
    Input(anyhow::Error),
    Checks,
}

fn load(path: Option<&PathBuf>, kind: Option<ScenarioKind>) -> Result<Scenario> {
    let mut s = match path {
        Some(p) => Scenario::load(p).with_context(|| format!("scenario {}", p.display()))?,
        None => Scenario::new(kind.expect("built-in scenarios have a kind")),
    };
    if let Some(kind) = kind {
        s.name = kind;
    }
    Ok(s)
}

fn execute(mut s: Scenario, opts: &RunOpts) -> std::result::Result<(), Failure> {
    if let Some(seed) = opts.seed {
        s.seed = seed;
    }
    if let Some(out) = &opts.out {
        s.output_dir = out.clone();
    }
    let outcome = run_scenario(&s)
        .with_context(|| format!("scenario {}", s.name.as_str()))
        .map_err(Failure::Input)?;
    print_outcome(&outcome, opts.check);
    if opts.check && !outcome.passed() {
        return Err(Failure::Checks);
    }
    Ok(())
}

fn print_outcome(outcome: &ScenarioOutcome, check: bool) {
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    if check {
        for c in &outcome.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            println!("{tag} {}: {}", c.name, c.detail);
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { scenario, opts } => load(Some(scenario), None)
            .map_err(Failure::Input)
            .and_then(|s| execute(s, opts)),
        Command::Sweep { scenario, opts } => load(scenario.as_ref(), Some(ScenarioKind::BerSweep))
            .map_err(Failure::Input)
            .and_then(|s| execute(s, opts)),
        Command::Ablate { scenario, opts } => load(scenario.as_ref(), Some(ScenarioKind::Ablation))
            .map_err(Failure::Input)
            .and_then(|s| execute(s, opts)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => {
            eprintln!("acceptance check failed");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
