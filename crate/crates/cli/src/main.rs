mod commands;
mod inputs;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::commands::Outcome;
use crate::inputs::Inputs;
use crate::manifest::RunManifest;

/// Causal polytopes, causal inequalities and process-matrix violations.
#[derive(Debug, Parser)]
#[command(name = "causal", version, propagate_version = true)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Worker threads (default: all available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print the result as JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Write the run manifest here instead of to stderr.
    #[arg(long, global = true, value_name = "PATH")]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enumerate the deterministic causal strategies of a scenario.
    Enumerate(commands::EnumerateArgs),
    /// Facets of the convex hull of a vertex file.
    Facets(commands::FacetsArgs),
    /// Group a facet list into relabeling classes.
    Classes(commands::ClassesArgs),
    /// Decide whether a correlation is causal (exit 2 if not).
    Check(commands::CheckArgs),
    /// Causal bound of an inequality and of its game form.
    Bound(commands::BoundArgs),
    /// Show a named inequality and optionally certify it as a facet.
    Ineq(commands::IneqArgs),
    /// Evaluate an inequality on a process matrix with given instruments.
    Evaluate(commands::EvaluateArgs),
    /// Search for a process-matrix violation (exit 2 if one is found).
    Violate(commands::ViolateArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Enumerate(_) => "enumerate",
            Command::Facets(_) => "facets",
            Command::Classes(_) => "classes",
            Command::Check(_) => "check",
            Command::Bound(_) => "bound",
            Command::Ineq(_) => "ineq",
            Command::Evaluate(_) => "evaluate",
            Command::Violate(_) => "violate",
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Command::Violate(a) => Some(a.seed),
            _ => None,
        }
    }

    fn run(&self, inputs: &mut Inputs) -> anyhow::Result<Outcome> {
        match self {
            Command::Enumerate(a) => commands::enumerate(a, inputs),
            Command::Facets(a) => commands::facets(a, inputs),
            Command::Classes(a) => commands::classes(a, inputs),
            Command::Check(a) => commands::check(a, inputs),
            Command::Bound(a) => commands::bound(a, inputs),
            Command::Ineq(a) => commands::ineq(a, inputs),
            Command::Evaluate(a) => commands::evaluate(a, inputs),
            Command::Violate(a) => commands::violate(a, inputs),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let threads = cli.global.threads.unwrap_or(0);
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        eprintln!("error: cannot configure the thread pool: {e}");
        return ExitCode::from(1);
    }
    let start = Instant::now();
    let mut inputs = Inputs::default();
    let result = cli.command.run(&mut inputs);
    let (code, summary) = match &result {
        Ok(out) => (out.code, out.summary.clone()),
        Err(e) => (1, serde_json::json!({ "error": format!("{e:#}") })),
    };
    let manifest = RunManifest::new(
        cli.command.name(),
        inputs.into_hashes(),
        cli.command.seed(),
        rayon::current_num_threads(),
        start.elapsed(),
        code,
        summary,
    );
    match result {
        Ok(out) => {
            if cli.global.json {
                println!("{}", serde_json::to_string_pretty(&out.summary).expect("JSON values serialize"));
            } else if !out.text.is_empty() {
                println!("{}", out.text.trim_end());
            }
        }
        Err(e) => eprintln!("error: {e:#}"),
    }
    if let Err(e) = manifest.emit(cli.global.manifest.as_deref()) {
        eprintln!("error: cannot write manifest: {e:#}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}
