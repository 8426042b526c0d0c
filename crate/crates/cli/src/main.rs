//! `photonflow`: batch front end for the photonflow library.

mod error;
mod examples;
mod output;
mod response_cmd;
mod run_config;
mod system_info;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use error::{CliError, CliResult};
use examples::ExampleArgs;
use output::{to_pretty, OutputDir};
use response_cmd::Quantity;
use run_config::{GridOverrides, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "photonflow", version, about = "Steady-state response of quantum linear systems to multi-photon inputs")]
struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "photonflow-out")]
    out: PathBuf,
    /// Override the number of grid points.
    #[arg(long, global = true)]
    grid_points: Option<usize>,
    /// Override the end of the time grid.
    #[arg(long, global = true)]
    t_max: Option<f64>,
    /// Override the pass/fail tolerance of the command's checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report matrices, spectrum, stability and passivity of the system.
    SystemInfo,
    /// Compute an output quantity for the configured system and state.
    Response {
        #[arg(long, value_enum)]
        quantity: Quantity,
    },
    /// Run one of the built-in reference examples.
    Example(ExampleArgs),
}

fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("PHOTONFLOW_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("PHOTONFLOW_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn command_echo(cli: &Cli) -> Value {
    let (name, options) = match &cli.command {
        Command::SystemInfo => ("system-info", Value::Null),
        Command::Response { quantity } => ("response", json!({"quantity": quantity.name()})),
        Command::Example(a) => ("example", a.echo()),
    };
    json!({
        "name": name,
        "options": options,
        "grid_points": cli.grid_points,
        "t_max": cli.t_max,
        "tol": cli.tol,
    })
}

fn run(cli: &Cli) -> CliResult<()> {
    init_threads()?;
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::empty(),
    };
    let overrides = GridOverrides {
        n_points: cli.grid_points,
        t_max: cli.t_max,
    };
    let mut out = OutputDir::create(&cli.out)?;
    let result = match &cli.command {
        Command::SystemInfo => system_info::report(&cfg, &overrides).and_then(|r| {
            out.write_json("system_info.json", &r)?;
            Ok(r)
        }),
        Command::Response { quantity } => response_cmd::run(&cfg, &overrides, *quantity, cli.tol, &mut out),
        Command::Example(args) => examples::run(args, &cfg, &overrides, cli.tol, &mut out),
    };
    let status = match &result {
        Ok(_) => json!({"ok": true}),
        Err(e) => json!({"ok": false, "exit_code": e.exit_code(), "error": e.to_string()}),
    };
    out.finish(json!({
        "command": command_echo(cli),
        "config": cfg.echo,
        "inputs": cfg.inputs,
        "tolerances": cfg.tol,
        "caps": cfg.caps,
        "method": cfg.method,
        "status": status,
    }))?;
    print!("{}", to_pretty(&result?));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("photonflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
