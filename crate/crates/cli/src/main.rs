use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use torque_stirap_cli::{parse_config, run, Experiment, Overrides};

#[derive(Parser)]
#[command(name = "torque-stirap", version = torque_stirap_cli::output::VERSION, about = "Torque-equation simulator for STIRAP and its classical analogs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write the trajectory.
    Simulate(Common),
    /// Final state versus pulse delay.
    ScanDelay(Common),
    /// Final state versus pulse amplitude.
    ScanArea(Common),
    /// Run the built-in cross-checks; exit status 0 iff all pass.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["quantum", "lorentz", "magnetization", "coriolis"])]
    system: Option<String>,
    /// Peak amplitude in units of 1/T.
    #[arg(long, allow_negative_numbers = true)]
    b0: Option<f64>,
    /// Pulse delay in units of T (negative: counterintuitive order).
    #[arg(long, allow_negative_numbers = true)]
    tau: Option<f64>,
    #[arg(long, value_parser = ["rk4", "adaptive", "rotation"])]
    method: Option<String>,
    /// Grid intervals.
    #[arg(long)]
    steps: Option<usize>,
    /// Adaptive-integrator tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Window half-width in units of T.
    #[arg(long)]
    window: Option<f64>,
}

fn execute(experiment: Experiment, args: Common) -> Result<bool> {
    let contents = match &args.config {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => String::new(),
    };
    let flags = Overrides {
        system: args.system,
        b0: args.b0,
        tau: args.tau,
        method: args.method,
        steps: args.steps,
        tol: args.tol,
        out: args.out,
        window: args.window,
    };
    let cfg = parse_config(&contents, &flags, experiment)?;
    run::run(&cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match cli.command {
        Command::Simulate(a) => (Experiment::Simulate, a),
        Command::ScanDelay(a) => (Experiment::ScanDelay, a),
        Command::ScanArea(a) => (Experiment::ScanArea, a),
        Command::Verify(a) => (Experiment::Verify, a),
    };
    match execute(experiment, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
