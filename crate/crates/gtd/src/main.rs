use clap::{Parser, Subcommand};
use gtd::cli::{run, Command};
use gtd::error::exit_code;
use std::path::PathBuf;

/// Thermodynamic metrics from fundamental equations: curvature,
/// extremal-surface residuals, invariance checks, and admissible processes.
#[derive(Parser)]
#[command(name = "gtd", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate the induced metric by pullback and closed form over a grid.
    Metric(CommonArgs),
    /// Tabulate scalar curvature and the metric determinant over a grid.
    Curvature(CommonArgs),
    /// Integrate a geodesic process or solve for one between two states.
    Geodesic(CommonArgs),
    /// Evaluate the area-extremality residual over a grid.
    NgCheck(CommonArgs),
    /// Sample the invariance defect over all transformation subsets.
    LegendreCheck(CommonArgs),
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Write the table here instead of the configured destination.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        Cmd::Metric(a) => (Command::Metric, a),
        Cmd::Curvature(a) => (Command::Curvature, a),
        Cmd::Geodesic(a) => (Command::Geodesic, a),
        Cmd::NgCheck(a) => (Command::NgCheck, a),
        Cmd::LegendreCheck(a) => (Command::LegendreCheck, a),
    };
    if let Err(err) = run(command, &args.config, args.out.as_deref()) {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}
