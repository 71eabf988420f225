use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use morphoplate::{run, worker_pool, Command, Overrides, Scenario};

#[derive(Parser)]
#[command(name = "morphoplate", version, about = "Shape analysis of thin pre-strained plates")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Strain moments, compatibility and classification of the targets.
    Analyze(Args),
    /// Existence decision, cylinder patchwork, energies and OBJ export.
    Minimize(Args),
    /// Rescaled 3D energies of recovery deformations along a thickness ladder.
    Gamma(Args),
    /// Gel constants and the two bilayer strip minimizers.
    Gel(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Scenario file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Nodes per direction of the compatibility grid.
    #[arg(long)]
    grid: Option<usize>,
    /// Comma-separated thickness ratios.
    #[arg(long, value_delimiter = ',')]
    h_ladder: Option<Vec<f64>>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Analyze(a) => (Command::Analyze, a),
        Cmd::Minimize(a) => (Command::Minimize, a),
        Cmd::Gamma(a) => (Command::Gamma, a),
        Cmd::Gel(a) => (Command::Gel, a),
    };
    let result = worker_pool().and_then(|pool| {
        let scenario = Scenario::load(&args.config)?;
        let overrides = Overrides { grid: args.grid, h_ladder: args.h_ladder };
        pool.install(|| run(command, &scenario, &overrides, &args.out))
    });
    match result {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.status == morphoplate::Status::Obstruction {
                eprintln!("no pointwise minimizer exists; see the report");
            }
            ExitCode::from(outcome.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
