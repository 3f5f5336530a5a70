use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use eqc_cli::config::{Flags, ProblemKind};

#[derive(Parser)]
#[command(name = "eqc", version, about = "Ensemble training of variational circuits over simulated noisy devices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    fleet: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// `lo,hi` bounds, or `none` to disable weighting.
    #[arg(long)]
    weights: Option<String>,
    #[arg(long, value_parser = ["deterministic", "concurrent"])]
    mode: Option<String>,
}

impl RunArgs {
    fn flags(&self) -> Flags {
        Flags { fleet: self.fleet.clone(), seed: self.seed, weights: self.weights.clone(), mode: self.mode.clone() }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train the Heisenberg VQE over a fleet.
    RunVqe(RunArgs),
    /// Train ring MaxCut QAOA over a fleet.
    RunQaoa(RunArgs),
    /// Compare predicted and observed GHZ(5) error across a fleet.
    ValidateModel {
        #[arg(long)]
        fleet: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 8192)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Show how a bundled circuit maps onto a device profile.
    Transpile {
        #[arg(value_parser = ["vqe4", "qaoa4", "ghz5"])]
        circuit: String,
        #[arg(long)]
        profile: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::RunVqe(a) => {
            let s = eqc_cli::cmd_run(ProblemKind::Vqe, &a.config, &a.flags(), &a.out)?;
            println!(
                "converged energy {:.6}: {:.3}% from exact {:.6}, {:.3}% from ansatz {:.6}; outputs in {}",
                s.converged_loss,
                100.0 * s.error_vs_reference,
                s.reference_energy,
                100.0 * s.error_vs_ansatz,
                s.ansatz_reference,
                a.out.display()
            );
        }
        Command::RunQaoa(a) => {
            let s = eqc_cli::cmd_run(ProblemKind::Qaoa, &a.config, &a.flags(), &a.out)?;
            if let Some(q) = &s.qaoa {
                println!("best bitstring {} cut {} of {}, outputs in {}", q.best_bitstring, q.best_cut, q.max_cut, a.out.display());
            }
        }
        Command::ValidateModel { fleet, out, shots, seed } => {
            let s = eqc_cli::cmd_validate_model(&fleet, &out, shots, seed)?;
            match s.pearson {
                Some(r) => println!("{} points, pearson {r:.4}, outputs in {}", s.points, out.display()),
                None => println!("{} points, pearson undefined, outputs in {}", s.points, out.display()),
            }
        }
        Command::Transpile { circuit, profile } => print!("{}", eqc_cli::cmd_transpile(&circuit, &profile)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("eqc: error: {msg}");
            ExitCode::FAILURE
        }
    }
}
