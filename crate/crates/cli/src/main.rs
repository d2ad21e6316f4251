//! `pcap`: variational p-capacities, Green functions and level-set checks on
//! weighted graphs, with CSV tables and SVG plots as output.

mod cap;
mod green;
mod output;
mod plot;
mod radial;
mod space;
mod specs;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pcap::penergy::SolverSettings;

#[derive(Parser)]
#[command(name = "pcap", version, about = "p-capacity and Green function toolkit for weighted graphs")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every command.
#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Directory for generated files
    #[arg(long, global = true, env = "PCAP_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    /// Absolute bound on the solver's stationarity residual
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub solver_tol: f64,
    /// Newton iterations allowed per continuation stage
    #[arg(long, global = true, default_value_t = 500)]
    pub max_iter: usize,
}

impl Global {
    pub fn settings(&self) -> SolverSettings {
        SolverSettings { tolerance: self.solver_tol, max_iterations: self.max_iter }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build or inspect graph files
    #[command(subcommand)]
    Space(space::SpaceCommand),
    /// Capacity of a condenser (E, A)
    Cap(cap::CapArgs),
    /// Green function of a domain with a pole
    Green(green::GreenArgs),
    /// Run a verification suite; exit 1 if any check fails
    Verify(verify::VerifyArgs),
    /// Radially symmetric weighted spaces
    #[command(subcommand)]
    Radial(radial::RadialCommand),
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<pcap::Error>() {
            return match e {
                pcap::Error::NonConvergence { .. } | pcap::Error::Quadrature(_) => 3,
                _ => 2,
            };
        }
    }
    2
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Space(cmd) => space::run(cmd, &cli.global),
        Command::Cap(args) => cap::run(args, &cli.global),
        Command::Green(args) => green::run(args, &cli.global),
        Command::Verify(args) => verify::run(args, &cli.global),
        Command::Radial(cmd) => radial::run(cmd, &cli.global),
    };
    match result {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
