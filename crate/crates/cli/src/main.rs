use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vortibc_cli::commands::parse_resolution;
use vortibc_cli::{run, CliError, Command, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "vortibc", version, about = "Navier-Stokes with kinematic and vorticity boundary conditions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Identity and Solonnikov checks at three resolutions
    Verify(Common),
    /// Unsteady Stokes problem carrying the boundary data
    Stokes(Common),
    /// Full Navier-Stokes solve by Picard iteration
    Ns(Common),
    /// Inviscid reference solution
    Euler(Common),
    /// Vanishing-viscosity sweep over `sweep.mu_list`
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file (`key = value` lines)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grid size as `n1,n2`
    #[arg(long, value_parser = parse_resolution)]
    resolution_override: Option<(usize, usize)>,
    /// Seed for random field generators
    #[arg(long)]
    seed: Option<u64>,
}

fn load(c: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &c.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    Overrides { resolution: c.resolution_override, out: c.out.clone(), seed: c.seed }.apply(&mut cfg);
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (cmd, common) = match &cli.cmd {
        Cmd::Verify(c) => (Command::Verify, c),
        Cmd::Stokes(c) => (Command::Stokes, c),
        Cmd::Ns(c) => (Command::Ns, c),
        Cmd::Euler(c) => (Command::Euler, c),
        Cmd::Sweep(c) => (Command::Sweep, c),
    };
    match load(common).and_then(|cfg| run(cmd, &cfg)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
