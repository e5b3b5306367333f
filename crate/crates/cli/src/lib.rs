//! Command-line experiments for `cuspflow-core`: configuration, seeding,
//! parallel orchestration and CSV/JSON output.
//!
//! The binary is a thin wrapper around [`execute`]; tests drive
//! [`experiments::run`] directly with a resolved [`config::RunConfig`].

pub mod config;
pub mod error;
pub mod experiments;
pub mod io;
pub mod runner;

use clap::{Parser, Subcommand};

use config::{CommandName, Params, RunConfig};
use error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "cuspflow", version, about = "Cusp excursions and incomplete theta series on SL2(Z) and SL2(Z[i]) quotients")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON config file; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<std::path::PathBuf>,
    #[command(flatten)]
    pub params: Params,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Running maximum of Δ/log s along unipotent orbits.
    Loglaw,
    /// Shrinking-target hit counts and target measures.
    Shrink,
    /// ‖Θ_f‖² by Monte Carlo and by the spectral expression.
    ThetaNorm,
    /// Haar mean of Θ_f against c0 ∫f.
    Siegel,
    /// Importance-sampled |D_k|.
    DkMeasure,
    /// Haar probability of Y_{D_k}.
    YdkMeasure,
    /// Scattering constant on the critical line and on (1/2, 1).
    ScatteringScan,
    /// P_m(s) and M_f(s) tables.
    PmTable,
    /// Operator identities, Plancherel step, Iwasawa round trips.
    IdentityCheck,
}

impl From<Command> for CommandName {
    fn from(c: Command) -> Self {
        match c {
            Command::Loglaw => CommandName::Loglaw,
            Command::Shrink => CommandName::Shrink,
            Command::ThetaNorm => CommandName::ThetaNorm,
            Command::Siegel => CommandName::Siegel,
            Command::DkMeasure => CommandName::DkMeasure,
            Command::YdkMeasure => CommandName::YdkMeasure,
            Command::ScatteringScan => CommandName::ScatteringScan,
            Command::PmTable => CommandName::PmTable,
            Command::IdentityCheck => CommandName::IdentityCheck,
        }
    }
}

/// Resolve the configuration of a parsed command line.
pub fn resolve_cli(cli: Cli) -> CliResult<RunConfig> {
    let file = cli.config.as_deref().map(config::read_config_file).transpose()?;
    let env_seed = std::env::var(config::SEED_ENV).ok();
    config::resolve(cli.command.into(), file, cli.params, env_seed)
}

/// Run a parsed command line and write its outputs.
pub fn execute(cli: Cli) -> CliResult<()> {
    let cfg = resolve_cli(cli)?;
    let report = experiments::run(&cfg)?;
    io::emit(&cfg, &report)?;
    Ok(())
}
