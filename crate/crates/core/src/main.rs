use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use arm_smc::cli::{self, config, Overrides};
use arm_smc::control::ControllerKind;

/// Sliding-mode control experiments on a simulated two-link arm.
///
/// Log verbosity follows RUST_LOG (e.g. `RUST_LOG=info` lists every
/// configuration default that was applied).
#[derive(Debug, Parser)]
#[command(name = "arm-smc", version)]
struct Args {
    /// Seed for stochastic disturbances.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Plant integration step in seconds.
    #[arg(long, global = true)]
    dt_plant: Option<f64>,
    /// Simulated duration in seconds.
    #[arg(long, global = true)]
    t_end: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one controller and write its trace, metrics and plots.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        controller: Option<Controller>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run all three controllers on the same scenario and compare them.
    Compare {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a configuration file containing every key at its default.
    Config,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Controller {
    Smc,
    Nismc,
    Hnismc,
}

impl From<Controller> for ControllerKind {
    fn from(c: Controller) -> Self {
        match c {
            Controller::Smc => ControllerKind::Smc,
            Controller::Nismc => ControllerKind::Nismc,
            Controller::Hnismc => ControllerKind::Hnismc,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let ov = Overrides {
        seed: args.seed,
        dt_plant: args.dt_plant,
        t_end: args.t_end,
    };
    let result = match args.command {
        Command::Simulate { config, controller, out } => {
            cli::cmd_simulate(config.as_deref(), controller.map(Into::into), &out, &ov).map(|rep| {
                let m = rep.metrics;
                println!(
                    "{}: RMSE {:.4e} / {:.4e} rad, {} rows -> {}",
                    rep.trace.meta.controller,
                    m.rmse[0],
                    m.rmse[1],
                    rep.trace.len(),
                    out.display()
                );
            })
        }
        Command::Compare { config, out } => cli::cmd_compare(config.as_deref(), &out, &ov).map(|rep| {
            print!("{}\n{}", rep.table.to_text(), rep.verdict);
            println!("outputs -> {}", out.display());
        }),
        Command::Config => {
            print!("{}", config::default_config_text());
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
