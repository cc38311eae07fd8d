use std::path::PathBuf;
use std::process::ExitCode;

use aggrekin::app::{self, StudyKind};
use aggrekin::config::parse_config;
use aggrekin::{preset, Error, PRESET_NAMES};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "aggrekin", version, about = "Aggregation-equation solvers: macroscopic and kinetic schemes")]
struct Cli {
    /// Continue past invariant failures (exit 0, failures listed in meta.txt).
    #[arg(long, global = true)]
    keep_going: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write snapshots, diagnostics and metadata.
    Run { config: PathBuf },
    /// Run a refinement or asymptotic-preserving study.
    Study {
        config: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
    },
    /// List the built-in problem presets.
    Presets,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Refinement,
    #[value(name = "ap_sweep")]
    ApSweep,
}

fn load(path: &PathBuf) -> Result<aggrekin::config::RunConfig, Error> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Presets => {
            for name in PRESET_NAMES {
                match preset(name) {
                    Ok(p) => println!(
                        "{name:<26} law={:<22} domain=[{}, {}] horizon={}{}",
                        p.law.name(),
                        p.domain.0,
                        p.domain.1,
                        p.horizon,
                        if p.kinetic.is_some() { " kinetic" } else { "" }
                    ),
                    Err(e) => eprintln!("{name}: {e}"),
                }
            }
            Ok(())
        }
        Command::Run { config } => load(config).and_then(|cfg| app::run(&cfg, cli.keep_going)).map(|s| {
            println!(
                "wrote {} ({} steps, dt = {}, final mass = {})",
                s.output_dir.display(),
                s.steps,
                app::fmt_f64(s.dt),
                app::fmt_f64(s.final_mass)
            );
            for f in &s.failures {
                eprintln!("invariant failure: {f}");
            }
        }),
        Command::Study { config, kind } => {
            let kind = match kind {
                Kind::Refinement => StudyKind::Refinement,
                Kind::ApSweep => StudyKind::ApSweep,
            };
            load(config).and_then(|cfg| app::study(&cfg, kind)).map(|p| println!("wrote {}", p.display()))
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
