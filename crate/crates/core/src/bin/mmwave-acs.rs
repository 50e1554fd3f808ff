use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mmwave_acs::experiment::{run, ExperimentConfig};

#[derive(Parser)]
#[command(name = "mmwave-acs", version, about = "Run mmWave channel estimation and precoding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `experiment.seed`.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Overrides `experiment.threads`; 0 uses every core.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Load and validate a config without running it.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, seed, out, threads } => ExperimentConfig::from_path(&config).and_then(|mut c| {
            if let Some(s) = seed {
                c.experiment.seed = s;
            }
            if let Some(t) = threads {
                c.experiment.threads = t;
            }
            let m = run(&c, &out)?;
            for o in &m.outputs {
                println!("{}: {} rows", out.join(&o.file).display(), o.rows);
            }
            println!("{}: manifest", out.join("manifest.json").display());
            Ok(())
        }),
        Command::Check { config } => ExperimentConfig::from_path(&config).map(|c| {
            println!("{}: ok ({})", config.display(), c.experiment.kind.name());
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
