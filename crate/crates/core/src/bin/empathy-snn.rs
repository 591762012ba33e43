use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use empathy_snn::harness::{execute, read_manifest, Command, ExperimentConfig, Manifest, MANIFEST_FILE};
use empathy_snn::Error;

#[derive(Parser)]
#[command(version, about = "Train and analyse the empathy-driven spiking agent")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train one agent at a target empathy level.
    Train(Common),
    /// Train one agent per empathy level and report the altruism trend.
    Sweep(Common),
    /// Tabulate inhibitory proportion against empathy level.
    Calibrate(Common),
    /// Sweep, then tabulate altruism against distance to H at distress onset.
    Distance(Common),
    /// Re-run the experiment recorded in a manifest.
    Replay {
        /// Manifest file, or a directory holding one.
        manifest: PathBuf,
        #[arg(long, default_value = "replay")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// TOML experiment config; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Target empathy level in percent (train only).
    #[arg(long)]
    fe: Option<f64>,
    #[arg(long)]
    episodes: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            // An unreadable config file counts as an invalid config.
            Some(path) => ExperimentConfig::load(path).map_err(|e| match e {
                Error::Io { .. } => Error::Config(e.to_string()),
                other => other,
            })?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(n) = self.episodes {
            cfg.training.episodes = n;
            cfg.training.converged_episodes = cfg.training.converged_episodes.min(n);
        }
        if let Some(fe) = self.fe {
            if !(0.0..=100.0).contains(&fe) {
                return Err(Error::Config(format!("--fe {fe} outside [0, 100]")));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<Manifest, Error> {
    let (command, common) = match cli.command {
        Cmd::Train(c) => (Command::Train, c),
        Cmd::Sweep(c) => (Command::Sweep, c),
        Cmd::Calibrate(c) => (Command::Calibrate, c),
        Cmd::Distance(c) => (Command::Distance, c),
        Cmd::Replay { manifest, out } => {
            let path = if manifest.is_dir() {
                manifest.join(MANIFEST_FILE)
            } else {
                manifest
            };
            let m = read_manifest(&path)?;
            return execute(m.command, &m.config, m.target_fe, &out);
        }
    };
    let cfg = common.load()?;
    execute(command, &cfg, common.fe, &common.out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(m) => {
            println!(
                "{}: wrote {} files (config {})",
                m.command.name(),
                m.files.len(),
                &m.config_hash[..12]
            );
            ExitCode::SUCCESS
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
