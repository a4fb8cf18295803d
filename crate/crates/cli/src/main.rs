use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ncpm_cli::{generate_graph, load_config, run_experiment, ExperimentKind, Overrides};

/// Competing-product propagation experiments.
#[derive(Parser)]
#[command(name = "ncpm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo estimate against the mean-field trajectory.
    Compare(Common),
    /// Predicted limit of the social-self model plus its iteration.
    Asymptotics(Common),
    /// Two-product self-social fixed point and its stability.
    Stability(Common),
    /// Closed-loop investment game.
    Game(Common),
    /// Generate the configured social network.
    GenGraph(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (kind, common) = match cli.command {
        Command::Compare(c) => (Some(ExperimentKind::CompareMcNcpm), c),
        Command::Asymptotics(c) => (Some(ExperimentKind::Asymptotics), c),
        Command::Stability(c) => (Some(ExperimentKind::Stability), c),
        Command::Game(c) => (Some(ExperimentKind::Game), c),
        Command::GenGraph(c) => (None, c),
    };
    let overrides = Overrides {
        seed: common.seed,
        out_dir: common.out_dir,
        samples: common.samples,
        horizon: common.horizon,
    };
    let result = load_config(&common.config, &overrides).and_then(|cfg| match kind {
        Some(kind) => run_experiment(cfg, kind),
        None => generate_graph(cfg),
    });
    match result {
        Ok(out) => {
            println!("{}", out.summary);
            for f in out.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
