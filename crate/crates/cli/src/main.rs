use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sabev_cli::commands::{self, DEFAULT_DEPTH_LADDER, DEFAULT_SEMANTIC_LADDER};
use sabev_cli::{Result, RunConfig};

/// Semantic-aware BEV pooling on synthetic scenes.
///
/// Exit codes: 0 success, 1 usage or config error, 2 invariant failure,
/// 3 I/O error. The output directory is taken from -o, else from
/// $SABEV_OUTPUT_DIR, else from the config's [output] dir.
#[derive(Debug, Parser)]
#[command(name = "sabev", version = sabev::VERSION)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Run configuration (TOML); built-in defaults when omitted.
    #[arg(short, long)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(short, long)]
    output: Option<PathBuf>,

    /// Overrides [scene] seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render, score, filter and pool one frame, then export the grid.
    Pool {
        #[command(flatten)]
        common: Common,
        /// Also pool with the reference path and compare.
        #[arg(long)]
        verify: bool,
    },
    /// Valid fraction over a grid of thresholds.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Depth thresholds, comma separated.
        #[arg(long = "t-d", value_delimiter = ',', default_values_t = DEFAULT_DEPTH_LADDER.to_vec())]
        t_d: Vec<f64>,
        /// Semantic thresholds, comma separated.
        #[arg(long = "t-s", value_delimiter = ',', default_values_t = DEFAULT_SEMANTIC_LADDER.to_vec())]
        t_s: Vec<f64>,
    },
    /// Paste augmentation across a batch of frames.
    PasteDemo {
        #[command(flatten)]
        common: Common,
        /// Overrides [paste] expected_pastes.
        #[arg(long)]
        pastes: Option<f64>,
    },
    /// Per-camera oracle semantic masks and depth images.
    Render {
        #[command(flatten)]
        common: Common,
    },
    /// Pooling wall time at forced valid fractions.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Point counts, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1_000_000usize])]
        points: Vec<usize>,
        /// Valid fractions, comma separated; 1 is always added.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.018, 0.1, 0.5])]
        fractions: Vec<f64>,
        #[arg(long, default_value_t = 64)]
        channels: usize,
    },
    /// Checks the pooling and paste invariants on the configured scene.
    Verify {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf)> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.scene.seed = seed;
    }
    let out = cfg.output_dir(common.output.as_deref());
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Pool { common, verify } => {
            let (cfg, out) = load(&common)?;
            commands::pool(&cfg, &out, verify)
        }
        Command::Sweep { common, t_d, t_s } => {
            let (cfg, out) = load(&common)?;
            commands::sweep(&cfg, &out, &t_d, &t_s)
        }
        Command::PasteDemo { common, pastes } => {
            let (mut cfg, out) = load(&common)?;
            if let Some(n) = pastes {
                cfg.paste.expected_pastes = n;
                cfg.validate()?;
            }
            commands::paste_demo(&cfg, &out)
        }
        Command::Render { common } => {
            let (cfg, out) = load(&common)?;
            commands::render(&cfg, &out)
        }
        Command::Bench { common, points, fractions, channels } => {
            let (cfg, out) = load(&common)?;
            commands::bench(&out, &points, &fractions, channels, cfg.scene.seed)
        }
        Command::Verify { common } => {
            let (cfg, out) = load(&common)?;
            commands::verify(&cfg, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

