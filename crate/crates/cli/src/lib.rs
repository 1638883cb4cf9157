//! Operator commands for hoopvis: preprocess games into bundles, score
//! tracking, build EPV maps, replay gaze traces and serve viewers.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid input.

use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

pub mod commands;
mod error;
pub mod server;

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "hoopvis", version, about = "Embedded basketball visualizations driven by viewer gaze")]
pub struct Cli {
    /// TOML config; unset keys keep their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Reserved. Nothing in the pipeline draws random numbers except `demo`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Track, analyze and tabulate a game into a bundle directory.
    Preprocess(PreprocessArgs),
    /// Score tracking output against ground truth.
    Evaluate(EvaluateArgs),
    /// Per-region EPV table and heat-map chart.
    Epvmap(EpvmapArgs),
    /// Compose every frame of a bundle under a gaze trace and dump the commands.
    Replay(ReplayArgs),
    /// Serve bundles over HTTP and WebSocket.
    Serve(ServeArgs),
    /// Write raw inputs and a gaze trace for the synthetic demo possession.
    Demo(DemoArgs),
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Directory holding detections.csv, tracking.csv, masks.rle, shots.csv,
    /// defense.csv, roster.csv and optionally keypoints.csv, partition.csv
    /// and config.toml.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub detections: Option<PathBuf>,
    #[arg(long)]
    pub tracking: Option<PathBuf>,
    #[arg(long)]
    pub masks: Option<PathBuf>,
    #[arg(long)]
    pub keypoints: Option<PathBuf>,
    #[arg(long)]
    pub shots: Option<PathBuf>,
    #[arg(long)]
    pub defense: Option<PathBuf>,
    #[arg(long)]
    pub roster: Option<PathBuf>,
    #[arg(long)]
    pub partition: Option<PathBuf>,
    /// Video copied into the bundle for the viewer.
    #[arg(long)]
    pub video: Option<PathBuf>,
    /// Defaults to the input directory name.
    #[arg(long)]
    pub game_id: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub ground_truth: PathBuf,
    /// Scored predictions to evaluate as they are.
    #[arg(long, conflicts_with = "detections", required_unless_present = "detections")]
    pub predictions: Option<PathBuf>,
    /// Raw detections; each post-processing step is run and scored.
    #[arg(long)]
    pub detections: Option<PathBuf>,
    /// Print JSON instead of the table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct EpvmapArgs {
    #[arg(long)]
    pub shots: PathBuf,
    #[arg(long)]
    pub partition: Option<PathBuf>,
    /// Only this player; default is everyone with a shot.
    #[arg(long)]
    pub player: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long)]
    pub gaze: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// A bundle, or a directory of bundles.
    #[arg(long)]
    pub bundles: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    use commands::*;
    let config = cli.config.as_deref();
    match cli.command {
        Command::Preprocess(a) => {
            let cfg = resolve_config(config, a.input.as_ref().map(|d| d.join("config.toml")).as_deref())?;
            let paths = PreprocessPaths {
                input: a.input,
                detections: a.detections,
                tracking: a.tracking,
                masks: a.masks,
                keypoints: a.keypoints,
                shots: a.shots,
                defense: a.defense,
                roster: a.roster,
                partition: a.partition,
                video: a.video,
            };
            let b = cmd_preprocess(&paths, a.game_id.as_deref(), &cfg, &a.out)?;
            println!(
                "{}: {} frames, {} tracked boxes -> {}",
                b.meta.game_id,
                b.meta.frame_count,
                b.tracks.len(),
                a.out.display()
            );
        }
        Command::Evaluate(a) => {
            let out = match (&a.predictions, &a.detections) {
                (Some(p), _) => cmd_evaluate_predictions(p, &a.ground_truth)?,
                (None, Some(d)) => cmd_evaluate_stages(d, &a.ground_truth, &resolve_config(config, None)?.matcher)?,
                (None, None) => return Err(CliError::Validation("give --predictions or --detections".into())),
            };
            if a.json {
                println!("{}", serde_json::to_string_pretty(&out).expect("report serializes"));
            } else {
                print!("{}", format_evaluation(&out));
            }
        }
        Command::Epvmap(a) => {
            let maps = cmd_epvmap(&a.shots, a.partition.as_deref(), a.player.as_deref(), &a.out)?;
            println!("{} maps -> {}", maps.len(), a.out.display());
        }
        Command::Replay(a) => {
            let s = cmd_replay(&a.bundle, &a.gaze, config, &a.out)?;
            println!("{} frames, {} bytes, sha256 {}", s.frames, s.bytes, s.sha256);
        }
        Command::Serve(a) => {
            let games = Arc::new(server::Games::load(&a.bundles)?);
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Runtime(e.to_string()))?;
            rt.block_on(async {
                let addr = format!("{}:{}", a.host, a.port);
                let listener = tokio::net::TcpListener::bind(&addr)
                    .await
                    .map_err(|e| CliError::Runtime(format!("{addr}: {e}")))?;
                log::info!("serving {} games on {addr}", games.len());
                server::serve(games, listener).await.map_err(|e| CliError::Runtime(e.to_string()))
            })?;
        }
        Command::Demo(a) => {
            cmd_demo(cli.seed, &a.out)?;
            println!("demo inputs -> {}", a.out.display());
        }
    }
    Ok(())
}
