use std::path::PathBuf;
use std::process::ExitCode;

use avsal::app::{self, SaliencyOptions};
use avsal::report::{write_reports, VideoReport};
use avsal::{AppError, AppResult};
use avsal_core::metrics::MetricParams;
use avsal_core::pipeline::NoObserver;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "avsal", version, about = "Audiovisual saliency maps for video")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set N=500`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute saliency maps for one frame directory.
    Saliency {
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        audio: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 30.0)]
        fps: f64,
        /// Also write visual, audio and motion maps, labels, flow and track tables.
        #[arg(long)]
        dump_intermediate: bool,
        /// Ignore audio; the audio map is zero and its weight is dropped.
        #[arg(long)]
        no_audio: bool,
    },
    /// Score saliency maps against fixations.
    Eval {
        #[arg(long)]
        maps: PathBuf,
        #[arg(long)]
        fixations: PathBuf,
        /// Report base path; `.csv` and `.json` are written next to each other.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        frame_limit: Option<usize>,
        #[command(flatten)]
        config: ConfigArgs,
        /// Seed for AUC negative sampling.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Render a synthetic two-disc clip with audio and fixations.
    Synth {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Per-stage timing for one clip.
    Bench {
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        audio: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 30.0)]
        fps: f64,
        #[arg(long)]
        no_audio: bool,
    },
    /// Process every `<root>/<video>/frames` directory in parallel.
    Batch {
        #[arg(long)]
        root: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 30.0)]
        fps: f64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        no_audio: bool,
    },
}

fn load(cfg: &ConfigArgs) -> AppResult<avsal_core::config::PipelineConfig> {
    app::load_config(cfg.config.as_deref(), &cfg.overrides)
}

fn run(cli: Cli) -> AppResult<()> {
    match cli.command {
        Command::Saliency {
            frames,
            audio,
            out,
            config,
            fps,
            dump_intermediate,
            no_audio,
        } => {
            let cfg = load(&config)?;
            let opts = SaliencyOptions {
                dump_intermediate,
                no_audio,
                fps,
            };
            let run = app::run_saliency(&frames, audio.as_deref(), &cfg, &out, &opts, &mut NoObserver)?;
            eprintln!("wrote {} maps to {}", run.frame_names.len(), out.display());
            Ok(())
        }
        Command::Eval {
            maps,
            fixations,
            out,
            frame_limit,
            config,
            seed,
        } => {
            let cfg = load(&config)?;
            let mut params: MetricParams = cfg.metrics;
            if let Some(l) = frame_limit {
                params.frame_limit = l;
            }
            if let Some(s) = seed {
                params.auc.seed = s;
            }
            let report = app::evaluate(&maps, &fixations, &params)?;
            let reports: Vec<VideoReport> = vec![report];
            write_reports(&reports, &out)?;
            match &reports[0].report.diagnostic {
                Some(d) => Err(AppError::Input(d.clone())),
                None => Ok(()),
            }
        }
        Command::Synth { spec, out, seed } => {
            let spec = app::load_synth_spec(spec.as_deref())?;
            let clip = app::synth(&spec, seed, &out)?;
            eprintln!("wrote {} frames to {}", clip.clip.frame_count(), out.display());
            Ok(())
        }
        Command::Bench {
            frames,
            audio,
            config,
            fps,
            no_audio,
        } => {
            let cfg = load(&config)?;
            let opts = SaliencyOptions {
                no_audio,
                fps,
                ..Default::default()
            };
            let (n, timer) = app::bench(&frames, audio.as_deref(), &cfg, &opts)?;
            print!("{}", timer.table(n));
            Ok(())
        }
        Command::Batch {
            root,
            out,
            config,
            fps,
            workers,
            no_audio,
        } => {
            let cfg = load(&config)?;
            let jobs = app::discover_batch(&root)?;
            if jobs.is_empty() {
                return Err(AppError::Input(format!("{}: no <video>/frames directories", root.display())));
            }
            let opts = SaliencyOptions {
                no_audio,
                fps,
                ..Default::default()
            };
            let results = app::run_batch(&jobs, &cfg, &out, &opts, workers)?;
            let mut worst = None;
            for (job, r) in jobs.iter().zip(results) {
                if let Err(e) = r {
                    eprintln!("{}: {e}", job.name);
                    if worst.as_ref().map_or(true, |w: &AppError| e.exit_code() > w.exit_code()) {
                        worst = Some(e);
                    }
                }
            }
            worst.map_or(Ok(()), Err)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
