//! The work behind each subcommand.

use std::fs;
use std::path::{Path, PathBuf};

use avsal_core::config::PipelineConfig;
use avsal_core::media::{AudioTrack, VideoClip};
use avsal_core::metrics::{evaluate_video, report_from_frames, MetricParams};
use avsal_core::pipeline::{run_pipeline, NoObserver, PipelineError, PipelineOutput, StageObserver};
use avsal_core::synth::{generate, SyntheticClip, SyntheticSpec};
use avsal_core::Grid;
use rayon::prelude::*;

use crate::error::{AppError, AppResult};
use crate::io;
use crate::report::VideoReport;
use crate::timing::TimingObserver;

/// Config file (if any) with `key=value` overrides applied on top.
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> AppResult<PipelineConfig> {
    let mut cfg = PipelineConfig::default();
    if let Some(p) = path {
        let text = fs::read_to_string(p).map_err(|e| AppError::io(p, e))?;
        cfg.apply_text(&text).map_err(|e| AppError::format(p, e.to_string()))?;
    }
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| AppError::Input(format!("override `{o}` is not key=value")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SaliencyOptions {
    pub dump_intermediate: bool,
    pub no_audio: bool,
    pub fps: f64,
}

pub struct SaliencyRun {
    pub output: PipelineOutput,
    /// File stems of the input frames, reused for every output map.
    pub frame_names: Vec<String>,
}

fn video_name(dir: &Path) -> String {
    dir.file_name()
        .or_else(|| dir.parent().and_then(Path::file_name))
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string())
}

pub fn load_inputs(frames: &Path, audio: Option<&Path>, opts: &SaliencyOptions) -> AppResult<(VideoClip, Option<AudioTrack>, Vec<String>)> {
    let clip = io::load_frame_sequence(frames, opts.fps)?;
    let names = io::numbered_files(frames, &["png", "ppm", "pnm"])?
        .into_iter()
        .map(|(_, p)| p.file_stem().unwrap().to_string_lossy().into_owned())
        .collect();
    let audio = match (audio, opts.no_audio) {
        (_, true) => None,
        (Some(a), false) => Some(io::load_wav(a)?),
        (None, false) => return Err(AppError::Input("no audio given; pass --audio FILE or --no-audio".into())),
    };
    Ok((clip, audio, names))
}

/// Run the pipeline on one frame directory and write the final maps to `out`.
pub fn run_saliency<O: StageObserver>(
    frames: &Path,
    audio: Option<&Path>,
    cfg: &PipelineConfig,
    out: &Path,
    opts: &SaliencyOptions,
    observer: &mut O,
) -> AppResult<SaliencyRun> {
    let (clip, audio, frame_names) = load_inputs(frames, audio, opts)?;
    let output = run_pipeline(&clip, audio.as_ref(), cfg, observer).map_err(|source| AppError::Pipeline {
        video: video_name(frames),
        source,
    })?;
    write_outputs(&output, &frame_names, cfg, out, opts.dump_intermediate)?;
    Ok(SaliencyRun { output, frame_names })
}

fn write_maps(dir: &Path, names: &[String], maps: impl Iterator<Item = Grid<f64>>) -> AppResult<()> {
    io::create_dir(dir)?;
    for (name, map) in names.iter().zip(maps) {
        io::write_saliency_map(&map.to_saliency(), &dir.join(format!("{name}.png")))?;
    }
    Ok(())
}

pub fn write_outputs(output: &PipelineOutput, names: &[String], cfg: &PipelineConfig, out: &Path, intermediate: bool) -> AppResult<()> {
    write_maps(out, names, output.frames.iter().map(|f| f.fused.clone()))?;
    let cfg_path = out.join("config.txt");
    fs::write(&cfg_path, cfg.to_text()).map_err(|e| AppError::io(&cfg_path, e))?;
    if !intermediate {
        return Ok(());
    }
    write_maps(&out.join("visual"), names, output.frames.iter().map(|f| f.visual.clone()))?;
    write_maps(&out.join("audio"), names, output.frames.iter().map(|f| f.audio.clone()))?;
    write_maps(&out.join("motion"), names, output.frames.iter().map(|f| f.motion.clone()))?;
    let labels = out.join("labels");
    let flow = out.join("flow");
    io::create_dir(&labels)?;
    io::create_dir(&flow)?;
    for (name, (seg, f)) in names.iter().zip(output.segmentations.iter().zip(&output.mean_flows)) {
        io::write_label_png(seg, &labels.join(format!("{name}.png")))?;
        io::write_flo(f, &flow.join(format!("{name}.flo")))?;
    }
    io::write_tracks_csv(&output.tracks, &output.segmentations, &out.join("tracks.csv"))?;
    io::write_scores_csv(&output.scores, &out.join("scores.csv"))
}

/// Evaluate the maps in `maps` against a fixation CSV. With no fixations the
/// report has no frames and carries a diagnostic.
pub fn evaluate(maps: &Path, fixations: &Path, params: &MetricParams) -> AppResult<VideoReport> {
    let files: Vec<(u64, PathBuf)> = io::numbered_files(maps, &["png"])?
        .into_iter()
        .filter(|(_, p)| io::f32_path(p).is_file())
        .collect();
    if files.is_empty() {
        return Err(AppError::Input(format!("{}: no saliency maps (PNG + .f32) found", maps.display())));
    }
    let first = files[0].0;
    let missing: Vec<u64> = (first..=files[files.len() - 1].0)
        .filter(|i| files.binary_search_by_key(i, |(k, _)| *k).is_err())
        .collect();
    if !missing.is_empty() {
        return Err(AppError::Input(format!("{}: missing map frames {missing:?}", maps.display())));
    }
    let grids = files
        .iter()
        .map(|(_, p)| io::load_saliency_map(p).map(|m| m.to_f64()))
        .collect::<AppResult<Vec<_>>>()?;
    let (w, h) = grids[0].dims();
    if let Some(((_, p), _)) = files.iter().zip(&grids).find(|(_, g)| g.dims() != (w, h)) {
        return Err(AppError::format(p, "map size differs from the first map"));
    }
    let fix = io::load_fixations(fixations, w, h)?;
    let video = video_name(maps);
    if fix.total() == 0 {
        let mut report = report_from_frames(Vec::new());
        report.diagnostic = Some(format!("{}: no in-bounds fixations", fixations.display()));
        return Ok(VideoReport { video, report });
    }
    let limit = params.frame_limit.min(grids.len().max(fix.frame_span()));
    let unmapped: Vec<usize> = (grids.len()..limit).filter(|&t| !fix.frame(t).is_empty()).collect();
    if !unmapped.is_empty() {
        return Err(AppError::Input(format!(
            "{} maps but fixations refer to frames {unmapped:?}; those maps are missing",
            grids.len()
        )));
    }
    let report = evaluate_video(&grids, &fix, params)?;
    Ok(VideoReport { video, report })
}

/// Render a synthetic clip into `out`: `frames/NNNNNN.png`, `audio.wav`, `fixations.csv`.
pub fn synth(spec: &SyntheticSpec, seed: u64, out: &Path) -> AppResult<SyntheticClip> {
    let clip = generate(spec, seed)?;
    let frames = out.join("frames");
    io::create_dir(&frames)?;
    for (t, f) in clip.clip.frames().iter().enumerate() {
        io::save_frame(f, &frames.join(format!("{:06}.png", t + 1)))?;
    }
    io::write_wav(&clip.audio, &out.join("audio.wav"))?;
    io::write_fixations(&clip.fixations, &out.join("fixations.csv"))?;
    Ok(clip)
}

pub fn load_synth_spec(path: Option<&Path>) -> AppResult<SyntheticSpec> {
    match path {
        None => Ok(SyntheticSpec::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| AppError::io(p, e))?;
            SyntheticSpec::from_text(&text).map_err(|e| AppError::format(p, e.to_string()))
        }
    }
}

/// Time each stage on one clip.
pub fn bench(frames: &Path, audio: Option<&Path>, cfg: &PipelineConfig, opts: &SaliencyOptions) -> AppResult<(usize, TimingObserver)> {
    let (clip, audio, _) = load_inputs(frames, audio, opts)?;
    let mut timer = TimingObserver::default();
    run_pipeline(&clip, audio.as_ref(), cfg, &mut timer).map_err(|source| AppError::Pipeline {
        video: video_name(frames),
        source,
    })?;
    Ok((clip.frame_count(), timer))
}

/// Run several in-memory clips on a pool of `workers` threads, results in input order.
pub fn run_clips(
    clips: &[(VideoClip, Option<AudioTrack>)],
    cfg: &PipelineConfig,
    workers: usize,
) -> AppResult<Vec<Result<PipelineOutput, PipelineError>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| AppError::Input(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| {
        clips
            .par_iter()
            .map(|(clip, audio)| run_pipeline(clip, audio.as_ref(), cfg, &mut NoObserver))
            .collect()
    }))
}

/// One video of a batch laid out as `synth` writes it.
#[derive(Debug, Clone)]
pub struct BatchJob {
    pub name: String,
    pub frames: PathBuf,
    pub audio: Option<PathBuf>,
}

/// Every subdirectory of `root` holding a `frames/` directory, sorted by name.
pub fn discover_batch(root: &Path) -> AppResult<Vec<BatchJob>> {
    let mut jobs = Vec::new();
    for entry in fs::read_dir(root).map_err(|e| AppError::io(root, e))? {
        let dir = entry.map_err(|e| AppError::io(root, e))?.path();
        let frames = dir.join("frames");
        if !frames.is_dir() {
            continue;
        }
        let audio = dir.join("audio.wav");
        jobs.push(BatchJob {
            name: video_name(&dir),
            frames,
            audio: audio.is_file().then_some(audio),
        });
    }
    jobs.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(jobs)
}

/// Process a batch with `workers` threads, writing each video's maps to `out/<name>`.
pub fn run_batch(jobs: &[BatchJob], cfg: &PipelineConfig, out: &Path, opts: &SaliencyOptions, workers: usize) -> AppResult<Vec<AppResult<()>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| AppError::Input(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let opts = SaliencyOptions {
                    no_audio: opts.no_audio || job.audio.is_none(),
                    ..*opts
                };
                run_saliency(&job.frames, job.audio.as_deref(), cfg, &out.join(&job.name), &opts, &mut NoObserver).map(|_| ())
            })
            .collect()
    }))
}
