//! End-to-end audiovisual saliency for one clip.

use alloc::vec::Vec;
use core::fmt;

use crate::audio::energy_descriptor;
use crate::config::PipelineConfig;
use crate::correlation::{correlate_tracks, render_audio_saliency, CorrelationScore, PermutationSet};
use crate::error::Error;
use crate::flow::{acceleration_field, dense_flow, mean_velocity_flow, flow_to_color, AccelerationField, FlowDirection, FlowField};
use crate::fusion::{adaptive_threshold, combine, default_window, minmax_normalize, FusionWeights, MotionMap};
use crate::gbvs::{gbvs_saliency, ChainDiagnostics};
use crate::grid::Grid;
use crate::media::{AudioTrack, VideoClip};
use crate::segmentation::{drop_static_regions, extract_regions, filter_small, mean_shift_segment, merge_regions, SegmentationMap};
use crate::tracking::{Assignment, Track, Tracker};

/// Pipeline stages, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    AudioDescriptor,
    OpticalFlow,
    Segmentation,
    Tracking,
    Correlation,
    VisualSaliency,
    MotionMap,
    Fusion,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::AudioDescriptor,
        Stage::OpticalFlow,
        Stage::Segmentation,
        Stage::Tracking,
        Stage::Correlation,
        Stage::VisualSaliency,
        Stage::MotionMap,
        Stage::Fusion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::AudioDescriptor => "audio descriptor",
            Stage::OpticalFlow => "optical flow",
            Stage::Segmentation => "segmentation",
            Stage::Tracking => "tracking",
            Stage::Correlation => "audio-video correlation",
            Stage::VisualSaliency => "visual saliency",
            Stage::MotionMap => "motion map",
            Stage::Fusion => "fusion",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Hooks around each stage, e.g. for timing.
pub trait StageObserver {
    fn enter(&mut self, _stage: Stage) {}
    fn leave(&mut self, _stage: Stage) {}
}

pub struct NoObserver;

impl StageObserver for NoObserver {}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineError {
    pub stage: Stage,
    pub error: Error,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {}", self.stage, self.error)
    }
}

impl core::error::Error for PipelineError {}

/// The three normalised maps and their combination for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMaps {
    pub visual: Grid<f64>,
    pub audio: Grid<f64>,
    pub motion: Grid<f64>,
    pub fused: Grid<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub frames: Vec<FrameMaps>,
    /// Smoothed audio energy, empty without audio.
    pub audio_energy: Vec<f64>,
    pub mean_flows: Vec<FlowField>,
    pub segmentations: Vec<SegmentationMap>,
    pub tracks: Vec<Track>,
    pub assignments: Vec<Assignment>,
    pub scores: Vec<CorrelationScore>,
    pub motion_maps: Vec<MotionMap>,
    pub chains: Vec<ChainDiagnostics>,
    pub weights: FusionWeights,
}

struct Run<'o, O: StageObserver> {
    observer: &'o mut O,
}

impl<O: StageObserver> Run<'_, O> {
    fn stage<T>(&mut self, stage: Stage, f: impl FnOnce() -> crate::Result<T>) -> Result<T, PipelineError> {
        self.observer.enter(stage);
        let out = f().map_err(|error| PipelineError { stage, error });
        self.observer.leave(stage);
        out
    }
}

/// Forward and backward flow for every frame, combined into mean velocity and
/// acceleration. The first frame has no backward flow and the last no forward
/// flow: there the mean is the one available flow and acceleration is zero.
pub fn clip_flows(clip: &VideoClip, cfg: &PipelineConfig) -> crate::Result<(Vec<FlowField>, Vec<AccelerationField>)> {
    let frames = clip.frames();
    let n = frames.len();
    let (w, h) = (clip.width(), clip.height());
    let mut means = Vec::with_capacity(n);
    let mut accels = Vec::with_capacity(n);
    for t in 0..n {
        let fwd = (t + 1 < n)
            .then(|| dense_flow(&frames[t], &frames[t + 1], &cfg.flow, FlowDirection::Forward, t))
            .transpose()?;
        let bwd = (t > 0)
            .then(|| dense_flow(&frames[t], &frames[t - 1], &cfg.flow, FlowDirection::Backward, t))
            .transpose()?;
        let (mean, accel) = match (fwd, bwd) {
            (Some(f), Some(b)) => (mean_velocity_flow(&f, &b)?, acceleration_field(&f, &b)?),
            (Some(f), None) => (
                FlowField {
                    direction: FlowDirection::Mean,
                    ..f
                },
                AccelerationField::zeros(w, h),
            ),
            (None, Some(b)) => (
                FlowField {
                    direction: FlowDirection::Mean,
                    ..b.negated()
                },
                AccelerationField::zeros(w, h),
            ),
            (None, None) => return Err(Error::input("a clip needs at least two frames")),
        };
        means.push(mean);
        accels.push(accel);
    }
    Ok((means, accels))
}

/// Moving-object segmentation of one frame from its mean flow.
pub fn segment_motion(mean_flow: &FlowField, cfg: &PipelineConfig) -> crate::Result<SegmentationMap> {
    let color = flow_to_color(mean_flow, None);
    let seg = mean_shift_segment(&color, &cfg.mean_shift);
    let seg = merge_regions(&seg, &color, cfg.merge_delta_e)?;
    let seg = drop_static_regions(&seg, &mean_flow.magnitude(), cfg.static_motion)?;
    Ok(filter_small(&seg, cfg.min_region_pixels))
}

/// Run every stage on a clip. `audio = None` gives a zero audio map and drops the
/// audio weight from the combination.
pub fn run_pipeline<O: StageObserver>(
    clip: &VideoClip,
    audio: Option<&AudioTrack>,
    cfg: &PipelineConfig,
    observer: &mut O,
) -> Result<PipelineOutput, PipelineError> {
    cfg.validate().map_err(|error| PipelineError {
        stage: Stage::AudioDescriptor,
        error,
    })?;
    let mut run = Run { observer };
    let n = clip.frame_count();
    let (w, h) = (clip.width(), clip.height());
    let frames = clip.frames();

    let audio_energy = match audio {
        Some(track) => run.stage(Stage::AudioDescriptor, || Ok(energy_descriptor(track, clip, cfg.audio_sigma)?.values))?,
        None => Vec::new(),
    };

    let (mean_flows, accels) = run.stage(Stage::OpticalFlow, || clip_flows(clip, cfg))?;

    let (segmentations, regions) = run.stage(Stage::Segmentation, || {
        let mut segs = Vec::with_capacity(n);
        let mut regions = Vec::with_capacity(n);
        for (t, flow) in mean_flows.iter().enumerate() {
            let seg = segment_motion(flow, cfg)?;
            regions.push(extract_regions(&seg, &frames[t], &cfg.histogram)?);
            segs.push(seg);
        }
        Ok((segs, regions))
    })?;

    let (tracks, assignments) = run.stage(Stage::Tracking, || {
        let mut tracker = Tracker::new(cfg.tracker)?;
        for (r, g) in regions.iter().zip(&accels) {
            tracker.step(r, &g.norm())?;
        }
        Ok((tracker.smoothed_tracks()?, tracker.assignments().to_vec()))
    })?;

    let (scores, audio_maps) = match audio {
        Some(_) => run.stage(Stage::Correlation, || {
            let perms = PermutationSet::seeded(cfg.wta_window_len, cfg.wta_permutations, cfg.wta_window_size, cfg.wta_seed)?;
            let mut scores = Vec::new();
            let mut maps = Vec::with_capacity(n);
            for (t, seg) in segmentations.iter().enumerate() {
                let s = correlate_tracks(&audio_energy, &tracks, t, &perms)?;
                maps.push(render_audio_saliency(&s, seg, &tracks, t, cfg.audio_blur_sigma)?);
                scores.extend(s);
            }
            Ok((scores, maps))
        })?,
        None => (Vec::new(), (0..n).map(|_| Grid::new(w, h)).collect()),
    };

    let (visual_maps, chains) = run.stage(Stage::VisualSaliency, || {
        let mut maps = Vec::with_capacity(n);
        let mut chains = Vec::new();
        for t in 0..n {
            let prev = t.checked_sub(1).map(|p| &frames[p]);
            let v = gbvs_saliency(&frames[t], prev, &mean_flows[t], &cfg.gbvs)?;
            maps.push(v.map);
            chains.extend(v.chains);
        }
        Ok((maps, chains))
    })?;

    let motion_maps = run.stage(Stage::MotionMap, || {
        let window = cfg.threshold_window.unwrap_or_else(|| default_window(w));
        mean_flows
            .iter()
            .map(|f| adaptive_threshold(&f.magnitude(), cfg.threshold_percent, window))
            .collect::<crate::Result<Vec<_>>>()
    })?;

    let weights = if audio.is_some() { cfg.weights } else { cfg.weights.without_audio() };
    let frames_out = run.stage(Stage::Fusion, || {
        weights.validate()?;
        (0..n)
            .map(|t| {
                let visual = minmax_normalize(&visual_maps[t]);
                let audio = minmax_normalize(&audio_maps[t]);
                let motion = motion_maps[t].to_f64();
                let fused = combine(&visual, &audio, &motion, &weights)?;
                Ok(FrameMaps {
                    visual,
                    audio,
                    motion,
                    fused,
                })
            })
            .collect::<crate::Result<Vec<_>>>()
    })?;

    Ok(PipelineOutput {
        frames: frames_out,
        audio_energy,
        mean_flows,
        segmentations,
        tracks,
        assignments,
        scores,
        motion_maps,
        chains,
        weights,
    })
}
