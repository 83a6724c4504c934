//! Pipeline configuration: defaults plus `key = value` overrides.

use alloc::format;
use alloc::string::String;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::flow::HornSchunckConfig;
use crate::fusion::FusionWeights;
use crate::gbvs::GbvsParams;
use crate::metrics::MetricParams;
use crate::segmentation::{HistogramConfig, HistogramSpace, MeanShiftParams};
use crate::tracking::TrackerConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub flow: HornSchunckConfig,
    pub mean_shift: MeanShiftParams,
    /// CIE76 threshold for merging adjacent regions.
    pub merge_delta_e: f64,
    pub min_region_pixels: usize,
    /// Regions whose mean flow magnitude (px/frame) is below this are background.
    pub static_motion: f64,
    pub histogram: HistogramConfig,
    pub tracker: TrackerConfig,
    /// Gaussian sigma (frames) for the audio energy series.
    pub audio_sigma: f64,
    pub wta_permutations: usize,
    pub wta_window_size: usize,
    /// Temporal window, in frames, hashed for correlation.
    pub wta_window_len: usize,
    pub wta_seed: u64,
    pub audio_blur_sigma: f64,
    pub gbvs: GbvsParams,
    pub threshold_percent: f64,
    /// Adaptive-threshold window in pixels; `None` uses one eighth of the width.
    pub threshold_window: Option<usize>,
    pub weights: FusionWeights,
    pub metrics: MetricParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            flow: HornSchunckConfig::default(),
            mean_shift: MeanShiftParams::default(),
            merge_delta_e: 10.0,
            min_region_pixels: 200,
            static_motion: 0.2,
            histogram: HistogramConfig::default(),
            tracker: TrackerConfig::default(),
            audio_sigma: 2.0,
            wta_permutations: 2000,
            wta_window_size: 5,
            wta_window_len: 32,
            wta_seed: 0x5eed,
            audio_blur_sigma: 10.0,
            gbvs: GbvsParams::default(),
            threshold_percent: 10.0,
            threshold_window: None,
            weights: FusionWeights::default(),
            metrics: MetricParams::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::param(format!("cannot parse `{value}` for `{key}`")))
}

impl PipelineConfig {
    /// Every key accepted by [`PipelineConfig::set`].
    pub const KEYS: &'static [&'static str] = &[
        "flow_alpha",
        "flow_iterations",
        "flow_levels",
        "spatial_bandwidth",
        "range_bandwidth",
        "mean_shift_iterations",
        "merge_delta_e",
        "min_region_pixels",
        "static_motion",
        "histogram_space",
        "histogram_bins",
        "search_radius",
        "cos_threshold",
        "motion_sigma",
        "max_missed",
        "audio_sigma",
        "wta_permutations",
        "wta_window_size",
        "wta_window_len",
        "wta_seed",
        "audio_blur_sigma",
        "gbvs_sigma_frac",
        "gbvs_downsample",
        "gbvs_max_width",
        "gbvs_max_height",
        "gbvs_tolerance",
        "gbvs_max_iterations",
        "threshold_percent",
        "threshold_window",
        "weight_visual",
        "weight_audio",
        "weight_motion",
        "auc_repetitions",
        "auc_seed",
        "fixation_sigma_frac",
        "kl_epsilon",
        "frame_limit",
    ];

    /// Set one parameter by name. Short aliases `r`, `N`, `S` and `T` are accepted.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = match key {
            "r" => "search_radius",
            "N" => "wta_permutations",
            "S" => "wta_window_size",
            "T" => "threshold_percent",
            k => k,
        };
        let v = value.trim();
        match key {
            "flow_alpha" => self.flow.alpha = parse(key, v)?,
            "flow_iterations" => self.flow.iterations = parse(key, v)?,
            "flow_levels" => self.flow.levels = parse(key, v)?,
            "spatial_bandwidth" => self.mean_shift.spatial = parse(key, v)?,
            "range_bandwidth" => self.mean_shift.range = parse(key, v)?,
            "mean_shift_iterations" => self.mean_shift.max_iterations = parse(key, v)?,
            "merge_delta_e" => self.merge_delta_e = parse(key, v)?,
            "min_region_pixels" => self.min_region_pixels = parse(key, v)?,
            "static_motion" => self.static_motion = parse(key, v)?,
            "histogram_space" => {
                self.histogram.space = match v.to_ascii_lowercase().as_str() {
                    "luv" => HistogramSpace::Luv,
                    "hsv" => HistogramSpace::Hsv,
                    _ => return Err(Error::param(format!("unknown histogram space `{v}`"))),
                }
            }
            "histogram_bins" => self.histogram.bins = parse(key, v)?,
            "search_radius" => self.tracker.search_radius = parse(key, v)?,
            "cos_threshold" => self.tracker.cos_threshold = parse(key, v)?,
            "motion_sigma" => self.tracker.smoothing_sigma = parse(key, v)?,
            "max_missed" => self.tracker.max_missed = parse(key, v)?,
            "audio_sigma" => self.audio_sigma = parse(key, v)?,
            "wta_permutations" => self.wta_permutations = parse(key, v)?,
            "wta_window_size" => self.wta_window_size = parse(key, v)?,
            "wta_window_len" => self.wta_window_len = parse(key, v)?,
            "wta_seed" => self.wta_seed = parse(key, v)?,
            "audio_blur_sigma" => self.audio_blur_sigma = parse(key, v)?,
            "gbvs_sigma_frac" => self.gbvs.sigma_frac = parse(key, v)?,
            "gbvs_downsample" => self.gbvs.downsample = parse(key, v)?,
            "gbvs_max_width" => self.gbvs.max_nodes.0 = parse(key, v)?,
            "gbvs_max_height" => self.gbvs.max_nodes.1 = parse(key, v)?,
            "gbvs_tolerance" => self.gbvs.tolerance = parse(key, v)?,
            "gbvs_max_iterations" => self.gbvs.max_iterations = parse(key, v)?,
            "threshold_percent" => self.threshold_percent = parse(key, v)?,
            "threshold_window" => {
                self.threshold_window = match v {
                    "auto" => None,
                    _ => Some(parse(key, v)?),
                }
            }
            "weight_visual" => self.weights.visual = parse(key, v)?,
            "weight_audio" => self.weights.audio = parse(key, v)?,
            "weight_motion" => self.weights.motion = parse(key, v)?,
            "auc_repetitions" => self.metrics.auc.repetitions = parse(key, v)?,
            "auc_seed" => self.metrics.auc.seed = parse(key, v)?,
            "fixation_sigma_frac" => self.metrics.density_sigma_frac = parse(key, v)?,
            "kl_epsilon" => self.metrics.kl_epsilon = parse(key, v)?,
            "frame_limit" => self.metrics.frame_limit = parse(key, v)?,
            _ => return Err(Error::param(format!("unknown configuration key `{key}`"))),
        }
        Ok(())
    }

    /// Apply a `key = value` text. Blank lines and `#` comments are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::param(format!("line {}: expected `key = value`", n + 1)))?;
            self.set(k.trim(), v)
                .map_err(|e| Error::param(format!("line {}: {e}", n + 1)))?;
        }
        self.validate()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Render as a `key = value` text that [`PipelineConfig::from_text`] reads back.
    pub fn to_text(&self) -> String {
        let space = match self.histogram.space {
            HistogramSpace::Luv => "luv",
            HistogramSpace::Hsv => "hsv",
        };
        let window = match self.threshold_window {
            Some(w) => format!("{w}"),
            None => String::from("auto"),
        };
        let pairs: [(&str, String); 37] = [
            ("flow_alpha", format!("{:?}", self.flow.alpha)),
            ("flow_iterations", format!("{}", self.flow.iterations)),
            ("flow_levels", format!("{}", self.flow.levels)),
            ("spatial_bandwidth", format!("{:?}", self.mean_shift.spatial)),
            ("range_bandwidth", format!("{:?}", self.mean_shift.range)),
            ("mean_shift_iterations", format!("{}", self.mean_shift.max_iterations)),
            ("merge_delta_e", format!("{:?}", self.merge_delta_e)),
            ("min_region_pixels", format!("{}", self.min_region_pixels)),
            ("static_motion", format!("{:?}", self.static_motion)),
            ("histogram_space", String::from(space)),
            ("histogram_bins", format!("{}", self.histogram.bins)),
            ("search_radius", format!("{:?}", self.tracker.search_radius)),
            ("cos_threshold", format!("{:?}", self.tracker.cos_threshold)),
            ("motion_sigma", format!("{:?}", self.tracker.smoothing_sigma)),
            ("max_missed", format!("{}", self.tracker.max_missed)),
            ("audio_sigma", format!("{:?}", self.audio_sigma)),
            ("wta_permutations", format!("{}", self.wta_permutations)),
            ("wta_window_size", format!("{}", self.wta_window_size)),
            ("wta_window_len", format!("{}", self.wta_window_len)),
            ("wta_seed", format!("{}", self.wta_seed)),
            ("audio_blur_sigma", format!("{:?}", self.audio_blur_sigma)),
            ("gbvs_sigma_frac", format!("{:?}", self.gbvs.sigma_frac)),
            ("gbvs_downsample", format!("{}", self.gbvs.downsample)),
            ("gbvs_max_width", format!("{}", self.gbvs.max_nodes.0)),
            ("gbvs_max_height", format!("{}", self.gbvs.max_nodes.1)),
            ("gbvs_tolerance", format!("{:?}", self.gbvs.tolerance)),
            ("gbvs_max_iterations", format!("{}", self.gbvs.max_iterations)),
            ("threshold_percent", format!("{:?}", self.threshold_percent)),
            ("threshold_window", window),
            ("weight_visual", format!("{:?}", self.weights.visual)),
            ("weight_audio", format!("{:?}", self.weights.audio)),
            ("weight_motion", format!("{:?}", self.weights.motion)),
            ("auc_repetitions", format!("{}", self.metrics.auc.repetitions)),
            ("auc_seed", format!("{}", self.metrics.auc.seed)),
            ("fixation_sigma_frac", format!("{:?}", self.metrics.density_sigma_frac)),
            ("kl_epsilon", format!("{:?}", self.metrics.kl_epsilon)),
            ("frame_limit", format!("{}", self.metrics.frame_limit)),
        ];
        let mut out = String::new();
        for (k, v) in pairs {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(format!("`{name}` must be positive")))
            }
        };
        positive("flow_alpha", self.flow.alpha)?;
        if self.flow.levels == 0 {
            return Err(Error::param("`flow_levels` must be at least 1"));
        }
        positive("spatial_bandwidth", self.mean_shift.spatial)?;
        positive("range_bandwidth", self.mean_shift.range)?;
        positive("merge_delta_e", self.merge_delta_e)?;
        if !(self.static_motion >= 0.0) {
            return Err(Error::param("`static_motion` must be non-negative"));
        }
        if self.histogram.bins == 0 {
            return Err(Error::param("`histogram_bins` must be at least 1"));
        }
        self.tracker.validate()?;
        if !(self.audio_sigma >= 0.0) || !(self.audio_blur_sigma >= 0.0) {
            return Err(Error::param("smoothing sigmas must be non-negative"));
        }
        if self.wta_permutations == 0 {
            return Err(Error::param("`wta_permutations` must be at least 1"));
        }
        if self.wta_window_size < 2 || self.wta_window_size > self.wta_window_len || self.wta_window_size > 256 {
            return Err(Error::param("need 2 <= wta_window_size <= min(wta_window_len, 256)"));
        }
        positive("gbvs_sigma_frac", self.gbvs.sigma_frac)?;
        positive("gbvs_tolerance", self.gbvs.tolerance)?;
        if self.gbvs.max_iterations == 0 || self.gbvs.max_nodes.0 == 0 || self.gbvs.max_nodes.1 == 0 {
            return Err(Error::param("GBVS iteration and node limits must be at least 1"));
        }
        if !(0.0..=100.0).contains(&self.threshold_percent) {
            return Err(Error::param("`threshold_percent` must lie in [0, 100]"));
        }
        if self.threshold_window == Some(0) {
            return Err(Error::param("`threshold_window` must be at least 1"));
        }
        self.weights.validate()?;
        if self.metrics.auc.repetitions == 0 {
            return Err(Error::param("`auc_repetitions` must be at least 1"));
        }
        positive("fixation_sigma_frac", self.metrics.density_sigma_frac)?;
        if !(self.metrics.kl_epsilon >= 0.0) {
            return Err(Error::param("`kl_epsilon` must be non-negative"));
        }
        Ok(())
    }
}
