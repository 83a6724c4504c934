//! Synthetic audiovisual clips with known sound source.
//!
//! Textured discs orbit over a textured backdrop. One disc is bound to the audio:
//! on top of its orbit it shakes radially, alternating direction every frame, with
//! an amplitude that follows a random envelope. The soundtrack is a tone
//! amplitude-modulated by the same envelope, and fixations sit on that disc.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Grid, RgbImage};
use crate::media::{AudioTrack, Fixation, FixationSet, VideoClip};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscSpec {
    pub center: (f64, f64),
    pub orbit_radius: f64,
    /// Radians per frame.
    pub angular_speed: f64,
    pub phase: f64,
    pub radius: f64,
    pub color: [u8; 3],
}

impl DiscSpec {
    /// Position at frame `t` with the orbit radius offset by `shake`.
    fn position(&self, t: usize, shake: f64) -> (f64, f64) {
        let a = self.angular_speed * t as f64 + self.phase;
        let r = self.orbit_radius + shake;
        (self.center.0 + r * a.cos(), self.center.1 + r * a.sin())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub fps: f64,
    pub sample_rate: u32,
    pub tone_hz: f64,
    pub discs: Vec<DiscSpec>,
    /// Index of the audio-bound disc.
    pub bound: usize,
    /// Peak shake amplitude of the bound disc in pixels; 0 disables the binding.
    pub vibration: f64,
    /// Lower bound of the envelope, in (0, 1].
    pub envelope_floor: f64,
    pub fixations_per_frame: usize,
    pub jitter: f64,
}

impl Default for SyntheticSpec {
    /// The two-disc benchmark: 64x64, 120 frames at 30 fps.
    fn default() -> Self {
        SyntheticSpec {
            width: 64,
            height: 64,
            frames: 120,
            fps: 30.0,
            sample_rate: 16_000,
            tone_hz: 440.0,
            discs: alloc::vec![
                DiscSpec {
                    center: (20.0, 21.0),
                    orbit_radius: 5.0,
                    angular_speed: 0.12,
                    phase: 0.0,
                    radius: 10.0,
                    color: [230, 60, 40],
                },
                DiscSpec {
                    center: (44.0, 43.0),
                    orbit_radius: 5.0,
                    angular_speed: -0.12,
                    phase: 1.3,
                    radius: 10.0,
                    color: [40, 100, 230],
                },
            ],
            bound: 0,
            vibration: 0.4,
            envelope_floor: 0.15,
            fixations_per_frame: 5,
            jitter: 2.0,
        }
    }
}

fn parse_num<T: core::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::param(format!("cannot parse `{v}` for `{key}`")))
}

impl SyntheticSpec {
    /// Parse `key = value` lines on top of the defaults. Any `disc` line replaces
    /// the default discs; its value is
    /// `cx cy orbit_radius angular_speed phase radius r g b`.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut spec = SyntheticSpec::default();
        let mut discs = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::param(format!("line {}: expected `key = value`", n + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "width" => spec.width = parse_num(k, v)?,
                "height" => spec.height = parse_num(k, v)?,
                "frames" => spec.frames = parse_num(k, v)?,
                "fps" => spec.fps = parse_num(k, v)?,
                "sample_rate" => spec.sample_rate = parse_num(k, v)?,
                "tone_hz" => spec.tone_hz = parse_num(k, v)?,
                "bound" => spec.bound = parse_num(k, v)?,
                "vibration" => spec.vibration = parse_num(k, v)?,
                "envelope_floor" => spec.envelope_floor = parse_num(k, v)?,
                "fixations_per_frame" => spec.fixations_per_frame = parse_num(k, v)?,
                "jitter" => spec.jitter = parse_num(k, v)?,
                "disc" => {
                    let f: Vec<&str> = v.split_whitespace().collect();
                    if f.len() != 9 {
                        return Err(Error::param(format!("line {}: disc needs 9 fields", n + 1)));
                    }
                    let num = |i: usize| parse_num::<f64>("disc", f[i]);
                    let byte = |i: usize| parse_num::<u8>("disc", f[i]);
                    discs.push(DiscSpec {
                        center: (num(0)?, num(1)?),
                        orbit_radius: num(2)?,
                        angular_speed: num(3)?,
                        phase: num(4)?,
                        radius: num(5)?,
                        color: [byte(6)?, byte(7)?, byte(8)?],
                    });
                }
                _ => return Err(Error::param(format!("line {}: unknown key `{k}`", n + 1))),
            }
        }
        if !discs.is_empty() {
            spec.discs = discs;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 8 || self.height < 8 || self.frames < 2 {
            return Err(Error::param("need at least 8x8 pixels and 2 frames"));
        }
        if !(self.fps > 0.0) || self.sample_rate == 0 || !(self.tone_hz > 0.0) {
            return Err(Error::param("fps, sample rate and tone frequency must be positive"));
        }
        if self.discs.len() < 2 {
            return Err(Error::param("a synthetic clip needs at least two discs"));
        }
        if self.bound >= self.discs.len() {
            return Err(Error::param("bound disc index out of range"));
        }
        if !(self.vibration >= 0.0) || !(self.jitter >= 0.0) {
            return Err(Error::param("vibration and jitter must be non-negative"));
        }
        if !(self.envelope_floor > 0.0 && self.envelope_floor <= 1.0) {
            return Err(Error::param("envelope floor must lie in (0, 1]"));
        }
        for (i, d) in self.discs.iter().enumerate() {
            if !(d.radius > 0.0) {
                return Err(Error::param(format!("disc {i}: radius must be positive")));
            }
            let shake = if i == self.bound { self.vibration } else { 0.0 };
            let reach = d.orbit_radius.abs() + shake + d.radius;
            let inside = |c: f64, size: usize| c - reach >= 0.0 && c + reach <= (size - 1) as f64;
            if !inside(d.center.0, self.width) || !inside(d.center.1, self.height) {
                return Err(Error::param(format!("disc {i}: trajectory leaves the frame")));
            }
        }
        Ok(())
    }
}

/// A rendered clip with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticClip {
    pub clip: VideoClip,
    pub audio: AudioTrack,
    pub fixations: FixationSet,
    /// Disc centres per frame, `positions[t][disc]`.
    pub positions: Vec<Vec<(f64, f64)>>,
    /// Shake envelope in `[floor, 1]`, one value per frame.
    pub envelope: Vec<f64>,
}

impl SyntheticClip {
    /// Per-frame displacement `|p(t+1) - p(t)|` of one disc; the last frame repeats.
    pub fn speed(&self, disc: usize) -> Vec<f64> {
        let n = self.positions.len();
        (0..n)
            .map(|t| {
                let (a, b) = if t + 1 < n { (t, t + 1) } else { (t - 1, t) };
                let (p, q) = (self.positions[a][disc], self.positions[b][disc]);
                (q.0 - p.0).hypot(q.1 - p.1)
            })
            .collect()
    }

    /// Pixels covered (coverage >= 0.5) by one disc in frame `t`.
    pub fn disc_mask(&self, t: usize, disc: usize, radius: f64) -> Grid<bool> {
        let (cx, cy) = self.positions[t][disc];
        Grid::from_fn(self.clip.width(), self.clip.height(), |x, y| {
            (x as f64 - cx).hypot(y as f64 - cy) <= radius
        })
    }
}

/// Smooth random envelope: six random sinusoids rescaled to `[floor, 1]`.
fn envelope(frames: usize, floor: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let comps: Vec<(f64, f64, f64)> = (0..6)
        .map(|_| (rng.gen_range(0.06..0.2), rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.5..1.0)))
        .collect();
    let raw: Vec<f64> = (0..frames)
        .map(|t| comps.iter().map(|(f, p, a)| a * (2.0 * PI * f * t as f64 + p).sin()).sum())
        .collect();
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    raw.iter()
        .map(|v| if hi > lo { floor + (1.0 - floor) * (v - lo) / (hi - lo) } else { 1.0 })
        .collect()
}

fn background(x: usize, y: usize) -> [f64; 3] {
    let (xf, yf) = (x as f64, y as f64);
    let s = (xf * 0.9).sin() * (yf * 0.7).cos() + 0.5 * ((xf + 2.0 * yf) * 0.45).sin();
    [110.0 + 14.0 * s, 118.0 + 12.0 * s, 104.0 + 16.0 * s]
}

fn render(spec: &SyntheticSpec, centres: &[(f64, f64)]) -> RgbImage {
    Grid::from_fn(spec.width, spec.height, |x, y| {
        let mut c = background(x, y);
        for (d, &(cx, cy)) in spec.discs.iter().zip(centres) {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            let alpha = (d.radius + 0.5 - dx.hypot(dy)).clamp(0.0, 1.0);
            if alpha == 0.0 {
                continue;
            }
            let shade = 0.85 + 0.15 * ((dx * 0.9 + dy * 0.6) * 1.1).sin() * (dy * 0.8).cos();
            for k in 0..3 {
                c[k] = (1.0 - alpha) * c[k] + alpha * (d.color[k] as f64 * shade).min(255.0);
            }
        }
        [c[0].round() as u8, c[1].round() as u8, c[2].round() as u8]
    })
}

/// Render a spec. Identical seeds give identical output.
pub fn generate(spec: &SyntheticSpec, seed: u64) -> Result<SyntheticClip> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let env = envelope(spec.frames, spec.envelope_floor, &mut rng);
    let positions: Vec<Vec<(f64, f64)>> = (0..spec.frames)
        .map(|t| {
            spec.discs
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    let sign = if t % 2 == 0 { 1.0 } else { -1.0 };
                    let shake = if i == spec.bound { sign * spec.vibration * env[t] } else { 0.0 };
                    d.position(t, shake)
                })
                .collect()
        })
        .collect();
    let frames = positions.iter().map(|c| render(spec, c)).collect();
    let clip = VideoClip::new(frames, spec.fps)?;

    let sr = spec.sample_rate as f64;
    let total = (spec.frames as f64 * sr / spec.fps).ceil() as usize;
    let gain = 0.8 * spec.vibration.min(1.0);
    let samples = (0..total)
        .map(|i| {
            let t = ((i as f64 * spec.fps / sr) as usize).min(spec.frames - 1);
            (gain * env[t] * (2.0 * PI * spec.tone_hz * i as f64 / sr).sin()) as f32
        })
        .collect();
    let audio = AudioTrack::new(samples, spec.sample_rate)?;

    let mut fixations = FixationSet::new();
    for (t, centres) in positions.iter().enumerate() {
        let (cx, cy) = centres[spec.bound];
        for _ in 0..spec.fixations_per_frame {
            let (jx, jy) = if spec.jitter > 0.0 {
                (rng.gen_range(-spec.jitter..=spec.jitter), rng.gen_range(-spec.jitter..=spec.jitter))
            } else {
                (0.0, 0.0)
            };
            fixations.push(t, Fixation { x: cx + jx, y: cy + jy }, spec.width, spec.height);
        }
    }
    Ok(SyntheticClip {
        clip,
        audio,
        fixations,
        positions,
        envelope: env,
    })
}
