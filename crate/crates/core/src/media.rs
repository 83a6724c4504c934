//! In-memory media carriers shared by every stage.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::RgbImage;

/// A decoded frame sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoClip {
    frames: Vec<RgbImage>,
    fps: f64,
}

impl VideoClip {
    /// Fails unless there are at least two frames of identical size and `fps > 0`.
    pub fn new(frames: Vec<RgbImage>, fps: f64) -> Result<Self> {
        if !(fps > 0.0) || !fps.is_finite() {
            return Err(Error::param("fps must be positive"));
        }
        if frames.len() < 2 {
            return Err(Error::input("a clip needs at least 2 frames"));
        }
        let dims = frames[0].dims();
        if dims.0 == 0 || dims.1 == 0 {
            return Err(Error::input("frames must be non-empty"));
        }
        if let Some(bad) = frames.iter().find(|f| f.dims() != dims) {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: bad.dims(),
            });
        }
        Ok(VideoClip { frames, fps })
    }

    pub fn frames(&self) -> &[RgbImage] {
        &self.frames
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    /// Keep only the first `n` frames (at least 2).
    pub fn truncate(&mut self, n: usize) {
        self.frames.truncate(n.max(2));
    }
}

/// Mono PCM audio with samples in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioTrack {
    pub samples: Vec<f32>,
    pub sample_rate: u32,
}

impl AudioTrack {
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::param("sample rate must be positive"));
        }
        Ok(AudioTrack {
            samples,
            sample_rate,
        })
    }

    /// Average interleaved channels down to mono.
    pub fn from_interleaved(interleaved: &[f32], channels: usize, sample_rate: u32) -> Result<Self> {
        if channels == 0 {
            return Err(Error::param("channel count must be positive"));
        }
        let samples = interleaved
            .chunks_exact(channels)
            .map(|frame| frame.iter().sum::<f32>() / channels as f32)
            .collect();
        Self::new(samples, sample_rate)
    }
}

/// A gaze point in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixation {
    pub x: f64,
    pub y: f64,
}

/// Pooled fixations per frame. Frames without data hold an empty list.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FixationSet {
    frames: Vec<Vec<Fixation>>,
    /// Points rejected because they fell outside the frame.
    pub dropped: usize,
}

impl FixationSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add a point, rejecting it (and counting it) when outside `width x height`.
    pub fn push(&mut self, frame: usize, fix: Fixation, width: usize, height: usize) -> bool {
        let inside = fix.x >= 0.0 && fix.y >= 0.0 && fix.x < width as f64 && fix.y < height as f64;
        if !inside {
            self.dropped += 1;
            return false;
        }
        if self.frames.len() <= frame {
            self.frames.resize_with(frame + 1, Vec::new);
        }
        self.frames[frame].push(fix);
        true
    }

    pub fn frame(&self, t: usize) -> &[Fixation] {
        self.frames.get(t).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Number of frames up to and including the last one with data.
    pub fn frame_span(&self) -> usize {
        self.frames.len()
    }

    pub fn total(&self) -> usize {
        self.frames.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn clip_requires_two_frames() {
        let f = RgbImage::new(4, 4);
        assert!(matches!(VideoClip::new(vec![f.clone()], 30.0), Err(Error::Input(_))));
        let clip = VideoClip::new(vec![f.clone(), f], 30.0).unwrap();
        assert_eq!((clip.width(), clip.height(), clip.frame_count()), (4, 4, 2));
    }

    #[test]
    fn clip_rejects_mixed_sizes() {
        let r = VideoClip::new(vec![RgbImage::new(4, 4), RgbImage::new(4, 5)], 30.0);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn stereo_pairs_average_to_mono() {
        let a = AudioTrack::from_interleaved(&[-0.5, 0.5, -0.5, 0.5], 2, 48000).unwrap();
        assert_eq!(a.samples, vec![0.0, 0.0]);
    }

    #[test]
    fn out_of_bounds_fixation_counted() {
        let mut s = FixationSet::new();
        assert!(!s.push(0, Fixation { x: -1.0, y: 5.0 }, 10, 10));
        assert!(s.push(2, Fixation { x: 1.0, y: 5.0 }, 10, 10));
        assert_eq!(s.dropped, 1);
        assert_eq!(s.total(), 1);
        assert!(s.frame(0).is_empty());
        assert!(s.frame(7).is_empty());
    }
}
