//! Audio energy descriptor: one spectrogram-energy value per video frame.
//!
//! The audio is cut into per-frame slices at the video frame rate, each slice is
//! turned into a Hann-windowed STFT with 50% overlap, and the squared magnitudes are
//! summed over windows and bins. The resulting series is Gaussian smoothed.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::media::{AudioTrack, VideoClip};
use crate::smooth::gaussian_smooth_1d;

/// Per-frame audio energy, `values.len() == frame count`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioEnergyDescriptor {
    pub values: Vec<f64>,
}

/// One-sided STFT magnitudes, `magnitudes[window][bin]`, bins `0..=window_len/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub magnitudes: Vec<Vec<f64>>,
    pub hop: usize,
    pub window_len: usize,
}

impl Spectrogram {
    /// Energy of window `w` via Parseval; interior bins count twice.
    pub fn window_energy(&self, w: usize) -> f64 {
        let mags = &self.magnitudes[w];
        let last = mags.len() - 1;
        let mut sum = 0.0;
        for (k, m) in mags.iter().enumerate() {
            let e = m * m;
            sum += if k == 0 || k == last { e } else { 2.0 * e };
        }
        sum / self.window_len as f64
    }

    pub fn total_energy(&self) -> f64 {
        (0..self.magnitudes.len()).map(|w| self.window_energy(w)).sum()
    }
}

/// STFT window length for a given sample rate and frame rate: roughly four windows
/// per video frame, rounded up to a power of two.
pub fn window_len_for(sample_rate: u32, fps: f64) -> usize {
    let target = (sample_rate as f64 / fps / 4.0).max(1.0);
    let len = 1usize << (target.log2().ceil() as u32);
    len.max(2)
}

/// Split audio into `frame_count` slices aligned with video frames.
///
/// Slice `k` covers samples `[floor(k sr / fps), floor((k+1) sr / fps))`. Missing audio
/// past the end is treated as silence.
pub fn segment_audio(audio: &AudioTrack, fps: f64, frame_count: usize) -> Result<Vec<Vec<f64>>> {
    if !(fps > 0.0) || !fps.is_finite() {
        return Err(Error::param("fps must be positive"));
    }
    let per_frame = audio.sample_rate as f64 / fps;
    let bound = |k: usize| (k as f64 * per_frame).floor() as usize;
    Ok((0..frame_count)
        .map(|k| {
            let (start, end) = (bound(k), bound(k + 1));
            (start..end)
                .map(|i| audio.samples.get(i).map_or(0.0, |&s| s as f64))
                .collect()
        })
        .collect())
}

/// In-place iterative radix-2 FFT. `re.len()` must be a power of two.
pub(crate) fn fft(re: &mut [f64], im: &mut [f64]) {
    let n = re.len();
    debug_assert!(n.is_power_of_two() && im.len() == n);
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            re.swap(i, j);
            im.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let angle = -2.0 * PI / len as f64;
        let half = len / 2;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let (s, c) = (angle * k as f64).sin_cos();
                let a = start + k;
                let b = a + half;
                let tr = re[b] * c - im[b] * s;
                let ti = re[b] * s + im[b] * c;
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
            }
        }
        len <<= 1;
    }
}

/// Periodic Hann window.
pub fn hann(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / len as f64).cos())
        .collect()
}

/// Hann-windowed STFT of a slice with hop `window_len / 2`.
pub fn stft_spectrogram(slice: &[f64], window_len: usize) -> Result<Spectrogram> {
    if window_len < 2 || !window_len.is_power_of_two() {
        return Err(Error::param("window length must be a power of two >= 2"));
    }
    if slice.len() < window_len {
        return Err(Error::param("slice shorter than one STFT window"));
    }
    let hop = window_len / 2;
    let window = hann(window_len);
    let count = (slice.len() - window_len) / hop + 1;
    let mut re = vec![0.0; window_len];
    let mut im = vec![0.0; window_len];
    let magnitudes = (0..count)
        .map(|w| {
            let chunk = &slice[w * hop..w * hop + window_len];
            for ((r, i), (x, h)) in re.iter_mut().zip(im.iter_mut()).zip(chunk.iter().zip(&window)) {
                *r = x * h;
                *i = 0.0;
            }
            fft(&mut re, &mut im);
            (0..=window_len / 2)
                .map(|k| (re[k] * re[k] + im[k] * im[k]).sqrt())
                .collect()
        })
        .collect();
    Ok(Spectrogram {
        magnitudes,
        hop,
        window_len,
    })
}

/// Unsmoothed per-frame spectrogram energy.
pub fn frame_energies(audio: &AudioTrack, fps: f64, frame_count: usize) -> Result<Vec<f64>> {
    let window_len = window_len_for(audio.sample_rate, fps);
    segment_audio(audio, fps, frame_count)?
        .iter()
        .map(|slice| {
            if slice.len() < window_len {
                // Only reachable for pathological sr/fps ratios; pad to one window.
                let mut padded = slice.clone();
                padded.resize(window_len, 0.0);
                stft_spectrogram(&padded, window_len).map(|s| s.total_energy())
            } else {
                stft_spectrogram(slice, window_len).map(|s| s.total_energy())
            }
        })
        .collect()
}

/// Smoothed energy descriptor aligned with the clip's frames.
pub fn energy_descriptor(audio: &AudioTrack, clip: &VideoClip, sigma: f64) -> Result<AudioEnergyDescriptor> {
    let raw = frame_energies(audio, clip.fps(), clip.frame_count())?;
    Ok(AudioEnergyDescriptor {
        values: gaussian_smooth_1d(&raw, sigma)?,
    })
}
