//! Audio/motion correlation in rank space via Winner-Take-All hashing.
//!
//! Both the audio energy series and each track's acceleration series are windowed,
//! hashed with one shared permutation set, and compared by Hamming distance.

use alloc::vec::Vec;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::segmentation::SegmentationMap;
use crate::smooth::gaussian_blur_2d;
use crate::tracking::Track;

/// `N` WTA symbols, each in `0..S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WtaHashCode {
    pub symbols: Vec<u8>,
}

/// The shared permutation set. Only the first `S` entries of each permutation
/// influence the hash, so only those prefixes are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationSet {
    prefixes: Vec<Vec<usize>>,
    window_len: usize,
    s: usize,
}

impl PermutationSet {
    /// Draw `n` random permutations of `0..window_len` from a seeded ChaCha8 stream.
    pub fn seeded(window_len: usize, n: usize, s: usize, seed: u64) -> Result<Self> {
        if s < 2 || s > window_len {
            return Err(Error::param("WTA window size S must satisfy 2 <= S <= window length"));
        }
        if s > u8::MAX as usize + 1 {
            return Err(Error::param("WTA window size S must fit a byte"));
        }
        if n == 0 {
            return Err(Error::param("at least one permutation is required"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prefixes = (0..n).map(|_| sample(&mut rng, window_len, s).into_vec()).collect();
        Ok(PermutationSet {
            prefixes,
            window_len,
            s,
        })
    }

    /// Build from explicit permutations of `0..window_len`.
    pub fn from_permutations(perms: &[Vec<usize>], s: usize) -> Result<Self> {
        let window_len = perms.first().map_or(0, Vec::len);
        if perms.is_empty() || s < 2 || s > window_len {
            return Err(Error::param("need permutations at least S long with S >= 2"));
        }
        for p in perms {
            let mut seen = alloc::vec![false; window_len];
            if p.len() != window_len || p.iter().any(|&i| i >= window_len || core::mem::replace(&mut seen[i], true)) {
                return Err(Error::param("not a permutation of the window indices"));
            }
        }
        Ok(PermutationSet {
            prefixes: perms.iter().map(|p| p[..s].to_vec()).collect(),
            window_len,
            s,
        })
    }

    pub fn len(&self) -> usize {
        self.prefixes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefixes.is_empty()
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn s(&self) -> usize {
        self.s
    }
}

/// Per permutation: index (0..S) of the largest of the first `S` permuted values,
/// lowest index on ties.
pub fn wta_hash(window: &[f64], perms: &PermutationSet) -> Result<WtaHashCode> {
    if window.len() < perms.s {
        return Err(Error::param("window shorter than S"));
    }
    if window.len() != perms.window_len {
        return Err(Error::param("window length does not match the permutation set"));
    }
    let symbols = perms
        .prefixes
        .iter()
        .map(|prefix| {
            let mut best = 0usize;
            for (k, &idx) in prefix.iter().enumerate().skip(1) {
                if window[idx] > window[prefix[best]] {
                    best = k;
                }
            }
            best as u8
        })
        .collect();
    Ok(WtaHashCode { symbols })
}

pub fn hamming_distance(a: &WtaHashCode, b: &WtaHashCode) -> Result<usize> {
    if a.symbols.len() != b.symbols.len() {
        return Err(Error::param("hash codes differ in length"));
    }
    Ok(a.symbols.iter().zip(&b.symbols).filter(|(x, y)| x != y).count())
}

/// `series[t-L+1 ..= t]` with zeros before index 0 and past the end.
pub fn trailing_window(series: &[f64], t: usize, len: usize) -> Vec<f64> {
    (0..len)
        .map(|k| {
            let idx = t as isize - (len - 1 - k) as isize;
            if idx < 0 {
                0.0
            } else {
                series.get(idx as usize).copied().unwrap_or(0.0)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationScore {
    pub track_id: u32,
    pub frame: usize,
    /// `1 - hamming / N`.
    pub score: f64,
}

/// Score every track active in frame `t` against the audio, using
/// windows of `perms.window_len()` frames.
pub fn correlate_tracks(audio: &[f64], tracks: &[Track], t: usize, perms: &PermutationSet) -> Result<Vec<CorrelationScore>> {
    let len = perms.window_len();
    let code_a = wta_hash(&trailing_window(audio, t, len), perms)?;
    tracks
        .iter()
        .filter(|tr| tr.active_at(t))
        .map(|tr| {
            let code_m = wta_hash(&trailing_window(&tr.acceleration, t, len), perms)?;
            let d = hamming_distance(&code_a, &code_m)?;
            Ok(CorrelationScore {
                track_id: tr.id,
                frame: t,
                score: 1.0 - d as f64 / perms.len() as f64,
            })
        })
        .collect()
}

/// Paint each track's score over the region it holds in this frame, then blur.
/// The result is not normalised.
pub fn render_audio_saliency(
    scores: &[CorrelationScore],
    seg: &SegmentationMap,
    tracks: &[Track],
    frame: usize,
    blur_sigma: f64,
) -> Result<Grid<f64>> {
    let (w, h) = seg.dims();
    let max = seg.labels.iter().copied().max().unwrap_or(0) as usize;
    let mut value_of = alloc::vec![0.0; max + 1];
    for s in scores {
        let Some(track) = tracks.iter().find(|t| t.id == s.track_id) else {
            continue;
        };
        if let Some(rid) = track.region_at(frame) {
            if (rid as usize) <= max {
                value_of[rid as usize] = s.score;
            }
        }
    }
    let painted = Grid::from_vec(w, h, seg.labels.iter().map(|&l| value_of[l as usize]).collect())?;
    gaussian_blur_2d(&painted, blur_sigma)
}
