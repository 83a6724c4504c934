//! Region tracking by centroid distance and histogram cosine similarity, and the
//! per-track acceleration descriptor `m_i(t)`.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{check_dims, Error, Result};
use crate::flow::AccelerationField;
use crate::grid::Grid;
use crate::segmentation::{Region, SegmentationMap};
use crate::smooth::gaussian_smooth_1d;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerConfig {
    /// Search radius in pixels.
    pub search_radius: f64,
    /// Minimum cosine similarity (exclusive) for joining an existing track.
    pub cos_threshold: f64,
    /// Gaussian sigma (frames) applied to the acceleration series.
    pub smoothing_sigma: f64,
    /// Consecutive unassigned frames after which a track is retired.
    pub max_missed: usize,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            search_radius: 100.0,
            cos_threshold: 0.8,
            smoothing_sigma: 2.0,
            max_missed: 10,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.search_radius > 0.0) {
            return Err(Error::param("search radius must be positive"));
        }
        if !(self.cos_threshold > 0.0 && self.cos_threshold <= 1.0) {
            return Err(Error::param("cos threshold must lie in (0, 1]"));
        }
        if !(self.smoothing_sigma >= 0.0) {
            return Err(Error::param("smoothing sigma must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: u32,
    pub centroid: (f64, f64),
    pub histogram: Vec<f64>,
    /// Region label assigned in each processed frame.
    pub assignments: Vec<Option<u32>>,
    /// `m_i(t)` for each processed frame, 0 where unassigned.
    pub acceleration: Vec<f64>,
    pub active: bool,
    /// Frame at which the track was created.
    pub born: usize,
    /// First frame at which the track no longer counts as active.
    pub retired_at: Option<usize>,
    missed: usize,
}

impl Track {
    fn spawn(id: u32, region: &Region, frame: usize) -> Self {
        Track {
            id,
            centroid: region.centroid,
            histogram: region.histogram.clone(),
            assignments: vec![None; frame],
            acceleration: vec![0.0; frame],
            active: true,
            born: frame,
            retired_at: None,
            missed: 0,
        }
    }

    pub fn region_at(&self, frame: usize) -> Option<u32> {
        self.assignments.get(frame).copied().flatten()
    }

    /// Whether the track had been created and not yet retired in `frame`.
    pub fn active_at(&self, frame: usize) -> bool {
        frame >= self.born && frame < self.assignments.len() && self.retired_at.map_or(true, |r| frame < r)
    }
}

/// One accepted region-to-track decision, kept for auditing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assignment {
    pub frame: usize,
    pub region_id: u32,
    pub track_id: u32,
    /// `None` when the region started a new track.
    pub matched: Option<Match>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    pub distance: f64,
    pub cosine: f64,
}

pub fn centroid_distance(new: &Region, track: &Track) -> f64 {
    let dx = new.centroid.0 - track.centroid.0;
    let dy = new.centroid.1 - track.centroid.1;
    (dx * dx + dy * dy).sqrt()
}

/// Cosine of the angle between two histograms.
pub fn histogram_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::param("histograms differ in length"));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::param("zero-norm histogram"));
    }
    Ok(dot / (na * nb))
}

/// Mean per-pixel acceleration norm over one labelled region.
pub fn track_acceleration(seg: &SegmentationMap, region_id: u32, g: &AccelerationField) -> Result<f64> {
    check_dims(seg.dims(), g.gx.dims())?;
    let (mut sum, mut n) = (0.0, 0usize);
    for ((l, gx), gy) in seg.labels.iter().zip(g.gx.iter()).zip(g.gy.iter()) {
        if *l == region_id {
            sum += gx.hypot(*gy);
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::param("region has no pixels"));
    }
    Ok(sum / n as f64)
}

fn region_mean(region: &Region, values: &Grid<f64>) -> f64 {
    let sum: f64 = region.pixels.iter().map(|&(x, y)| values[(x, y)]).sum();
    sum / region.pixels.len() as f64
}

/// Gaussian-smoothed copy of a track's acceleration series.
pub fn smooth_descriptor(track: &Track, sigma: f64) -> Result<Track> {
    Ok(Track {
        acceleration: gaussian_smooth_1d(&track.acceleration, sigma)?,
        ..track.clone()
    })
}

/// Frame-sequential tracker state.
#[derive(Debug, Clone)]
pub struct Tracker {
    pub config: TrackerConfig,
    tracks: Vec<Track>,
    frame: usize,
    log: Vec<Assignment>,
}

impl Tracker {
    pub fn new(config: TrackerConfig) -> Result<Self> {
        config.validate()?;
        Ok(Tracker {
            config,
            tracks: Vec::new(),
            frame: 0,
            log: Vec::new(),
        })
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    pub fn into_tracks(self) -> Vec<Track> {
        self.tracks
    }

    pub fn frames_processed(&self) -> usize {
        self.frame
    }

    pub fn assignments(&self) -> &[Assignment] {
        &self.log
    }

    /// Assign this frame's regions to tracks, creating new tracks where needed.
    ///
    /// Every region names its best candidate (active track within the search radius
    /// with the highest cosine). Requests above the threshold are granted in
    /// descending cosine order, one region per track; everything else starts a track.
    /// Returns the track id chosen for each region, in input order.
    pub fn assign_regions(&mut self, regions: &[Region]) -> Result<Vec<u32>> {
        let t = self.frame;
        let mut requests = Vec::new();
        for (ri, region) in regions.iter().enumerate() {
            let mut best: Option<(usize, f64, f64)> = None;
            for (ti, track) in self.tracks.iter().enumerate().filter(|(_, tr)| tr.active) {
                let d = centroid_distance(region, track);
                if d > self.config.search_radius {
                    continue;
                }
                let c = histogram_similarity(&region.histogram, &track.histogram)?;
                if best.map_or(true, |(_, bc, _)| c > bc) {
                    best = Some((ti, c, d));
                }
            }
            if let Some((ti, c, d)) = best {
                if c > self.config.cos_threshold {
                    requests.push((ri, ti, c, d));
                }
            }
        }
        requests.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));

        let mut chosen: Vec<Option<u32>> = vec![None; regions.len()];
        let mut taken = vec![false; self.tracks.len()];
        for (ri, ti, cosine, distance) in requests {
            if taken[ti] {
                continue;
            }
            taken[ti] = true;
            let region = &regions[ri];
            let track = &mut self.tracks[ti];
            track.centroid = region.centroid;
            for (h, n) in track.histogram.iter_mut().zip(&region.histogram) {
                *h = 0.5 * (*h + n);
            }
            let total: f64 = track.histogram.iter().sum();
            if total > 0.0 {
                track.histogram.iter_mut().for_each(|h| *h /= total);
            }
            track.assignments.push(Some(region.id));
            track.missed = 0;
            chosen[ri] = Some(track.id);
            self.log.push(Assignment {
                frame: t,
                region_id: region.id,
                track_id: track.id,
                matched: Some(Match { distance, cosine }),
            });
        }
        for (ti, track) in self.tracks.iter_mut().enumerate() {
            if !taken[ti] {
                track.assignments.push(None);
                if track.active {
                    track.missed += 1;
                    if track.missed >= self.config.max_missed {
                        track.active = false;
                        track.retired_at = Some(t + 1);
                    }
                }
            }
        }
        for (ri, region) in regions.iter().enumerate() {
            if chosen[ri].is_some() {
                continue;
            }
            let id = self.tracks.len() as u32 + 1;
            let mut track = Track::spawn(id, region, t);
            track.assignments.push(Some(region.id));
            self.tracks.push(track);
            chosen[ri] = Some(id);
            self.log.push(Assignment {
                frame: t,
                region_id: region.id,
                track_id: id,
                matched: None,
            });
        }
        self.frame += 1;
        Ok(chosen.into_iter().map(|c| c.expect("every region assigned")).collect())
    }

    /// Assign regions and append `m_i(t)` for every track using the acceleration norm.
    pub fn step(&mut self, regions: &[Region], accel_norm: &Grid<f64>) -> Result<Vec<u32>> {
        let ids = self.assign_regions(regions)?;
        let t = self.frame - 1;
        for track in &mut self.tracks {
            let m = match track.region_at(t) {
                Some(rid) => regions
                    .iter()
                    .find(|r| r.id == rid)
                    .map(|r| region_mean(r, accel_norm))
                    .unwrap_or(0.0),
                None => 0.0,
            };
            track.acceleration.push(m);
        }
        Ok(ids)
    }

    /// Tracks with their acceleration series smoothed.
    pub fn smoothed_tracks(&self) -> Result<Vec<Track>> {
        self.tracks
            .iter()
            .map(|t| smooth_descriptor(t, self.config.smoothing_sigma))
            .collect()
    }
}
