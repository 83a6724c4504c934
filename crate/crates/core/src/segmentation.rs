//! Moving-region segmentation of colour-coded flow images.
//!
//! Mean shift filtering in the joint (x, y, L*u*v*) domain, connected-component
//! labelling of the converged modes, greedy ΔE merging of adjacent regions, and
//! removal of regions below a minimum size.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::color::{delta_e76, rgb_to_hsv, rgb_to_lab, rgb_to_luv};
use crate::error::{check_dims, Error, Result};
use crate::grid::{Grid, RgbImage};

/// Label map; 0 is background, positive labels are regions.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationMap {
    pub labels: Grid<u32>,
}

impl SegmentationMap {
    pub fn new(labels: Grid<u32>) -> Self {
        SegmentationMap { labels }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.labels.dims()
    }

    /// Sorted distinct positive labels.
    pub fn region_ids(&self) -> Vec<u32> {
        let set: BTreeSet<u32> = self.labels.iter().copied().filter(|&l| l > 0).collect();
        set.into_iter().collect()
    }

    pub fn region_count(&self) -> usize {
        self.region_ids().len()
    }

    /// Pixel count per label, indexed by label (index 0 is background).
    pub fn sizes(&self) -> Vec<usize> {
        let max = self.labels.iter().copied().max().unwrap_or(0) as usize;
        let mut sizes = vec![0usize; max + 1];
        for &l in self.labels.iter() {
            sizes[l as usize] += 1;
        }
        sizes
    }

    /// Renumber positive labels to `1..=k` preserving their relative order.
    pub fn compacted(&self) -> SegmentationMap {
        let ids = self.region_ids();
        let max = ids.last().copied().unwrap_or(0) as usize;
        let mut remap = vec![0u32; max + 1];
        for (i, &id) in ids.iter().enumerate() {
            remap[id as usize] = i as u32 + 1;
        }
        SegmentationMap {
            labels: self.labels.map(|&l| remap[l as usize]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanShiftParams {
    /// Spatial bandwidth in pixels.
    pub spatial: f64,
    /// Range bandwidth in L*u*v* units.
    pub range: f64,
    pub max_iterations: usize,
}

impl Default for MeanShiftParams {
    fn default() -> Self {
        MeanShiftParams {
            spatial: 8.0,
            range: 8.0,
            max_iterations: 20,
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

fn range_dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

/// Mean shift filtering: the converged range value (L*u*v*) of every pixel.
pub fn mean_shift_filter(image: &RgbImage, params: &MeanShiftParams) -> Grid<[f64; 3]> {
    let (w, h) = image.dims();
    let luv = image.map(|&p| rgb_to_luv(p));
    let hs = params.spatial;
    let hr2 = params.range * params.range;
    let radius = hs.ceil() as isize;
    Grid::from_fn(w, h, |x, y| {
        let mut px = x as f64;
        let mut py = y as f64;
        let mut color = luv[(x, y)];
        for _ in 0..params.max_iterations {
            let cx = px.round() as isize;
            let cy = py.round() as isize;
            let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
            let mut sc = [0.0; 3];
            for qy in (cy - radius).max(0)..=(cy + radius).min(h as isize - 1) {
                for qx in (cx - radius).max(0)..=(cx + radius).min(w as isize - 1) {
                    let dx = qx as f64 - px;
                    let dy = qy as f64 - py;
                    if dx * dx + dy * dy > hs * hs {
                        continue;
                    }
                    let c = luv[(qx as usize, qy as usize)];
                    if range_dist2(&c, &color) > hr2 {
                        continue;
                    }
                    sx += qx as f64;
                    sy += qy as f64;
                    sc[0] += c[0];
                    sc[1] += c[1];
                    sc[2] += c[2];
                    n += 1.0;
                }
            }
            if n == 0.0 {
                break;
            }
            let nx = sx / n;
            let ny = sy / n;
            let nc = [sc[0] / n, sc[1] / n, sc[2] / n];
            let shift = ((nx - px).powi(2) + (ny - py).powi(2)) / (hs * hs) + range_dist2(&nc, &color) / hr2;
            px = nx;
            py = ny;
            color = nc;
            if shift < 1e-4 {
                break;
            }
        }
        color
    })
}

/// Mean shift segmentation: 4-connected pixels whose modes lie within half the range
/// bandwidth of each other share a label. Labels are `1..=k` in raster order.
pub fn mean_shift_segment(image: &RgbImage, params: &MeanShiftParams) -> SegmentationMap {
    let (w, h) = image.dims();
    let modes = mean_shift_filter(image, params);
    let join2 = (params.range / 2.0).powi(2);
    let mut uf = UnionFind::new(w * h);
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w && range_dist2(&modes[(x, y)], &modes[(x + 1, y)]) <= join2 {
                uf.union(i, i + 1);
            }
            if y + 1 < h && range_dist2(&modes[(x, y)], &modes[(x, y + 1)]) <= join2 {
                uf.union(i, i + w);
            }
        }
    }
    let mut root_label = vec![0u32; w * h];
    let mut next = 0u32;
    let labels = Grid::from_fn(w, h, |x, y| {
        let r = uf.find(y * w + x);
        if root_label[r] == 0 {
            next += 1;
            root_label[r] = next;
        }
        root_label[r]
    });
    SegmentationMap { labels }
}

fn adjacent_pairs(labels: &Grid<u32>) -> BTreeSet<(u32, u32)> {
    let (w, h) = labels.dims();
    let mut pairs = BTreeSet::new();
    let mut add = |a: u32, b: u32| {
        if a != 0 && b != 0 && a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    };
    for y in 0..h {
        for x in 0..w {
            let l = labels[(x, y)];
            if x + 1 < w {
                add(l, labels[(x + 1, y)]);
            }
            if y + 1 < h {
                add(l, labels[(x, y + 1)]);
            }
        }
    }
    pairs
}

/// Merge adjacent regions whose mean L*a*b* colours differ by less than
/// `delta_e_threshold` (CIE76), smallest difference first, until no pair qualifies.
pub fn merge_regions(seg: &SegmentationMap, image: &RgbImage, delta_e_threshold: f64) -> Result<SegmentationMap> {
    check_dims(seg.dims(), image.dims())?;
    if !(delta_e_threshold > 0.0) {
        return Err(Error::param("delta E threshold must be positive"));
    }
    let max = seg.labels.iter().copied().max().unwrap_or(0) as usize;
    let mut sums = vec![[0.0f64; 3]; max + 1];
    let mut counts = vec![0.0f64; max + 1];
    for (l, p) in seg.labels.iter().zip(image.iter()) {
        if *l == 0 {
            continue;
        }
        let lab = rgb_to_lab(*p);
        let s = &mut sums[*l as usize];
        s[0] += lab[0];
        s[1] += lab[1];
        s[2] += lab[2];
        counts[*l as usize] += 1.0;
    }
    let mean = |sums: &[[f64; 3]], counts: &[f64], l: u32| {
        let s = sums[l as usize];
        let n = counts[l as usize];
        [s[0] / n, s[1] / n, s[2] / n]
    };
    let mut pairs = adjacent_pairs(&seg.labels);
    // parent[l] = label l was merged into.
    let mut parent: Vec<u32> = (0..=max as u32).collect();
    loop {
        let best = pairs
            .iter()
            .map(|&(a, b)| (delta_e76(mean(&sums, &counts, a), mean(&sums, &counts, b)), a, b))
            .filter(|(d, _, _)| *d < delta_e_threshold)
            .min_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
        let Some((_, keep, gone)) = best else { break };
        parent[gone as usize] = keep;
        let g = sums[gone as usize];
        let s = &mut sums[keep as usize];
        s[0] += g[0];
        s[1] += g[1];
        s[2] += g[2];
        counts[keep as usize] += counts[gone as usize];
        pairs = pairs
            .into_iter()
            .filter_map(|(a, b)| {
                let a = if a == gone { keep } else { a };
                let b = if b == gone { keep } else { b };
                (a != b).then(|| (a.min(b), a.max(b)))
            })
            .collect();
    }
    let resolve = |mut l: u32| {
        while parent[l as usize] != l {
            l = parent[l as usize];
        }
        l
    };
    let labels = seg.labels.map(|&l| if l == 0 { 0 } else { resolve(l) });
    Ok(SegmentationMap { labels }.compacted())
}

/// Send regions smaller than `min_pixels` to background and compact the rest.
pub fn filter_small(seg: &SegmentationMap, min_pixels: usize) -> SegmentationMap {
    let sizes = seg.sizes();
    SegmentationMap {
        labels: seg
            .labels
            .map(|&l| if l != 0 && sizes[l as usize] < min_pixels { 0 } else { l }),
    }
    .compacted()
}

/// Send regions whose mean `motion` (flow magnitude) is below `min_mean_motion`
/// to background. Used to discard the static backdrop of the flow image.
pub fn drop_static_regions(seg: &SegmentationMap, motion: &Grid<f64>, min_mean_motion: f64) -> Result<SegmentationMap> {
    check_dims(seg.dims(), motion.dims())?;
    let max = seg.labels.iter().copied().max().unwrap_or(0) as usize;
    let mut sum = vec![0.0; max + 1];
    let mut count = vec![0usize; max + 1];
    for (l, m) in seg.labels.iter().zip(motion.iter()) {
        sum[*l as usize] += m;
        count[*l as usize] += 1;
    }
    Ok(SegmentationMap {
        labels: seg.labels.map(|&l| {
            if l != 0 && sum[l as usize] / (count[l as usize] as f64) < min_mean_motion {
                0
            } else {
                l
            }
        }),
    }
    .compacted())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistogramSpace {
    Luv,
    Hsv,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramConfig {
    pub space: HistogramSpace,
    /// Bins per channel; the histogram has `bins^3` cells.
    pub bins: usize,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        HistogramConfig {
            space: HistogramSpace::Luv,
            bins: 8,
        }
    }
}

impl HistogramConfig {
    fn bin_index(&self, p: [u8; 3]) -> usize {
        let (c, ranges) = match self.space {
            HistogramSpace::Luv => (rgb_to_luv(p), [(0.0, 100.0), (-84.0, 176.0), (-135.0, 108.0)]),
            HistogramSpace::Hsv => (rgb_to_hsv(p), [(0.0, 360.0), (0.0, 1.0), (0.0, 1.0)]),
        };
        let b = self.bins;
        let idx = |v: f64, (lo, hi): (f64, f64)| {
            let t = ((v - lo) / (hi - lo) * b as f64).floor();
            (t.max(0.0) as usize).min(b - 1)
        };
        (idx(c[0], ranges[0]) * b + idx(c[1], ranges[1])) * b + idx(c[2], ranges[2])
    }
}

/// A segmented region with its appearance descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub id: u32,
    pub pixels: Vec<(usize, usize)>,
    /// (x, y) mean of pixel coordinates.
    pub centroid: (f64, f64),
    /// L1-normalised colour histogram of the source frame over the region.
    pub histogram: Vec<f64>,
}

/// One `Region` per positive label, in ascending label order.
pub fn extract_regions(seg: &SegmentationMap, frame: &RgbImage, hist: &HistogramConfig) -> Result<Vec<Region>> {
    check_dims(seg.dims(), frame.dims())?;
    if hist.bins == 0 {
        return Err(Error::param("histogram needs at least one bin per channel"));
    }
    let ids = seg.region_ids();
    let max = ids.last().copied().unwrap_or(0) as usize;
    let mut slot = vec![usize::MAX; max + 1];
    let mut regions: Vec<Region> = ids
        .iter()
        .enumerate()
        .map(|(i, &id)| {
            slot[id as usize] = i;
            Region {
                id,
                pixels: Vec::new(),
                centroid: (0.0, 0.0),
                histogram: vec![0.0; hist.bins.pow(3)],
            }
        })
        .collect();
    let (w, h) = seg.dims();
    for y in 0..h {
        for x in 0..w {
            let l = seg.labels[(x, y)];
            if l == 0 {
                continue;
            }
            let r = &mut regions[slot[l as usize]];
            r.pixels.push((x, y));
            r.histogram[hist.bin_index(frame[(x, y)])] += 1.0;
        }
    }
    for r in &mut regions {
        let n = r.pixels.len() as f64;
        let (sx, sy) = r
            .pixels
            .iter()
            .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x as f64, b + y as f64));
        r.centroid = (sx / n, sy / n);
        r.histogram.iter_mut().for_each(|v| *v /= n);
    }
    Ok(regions)
}
