//! Saliency evaluation against eye fixations: AUC (Borji), KL divergence, NSS and CC.
//!
//! Metrics that are undefined for a frame (no fixations, constant maps) come back
//! as `None` and are left out of video averages.

use alloc::string::String;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dims, Error, Result};
use crate::grid::Grid;
use crate::media::{Fixation, FixationSet};
#[allow(unused_imports)]
use num_traits::Float;

/// Fixation density normalised to unit sum. `empty` maps are all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FixationDensityMap {
    pub values: Grid<f64>,
    pub empty: bool,
}

/// Sum of isotropic Gaussians at the fixation points, normalised to sum 1.
pub fn fixation_density(fixations: &[Fixation], width: usize, height: usize, sigma: f64) -> Result<FixationDensityMap> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::param("fixation density sigma must be positive"));
    }
    let mut values = Grid::filled(width, height, 0.0);
    if fixations.is_empty() {
        return Ok(FixationDensityMap { values, empty: true });
    }
    let two_s2 = 2.0 * sigma * sigma;
    // Separable: exp(-(dx^2+dy^2)/2s^2) = gx * gy.
    let mut gx = alloc::vec![0.0; width];
    let mut gy = alloc::vec![0.0; height];
    for f in fixations {
        for (x, g) in gx.iter_mut().enumerate() {
            *g = (-(x as f64 - f.x).powi(2) / two_s2).exp();
        }
        for (y, g) in gy.iter_mut().enumerate() {
            *g = (-(y as f64 - f.y).powi(2) / two_s2).exp();
        }
        for y in 0..height {
            for x in 0..width {
                values[(x, y)] += gx[x] * gy[y];
            }
        }
    }
    let total: f64 = values.iter().sum();
    if !(total > 0.0) {
        // Fixations far enough away that every tap underflows: fall back to the
        // nearest pixels.
        for f in fixations {
            let (x, y) = nearest_pixel(f, width, height);
            values[(x, y)] += 1.0;
        }
    }
    let total: f64 = values.iter().sum();
    for v in values.as_mut_slice() {
        *v /= total;
    }
    Ok(FixationDensityMap { values, empty: false })
}

fn nearest_pixel(f: &Fixation, width: usize, height: usize) -> (usize, usize) {
    let x = f.x.round().max(0.0).min((width - 1) as f64) as usize;
    let y = f.y.round().max(0.0).min((height - 1) as f64) as usize;
    (x, y)
}

/// Trapezoidal area under the ROC curve swept over every distinct score, with a
/// pixel counted as positive when its score is `>=` the threshold.
pub fn roc_auc(positives: &[f64], negatives: &[f64]) -> Option<f64> {
    if positives.is_empty() || negatives.is_empty() {
        return None;
    }
    let mut pos = positives.to_vec();
    let mut neg = negatives.to_vec();
    pos.sort_by(|a, b| b.total_cmp(a));
    neg.sort_by(|a, b| b.total_cmp(a));
    let (np, nn) = (pos.len() as f64, neg.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let (mut tpr, mut fpr) = (0.0, 0.0);
    let mut area = 0.0;
    while i < pos.len() || j < neg.len() {
        let t = match (pos.get(i), neg.get(j)) {
            (Some(&p), Some(&n)) => p.max(n),
            (Some(&p), None) => p,
            (None, Some(&n)) => n,
            (None, None) => unreachable!(),
        };
        while i < pos.len() && pos[i] >= t {
            i += 1;
        }
        while j < neg.len() && neg[j] >= t {
            j += 1;
        }
        let (ntpr, nfpr) = (i as f64 / np, j as f64 / nn);
        area += (nfpr - fpr) * (tpr + ntpr) / 2.0;
        tpr = ntpr;
        fpr = nfpr;
    }
    Some(area)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AucParams {
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for AucParams {
    fn default() -> Self {
        AucParams { repetitions: 10, seed: 0 }
    }
}

/// Positive and negative score samples for each repetition. Positives are the
/// saliency values at fixations (rounded to pixels); negatives are drawn uniformly
/// with replacement from the pixels no fixation lands on, as many as there are
/// fixations. `None` when there are no fixations or no free pixels.
pub fn auc_samples(sal: &Grid<f64>, fixations: &[Fixation], params: &AucParams) -> Result<Option<Vec<(Vec<f64>, Vec<f64>)>>> {
    if params.repetitions == 0 {
        return Err(Error::param("AUC needs at least one repetition"));
    }
    if fixations.is_empty() || sal.is_empty() {
        return Ok(None);
    }
    let (w, h) = sal.dims();
    let mut is_fix = alloc::vec![false; w * h];
    let positives: Vec<f64> = fixations
        .iter()
        .map(|f| {
            let (x, y) = nearest_pixel(f, w, h);
            is_fix[y * w + x] = true;
            sal[(x, y)]
        })
        .collect();
    let free: Vec<usize> = (0..w * h).filter(|&i| !is_fix[i]).collect();
    if free.is_empty() {
        return Ok(None);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let data = sal.as_slice();
    let samples = (0..params.repetitions)
        .map(|_| {
            let neg = (0..positives.len()).map(|_| data[free[rng.gen_range(0..free.len())]]).collect();
            (positives.clone(), neg)
        })
        .collect();
    Ok(Some(samples))
}

/// AUC-Borji: ROC area averaged over `repetitions` random negative draws.
pub fn auc(sal: &Grid<f64>, fixations: &[Fixation], params: &AucParams) -> Result<Option<f64>> {
    check_finite(sal)?;
    let Some(samples) = auc_samples(sal, fixations, params)? else {
        return Ok(None);
    };
    let total: f64 = samples.iter().filter_map(|(p, n)| roc_auc(p, n)).sum();
    Ok(Some(total / samples.len() as f64))
}

fn check_finite(g: &Grid<f64>) -> Result<()> {
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("saliency map has non-finite values"));
    }
    Ok(())
}

pub const KL_EPSILON: f64 = 1e-12;

fn regularised(values: &[f64], epsilon: f64) -> Vec<f64> {
    let sum: f64 = values.iter().sum();
    let n = values.len() as f64;
    let base: Vec<f64> = if sum > 0.0 {
        values.iter().map(|v| v / sum + epsilon).collect()
    } else {
        values.iter().map(|_| 1.0 / n + epsilon).collect()
    };
    let total: f64 = base.iter().sum();
    base.into_iter().map(|v| v / total).collect()
}

/// `sum_i F(i) ln(F(i) / S(i))` with both maps normalised to unit sum and
/// regularised by `epsilon`.
pub fn kl_divergence(sal: &Grid<f64>, fixmap: &FixationDensityMap, epsilon: f64) -> Result<Option<f64>> {
    check_dims(fixmap.values.dims(), sal.dims())?;
    check_finite(sal)?;
    if sal.iter().any(|&v| v < 0.0) {
        return Err(Error::input("saliency map has negative values"));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::param("KL epsilon must be non-negative"));
    }
    if fixmap.empty {
        return Ok(None);
    }
    let s = regularised(sal.as_slice(), epsilon);
    let f = regularised(fixmap.values.as_slice(), epsilon);
    let kl = f
        .iter()
        .zip(&s)
        .map(|(fi, si)| if *fi > 0.0 { fi * (fi / si).ln() } else { 0.0 })
        .sum::<f64>();
    Ok(Some(kl))
}

/// Population mean and standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Mean z-scored saliency at the fixations, sampled bilinearly.
pub fn nss(sal: &Grid<f64>, fixations: &[Fixation]) -> Result<Option<f64>> {
    check_finite(sal)?;
    if fixations.is_empty() || sal.is_empty() {
        return Ok(None);
    }
    let (mean, std) = mean_std(sal.as_slice());
    if !(std > 0.0) {
        return Ok(None);
    }
    let z = sal.map(|v| (v - mean) / std);
    let total: f64 = fixations.iter().map(|f| z.sample_bilinear(f.x, f.y)).sum();
    Ok(Some(total / fixations.len() as f64))
}

/// Pearson correlation with population statistics.
pub fn cc(sal: &Grid<f64>, fixmap: &FixationDensityMap) -> Result<Option<f64>> {
    check_dims(fixmap.values.dims(), sal.dims())?;
    check_finite(sal)?;
    if sal.is_empty() {
        return Ok(None);
    }
    let (ms, ss) = mean_std(sal.as_slice());
    let (mf, sf) = mean_std(fixmap.values.as_slice());
    if !(ss > 0.0) || !(sf > 0.0) {
        return Ok(None);
    }
    let n = sal.len() as f64;
    let cov = sal
        .iter()
        .zip(fixmap.values.iter())
        .map(|(a, b)| (a - ms) * (b - mf))
        .sum::<f64>()
        / n;
    Ok(Some((cov / (ss * sf)).clamp(-1.0, 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricParams {
    pub auc: AucParams,
    /// Fixation density sigma as a fraction of the frame width.
    pub density_sigma_frac: f64,
    pub kl_epsilon: f64,
    pub frame_limit: usize,
}

impl Default for MetricParams {
    fn default() -> Self {
        MetricParams {
            auc: AucParams::default(),
            density_sigma_frac: 0.04,
            kl_epsilon: KL_EPSILON,
            frame_limit: 300,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrameMetrics {
    pub frame: usize,
    pub auc: Option<f64>,
    pub kl: Option<f64>,
    pub nss: Option<f64>,
    pub cc: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricMeans {
    pub auc: Option<f64>,
    pub kl: Option<f64>,
    pub nss: Option<f64>,
    pub cc: Option<f64>,
}

impl MetricMeans {
    pub fn of(frames: &[FrameMetrics]) -> Self {
        fn mean(it: impl Iterator<Item = f64>) -> Option<f64> {
            let (s, n) = it.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
            (n > 0).then(|| s / n as f64)
        }
        MetricMeans {
            auc: mean(frames.iter().filter_map(|f| f.auc)),
            kl: mean(frames.iter().filter_map(|f| f.kl)),
            nss: mean(frames.iter().filter_map(|f| f.nss)),
            cc: mean(frames.iter().filter_map(|f| f.cc)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub frames: Vec<FrameMetrics>,
    pub mean: MetricMeans,
    pub diagnostic: Option<String>,
}

/// All four metrics for one frame. Frame `t` seeds AUC with `seed + t`.
pub fn evaluate_frame(sal: &Grid<f64>, fixations: &[Fixation], t: usize, params: &MetricParams) -> Result<FrameMetrics> {
    if fixations.is_empty() {
        return Ok(FrameMetrics {
            frame: t,
            ..Default::default()
        });
    }
    let (w, h) = sal.dims();
    let density = fixation_density(fixations, w, h, params.density_sigma_frac * w as f64)?;
    let auc_params = AucParams {
        seed: params.auc.seed.wrapping_add(t as u64),
        ..params.auc
    };
    Ok(FrameMetrics {
        frame: t,
        auc: auc(sal, fixations, &auc_params)?,
        kl: kl_divergence(sal, &density, params.kl_epsilon)?,
        nss: nss(sal, fixations)?,
        cc: cc(sal, &density)?,
    })
}

/// Frames `0..min(frame_limit, maps.len())`, averaged over defined values.
pub fn evaluate_video(maps: &[Grid<f64>], fixations: &FixationSet, params: &MetricParams) -> Result<MetricReport> {
    let n = maps.len().min(params.frame_limit);
    let frames = (0..n)
        .map(|t| evaluate_frame(&maps[t], fixations.frame(t), t, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(report_from_frames(frames))
}

pub fn report_from_frames(frames: Vec<FrameMetrics>) -> MetricReport {
    let mean = MetricMeans::of(&frames);
    let defined = frames
        .iter()
        .any(|f| f.auc.is_some() || f.kl.is_some() || f.nss.is_some() || f.cc.is_some());
    let diagnostic = (!defined).then(|| String::from("no frame has a defined metric (no fixations in range?)"));
    MetricReport { frames, mean, diagnostic }
}
