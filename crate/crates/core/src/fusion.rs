//! Motion map, normalisation and linear combination of the three maps.

use alloc::vec;

use crate::error::{check_dims, Error, Result};
use crate::grid::Grid;

/// Binary map: 1 where motion magnitude holds up against its neighbourhood.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionMap {
    pub values: Grid<u8>,
}

impl MotionMap {
    pub fn to_f64(&self) -> Grid<f64> {
        self.values.map(|&v| v as f64)
    }
}

/// Default neighbourhood window: one eighth of the image width, at least 1.
pub fn default_window(width: usize) -> usize {
    (width / 8).max(1)
}

/// Bradley-style adaptive threshold. A pixel is kept when
/// `I_p >= (1 - T/100) * I_avg`, with `I_avg` the mean over the centred
/// `window x window` neighbourhood clipped to the image.
pub fn adaptive_threshold(magnitude: &Grid<f64>, t_percent: f64, window: usize) -> Result<MotionMap> {
    if !(0.0..=100.0).contains(&t_percent) {
        return Err(Error::param("threshold percentage must lie in [0, 100]"));
    }
    if window == 0 {
        return Err(Error::param("threshold window must be at least 1"));
    }
    let (w, h) = magnitude.dims();
    let retain = 1.0 - t_percent / 100.0;
    // Integral image with a zero row and column in front.
    let stride = w + 1;
    let mut integral = vec![0.0; stride * (h + 1)];
    for y in 0..h {
        let mut row = 0.0;
        for x in 0..w {
            row += magnitude[(x, y)];
            integral[(y + 1) * stride + x + 1] = integral[y * stride + x + 1] + row;
        }
    }
    let before = (window - 1) / 2;
    let after = window / 2;
    let values = Grid::from_fn(w, h, |x, y| {
        let x0 = x.saturating_sub(before);
        let y0 = y.saturating_sub(before);
        let x1 = (x + after + 1).min(w);
        let y1 = (y + after + 1).min(h);
        let sum = integral[y1 * stride + x1] - integral[y0 * stride + x1] - integral[y1 * stride + x0]
            + integral[y0 * stride + x0];
        let avg = sum / ((x1 - x0) * (y1 - y0)) as f64;
        u8::from(magnitude[(x, y)] >= retain * avg)
    });
    Ok(MotionMap { values })
}

/// `(v - min) / (max - min)`; a constant map becomes all zeros.
pub fn minmax_normalize(map: &Grid<f64>) -> Grid<f64> {
    let (lo, hi) = map
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if !(range > 0.0) {
        return map.map(|_| 0.0);
    }
    map.map(|&v| ((v - lo) / range).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionWeights {
    pub visual: f64,
    pub audio: f64,
    pub motion: f64,
}

impl Default for FusionWeights {
    fn default() -> Self {
        FusionWeights {
            visual: 1.0 / 3.0,
            audio: 1.0 / 3.0,
            motion: 1.0 / 3.0,
        }
    }
}

impl FusionWeights {
    pub fn new(visual: f64, audio: f64, motion: f64) -> Result<Self> {
        let w = FusionWeights { visual, audio, motion };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.visual, self.audio, self.motion];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::param("fusion weights must be finite and non-negative"));
        }
        if !(self.sum() > 0.0) {
            return Err(Error::param("fusion weights must not all be zero"));
        }
        Ok(())
    }

    pub fn sum(&self) -> f64 {
        self.visual + self.audio + self.motion
    }

    /// Weights with the audio term removed.
    pub fn without_audio(&self) -> Self {
        FusionWeights { audio: 0.0, ..*self }
    }
}

/// `(w_v V + w_a A + w_m M) / (w_v + w_a + w_m)`.
pub fn combine(visual: &Grid<f64>, audio: &Grid<f64>, motion: &Grid<f64>, w: &FusionWeights) -> Result<Grid<f64>> {
    w.validate()?;
    check_dims(visual.dims(), audio.dims())?;
    check_dims(visual.dims(), motion.dims())?;
    let total = w.sum();
    let data = visual
        .iter()
        .zip(audio.iter())
        .zip(motion.iter())
        .map(|((v, a), m)| {
            let out = (w.visual * v + w.audio * a + w.motion * m) / total;
            out.clamp(v.min(*a).min(*m), v.max(*a).max(*m))
        })
        .collect();
    Grid::from_vec(visual.width(), visual.height(), data)
}
