//! Dense optical flow (coarse-to-fine Horn–Schunck) and the quantities derived from it.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{check_dims, Error, Result};
use crate::grid::{luma, Grid, RgbImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowDirection {
    /// Displacement of frame t pixels toward t+1.
    Forward,
    /// Displacement of frame t pixels toward t-1.
    Backward,
    /// Mean velocity toward t+1.
    Mean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    pub u: Grid<f64>,
    pub v: Grid<f64>,
    pub direction: FlowDirection,
    pub frame_index: usize,
}

impl FlowField {
    pub fn zeros(width: usize, height: usize, direction: FlowDirection, frame_index: usize) -> Self {
        FlowField {
            u: Grid::new(width, height),
            v: Grid::new(width, height),
            direction,
            frame_index,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.u.dims()
    }

    pub fn magnitude(&self) -> Grid<f64> {
        self.u.zip_map(&self.v, |a, b| a.hypot(*b)).expect("u and v share dims")
    }

    /// The same field with both components negated.
    pub fn negated(&self) -> FlowField {
        FlowField {
            u: self.u.map(|x| -x),
            v: self.v.map(|x| -x),
            ..self.clone()
        }
    }
}

/// Per-pixel acceleration `g = F+ + F-`.
#[derive(Debug, Clone, PartialEq)]
pub struct AccelerationField {
    pub gx: Grid<f64>,
    pub gy: Grid<f64>,
}

impl AccelerationField {
    pub fn zeros(width: usize, height: usize) -> Self {
        AccelerationField {
            gx: Grid::new(width, height),
            gy: Grid::new(width, height),
        }
    }

    pub fn norm(&self) -> Grid<f64> {
        self.gx.zip_map(&self.gy, |a, b| a.hypot(*b)).expect("gx and gy share dims")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HornSchunckConfig {
    /// Smoothness weight on a 0..255 intensity scale.
    pub alpha: f64,
    pub iterations: usize,
    pub levels: usize,
}

impl Default for HornSchunckConfig {
    fn default() -> Self {
        HornSchunckConfig {
            alpha: 15.0,
            iterations: 100,
            levels: 3,
        }
    }
}

fn downsample(img: &Grid<f64>) -> Grid<f64> {
    let (w, h) = img.dims();
    let (nw, nh) = (w.div_ceil(2), h.div_ceil(2));
    Grid::from_fn(nw, nh, |x, y| {
        let mut sum = 0.0;
        let mut n = 0.0;
        for sy in 2 * y..(2 * y + 2).min(h) {
            for sx in 2 * x..(2 * x + 2).min(w) {
                sum += img[(sx, sy)];
                n += 1.0;
            }
        }
        sum / n
    })
}

/// Central-difference gradients with replicated edges.
fn gradients(img: &Grid<f64>) -> (Grid<f64>, Grid<f64>) {
    let (w, h) = img.dims();
    let gx = Grid::from_fn(w, h, |x, y| {
        let (x, y) = (x as isize, y as isize);
        0.5 * (img.get_clamped(x + 1, y) - img.get_clamped(x - 1, y))
    });
    let gy = Grid::from_fn(w, h, |x, y| {
        let (x, y) = (x as isize, y as isize);
        0.5 * (img.get_clamped(x, y + 1) - img.get_clamped(x, y - 1))
    });
    (gx, gy)
}

/// Horn–Schunck neighbourhood average (1/6 edge neighbours, 1/12 diagonals).
fn neighbour_average(f: &Grid<f64>, x: usize, y: usize) -> f64 {
    let (x, y) = (x as isize, y as isize);
    let edge = f.get_clamped(x - 1, y) + f.get_clamped(x + 1, y) + f.get_clamped(x, y - 1) + f.get_clamped(x, y + 1);
    let diag = f.get_clamped(x - 1, y - 1)
        + f.get_clamped(x + 1, y - 1)
        + f.get_clamped(x - 1, y + 1)
        + f.get_clamped(x + 1, y + 1);
    edge / 6.0 + diag / 12.0
}

/// Refine `(u, v)` on one pyramid level by linearising around the current estimate.
fn refine_level(src: &Grid<f64>, dst: &Grid<f64>, u: &mut Grid<f64>, v: &mut Grid<f64>, cfg: &HornSchunckConfig) {
    let (w, h) = src.dims();
    let warped = Grid::from_fn(w, h, |x, y| dst.sample_bilinear(x as f64 + u[(x, y)], y as f64 + v[(x, y)]));
    let (sx, sy) = gradients(src);
    let (wx, wy) = gradients(&warped);
    // Pixels carried outside the frame have no brightness constraint.
    let inside = Grid::from_fn(w, h, |x, y| {
        let (tx, ty) = (x as f64 + u[(x, y)], y as f64 + v[(x, y)]);
        tx >= 0.0 && ty >= 0.0 && tx <= (w - 1) as f64 && ty <= (h - 1) as f64
    });
    let keep = |g: Grid<f64>| g.zip_map(&inside, |&a, &ok| if ok { a } else { 0.0 }).expect("same dims");
    let ix = keep(sx.zip_map(&wx, |a, b| 0.5 * (a + b)).expect("same dims"));
    let iy = keep(sy.zip_map(&wy, |a, b| 0.5 * (a + b)).expect("same dims"));
    let it = keep(warped.zip_map(src, |a, b| a - b).expect("same dims"));
    let u0 = u.clone();
    let v0 = v.clone();
    let alpha2 = cfg.alpha * cfg.alpha;
    let mut next_u = u.clone();
    let mut next_v = v.clone();
    for _ in 0..cfg.iterations {
        for y in 0..h {
            for x in 0..w {
                let ub = neighbour_average(u, x, y);
                let vb = neighbour_average(v, x, y);
                let gx = ix[(x, y)];
                let gy = iy[(x, y)];
                let residual = gx * (ub - u0[(x, y)]) + gy * (vb - v0[(x, y)]) + it[(x, y)];
                let k = residual / (alpha2 + gx * gx + gy * gy);
                next_u[(x, y)] = ub - gx * k;
                next_v[(x, y)] = vb - gy * k;
            }
        }
        core::mem::swap(u, &mut next_u);
        core::mem::swap(v, &mut next_v);
    }
}

fn upsample_flow(flow: &Grid<f64>, width: usize, height: usize) -> Grid<f64> {
    let (fw, fh) = flow.dims();
    let sx = fw as f64 / width as f64;
    let sy = fh as f64 / height as f64;
    Grid::from_fn(width, height, |x, y| {
        let cx = (x as f64 + 0.5) * sx - 0.5;
        let cy = (y as f64 + 0.5) * sy - 0.5;
        flow.sample_bilinear(cx, cy) / sx
    })
}

/// Displacement field carrying each pixel of `src` to its position in `dst`.
pub fn dense_flow_luma(src: &Grid<f64>, dst: &Grid<f64>, cfg: &HornSchunckConfig) -> Result<(Grid<f64>, Grid<f64>)> {
    check_dims(src.dims(), dst.dims())?;
    if cfg.levels == 0 || !(cfg.alpha > 0.0) {
        return Err(Error::param("Horn-Schunck needs levels >= 1 and alpha > 0"));
    }
    let mut src_pyr = alloc::vec![src.clone()];
    let mut dst_pyr = alloc::vec![dst.clone()];
    for _ in 1..cfg.levels {
        let s = downsample(src_pyr.last().unwrap());
        let d = downsample(dst_pyr.last().unwrap());
        src_pyr.push(s);
        dst_pyr.push(d);
    }
    let (cw, ch) = src_pyr.last().unwrap().dims();
    let mut u = Grid::new(cw, ch);
    let mut v = Grid::new(cw, ch);
    for level in (0..cfg.levels).rev() {
        let (lw, lh) = src_pyr[level].dims();
        if u.dims() != (lw, lh) {
            u = upsample_flow(&u, lw, lh);
            v = upsample_flow(&v, lw, lh);
        }
        refine_level(&src_pyr[level], &dst_pyr[level], &mut u, &mut v, cfg);
    }
    Ok((u, v))
}

/// Dense flow between two RGB frames, computed on BT.601 luma.
pub fn dense_flow(
    src: &RgbImage,
    dst: &RgbImage,
    cfg: &HornSchunckConfig,
    direction: FlowDirection,
    frame_index: usize,
) -> Result<FlowField> {
    check_dims(src.dims(), dst.dims())?;
    let (u, v) = dense_flow_luma(&luma(src), &luma(dst), cfg)?;
    Ok(FlowField {
        u,
        v,
        direction,
        frame_index,
    })
}

/// `(F+ - F-) / 2`: both flows expressed as velocity toward t+1, then averaged.
pub fn mean_velocity_flow(fwd: &FlowField, bwd: &FlowField) -> Result<FlowField> {
    check_dims(fwd.dims(), bwd.dims())?;
    if fwd.frame_index != bwd.frame_index {
        return Err(Error::param("forward and backward flows belong to different frames"));
    }
    Ok(FlowField {
        u: fwd.u.zip_map(&bwd.u, |a, b| 0.5 * (a - b))?,
        v: fwd.v.zip_map(&bwd.v, |a, b| 0.5 * (a - b))?,
        direction: FlowDirection::Mean,
        frame_index: fwd.frame_index,
    })
}

/// `g = F+ + F-`, with the backward flow in its native toward-(t-1) sign.
pub fn acceleration_field(fwd: &FlowField, bwd: &FlowField) -> Result<AccelerationField> {
    check_dims(fwd.dims(), bwd.dims())?;
    Ok(AccelerationField {
        gx: fwd.u.zip_map(&bwd.u, |a, b| a + b)?,
        gy: fwd.v.zip_map(&bwd.v, |a, b| a + b)?,
    })
}

const WHEEL_SEGMENTS: [usize; 6] = [15, 6, 4, 11, 13, 6];

/// The standard 55-entry optical-flow colour wheel (red-yellow-green-cyan-blue-magenta).
pub fn color_wheel() -> Vec<[f64; 3]> {
    let [ry, yg, gc, cb, bm, mr] = WHEEL_SEGMENTS;
    let mut wheel = Vec::with_capacity(55);
    let frac = |i: usize, n: usize| 255.0 * i as f64 / n as f64;
    for i in 0..ry {
        wheel.push([255.0, frac(i, ry).floor(), 0.0]);
    }
    for i in 0..yg {
        wheel.push([255.0 - frac(i, yg).floor(), 255.0, 0.0]);
    }
    for i in 0..gc {
        wheel.push([0.0, 255.0, frac(i, gc).floor()]);
    }
    for i in 0..cb {
        wheel.push([0.0, 255.0 - frac(i, cb).floor(), 255.0]);
    }
    for i in 0..bm {
        wheel.push([frac(i, bm).floor(), 0.0, 255.0]);
    }
    for i in 0..mr {
        wheel.push([255.0, 0.0, 255.0 - frac(i, mr).floor()]);
    }
    wheel
}

/// Nearest-rank 99th percentile of the flow magnitude.
pub fn auto_max_magnitude(flow: &FlowField) -> f64 {
    let mut mags: Vec<f64> = flow.magnitude().into_vec();
    if mags.is_empty() {
        return 0.0;
    }
    mags.sort_by(f64::total_cmp);
    let rank = ((0.99 * mags.len() as f64).ceil() as usize).clamp(1, mags.len());
    mags[rank - 1]
}

/// Encode flow angle as hue and `min(1, |flow| / max_mag)` as saturation.
///
/// `max_mag = None` uses the 99th-percentile magnitude. Zero flow is white.
pub fn flow_to_color(flow: &FlowField, max_mag: Option<f64>) -> RgbImage {
    let scale = max_mag.unwrap_or_else(|| auto_max_magnitude(flow));
    let (w, h) = flow.dims();
    if !(scale > 0.0) {
        return RgbImage::filled(w, h, [255, 255, 255]);
    }
    let wheel = color_wheel();
    let ncols = wheel.len();
    Grid::from_fn(w, h, |x, y| {
        let (u, v) = (flow.u[(x, y)], flow.v[(x, y)]);
        let rad = (u.hypot(v) / scale).min(1.0);
        let angle = (-v).atan2(-u) / PI;
        let fk = (angle + 1.0) / 2.0 * (ncols - 1) as f64;
        let k0 = (fk.floor() as usize).min(ncols - 1);
        let k1 = (k0 + 1) % ncols;
        let f = fk - k0 as f64;
        let mut out = [0u8; 3];
        for c in 0..3 {
            let col = ((1.0 - f) * wheel[k0][c] + f * wheel[k1][c]) / 255.0;
            let col = 1.0 - rad * (1.0 - col);
            out[c] = (255.0 * col).round() as u8;
        }
        out
    })
}
