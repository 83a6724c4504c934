//! Truncated Gaussian smoothing with edge renormalisation.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Unnormalised Gaussian taps on `[-radius, radius]` with `radius = ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    (-radius..=radius)
        .map(|i| {
            let d = i as f64;
            (-(d * d) / (2.0 * sigma * sigma)).exp()
        })
        .collect()
}

fn convolve_line(input: &[f64], kernel: &[f64], out: &mut [f64]) {
    let radius = (kernel.len() / 2) as isize;
    let n = input.len() as isize;
    for (i, o) in out.iter_mut().enumerate() {
        let i = i as isize;
        let mut acc = 0.0;
        let mut weight = 0.0;
        let lo = (i - radius).max(0);
        let hi = (i + radius).min(n - 1);
        for j in lo..=hi {
            let k = kernel[(j - i + radius) as usize];
            acc += k * input[j as usize];
            weight += k;
        }
        *o = acc / weight;
    }
}

/// Smooth a series with a Gaussian of `sigma` samples. `sigma == 0` is the identity.
pub fn gaussian_smooth_1d(series: &[f64], sigma: f64) -> Result<Vec<f64>> {
    if !(sigma >= 0.0) {
        return Err(Error::param("sigma must be non-negative"));
    }
    if sigma == 0.0 || series.is_empty() {
        return Ok(series.to_vec());
    }
    let kernel = gaussian_kernel(sigma);
    let mut out = alloc::vec![0.0; series.len()];
    convolve_line(series, &kernel, &mut out);
    Ok(out)
}

/// Separable 2D Gaussian blur, renormalised at the borders (constants stay constant).
pub fn gaussian_blur_2d(grid: &Grid<f64>, sigma: f64) -> Result<Grid<f64>> {
    if !(sigma >= 0.0) {
        return Err(Error::param("sigma must be non-negative"));
    }
    if sigma == 0.0 || grid.is_empty() {
        return Ok(grid.clone());
    }
    let (w, h) = grid.dims();
    let kernel = gaussian_kernel(sigma);
    let mut rows = alloc::vec![0.0; w * h];
    for (src, dst) in grid.as_slice().chunks_exact(w).zip(rows.chunks_exact_mut(w)) {
        convolve_line(src, &kernel, dst);
    }
    let mut out = alloc::vec![0.0; w * h];
    let mut column = alloc::vec![0.0; h];
    let mut smoothed = alloc::vec![0.0; h];
    for x in 0..w {
        for y in 0..h {
            column[y] = rows[y * w + x];
        }
        convolve_line(&column, &kernel, &mut smoothed);
        for y in 0..h {
            out[y * w + x] = smoothed[y];
        }
    }
    Grid::from_vec(w, h, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn zero_sigma_is_identity() {
        let s = [1.0, 5.0, -2.0];
        assert_eq!(gaussian_smooth_1d(&s, 0.0).unwrap(), s.to_vec());
    }

    #[test]
    fn negative_sigma_rejected() {
        assert!(gaussian_smooth_1d(&[1.0], -1.0).is_err());
        assert!(gaussian_blur_2d(&Grid::new(2, 2), -0.5).is_err());
    }

    #[test]
    fn constant_series_unchanged() {
        let s = vec![3.25; 17];
        for v in gaussian_smooth_1d(&s, 2.0).unwrap() {
            assert!((v - 3.25).abs() < 1e-12);
        }
    }

    #[test]
    fn impulse_matches_direct_convolution() {
        // Direct oracle: full Gaussian taps evaluated independently.
        let mut s = vec![0.0; 21];
        s[10] = 1.0;
        let out = gaussian_smooth_1d(&s, 1.0).unwrap();
        let taps: Vec<f64> = (-3..=3).map(|i: i32| (-(i * i) as f64 / 2.0).exp()).collect();
        let total: f64 = taps.iter().sum();
        for (i, v) in out.iter().enumerate() {
            let d = i as i32 - 10;
            let expected = if d.abs() <= 3 { taps[(d + 3) as usize] / total } else { 0.0 };
            assert!((v - expected).abs() < 1e-9, "index {i}");
        }
        assert!((out[10] - 1.0 / total).abs() < 1e-9);
    }

    #[test]
    fn blur_keeps_constant_map_constant() {
        let g = Grid::filled(9, 5, 0.7);
        let b = gaussian_blur_2d(&g, 10.0).unwrap();
        assert!(b.iter().all(|v| (v - 0.7).abs() < 1e-12));
    }
}
