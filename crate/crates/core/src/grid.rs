//! Row-major 2D grids and the image/map types built on them.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{check_dims, Error, Result};

/// A dense row-major grid, `data[y * width + x]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

/// Single-channel saliency map. Stored as `f32` so the `.f32` dump is lossless.
pub type SaliencyMap = Grid<f32>;

/// 8-bit RGB image.
pub type RgbImage = Grid<[u8; 3]>;

impl<T: Clone> Grid<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Grid {
            width,
            height,
            data: vec![value; width * height],
        }
    }
}

impl<T: Clone + Default> Grid<T> {
    pub fn new(width: usize, height: usize) -> Self {
        Self::filled(width, height, T::default())
    }
}

impl<T> Grid<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::param(alloc::format!(
                "grid data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Grid {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Grid {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.data[y * self.width + x]
    }

    /// Edge-replicating access for signed coordinates.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> &T {
        let xc = x.clamp(0, self.width as isize - 1) as usize;
        let yc = y.clamp(0, self.height as isize - 1) as usize;
        &self.data[yc * self.width + xc]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn zip_map<U, V>(&self, other: &Grid<U>, mut f: impl FnMut(&T, &U) -> V) -> Result<Grid<V>> {
        check_dims(self.dims(), other.dims())?;
        Ok(Grid {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn iter(&self) -> core::slice::Iter<'_, T> {
        self.data.iter()
    }
}

impl<T> Index<(usize, usize)> for Grid<T> {
    type Output = T;
    #[inline]
    fn index(&self, (x, y): (usize, usize)) -> &T {
        &self.data[y * self.width + x]
    }
}

impl<T> IndexMut<(usize, usize)> for Grid<T> {
    #[inline]
    fn index_mut(&mut self, (x, y): (usize, usize)) -> &mut T {
        &mut self.data[y * self.width + x]
    }
}

impl Grid<f64> {
    /// Bilinear sample with edge clamping; pixel centres sit on integer coordinates.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        #[allow(unused_imports)]
        use num_traits::Float;
        let xmax = (self.width - 1) as f64;
        let ymax = (self.height - 1) as f64;
        let x = x.max(0.0).min(xmax);
        let y = y.max(0.0).min(ymax);
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let top = self[(x0, y0)] * (1.0 - fx) + self[(x1, y0)] * fx;
        let bottom = self[(x0, y1)] * (1.0 - fx) + self[(x1, y1)] * fx;
        top * (1.0 - fy) + bottom * fy
    }

    pub fn to_saliency(&self) -> SaliencyMap {
        self.map(|&v| v as f32)
    }
}

impl SaliencyMap {
    pub fn to_f64(&self) -> Grid<f64> {
        self.map(|&v| v as f64)
    }
}

/// BT.601 luma of an RGB image, on a 0..255 scale.
pub fn luma(image: &RgbImage) -> Grid<f64> {
    image.map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_vec_rejects_bad_length() {
        assert!(Grid::from_vec(2, 2, vec![0u8; 3]).is_err());
    }

    #[test]
    fn bilinear_matches_pixels_and_midpoints() {
        let g = Grid::from_vec(2, 2, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(g.sample_bilinear(1.0, 1.0), 3.0);
        assert_eq!(g.sample_bilinear(0.5, 0.5), 1.5);
        assert_eq!(g.sample_bilinear(5.0, -3.0), 1.0);
    }

    #[test]
    fn luma_of_white_is_255() {
        let img = RgbImage::filled(1, 1, [255, 255, 255]);
        assert!((luma(&img)[(0, 0)] - 255.0).abs() < 1e-9);
    }
}
