//! Graph-based visual saliency.
//!
//! Each feature map becomes a fully connected Markov chain whose edge weights combine
//! value dissimilarity `|log(M(i)/M(j))|` with a Gaussian distance falloff. The
//! equilibrium of that chain is the activation map; a second chain weighted by the
//! activation itself concentrates the mass. Concentrated maps of all channels are
//! summed and upsampled to frame resolution.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::flow::FlowField;
use crate::grid::{luma, Grid, RgbImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Intensity,
    Color,
    Orientation,
    Flicker,
    Motion,
}

pub const CHANNELS: [Channel; 5] = [
    Channel::Intensity,
    Channel::Color,
    Channel::Orientation,
    Channel::Flicker,
    Channel::Motion,
];

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub channel: Channel,
    pub values: Grid<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbvsParams {
    /// Gaussian falloff sigma as a fraction of the feature-map width.
    pub sigma_frac: f64,
    /// Minimum downsampling factor from frame to feature map.
    pub downsample: usize,
    /// Largest feature map, in nodes (width, height).
    pub max_nodes: (usize, usize),
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for GbvsParams {
    fn default() -> Self {
        GbvsParams {
            sigma_frac: 0.15,
            downsample: 4,
            max_nodes: (64, 48),
            tolerance: 1e-6,
            max_iterations: 10_000,
        }
    }
}

impl GbvsParams {
    /// Downsampling factor that keeps the node grid within `max_nodes`.
    pub fn factor_for(&self, width: usize, height: usize) -> usize {
        self.downsample
            .max(1)
            .max(width.div_ceil(self.max_nodes.0.max(1)))
            .max(height.div_ceil(self.max_nodes.1.max(1)))
    }
}

/// Area-average downsampling by an integer factor; partial edge blocks are averaged
/// over the pixels they contain.
pub fn downsample_area(grid: &Grid<f64>, factor: usize) -> Grid<f64> {
    let (w, h) = grid.dims();
    let (nw, nh) = (w.div_ceil(factor), h.div_ceil(factor));
    Grid::from_fn(nw, nh, |x, y| {
        let mut sum = 0.0;
        let mut n = 0.0;
        for sy in y * factor..((y + 1) * factor).min(h) {
            for sx in x * factor..((x + 1) * factor).min(w) {
                sum += grid[(sx, sy)];
                n += 1.0;
            }
        }
        sum / n
    })
}

/// Even/odd Gabor pair at orientation `theta` (radians). The even kernel is made
/// zero-mean so flat images give no response.
pub fn gabor_kernels(theta: f64) -> (Vec<f64>, Vec<f64>, usize) {
    const SIGMA: f64 = 2.0;
    const WAVELENGTH: f64 = 6.0;
    const ASPECT: f64 = 0.5;
    let radius = 6usize;
    let size = 2 * radius + 1;
    let (s, c) = theta.sin_cos();
    let mut even = Vec::with_capacity(size * size);
    let mut odd = Vec::with_capacity(size * size);
    let mut envelope = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            let dx = x as f64 - radius as f64;
            let dy = y as f64 - radius as f64;
            let xr = dx * c + dy * s;
            let yr = -dx * s + dy * c;
            let env = (-(xr * xr + ASPECT * ASPECT * yr * yr) / (2.0 * SIGMA * SIGMA)).exp();
            let phase = 2.0 * PI * xr / WAVELENGTH;
            envelope.push(env);
            even.push(env * phase.cos());
            odd.push(env * phase.sin());
        }
    }
    let env_sum: f64 = envelope.iter().sum();
    let even_mean = even.iter().sum::<f64>() / env_sum;
    for (e, env) in even.iter_mut().zip(&envelope) {
        *e -= even_mean * env;
    }
    (even, odd, radius)
}

fn convolve_replicate(img: &Grid<f64>, kernel: &[f64], radius: usize) -> Grid<f64> {
    let size = 2 * radius + 1;
    let r = radius as isize;
    Grid::from_fn(img.width(), img.height(), |x, y| {
        let mut acc = 0.0;
        for ky in 0..size {
            for kx in 0..size {
                let sx = x as isize + kx as isize - r;
                let sy = y as isize + ky as isize - r;
                acc += kernel[ky * size + kx] * img.get_clamped(sx, sy);
            }
        }
        acc
    })
}

/// Gabor energy `sqrt(even^2 + odd^2)` of a luma image at `theta`.
pub fn gabor_energy(img: &Grid<f64>, theta: f64) -> Grid<f64> {
    let (even, odd, radius) = gabor_kernels(theta);
    let e = convolve_replicate(img, &even, radius);
    let o = convolve_replicate(img, &odd, radius);
    e.zip_map(&o, |a, b| a.hypot(*b)).expect("same dims")
}

fn color_contrast(frame: &RgbImage) -> Grid<f64> {
    frame.map(|p| {
        let r = p[0] as f64;
        let g = p[1] as f64;
        let b = p[2] as f64;
        let intensity = r.max(g).max(b);
        if intensity < 25.5 {
            return 0.0;
        }
        let rg = (r - g) / intensity;
        let by = (b - r.min(g)) / intensity;
        0.5 * (rg.abs() + by.abs())
    })
}

/// The five channel maps at feature resolution. `prev = None` gives zero flicker.
pub fn extract_feature_maps(
    frame: &RgbImage,
    prev: Option<&RgbImage>,
    mean_flow: &FlowField,
    params: &GbvsParams,
) -> Result<Vec<FeatureMap>> {
    let (w, h) = frame.dims();
    crate::error::check_dims((w, h), mean_flow.dims())?;
    let factor = params.factor_for(w, h);
    let y = luma(frame);
    let flicker = match prev {
        Some(p) => {
            crate::error::check_dims((w, h), p.dims())?;
            y.zip_map(&luma(p), |a, b| (a - b).abs())?
        }
        None => Grid::new(w, h),
    };
    let orientations = [0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0];
    let mut orient = Grid::new(w, h);
    for &theta in &orientations {
        let e = gabor_energy(&y, theta);
        for (o, v) in orient.as_mut_slice().iter_mut().zip(e.iter()) {
            *o += v / orientations.len() as f64;
        }
    }
    let maps = [
        (Channel::Intensity, y.clone()),
        (Channel::Color, color_contrast(frame)),
        (Channel::Orientation, orient),
        (Channel::Flicker, flicker),
        (Channel::Motion, mean_flow.magnitude()),
    ];
    Ok(maps
        .into_iter()
        .map(|(channel, full)| FeatureMap {
            channel,
            values: downsample_area(&full, factor),
        })
        .collect())
}

/// Column-stochastic transition matrix over the nodes of a map.
/// `matrix[i * n + j]` is the probability of moving from node `j` to node `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovGraph {
    pub width: usize,
    pub height: usize,
    pub matrix: Vec<f64>,
}

impl MarkovGraph {
    pub fn from_matrix(width: usize, height: usize, matrix: Vec<f64>) -> Result<Self> {
        let n = width * height;
        if matrix.len() != n * n {
            return Err(Error::param("matrix size does not match node count"));
        }
        if matrix.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::param("transition probabilities must be finite and non-negative"));
        }
        Ok(MarkovGraph { width, height, matrix })
    }

    pub fn nodes(&self) -> usize {
        self.width * self.height
    }

    /// Largest deviation of any column sum from 1.
    pub fn max_column_error(&self) -> f64 {
        let n = self.nodes();
        (0..n)
            .map(|j| ((0..n).map(|i| self.matrix[i * n + j]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        let n = self.nodes();
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.matrix[i * n..(i + 1) * n];
            *o = row.iter().zip(v).map(|(p, x)| p * x).sum();
        }
    }

    fn uniform(width: usize, height: usize) -> Self {
        let n = width * height;
        MarkovGraph {
            width,
            height,
            matrix: vec![1.0 / n as f64; n * n],
        }
    }

    /// Build from a non-negative weight function `weight(i, j)` of edge `j -> i`,
    /// normalising each column. Columns with no mass fall back to `fallback(i, j)`.
    fn from_weights(
        width: usize,
        height: usize,
        weight: impl Fn(usize, usize) -> f64,
        fallback: impl Fn(usize, usize) -> f64,
    ) -> Self {
        let n = width * height;
        let mut matrix = vec![0.0; n * n];
        for j in 0..n {
            let mut total = 0.0;
            for i in 0..n {
                let w = weight(i, j);
                matrix[i * n + j] = w;
                total += w;
            }
            if !(total > 0.0) || !total.is_finite() {
                total = 0.0;
                for i in 0..n {
                    let w = fallback(i, j);
                    matrix[i * n + j] = w;
                    total += w;
                }
            }
            for i in 0..n {
                matrix[i * n + j] /= total;
            }
        }
        MarkovGraph { width, height, matrix }
    }
}

/// Gaussian falloff `exp(-d^2 / (2 sigma^2))` between all node pairs of a grid.
#[derive(Debug, Clone)]
pub struct DistanceKernel {
    width: usize,
    height: usize,
    weights: Vec<f64>,
}

impl DistanceKernel {
    pub fn new(width: usize, height: usize, sigma: f64) -> Self {
        let n = width * height;
        let mut weights = vec![0.0; n * n];
        let two_s2 = 2.0 * sigma * sigma;
        for i in 0..n {
            let (xi, yi) = ((i % width) as f64, (i / width) as f64);
            for j in 0..n {
                let (xj, yj) = ((j % width) as f64, (j / width) as f64);
                let d2 = (xi - xj).powi(2) + (yi - yj).powi(2);
                weights[i * n + j] = (-d2 / two_s2).exp();
            }
        }
        DistanceKernel { width, height, weights }
    }

    pub fn for_map(width: usize, height: usize, sigma_frac: f64) -> Self {
        Self::new(width, height, sigma_frac * width as f64)
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.width * self.height + j]
    }
}

fn is_constant(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] == w[1])
}

const POSITIVE_EPS: f64 = 1e-12;

/// Dissimilarity-weighted chain: `w(j -> i) = |log(M(i)/M(j))| * falloff(i, j)`.
///
/// Maps with non-positive values are shifted by `-min + 1e-12` first. A constant map
/// gives the uniform matrix.
pub fn build_markov_graph(map: &Grid<f64>, kernel: &DistanceKernel) -> Result<MarkovGraph> {
    let (w, h) = map.dims();
    if w * h < 2 {
        return Err(Error::param("a Markov graph needs at least 2 nodes"));
    }
    if (kernel.width, kernel.height) != (w, h) {
        return Err(Error::DimensionMismatch {
            expected: (w, h),
            found: (kernel.width, kernel.height),
        });
    }
    if map.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("feature map has non-finite values"));
    }
    if is_constant(map.as_slice()) {
        return Ok(MarkovGraph::uniform(w, h));
    }
    let min = map.iter().copied().fold(f64::INFINITY, f64::min);
    let shift = if min <= 0.0 { -min + POSITIVE_EPS } else { 0.0 };
    let logs: Vec<f64> = map.iter().map(|v| (v + shift).ln()).collect();
    Ok(MarkovGraph::from_weights(
        w,
        h,
        |i, j| (logs[i] - logs[j]).abs() * kernel.at(i, j),
        |i, j| kernel.at(i, j),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub distribution: Grid<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl Equilibrium {
    /// `max_i |(P pi)_i - pi_i|`.
    pub fn residual(&self, graph: &MarkovGraph) -> f64 {
        let mut next = vec![0.0; graph.nodes()];
        graph.apply(self.distribution.as_slice(), &mut next);
        next.iter()
            .zip(self.distribution.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Power iteration from the uniform vector until the infinity-norm step is below
/// `tolerance` or `max_iterations` is reached.
pub fn equilibrium(graph: &MarkovGraph, tolerance: f64, max_iterations: usize) -> Equilibrium {
    let n = graph.nodes();
    let mut pi = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iterations {
        graph.apply(&pi, &mut next);
        let total: f64 = next.iter().sum();
        if total > 0.0 {
            next.iter_mut().for_each(|v| *v /= total);
        }
        let step = pi.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        core::mem::swap(&mut pi, &mut next);
        iterations += 1;
        if step < tolerance {
            converged = true;
            break;
        }
    }
    Equilibrium {
        distribution: Grid::from_vec(graph.width, graph.height, pi).expect("node count"),
        iterations,
        converged,
    }
}

/// Concentration chain: `w(j -> i) = A(i) * falloff(i, j)`, mass flows toward
/// high activation. A constant activation gives the uniform matrix.
pub fn concentration_graph(activation: &Grid<f64>, kernel: &DistanceKernel) -> Result<MarkovGraph> {
    let (w, h) = activation.dims();
    if (kernel.width, kernel.height) != (w, h) {
        return Err(Error::DimensionMismatch {
            expected: (w, h),
            found: (kernel.width, kernel.height),
        });
    }
    if activation.iter().any(|&a| !(a >= 0.0) || !a.is_finite()) {
        return Err(Error::param("activation must be finite and non-negative"));
    }
    if is_constant(activation.as_slice()) {
        return Ok(MarkovGraph::uniform(w, h));
    }
    let a = activation.as_slice();
    Ok(MarkovGraph::from_weights(
        w,
        h,
        |i, j| a[i] * kernel.at(i, j),
        |i, j| kernel.at(i, j),
    ))
}

pub fn concentrate_mass(activation: &Grid<f64>, kernel: &DistanceKernel, params: &GbvsParams) -> Result<Equilibrium> {
    let graph = concentration_graph(activation, kernel)?;
    Ok(equilibrium(&graph, params.tolerance, params.max_iterations))
}

/// Health of one Markov chain solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainDiagnostics {
    pub column_error: f64,
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisualSaliency {
    /// Frame-resolution map (not normalised).
    pub map: Grid<f64>,
    /// Two entries per channel: activation chain, then concentration chain.
    pub chains: Vec<ChainDiagnostics>,
}

fn solve(graph: &MarkovGraph, params: &GbvsParams, chains: &mut Vec<ChainDiagnostics>) -> Equilibrium {
    let eq = equilibrium(graph, params.tolerance, params.max_iterations);
    chains.push(ChainDiagnostics {
        column_error: graph.max_column_error(),
        residual: eq.residual(graph),
        converged: eq.converged,
        iterations: eq.iterations,
    });
    eq
}

/// Bilinear upsampling of a node grid to `width x height`, treating each node as
/// the centre of its block.
pub fn upsample_bilinear(grid: &Grid<f64>, width: usize, height: usize) -> Grid<f64> {
    let sx = grid.width() as f64 / width as f64;
    let sy = grid.height() as f64 / height as f64;
    Grid::from_fn(width, height, |x, y| {
        grid.sample_bilinear((x as f64 + 0.5) * sx - 0.5, (y as f64 + 0.5) * sy - 0.5)
    })
}

/// Full GBVS map for one frame.
pub fn gbvs_saliency(
    frame: &RgbImage,
    prev: Option<&RgbImage>,
    mean_flow: &FlowField,
    params: &GbvsParams,
) -> Result<VisualSaliency> {
    let maps = extract_feature_maps(frame, prev, mean_flow, params)?;
    let (mw, mh) = maps[0].values.dims();
    let kernel = DistanceKernel::for_map(mw, mh, params.sigma_frac);
    let mut total = Grid::new(mw, mh);
    let mut chains = Vec::with_capacity(2 * maps.len());
    for fm in &maps {
        let graph = build_markov_graph(&fm.values, &kernel)?;
        let activation = solve(&graph, params, &mut chains);
        let graph = concentration_graph(&activation.distribution, &kernel)?;
        let concentrated = solve(&graph, params, &mut chains);
        for (t, v) in total.as_mut_slice().iter_mut().zip(concentrated.distribution.iter()) {
            *t += v;
        }
    }
    Ok(VisualSaliency {
        map: upsample_bilinear(&total, frame.width(), frame.height()),
        chains,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::FlowDirection;

    fn two_by_two(m: [[f64; 2]; 2]) -> MarkovGraph {
        MarkovGraph::from_matrix(2, 1, vec![m[0][0], m[0][1], m[1][0], m[1][1]]).unwrap()
    }

    #[test]
    fn doubly_stochastic_equilibrium_is_uniform() {
        let g = two_by_two([[0.3, 0.7], [0.7, 0.3]]);
        let eq = equilibrium(&g, 1e-12, 10_000);
        assert!(eq.converged);
        assert!(eq.distribution.iter().all(|&p| (p - 0.5).abs() < 1e-12));
    }

    #[test]
    fn two_state_equilibrium_matches_direct_solve() {
        // Direct solve: pi0 = 0.9 pi0 + 0.5 (1 - pi0)  =>  pi0 = 5/6.
        let g = two_by_two([[0.9, 0.5], [0.1, 0.5]]);
        let eq = equilibrium(&g, 1e-12, 10_000);
        let pi = eq.distribution.as_slice();
        assert!((pi[0] - 5.0 / 6.0).abs() < 1e-6);
        assert!((pi[1] - 1.0 / 6.0).abs() < 1e-6);
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_node_dissimilarity_is_log_ratio() {
        let map = Grid::from_vec(2, 1, vec![core::f64::consts::E, 1.0]).unwrap();
        let kernel = DistanceKernel::new(2, 1, 1.0);
        let g = build_markov_graph(&map, &kernel).unwrap();
        // Only off-diagonal entries carry weight, |log(e/1)| = 1 both ways; columns
        // normalise to a pure swap.
        assert_eq!(g.matrix, vec![0.0, 1.0, 1.0, 0.0]);
        // Unnormalised weight check against the arithmetic oracle.
        let w = (map[(0, 0)] / map[(1, 0)]).ln().abs() * kernel.at(0, 1);
        assert!((w - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn constant_map_gives_uniform_columns() {
        let map = Grid::filled(3, 3, 4.0);
        let g = build_markov_graph(&map, &DistanceKernel::for_map(3, 3, 0.15)).unwrap();
        assert!(g.matrix.iter().all(|&p| (p - 1.0 / 9.0).abs() < 1e-15));
    }

    #[test]
    fn columns_sum_to_one() {
        let map = Grid::from_fn(6, 5, |x, y| ((x * 7 + y * 3) % 5) as f64);
        let g = build_markov_graph(&map, &DistanceKernel::for_map(6, 5, 0.15)).unwrap();
        assert!(g.max_column_error() < 1e-12);
    }

    #[test]
    fn single_graph_node_rejected() {
        let map = Grid::filled(1, 1, 1.0);
        assert!(build_markov_graph(&map, &DistanceKernel::new(1, 1, 1.0)).is_err());
    }

    #[test]
    fn concentration_keeps_peak_and_uniformity() {
        let params = GbvsParams::default();
        let kernel = DistanceKernel::for_map(8, 8, 0.15);
        let mut peak = Grid::filled(8, 8, 0.01);
        peak[(5, 2)] = 1.0;
        let out = concentrate_mass(&peak, &kernel, &params).unwrap();
        let argmax = out
            .distribution
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(argmax, 2 * 8 + 5);
        let flat = concentrate_mass(&Grid::filled(8, 8, 0.3), &kernel, &params).unwrap();
        assert!(flat.distribution.iter().all(|&p| (p - 1.0 / 64.0).abs() < 1e-12));
    }

    #[test]
    fn concentration_sharpens_two_peaks() {
        let params = GbvsParams {
            tolerance: 1e-13,
            max_iterations: 200_000,
            ..Default::default()
        };
        let kernel = DistanceKernel::for_map(12, 12, 0.15);
        let mut a = Grid::filled(12, 12, 0.1);
        a[(2, 2)] = 2.0;
        a[(9, 9)] = 1.0;
        let out = concentrate_mass(&a, &kernel, &params).unwrap();
        // Independent power iteration on the explicitly built matrix.
        let n = 144;
        let k = |i: usize, j: usize| {
            let (xi, yi) = ((i % 12) as f64, (i / 12) as f64);
            let (xj, yj) = ((j % 12) as f64, (j / 12) as f64);
            let s = 0.15 * 12.0;
            (-((xi - xj).powi(2) + (yi - yj).powi(2)) / (2.0 * s * s)).exp()
        };
        let mut p = vec![0.0; n * n];
        for j in 0..n {
            let col: f64 = (0..n).map(|i| a.as_slice()[i] * k(i, j)).sum();
            for i in 0..n {
                p[i * n + j] = a.as_slice()[i] * k(i, j) / col;
            }
        }
        let mut pi = vec![1.0 / n as f64; n];
        for _ in 0..20_000 {
            let next: Vec<f64> = (0..n).map(|i| (0..n).map(|j| p[i * n + j] * pi[j]).sum()).collect();
            pi = next;
        }
        for (x, y) in pi.iter().zip(out.distribution.iter()) {
            assert!((x - y).abs() < 1e-5, "{x} {y}");
        }
        let ratio = out.distribution[(2, 2)] / out.distribution[(9, 9)];
        assert!(ratio >= 2.0, "ratio {ratio}");
    }

    #[test]
    fn vertical_bar_prefers_zero_degree_gabor() {
        let img = Grid::from_fn(32, 32, |x, _| if (14..18).contains(&x) { 255.0 } else { 0.0 });
        let e0 = gabor_energy(&img, 0.0);
        let e90 = gabor_energy(&img, PI / 2.0);
        for y in 8..24 {
            for x in [13, 14, 17, 18] {
                assert!(e0[(x, y)] > e90[(x, y)], "({x},{y})");
            }
        }
    }

    #[test]
    fn uniform_gray_features() {
        let frame = RgbImage::filled(16, 16, [128, 128, 128]);
        let flow = FlowField::zeros(16, 16, FlowDirection::Mean, 0);
        let maps = extract_feature_maps(&frame, Some(&frame), &flow, &GbvsParams::default()).unwrap();
        assert_eq!(maps.len(), 5);
        let intensity = &maps[0].values;
        assert!(intensity.iter().all(|&v| v == intensity[(0, 0)]));
        assert!(maps[3].values.iter().all(|&v| v == 0.0));
        assert!(maps[2].values.iter().all(|&v| v.abs() < 1e-9));
    }

    #[test]
    fn flicker_only_near_moving_dot() {
        let dot = |cx: usize| Grid::from_fn(32, 32, |x, y| if x.abs_diff(cx) <= 1 && y.abs_diff(16) <= 1 { [255u8; 3] } else { [0; 3] });
        let flow = FlowField::zeros(32, 32, FlowDirection::Mean, 1);
        let params = GbvsParams {
            downsample: 1,
            ..Default::default()
        };
        let maps = extract_feature_maps(&dot(10), Some(&dot(14)), &flow, &params).unwrap();
        let flicker = &maps[3].values;
        for y in 0..32 {
            for x in 0..32 {
                if flicker[(x, y)] > 0.0 {
                    assert!(y.abs_diff(16) <= 1 && (9..=15).contains(&x));
                }
            }
        }
        assert!(flicker[(10, 16)] > 0.0 && flicker[(14, 16)] > 0.0);
    }

    #[test]
    fn blank_frames_give_flat_map() {
        let frame = RgbImage::filled(32, 32, [0, 0, 0]);
        let flow = FlowField::zeros(32, 32, FlowDirection::Mean, 0);
        let out = gbvs_saliency(&frame, Some(&frame), &flow, &GbvsParams::default()).unwrap();
        let first = out.map[(0, 0)];
        assert!(out.map.iter().all(|&v| (v - first).abs() < 1e-12 && v >= 0.0));
    }
}
