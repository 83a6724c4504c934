#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod audio;
pub mod color;
pub mod config;
pub mod correlation;
pub mod error;
pub mod flow;
pub mod fusion;
pub mod gbvs;
pub mod grid;
pub mod media;
pub mod metrics;
pub mod pipeline;
pub mod segmentation;
pub mod smooth;
pub mod synth;
pub mod tracking;

pub use error::{Error, Result};
pub use grid::{Grid, RgbImage, SaliencyMap};
