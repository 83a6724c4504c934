//! Files, batch driver and command-line front end for the `avsal-core` pipeline.

pub mod app;
pub mod error;
pub mod io;
pub mod report;
pub mod timing;

pub use error::{AppError, AppResult};
