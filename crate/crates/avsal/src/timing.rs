use std::fmt::Write;
use std::time::{Duration, Instant};

use avsal_core::pipeline::{Stage, StageObserver};

/// Wall-clock time spent in each stage.
#[derive(Debug, Default, Clone)]
pub struct TimingObserver {
    started: Option<(Stage, Instant)>,
    pub elapsed: Vec<(Stage, Duration)>,
}

impl StageObserver for TimingObserver {
    fn enter(&mut self, stage: Stage) {
        self.started = Some((stage, Instant::now()));
    }

    fn leave(&mut self, stage: Stage) {
        if let Some((s, t0)) = self.started.take() {
            if s == stage {
                self.elapsed.push((stage, t0.elapsed()));
            }
        }
    }
}

impl TimingObserver {
    pub fn total(&self) -> Duration {
        self.elapsed.iter().map(|(_, d)| *d).sum()
    }

    /// Seconds per frame for each stage and in total.
    pub fn table(&self, frames: usize) -> String {
        let per_frame = |d: Duration| d.as_secs_f64() / frames.max(1) as f64;
        let mut out = String::new();
        writeln!(out, "{:<26} {:>12}", "stage", "s/frame").unwrap();
        for (stage, d) in &self.elapsed {
            writeln!(out, "{:<26} {:>12.6}", stage.name(), per_frame(*d)).unwrap();
        }
        writeln!(out, "{:<26} {:>12.6}", "total", per_frame(self.total())).unwrap();
        out
    }
}
