//! Metric reports: one CSV row per frame and a JSON summary of means.

use std::fs;
use std::path::Path;

use avsal_core::metrics::{MetricMeans, MetricReport};
use serde::Serialize;

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, PartialEq)]
pub struct VideoReport {
    pub video: String,
    pub report: MetricReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Means {
    pub auc: Option<f64>,
    pub kl: Option<f64>,
    pub nss: Option<f64>,
    pub cc: Option<f64>,
}

impl From<MetricMeans> for Means {
    fn from(m: MetricMeans) -> Self {
        Means {
            auc: m.auc,
            kl: m.kl,
            nss: m.nss,
            cc: m.cc,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VideoSummary {
    pub video: String,
    pub frames: usize,
    #[serde(flatten)]
    pub mean: Means,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub videos: Vec<VideoSummary>,
    /// Mean over videos of the per-video means.
    pub corpus: Means,
}

pub fn summarize(reports: &[VideoReport]) -> Summary {
    let videos: Vec<VideoSummary> = reports
        .iter()
        .map(|r| VideoSummary {
            video: r.video.clone(),
            frames: r.report.frames.len(),
            mean: r.report.mean.into(),
            diagnostic: r.report.diagnostic.clone(),
        })
        .collect();
    let mean_of = |get: fn(&Means) -> Option<f64>| {
        let vals: Vec<f64> = videos.iter().filter_map(|v| get(&v.mean)).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    };
    let corpus = Means {
        auc: mean_of(|m| m.auc),
        kl: mean_of(|m| m.kl),
        nss: mean_of(|m| m.nss),
        cc: mean_of(|m| m.cc),
    };
    Summary { videos, corpus }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `video,frame,auc,kl,nss,cc`; undefined values are left empty.
pub fn csv_text(reports: &[VideoReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["video", "frame", "auc", "kl", "nss", "cc"])
        .expect("writing to memory");
    for r in reports {
        for f in &r.report.frames {
            w.write_record([r.video.clone(), f.frame.to_string(), cell(f.auc), cell(f.kl), cell(f.nss), cell(f.cc)])
                .expect("writing to memory");
        }
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is utf-8")
}

pub fn json_text(reports: &[VideoReport]) -> String {
    let mut s = serde_json::to_string_pretty(&summarize(reports)).expect("summary serialises");
    s.push('\n');
    s
}

/// Write `<base>.csv` and `<base>.json`, whatever extension `base` carries.
pub fn write_reports(reports: &[VideoReport], base: &Path) -> AppResult<()> {
    let csv_path = base.with_extension("csv");
    let json_path = base.with_extension("json");
    fs::write(&csv_path, csv_text(reports)).map_err(|e| AppError::io(&csv_path, e))?;
    fs::write(&json_path, json_text(reports)).map_err(|e| AppError::io(&json_path, e))
}
