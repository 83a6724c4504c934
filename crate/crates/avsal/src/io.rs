//! Frame sequences, WAV audio, fixation CSVs and map dumps.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use avsal_core::flow::FlowField;
use avsal_core::media::{AudioTrack, Fixation, FixationSet, VideoClip};
use avsal_core::segmentation::SegmentationMap;
use avsal_core::tracking::Track;
use avsal_core::correlation::CorrelationScore;
use avsal_core::{Grid, RgbImage, SaliencyMap};

use crate::error::{AppError, AppResult};

const FRAME_EXTENSIONS: [&str; 3] = ["png", "ppm", "pnm"];

/// Files in `dir` whose stem is a decimal index and whose extension is one of
/// `extensions`, sorted by index.
pub fn numbered_files(dir: &Path, extensions: &[&str]) -> AppResult<Vec<(u64, PathBuf)>> {
    let entries = fs::read_dir(dir).map_err(|e| AppError::io(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| AppError::io(dir, e))?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if !ext.is_some_and(|e| extensions.contains(&e.as_str())) {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        if stem.is_empty() || !stem.bytes().all(|b| b.is_ascii_digit()) {
            continue;
        }
        let index = stem
            .parse()
            .map_err(|_| AppError::format(&path, "frame index does not fit in 64 bits"))?;
        out.push((index, path));
    }
    out.sort();
    if let Some(w) = out.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(AppError::format(&w[1].1, "two files share the same frame index"));
    }
    Ok(out)
}

pub fn load_frame(path: &Path) -> AppResult<RgbImage> {
    let img = image::open(path)
        .map_err(|e| AppError::format(path, e.to_string()))?
        .to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = img.pixels().map(|p| p.0).collect();
    Ok(Grid::from_vec(w, h, data)?)
}

pub fn save_frame(image: &RgbImage, path: &Path) -> AppResult<()> {
    let data: Vec<u8> = image.iter().flat_map(|p| p.iter().copied()).collect();
    let buf = image::RgbImage::from_raw(image.width() as u32, image.height() as u32, data)
        .expect("buffer length matches dimensions");
    buf.save(path).map_err(|e| AppError::format(path, e.to_string()))
}

/// Load every numbered PNG/PPM in `dir` in index order.
pub fn load_frame_sequence(dir: &Path, fps: f64) -> AppResult<VideoClip> {
    let files = numbered_files(dir, &FRAME_EXTENSIONS)?;
    if files.len() < 2 {
        return Err(AppError::Input(format!(
            "{}: need at least 2 numbered frames, found {}",
            dir.display(),
            files.len()
        )));
    }
    let frames = files
        .iter()
        .map(|(_, p)| load_frame(p))
        .collect::<AppResult<Vec<_>>>()?;
    let dims = frames[0].dims();
    if let Some(((_, path), f)) = files.iter().zip(&frames).find(|(_, f)| f.dims() != dims) {
        return Err(AppError::format(
            path,
            format!("frame is {}x{}, expected {}x{}", f.width(), f.height(), dims.0, dims.1),
        ));
    }
    Ok(VideoClip::new(frames, fps)?)
}

/// Mono samples in [-1, 1]; stereo is averaged.
pub fn load_wav(path: &Path) -> AppResult<AudioTrack> {
    let mut reader = hound::WavReader::open(path).map_err(|e| AppError::format(path, e.to_string()))?;
    let spec = reader.spec();
    if !(1..=2).contains(&spec.channels) {
        return Err(AppError::format(path, format!("{} channels; only mono or stereo is read", spec.channels)));
    }
    let samples: Vec<f32> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| v as f32 / 32768.0))
            .collect::<Result<_, _>>(),
        (hound::SampleFormat::Float, 32) => reader.samples::<f32>().collect::<Result<_, _>>(),
        (fmt, bits) => {
            return Err(AppError::format(path, format!("unsupported WAV encoding: {fmt:?} {bits}-bit")));
        }
    }
    .map_err(|e| AppError::format(path, e.to_string()))?;
    Ok(AudioTrack::from_interleaved(&samples, spec.channels as usize, spec.sample_rate)?)
}

/// Mono 32-bit float WAV.
pub fn write_wav(audio: &AudioTrack, path: &Path) -> AppResult<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: audio.sample_rate,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let wrap = |e: hound::Error| match e {
        hound::Error::IoError(io) => AppError::io(path, io),
        other => AppError::format(path, other.to_string()),
    };
    let mut w = hound::WavWriter::create(path, spec).map_err(wrap)?;
    for &s in &audio.samples {
        w.write_sample(s).map_err(wrap)?;
    }
    w.finalize().map_err(wrap)
}

#[derive(serde::Deserialize)]
struct FixationRow {
    frame: usize,
    x: f64,
    y: f64,
}

/// Read a `frame,x,y` CSV. Points outside `width x height` are dropped and counted.
pub fn load_fixations(path: &Path, width: usize, height: usize) -> AppResult<FixationSet> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| AppError::format(path, e.to_string()))?;
    let headers = reader.headers().map_err(|e| AppError::format(path, e.to_string()))?;
    if headers.iter().map(str::trim).collect::<Vec<_>>() != ["frame", "x", "y"] {
        return Err(AppError::format(path, "expected header `frame,x,y`"));
    }
    let mut set = FixationSet::new();
    for (i, row) in reader.deserialize::<FixationRow>().enumerate() {
        let row = row.map_err(|e| AppError::format(path, format!("row {}: {e}", i + 1)))?;
        set.push(row.frame, Fixation { x: row.x, y: row.y }, width, height);
    }
    Ok(set)
}

pub fn write_fixations(set: &FixationSet, path: &Path) -> AppResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| AppError::format(path, e.to_string()))?;
    let err = |e: csv::Error| AppError::format(path, e.to_string());
    w.write_record(["frame", "x", "y"]).map_err(err)?;
    for t in 0..set.frame_span() {
        for f in set.frame(t) {
            w.write_record([t.to_string(), f.x.to_string(), f.y.to_string()]).map_err(err)?;
        }
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

/// Path of the raw float dump that accompanies a map PNG.
pub fn f32_path(png: &Path) -> PathBuf {
    png.with_extension("f32")
}

/// 8-bit grayscale PNG (`round(255 v)`) plus a little-endian `.f32` dump.
pub fn write_saliency_map(map: &SaliencyMap, png: &Path) -> AppResult<()> {
    if let Some(v) = map.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(AppError::Input(format!("{}: map value {v} outside [0, 1]", png.display())));
    }
    let pixels: Vec<u8> = map.iter().map(|&v| (255.0 * v).round() as u8).collect();
    let buf = image::GrayImage::from_raw(map.width() as u32, map.height() as u32, pixels)
        .expect("buffer length matches dimensions");
    buf.save(png).map_err(|e| AppError::format(png, e.to_string()))?;
    write_f32(map, &f32_path(png))
}

pub fn write_f32(map: &SaliencyMap, path: &Path) -> AppResult<()> {
    let bytes: Vec<u8> = map.iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(path, bytes).map_err(|e| AppError::io(path, e))
}

pub fn read_f32(path: &Path, width: usize, height: usize) -> AppResult<SaliencyMap> {
    let bytes = fs::read(path).map_err(|e| AppError::io(path, e))?;
    if bytes.len() != 4 * width * height {
        return Err(AppError::format(
            path,
            format!("{} bytes, expected {} for {width}x{height}", bytes.len(), 4 * width * height),
        ));
    }
    let data = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok(Grid::from_vec(width, height, data)?)
}

/// A map written by [`write_saliency_map`]: dimensions from the PNG, values from the dump.
pub fn load_saliency_map(png: &Path) -> AppResult<SaliencyMap> {
    let (w, h) = image::image_dimensions(png).map_err(|e| AppError::format(png, e.to_string()))?;
    read_f32(&f32_path(png), w as usize, h as usize)
}

/// 16-bit grayscale PNG of the label map.
pub fn write_label_png(seg: &SegmentationMap, path: &Path) -> AppResult<()> {
    let labels = &seg.labels;
    if labels.iter().any(|&l| l > u16::MAX as u32) {
        return Err(AppError::Input(format!("{}: more than 65535 labels", path.display())));
    }
    let data: Vec<u16> = labels.iter().map(|&l| l as u16).collect();
    let buf: image::ImageBuffer<image::Luma<u16>, Vec<u16>> =
        image::ImageBuffer::from_raw(labels.width() as u32, labels.height() as u32, data)
            .expect("buffer length matches dimensions");
    buf.save(path).map_err(|e| AppError::format(path, e.to_string()))
}

/// Middlebury `.flo`: `PIEH`, width, height, then interleaved `u, v` floats.
pub fn write_flo(flow: &FlowField, path: &Path) -> AppResult<()> {
    let file = fs::File::create(path).map_err(|e| AppError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let (width, height) = flow.dims();
    let mut bytes = Vec::with_capacity(12 + 8 * width * height);
    bytes.extend_from_slice(b"PIEH");
    bytes.extend_from_slice(&(width as i32).to_le_bytes());
    bytes.extend_from_slice(&(height as i32).to_le_bytes());
    for (u, v) in flow.u.iter().zip(flow.v.iter()) {
        bytes.extend_from_slice(&(*u as f32).to_le_bytes());
        bytes.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    w.write_all(&bytes).and_then(|_| w.flush()).map_err(|e| AppError::io(path, e))
}

pub fn read_flo(path: &Path) -> AppResult<(usize, usize, Vec<(f32, f32)>)> {
    let bytes = fs::read(path).map_err(|e| AppError::io(path, e))?;
    if bytes.len() < 12 || &bytes[..4] != b"PIEH" {
        return Err(AppError::format(path, "missing PIEH header"));
    }
    let word = |i: usize| i32::from_le_bytes([bytes[i], bytes[i + 1], bytes[i + 2], bytes[i + 3]]);
    let (w, h) = (word(4), word(8));
    if w < 0 || h < 0 || bytes.len() != 12 + 8 * (w as usize) * (h as usize) {
        return Err(AppError::format(path, "size does not match header"));
    }
    let f = |c: &[u8]| f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
    let uv = bytes[12..].chunks_exact(8).map(|c| (f(&c[..4]), f(&c[4..]))).collect();
    Ok((w as usize, h as usize, uv))
}

/// `track_id,frame,cx,cy,m` with the centroid of the region held in each frame.
pub fn write_tracks_csv(tracks: &[Track], segmentations: &[SegmentationMap], path: &Path) -> AppResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| AppError::format(path, e.to_string()))?;
    let err = |e: csv::Error| AppError::format(path, e.to_string());
    w.write_record(["track_id", "frame", "cx", "cy", "m"]).map_err(err)?;
    for track in tracks {
        for (t, seg) in segmentations.iter().enumerate() {
            let Some(label) = track.region_at(t) else { continue };
            let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
            for y in 0..seg.labels.height() {
                for x in 0..seg.labels.width() {
                    if seg.labels[(x, y)] == label {
                        sx += x as f64;
                        sy += y as f64;
                        n += 1;
                    }
                }
            }
            let n = n.max(1) as f64;
            w.write_record([
                track.id.to_string(),
                t.to_string(),
                (sx / n).to_string(),
                (sy / n).to_string(),
                track.acceleration[t].to_string(),
            ])
            .map_err(err)?;
        }
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

/// `track_id,frame,score`.
pub fn write_scores_csv(scores: &[CorrelationScore], path: &Path) -> AppResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| AppError::format(path, e.to_string()))?;
    let err = |e: csv::Error| AppError::format(path, e.to_string());
    w.write_record(["track_id", "frame", "score"]).map_err(err)?;
    for s in scores {
        w.write_record([s.track_id.to_string(), s.frame.to_string(), s.score.to_string()])
            .map_err(err)?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

pub fn create_dir(dir: &Path) -> AppResult<()> {
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))
}
