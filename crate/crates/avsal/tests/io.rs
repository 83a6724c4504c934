use std::fs;

use avsal::io::*;
use avsal::AppError;
use avsal_core::flow::{FlowDirection, FlowField};
use avsal_core::media::{AudioTrack, Fixation, FixationSet};
use avsal_core::segmentation::SegmentationMap;
use avsal_core::{Grid, SaliencyMap};
use tempfile::tempdir;

fn write_pcm16(path: &std::path::Path, channels: u16, samples: &[i16]) {
    let spec = hound::WavSpec {
        channels,
        sample_rate: 48_000,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec).unwrap();
    for &s in samples {
        w.write_sample(s).unwrap();
    }
    w.finalize().unwrap();
}

#[test]
fn two_black_frames_make_a_clip() {
    let dir = tempdir().unwrap();
    let black = Grid::filled(4, 4, [0u8; 3]);
    save_frame(&black, &dir.path().join("000001.png")).unwrap();
    save_frame(&black, &dir.path().join("000002.png")).unwrap();
    let clip = load_frame_sequence(dir.path(), 30.0).unwrap();
    assert_eq!(clip.frame_count(), 2);
    assert_eq!((clip.width(), clip.height()), (4, 4));
    assert_eq!(clip.fps(), 30.0);
}

#[test]
fn frames_load_in_index_order_including_ppm() {
    let dir = tempdir().unwrap();
    for i in [10u8, 2, 1] {
        let img = Grid::filled(3, 2, [i, 0, 0]);
        let name = if i == 2 { format!("{i:06}.ppm") } else { format!("{i:06}.png") };
        save_frame(&img, &dir.path().join(name)).unwrap();
    }
    fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let clip = load_frame_sequence(dir.path(), 25.0).unwrap();
    let firsts: Vec<u8> = clip.frames().iter().map(|f| f[(0, 0)][0]).collect();
    assert_eq!(firsts, vec![1, 2, 10]);
}

#[test]
fn three_hundred_frames_load() {
    let dir = tempdir().unwrap();
    let img = Grid::filled(2, 2, [7u8, 7, 7]);
    for i in 1..=300 {
        save_frame(&img, &dir.path().join(format!("{i:06}.png"))).unwrap();
    }
    assert_eq!(load_frame_sequence(dir.path(), 30.0).unwrap().frame_count(), 300);
}

#[test]
fn single_frame_is_an_input_error() {
    let dir = tempdir().unwrap();
    save_frame(&Grid::filled(4, 4, [0u8; 3]), &dir.path().join("000001.png")).unwrap();
    assert!(matches!(load_frame_sequence(dir.path(), 30.0), Err(AppError::Input(_))));
}

#[test]
fn mismatched_frames_are_a_format_error() {
    let dir = tempdir().unwrap();
    save_frame(&Grid::filled(4, 4, [0u8; 3]), &dir.path().join("000001.png")).unwrap();
    save_frame(&Grid::filled(5, 4, [0u8; 3]), &dir.path().join("000002.png")).unwrap();
    assert!(matches!(load_frame_sequence(dir.path(), 30.0), Err(AppError::Format { .. })));
}

#[test]
fn silent_wav_reads_as_zeros() {
    let dir = tempdir().unwrap();
    let p = dir.path().join("s.wav");
    write_pcm16(&p, 1, &[0; 480]);
    let a = load_wav(&p).unwrap();
    assert_eq!(a.sample_rate, 48_000);
    assert_eq!(a.samples.len(), 480);
    assert!(a.samples.iter().all(|&s| s == 0.0));
}

#[test]
fn pcm16_scaling() {
    let dir = tempdir().unwrap();
    let p = dir.path().join("s.wav");
    write_pcm16(&p, 1, &[16384, -32768]);
    let a = load_wav(&p).unwrap();
    assert!((a.samples[0] - 0.5).abs() <= 1.0 / 32768.0);
    assert_eq!(a.samples[1], -1.0);
}

#[test]
fn stereo_is_averaged() {
    let dir = tempdir().unwrap();
    let p = dir.path().join("s.wav");
    write_pcm16(&p, 2, &[-16384, 16384, -16384, 16384]);
    let a = load_wav(&p).unwrap();
    assert_eq!(a.samples, vec![0.0, 0.0]);
}

#[test]
fn unsupported_wav_encoding_is_a_format_error() {
    let dir = tempdir().unwrap();
    let p = dir.path().join("s.wav");
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: 8000,
        bits_per_sample: 8,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(&p, spec).unwrap();
    w.write_sample(3i8).unwrap();
    w.finalize().unwrap();
    assert!(matches!(load_wav(&p), Err(AppError::Format { .. })));
    fs::write(&p, b"not a wav").unwrap();
    assert!(matches!(load_wav(&p), Err(AppError::Format { .. })));
}

#[test]
fn float_wav_round_trips() {
    let dir = tempdir().unwrap();
    let p = dir.path().join("f.wav");
    let a = AudioTrack::new(vec![0.25, -0.75, 1.0e-3], 16_000).unwrap();
    write_wav(&a, &p).unwrap();
    assert_eq!(load_wav(&p).unwrap(), a);
}

#[test]
fn fixation_csv_cases() {
    let dir = tempdir().unwrap();
    let p = dir.path().join("f.csv");
    fs::write(&p, "frame,x,y\n0,10,20\n").unwrap();
    let f = load_fixations(&p, 64, 64).unwrap();
    assert_eq!(f.frame(0), &[Fixation { x: 10.0, y: 20.0 }]);
    assert!(f.frame(1).is_empty());

    fs::write(&p, "frame,x,y\n").unwrap();
    let f = load_fixations(&p, 64, 64).unwrap();
    assert_eq!(f.total(), 0);
    assert!(f.frame(0).is_empty());

    fs::write(&p, "frame,x,y\n2,-1,5\n2,3,4\n").unwrap();
    let f = load_fixations(&p, 64, 64).unwrap();
    assert_eq!(f.dropped, 1);
    assert_eq!(f.total(), 1);

    fs::write(&p, "frame,x,y\n0,ten,20\n").unwrap();
    assert!(matches!(load_fixations(&p, 64, 64), Err(AppError::Format { .. })));
}

#[test]
fn fixations_round_trip() {
    let dir = tempdir().unwrap();
    let p = dir.path().join("f.csv");
    let mut set = FixationSet::new();
    set.push(0, Fixation { x: 1.5, y: 2.25 }, 10, 10);
    set.push(3, Fixation { x: 9.0, y: 0.0 }, 10, 10);
    write_fixations(&set, &p).unwrap();
    let back = load_fixations(&p, 10, 10).unwrap();
    assert_eq!(back, set);
}

#[test]
fn saliency_png_pixels_and_f32_round_trip() {
    let dir = tempdir().unwrap();
    let p = dir.path().join("000001.png");
    let map: SaliencyMap = Grid::from_vec(2, 2, vec![0.0, 1.0, 0.5, 0.123_456_79]).unwrap();
    write_saliency_map(&map, &p).unwrap();
    let png = image::open(&p).unwrap().to_luma8();
    assert_eq!(png.as_raw(), &vec![0, 255, 128, 31]);
    assert_eq!(load_saliency_map(&p).unwrap(), map);

    let zero: SaliencyMap = Grid::filled(2, 2, 0.0);
    write_saliency_map(&zero, &p).unwrap();
    assert!(image::open(&p).unwrap().to_luma8().iter().all(|&v| v == 0));
}

#[test]
fn unnormalised_or_unwritable_maps_are_rejected() {
    let dir = tempdir().unwrap();
    let map: SaliencyMap = Grid::filled(2, 2, 1.5);
    assert!(write_saliency_map(&map, &dir.path().join("a.png")).is_err());
    let ok: SaliencyMap = Grid::filled(2, 2, 0.5);
    assert!(write_saliency_map(&ok, &dir.path().join("missing/dir/a.png")).is_err());
}

#[test]
fn label_png_is_sixteen_bit() {
    let dir = tempdir().unwrap();
    let p = dir.path().join("l.png");
    let seg = SegmentationMap::new(Grid::from_vec(3, 1, vec![0, 1, 300]).unwrap());
    write_label_png(&seg, &p).unwrap();
    let img = image::open(&p).unwrap().to_luma16();
    assert_eq!(img.as_raw(), &vec![0u16, 1, 300]);
}

#[test]
fn flo_layout() {
    let dir = tempdir().unwrap();
    let p = dir.path().join("f.flo");
    let flow = FlowField {
        u: Grid::from_vec(2, 1, vec![1.0, -2.5]).unwrap(),
        v: Grid::from_vec(2, 1, vec![0.5, 3.0]).unwrap(),
        direction: FlowDirection::Mean,
        frame_index: 0,
    };
    write_flo(&flow, &p).unwrap();
    let bytes = fs::read(&p).unwrap();
    assert_eq!(&bytes[..4], b"PIEH");
    assert_eq!(bytes.len(), 12 + 16);
    assert_eq!(read_flo(&p).unwrap(), (2, 1, vec![(1.0, 0.5), (-2.5, 3.0)]));
}
