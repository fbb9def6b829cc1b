//! Shared fixtures and brute-force oracles for integration tests.

#![allow(dead_code)]

pub mod oracle;

use std::fs;
use std::path::{Path, PathBuf};

use fogsim::depthio::write_pfm;
use fogsim::motmetrics::{BoundingBox, MotSchema, TrackRecord, TrackSet};
use fogsim::{Field, RasterImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_image(w: usize, h: usize, rng: &mut ChaCha8Rng) -> RasterImage {
    RasterImage::new(w, h, (0..w * h * 3).map(|_| rng.gen::<f32>()).collect()).unwrap()
}

/// Writes a MOT17-style sequence with JPEG or PNG frames, PFM depth and a
/// ground-truth file.
pub fn write_sequence(
    root: &Path,
    name: &str,
    frames: usize,
    w: usize,
    h: usize,
    ext: &str,
    seed: u64,
) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seq = root.join(name);
    for d in ["img1", "depth", "gt"] {
        fs::create_dir_all(seq.join(d)).unwrap();
    }
    fs::write(
        seq.join("seqinfo.ini"),
        format!(
            "[Sequence]\nname={name}\nimDir=img1\nframeRate=30\nseqLength={frames}\nimWidth={w}\nimHeight={h}\nimExt=.{ext}\n"
        ),
    )
    .unwrap();
    let mut gt = String::new();
    for f in 1..=frames {
        gt.push_str(&format!("{f},1,{},{},10,20,1,1,1\n", 2 + f, 4));
        gt.push_str(&format!("{f},2,30,{},12,18,1,1,0.5\n", 3 + f % 3));
    }
    fs::write(seq.join("gt/gt.txt"), gt).unwrap();

    for f in 1..=frames {
        let img = RasterImage::new(
            w,
            h,
            (0..w * h * 3)
                .map(|i| {
                    let (p, c) = (i / 3, i % 3);
                    let (x, y) = (p % w, p / w);
                    ((x * 3 + y * 2 + c * 40 + f * 5) % 256) as f32 / 255.0 * 0.8
                        + rng.gen::<f32>() * 0.2
                })
                .collect(),
        )
        .unwrap();
        let path = seq.join(format!("img1/{f:06}.{ext}"));
        match ext {
            "png" => img.save_png(&path).unwrap(),
            _ => img.save_jpeg(&path, 95).unwrap(),
        }
        let depth = Field::from_fn(w, h, |x, y| {
            0.2 + 3.0 * y as f64 / h as f64 + 0.01 * ((x + f) % 7) as f64
        });
        write_pfm(&seq.join(format!("depth/{f:06}.pfm")), &depth).unwrap();
    }
    seq
}

fn jittered(b: BoundingBox, rng: &mut ChaCha8Rng, s: f64) -> BoundingBox {
    BoundingBox::new(
        b.left + rng.gen_range(-s..=s),
        b.top + rng.gen_range(-s..=s),
        (b.width + rng.gen_range(-s..=s)).max(1.0),
        (b.height + rng.gen_range(-s..=s)).max(1.0),
    )
    .unwrap()
}

/// Random ground truth (≤5 tracks, ≤20 frames) and a noisy prediction with
/// misses, re-identifications, identity swaps and false positives.
pub fn random_instance(rng: &mut ChaCha8Rng) -> (TrackSet, TrackSet) {
    let n_frames: u32 = rng.gen_range(1..=20);
    let n_tracks: i64 = rng.gen_range(1..=5);
    let mut gt = Vec::new();
    let mut pred = Vec::new();

    // Prediction id per track, possibly changing once (re-id) mid-sequence.
    let reid_at: Vec<Option<u32>> = (0..n_tracks)
        .map(|_| rng.gen_bool(0.3).then(|| rng.gen_range(1..=n_frames)))
        .collect();
    let swap = (n_tracks >= 2 && rng.gen_bool(0.3)).then(|| {
        let a = rng.gen_range(0..n_tracks);
        let b = (a + rng.gen_range(1..n_tracks)) % n_tracks;
        (a, b, rng.gen_range(1..=n_frames))
    });

    for t in 0..n_tracks {
        let start = rng.gen_range(1..=n_frames);
        let end = rng.gen_range(start..=n_frames);
        // Tracks are placed near each other so boxes overlap and compete.
        let mut b = BoundingBox::new(
            rng.gen_range(0.0..40.0),
            rng.gen_range(0.0..40.0),
            rng.gen_range(8.0..20.0),
            rng.gen_range(8.0..20.0),
        )
        .unwrap();
        let v = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        for f in start..=end {
            gt.push(TrackRecord::new(f, t + 1, b));
            if rng.gen_bool(0.85) {
                let mut owner = t;
                if let Some((a, bb, at)) = swap {
                    if f >= at {
                        owner = if t == a {
                            bb
                        } else if t == bb {
                            a
                        } else {
                            t
                        };
                    }
                }
                let reid = reid_at[owner as usize].is_some_and(|r| f >= r);
                let id = 10 * (owner + 1) + reid as i64;
                pred.push(TrackRecord::new(f, id, jittered(b, rng, 2.5)));
            }
            b = b.translated(
                v.0 + rng.gen_range(-1.0..1.0),
                v.1 + rng.gen_range(-1.0..1.0),
            );
        }
    }
    // One false-positive track.
    if rng.gen_bool(0.5) {
        let mut b = BoundingBox::new(
            rng.gen_range(0.0..40.0),
            rng.gen_range(0.0..40.0),
            12.0,
            12.0,
        )
        .unwrap();
        for f in 1..=n_frames {
            if rng.gen_bool(0.4) {
                pred.push(TrackRecord::new(f, 99, b));
            }
            b = b.translated(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        }
    }
    (
        TrackSet::new(gt, MotSchema::GroundTruth).unwrap(),
        TrackSet::new(pred, MotSchema::Results).unwrap(),
    )
}
