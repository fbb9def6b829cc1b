//! Desk-scale robustness experiments.
//!
//! A synthetic scene of boxes moving at constant velocity stands in for real
//! footage. Fog lowers the transmission inside each box, which lowers the
//! chance that a simulated detector reports it. A greedy IoU tracker links
//! the surviving detections and the result is scored against ground truth.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Deserialize;

use crate::depthio::MetricDepth;
use crate::error::{FogError, Result};
use crate::fogmodel::TransmissionMap;
use crate::motmetrics::{
    evaluate, iou, BoundingBox, MetricReport, MotSchema, TrackRecord, TrackSet, NO_ID,
};
use crate::pipeline::{FogConfig, FogMode, Intensity};
use crate::raster::Field;
use crate::turbulence::turbulence_texture;

/// IoU needed to continue a track in the reference tracker.
pub const TRACKER_IOU: f64 = 0.3;
/// Frames a track may go unseen before it is dropped.
pub const TRACKER_MAX_GAP: u32 = 3;

/// One object moving at constant velocity.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct SceneObject {
    /// Top-left corner in frame 1.
    pub start: (f64, f64),
    /// Pixels per frame.
    pub velocity: (f64, f64),
    /// Normalized scene depth in `(0, 1]`.
    pub depth: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SyntheticScene {
    /// `(width, height)` in pixels.
    pub image_size: (usize, usize),
    pub n_frames: u32,
    /// `(width, height)` of every box.
    pub box_size: (f64, f64),
    pub objects: Vec<SceneObject>,
    pub seed: u64,
}

impl SyntheticScene {
    /// Samples `n_objects` objects that stay inside the image for all frames.
    pub fn random(
        n_objects: usize,
        n_frames: u32,
        image_size: (usize, usize),
        box_size: (f64, f64),
        depth_range: (f64, f64),
        max_speed: f64,
        seed: u64,
    ) -> Result<Self> {
        let (w, h) = (image_size.0 as f64, image_size.1 as f64);
        if box_size.0 > w || box_size.1 > h {
            return Err(FogError::InvalidScene("box larger than image".into()));
        }
        if !(0.0 < depth_range.0 && depth_range.0 <= depth_range.1 && depth_range.1 <= 1.0) {
            return Err(FogError::InvalidScene(format!(
                "depth range {depth_range:?} not within (0, 1]"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let span = n_frames.saturating_sub(1) as f64;
        let axis = |rng: &mut ChaCha8Rng, room: f64| -> (f64, f64) {
            // Speed limited so the full path fits in the free room.
            let limit = if span > 0.0 {
                max_speed.min(room / span)
            } else {
                0.0
            };
            let v = if limit > 0.0 {
                rng.gen_range(-limit..=limit)
            } else {
                0.0
            };
            let travel = v * span;
            let lo = (-travel).max(0.0);
            let hi = room - travel.max(0.0);
            let s = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
            (s, v)
        };
        let objects = (0..n_objects)
            .map(|_| {
                let (x, vx) = axis(&mut rng, w - box_size.0);
                let (y, vy) = axis(&mut rng, h - box_size.1);
                let depth = if depth_range.1 > depth_range.0 {
                    rng.gen_range(depth_range.0..=depth_range.1)
                } else {
                    depth_range.0
                };
                SceneObject {
                    start: (x, y),
                    velocity: (vx, vy),
                    depth,
                }
            })
            .collect();
        let scene = Self {
            image_size,
            n_frames,
            box_size,
            objects,
            seed,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn box_at(&self, object: usize, frame: u32) -> BoundingBox {
        let o = &self.objects[object];
        let k = (frame - 1) as f64;
        BoundingBox {
            left: o.start.0 + o.velocity.0 * k,
            top: o.start.1 + o.velocity.1 * k,
            width: self.box_size.0,
            height: self.box_size.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (w, h) = (self.image_size.0 as f64, self.image_size.1 as f64);
        if self.image_size.0 == 0 || self.image_size.1 == 0 || self.n_frames == 0 {
            return Err(FogError::InvalidScene("empty image or zero frames".into()));
        }
        if !(self.box_size.0 > 0.0 && self.box_size.1 > 0.0) {
            return Err(FogError::InvalidScene("box size must be positive".into()));
        }
        for (i, o) in self.objects.iter().enumerate() {
            if !(o.depth > 0.0 && o.depth <= 1.0) {
                return Err(FogError::InvalidScene(format!(
                    "object {} depth {} not in (0, 1]",
                    i + 1,
                    o.depth
                )));
            }
            // Linear motion: checking the end frames covers the whole path.
            for f in [1, self.n_frames] {
                let b = self.box_at(i, f);
                let eps = 1e-9;
                if b.left < -eps || b.top < -eps || b.right() > w + eps || b.bottom() > h + eps {
                    return Err(FogError::InvalidScene(format!(
                        "object {} leaves the image by frame {f}",
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Background depth: far (1.0) at the top row, 0.6 at the bottom.
fn background_depth(x: usize, y: usize, height: usize) -> f64 {
    let _ = x;
    1.0 - 0.4 * y as f64 / (height.max(2) - 1) as f64
}

/// Pixel index range covered by `[start, end)` on an axis of `len` pixels.
fn pixel_span(start: f64, end: f64, len: usize) -> std::ops::Range<usize> {
    let lo = start.floor().max(0.0) as usize;
    let hi = (end.ceil().max(0.0) as usize).min(len);
    lo.min(hi)..hi
}

/// Ground truth (ids 1..=n) and one normalized depth field per frame.
pub fn generate_scene(scene: &SyntheticScene) -> Result<(TrackSet, Vec<MetricDepth>)> {
    scene.validate()?;
    let (w, h) = scene.image_size;
    let mut records = Vec::with_capacity(scene.objects.len() * scene.n_frames as usize);
    let mut depths = Vec::with_capacity(scene.n_frames as usize);

    // Paint far objects first so nearer ones occlude them.
    let mut order: Vec<usize> = (0..scene.objects.len()).collect();
    order.sort_by(|&a, &b| scene.objects[b].depth.total_cmp(&scene.objects[a].depth));

    for frame in 1..=scene.n_frames {
        let mut values: Vec<f64> = (0..w * h)
            .map(|i| background_depth(i % w, i / w, h))
            .collect();
        for &i in &order {
            let b = scene.box_at(i, frame);
            for y in pixel_span(b.top, b.bottom(), h) {
                for x in pixel_span(b.left, b.right(), w) {
                    values[y * w + x] = scene.objects[i].depth;
                }
            }
        }
        depths.push(MetricDepth::normalized(Field::new(w, h, values)?)?);
        for i in 0..scene.objects.len() {
            records.push(TrackRecord::new(
                frame,
                i as i64 + 1,
                scene.box_at(i, frame),
            ));
        }
    }
    Ok((TrackSet::new(records, MotSchema::GroundTruth)?, depths))
}

/// Simulated detector response to fog.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default)]
pub struct DegradationModel {
    /// `p = clamp(slope · T̄ + intercept, 0, 1)`.
    pub slope: f64,
    pub intercept: f64,
    /// Standard deviation of box position jitter, pixels.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for DegradationModel {
    fn default() -> Self {
        Self {
            slope: 1.0,
            intercept: 0.0,
            noise_sigma: 0.0,
            seed: 0,
        }
    }
}

impl DegradationModel {
    pub fn keep_probability(&self, mean_transmission: f64) -> f64 {
        (self.slope * mean_transmission + self.intercept).clamp(0.0, 1.0)
    }
}

/// Mean transmission over the pixels a box covers. Boxes entirely outside
/// the map count as unobstructed.
pub fn mean_box_transmission(t: &TransmissionMap, b: &BoundingBox) -> f64 {
    let f = t.field();
    let (mut sum, mut n) = (0.0, 0usize);
    for y in pixel_span(b.top, b.bottom(), f.height()) {
        for x in pixel_span(b.left, b.right(), f.width()) {
            sum += f.get(x, y);
            n += 1;
        }
    }
    if n == 0 {
        1.0
    } else {
        sum / n as f64
    }
}

/// Keeps each ground-truth box with probability `p(T̄)`, jitters it, and
/// strips its identity.
///
/// One uniform and two normal draws are consumed per box whether or not it
/// is kept, so runs that differ only in transmission see the same random
/// numbers.
pub fn degrade_detections(
    gt: &TrackSet,
    transmission: &[TransmissionMap],
    model: &DegradationModel,
) -> Result<TrackSet> {
    if !(model.noise_sigma >= 0.0 && model.noise_sigma.is_finite()) {
        return Err(FogError::InvalidConfig(format!(
            "noise sigma {} must be >= 0",
            model.noise_sigma
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let jitter = Normal::new(0.0, model.noise_sigma).expect("sigma validated");
    let mut out = Vec::new();
    for (frame, records) in gt.by_frame() {
        let t = transmission.get(frame as usize - 1).ok_or_else(|| {
            FogError::InvalidConfig(format!("no transmission map for frame {frame}"))
        })?;
        for r in records {
            let p = model.keep_probability(mean_box_transmission(t, &r.bbox));
            let u: f64 = rng.gen();
            let (dx, dy) = (jitter.sample(&mut rng), jitter.sample(&mut rng));
            if u < p {
                out.push(TrackRecord {
                    id: NO_ID,
                    bbox: r.bbox.translated(dx, dy),
                    ..r
                });
            }
        }
    }
    TrackSet::new(out, MotSchema::Results)
}

/// Greedy frame-to-frame IoU tracker.
///
/// Each frame, live tracks and detections are paired in order of descending
/// IoU (at least [`TRACKER_IOU`]); leftover detections open new tracks, and
/// tracks unseen for more than [`TRACKER_MAX_GAP`] frames are dropped.
pub fn reference_tracker(dets: &TrackSet) -> TrackSet {
    struct Live {
        id: i64,
        last: BoundingBox,
        seen: u32,
    }
    let mut live: Vec<Live> = Vec::new();
    let mut next_id = 1i64;
    let mut out = Vec::with_capacity(dets.len());

    for (frame, frame_dets) in dets.by_frame() {
        live.retain(|t| frame - t.seen - 1 <= TRACKER_MAX_GAP);

        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (ti, t) in live.iter().enumerate() {
            for (di, d) in frame_dets.iter().enumerate() {
                let s = iou(&t.last, &d.bbox);
                if s >= TRACKER_IOU {
                    pairs.push((s, ti, di));
                }
            }
        }
        pairs.sort_by(|a, b| {
            b.0.total_cmp(&a.0)
                .then(live[a.1].id.cmp(&live[b.1].id))
                .then(a.2.cmp(&b.2))
        });

        let mut track_used = vec![false; live.len()];
        let mut det_id: Vec<Option<i64>> = vec![None; frame_dets.len()];
        for (_, ti, di) in pairs {
            if track_used[ti] || det_id[di].is_some() {
                continue;
            }
            track_used[ti] = true;
            det_id[di] = Some(live[ti].id);
            live[ti].last = frame_dets[di].bbox;
            live[ti].seen = frame;
        }
        for (di, d) in frame_dets.iter().enumerate() {
            let id = match det_id[di] {
                Some(id) => id,
                None => {
                    let id = next_id;
                    next_id += 1;
                    live.push(Live {
                        id,
                        last: d.bbox,
                        seen: frame,
                    });
                    id
                }
            };
            out.push(TrackRecord { id, ..*d });
        }
    }
    TrackSet::new(out, MotSchema::Results).expect("tracker assigns unique ids per frame")
}

/// Everything a sweep needs besides the fog levels.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSetup {
    pub scene: SyntheticScene,
    pub degradation: DegradationModel,
    pub iou_threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub condition: String,
    /// Mean transmission over all pixels and frames.
    pub mean_transmission: f64,
    pub detections: usize,
    pub metrics: MetricReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "condition,hota,mota,motp,idf1,id_sw,fp,fn,detections,mean_transmission\n",
        );
        for r in &self.rows {
            let m = &r.metrics;
            let _ = writeln!(
                s,
                "{},{:.6},{:.6},{:.6},{:.6},{},{},{},{},{:.6}",
                r.condition,
                m.hota,
                m.mota,
                m.motp,
                m.idf1,
                m.id_switches,
                m.false_positives,
                m.false_negatives,
                r.detections,
                r.mean_transmission
            );
        }
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::from(
            "| Condition | HOTA | MOTA | MOTP | IDF1 | ID_Sw |\n|---|---:|---:|---:|---:|---:|\n",
        );
        for r in &self.rows {
            let m = &r.metrics;
            let _ = writeln!(
                s,
                "| {} | {:.2} | {:.2} | {:.2} | {:.2} | {} |",
                r.condition, m.hota, m.mota, m.motp, m.idf1, m.id_switches
            );
        }
        s
    }
}

fn condition_label(cfg: &FogConfig) -> String {
    match (cfg.beta_override, cfg.intensity) {
        (Some(b), _) => format!("beta {b}"),
        (None, Intensity::Level(l)) => format!("Fog {l}"),
        (None, Intensity::Visibility(v)) => format!("Visibility {v}m"),
    }
}

fn run_condition(
    setup: &SweepSetup,
    gt: &TrackSet,
    condition: String,
    transmissions: &[TransmissionMap],
) -> Result<SweepRow> {
    let dets = degrade_detections(gt, transmissions, &setup.degradation)?;
    let tracks = reference_tracker(&dets);
    let metrics = evaluate(gt, &tracks, setup.iou_threshold)?;
    let mean_transmission =
        transmissions.iter().map(TransmissionMap::mean).sum::<f64>() / transmissions.len() as f64;
    Ok(SweepRow {
        condition,
        mean_transmission,
        detections: dets.len(),
        metrics,
    })
}

/// Scores the scene without fog and then under each configuration.
///
/// Configurations are applied to the scene's normalized depth, so
/// intensities are expressed as levels (or explicit attenuation overrides).
pub fn sweep(setup: &SweepSetup, levels: &[FogConfig]) -> Result<SweepReport> {
    let (gt, depths) = generate_scene(&setup.scene)?;
    let (w, h) = setup.scene.image_size;

    let clear: Vec<TransmissionMap> = depths
        .iter()
        .map(|_| TransmissionMap::clear(w, h))
        .collect();
    let mut rows = vec![run_condition(setup, &gt, "Clear".into(), &clear)?];

    for cfg in levels {
        if cfg.calibration.is_some() {
            return Err(FogError::InvalidConfig(
                "synthetic scenes use normalized depth; drop the scene reference".into(),
            ));
        }
        cfg.validate()?;
        let att = cfg.attenuation()?;
        let tau = match cfg.mode {
            FogMode::Heterogeneous => Some(turbulence_texture(
                w,
                h,
                cfg.octaves,
                cfg.seed,
                cfg.brightness,
            )?),
            FogMode::Homogeneous => None,
        };
        let transmissions = depths
            .iter()
            .map(|d| cfg.transmission(d, &att, tau.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        rows.push(run_condition(
            setup,
            &gt,
            condition_label(cfg),
            &transmissions,
        )?);
    }
    Ok(SweepReport { rows })
}

/// Scene description as read from a sweep config file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub scene: SceneSection,
    #[serde(default)]
    pub degradation: DegradationModel,
    #[serde(default)]
    pub fog: FogSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSection {
    pub image_size: (usize, usize),
    pub n_frames: u32,
    pub box_size: (f64, f64),
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Explicit objects; when absent, `n_objects` are sampled from `seed`.
    #[serde(default)]
    pub objects: Option<Vec<SceneObject>>,
    #[serde(default)]
    pub n_objects: Option<usize>,
    #[serde(default = "default_depth_range")]
    pub depth_range: (f64, f64),
    #[serde(default = "default_max_speed")]
    pub max_speed: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FogSection {
    pub heterogeneous: bool,
    pub seed: u64,
    pub iou_threshold: f64,
}

impl Default for FogSection {
    fn default() -> Self {
        Self {
            heterogeneous: false,
            seed: 0,
            iou_threshold: crate::motmetrics::DEFAULT_IOU_THRESHOLD,
        }
    }
}

fn default_seed() -> u64 {
    0
}

fn default_depth_range() -> (f64, f64) {
    (0.1, 0.6)
}

fn default_max_speed() -> f64 {
    2.0
}

impl SceneFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| FogError::InvalidConfig(format!("scene file: {e}")))
    }

    pub fn setup(&self) -> Result<SweepSetup> {
        let s = &self.scene;
        let scene = match (&s.objects, s.n_objects) {
            (Some(objects), _) => {
                let scene = SyntheticScene {
                    image_size: s.image_size,
                    n_frames: s.n_frames,
                    box_size: s.box_size,
                    objects: objects.clone(),
                    seed: s.seed,
                };
                scene.validate()?;
                scene
            }
            (None, Some(n)) => SyntheticScene::random(
                n,
                s.n_frames,
                s.image_size,
                s.box_size,
                s.depth_range,
                s.max_speed,
                s.seed,
            )?,
            (None, None) => {
                return Err(FogError::InvalidConfig(
                    "scene needs `objects` or `n_objects`".into(),
                ))
            }
        };
        Ok(SweepSetup {
            scene,
            degradation: self.degradation,
            iou_threshold: self.fog.iou_threshold,
        })
    }

    /// One fog configuration per requested level.
    pub fn level_configs(&self, levels: &[u8]) -> Vec<FogConfig> {
        let mode = if self.fog.heterogeneous {
            FogMode::Heterogeneous
        } else {
            FogMode::Homogeneous
        };
        levels
            .iter()
            .map(|&l| FogConfig::new(mode, Intensity::Level(l), self.fog.seed))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_object(velocity: (f64, f64)) -> SyntheticScene {
        SyntheticScene {
            image_size: (100, 80),
            n_frames: 10,
            box_size: (10.0, 20.0),
            objects: vec![SceneObject {
                start: (5.0, 5.0),
                velocity,
                depth: 0.5,
            }],
            seed: 0,
        }
    }

    fn det(frame: u32, l: f64, t: f64) -> TrackRecord {
        TrackRecord::new(frame, NO_ID, BoundingBox::new(l, t, 10.0, 10.0).unwrap())
    }

    #[test]
    fn boxes_translate_one_pixel_per_frame() {
        let (gt, depths) = generate_scene(&one_object((1.0, 0.0))).unwrap();
        assert_eq!(gt.len(), 10);
        assert_eq!(depths.len(), 10);
        for r in gt.records() {
            assert_eq!(r.bbox.left, 5.0 + (r.frame - 1) as f64);
            assert_eq!(r.bbox.top, 5.0);
        }
        // Object depth painted inside the box, background elsewhere.
        assert_eq!(depths[0].field().get(6, 6), 0.5);
        assert_eq!(depths[0].field().get(50, 0), 1.0);
    }

    #[test]
    fn exiting_object_rejected() {
        let scene = one_object((20.0, 0.0));
        assert!(matches!(
            generate_scene(&scene),
            Err(FogError::InvalidScene(_))
        ));
    }

    #[test]
    fn random_scene_counts_and_determinism() {
        let a =
            SyntheticScene::random(3, 10, (200, 150), (20.0, 40.0), (0.2, 0.8), 3.0, 11).unwrap();
        let b =
            SyntheticScene::random(3, 10, (200, 150), (20.0, 40.0), (0.2, 0.8), 3.0, 11).unwrap();
        assert_eq!(a, b);
        let (gt, _) = generate_scene(&a).unwrap();
        assert_eq!(gt.len(), 30);
        assert_eq!(gt.ids(), vec![1, 2, 3]);
        assert_eq!(gt, generate_scene(&b).unwrap().0);
    }

    #[test]
    fn full_transmission_keeps_everything_exactly() {
        let scene =
            SyntheticScene::random(4, 12, (160, 120), (16.0, 32.0), (0.2, 0.8), 2.0, 5).unwrap();
        let (gt, depths) = generate_scene(&scene).unwrap();
        let clear: Vec<_> = depths
            .iter()
            .map(|_| TransmissionMap::clear(160, 120))
            .collect();
        let dets = degrade_detections(&gt, &clear, &DegradationModel::default()).unwrap();
        assert_eq!(dets.len(), gt.len());
        let mut a: Vec<_> = gt
            .records()
            .iter()
            .map(|r| (r.frame, r.bbox.left.to_bits(), r.bbox.top.to_bits()))
            .collect();
        let mut b: Vec<_> = dets
            .records()
            .iter()
            .map(|r| (r.frame, r.bbox.left.to_bits(), r.bbox.top.to_bits()))
            .collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
        assert!(dets.records().iter().all(|r| r.id == NO_ID));
    }

    #[test]
    fn zero_transmission_drops_everything() {
        let (gt, _) = generate_scene(&one_object((1.0, 1.0))).unwrap();
        let dark: Vec<_> = (0..10)
            .map(|_| TransmissionMap::from_field_unchecked(Field::filled(100, 80, 0.0)))
            .collect();
        let dets = degrade_detections(&gt, &dark, &DegradationModel::default()).unwrap();
        assert!(dets.is_empty());
    }

    #[test]
    fn kept_fraction_matches_expectation() {
        // 10 boxes per frame over 100 frames with mixed transmission levels.
        let mut records = Vec::new();
        for f in 1..=100u32 {
            for i in 0..10 {
                records.push(TrackRecord::new(
                    f,
                    i + 1,
                    BoundingBox::new(i as f64 * 10.0, 0.0, 10.0, 10.0).unwrap(),
                ));
            }
        }
        let gt = TrackSet::new(records, MotSchema::GroundTruth).unwrap();
        let t = TransmissionMap::new(Field::from_fn(100, 10, |x, _| {
            0.05 + 0.09 * (x / 10) as f64
        }))
        .unwrap();
        let maps = vec![t.clone(); 100];
        let probs: Vec<f64> = (0..10).map(|i| 0.05 + 0.09 * i as f64).collect();
        let expected: f64 = probs.iter().sum::<f64>() * 100.0;
        let var: f64 = probs.iter().map(|p| p * (1.0 - p)).sum::<f64>() * 100.0;
        let dets = degrade_detections(
            &gt,
            &maps,
            &DegradationModel {
                seed: 99,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(
            (dets.len() as f64 - expected).abs() <= 3.0 * var.sqrt(),
            "{} vs {expected}",
            dets.len()
        );
    }

    #[test]
    fn tracker_single_object_one_track() {
        let (gt, _) = generate_scene(&one_object((1.0, 0.5))).unwrap();
        let dets = TrackSet::new(
            gt.records()
                .iter()
                .map(|r| TrackRecord { id: NO_ID, ..*r })
                .collect(),
            MotSchema::Results,
        )
        .unwrap();
        let tracks = reference_tracker(&dets);
        assert_eq!(tracks.ids(), vec![1]);
        assert_eq!(tracks.len(), 10);
    }

    #[test]
    fn tracker_keeps_far_objects_apart() {
        let mut recs = Vec::new();
        for f in 1..=8u32 {
            recs.push(det(f, f as f64, 0.0));
            recs.push(det(f, 100.0 - f as f64, 50.0));
        }
        let tracks = reference_tracker(&TrackSet::new(recs, MotSchema::Results).unwrap());
        assert_eq!(tracks.ids(), vec![1, 2]);
        for r in tracks.records() {
            let expected = if r.bbox.top == 0.0 { 1 } else { 2 };
            assert_eq!(r.id, expected);
        }
    }

    #[test]
    fn tracker_hand_traced_crossing_with_gap() {
        // A moves right 4 px/frame, B moves left 4 px/frame on the same row.
        // Frames 1-2: both visible. Frame 3: only B. Frame 4: both.
        // Frame 5 A is gone; frame 10 A reappears after a 5-frame gap.
        let recs = vec![
            det(1, 0.0, 0.0),
            det(1, 40.0, 0.0),
            det(2, 4.0, 0.0),
            det(2, 36.0, 0.0),
            det(3, 32.0, 0.0),
            det(4, 12.0, 0.0),
            det(4, 28.0, 0.0),
            det(5, 24.0, 0.0),
            det(10, 14.0, 0.0),
        ];
        let tracks = reference_tracker(&TrackSet::new(recs, MotSchema::Results).unwrap());
        let id_at = |f: u32, l: f64| {
            tracks
                .records()
                .iter()
                .find(|r| r.frame == f && r.bbox.left == l)
                .unwrap()
                .id
        };
        // Frame 1: two new tracks in det order (sorted by left): 1 at 0, 2 at 40.
        assert_eq!((id_at(1, 0.0), id_at(1, 40.0)), (1, 2));
        // Frame 2: IoU(0->4)=6/14, IoU(40->36)=6/14: both continue.
        assert_eq!((id_at(2, 4.0), id_at(2, 36.0)), (1, 2));
        // Frame 3: B at 32 overlaps track 2 (IoU 6/14) and not track 1.
        assert_eq!(id_at(3, 32.0), 2);
        // Frame 4: 12 vs track1 last 4 -> IoU 2/18 < 0.3, new track 3.
        // 28 vs track2 last 32 -> 6/14 continues.
        assert_eq!((id_at(4, 12.0), id_at(4, 28.0)), (3, 2));
        // Frame 5: 24 vs track2 (28): 6/14; vs track3 (12): 0.
        assert_eq!(id_at(5, 24.0), 2);
        // Frame 10: track 3 last seen at 4 (gap 5 > 3) is dropped; new id.
        assert_eq!(id_at(10, 14.0), 4);
    }

    #[test]
    fn sweep_with_no_levels_has_clear_row_only() {
        let setup = SweepSetup {
            scene: SyntheticScene::random(2, 10, (120, 90), (12.0, 24.0), (0.2, 0.6), 2.0, 1)
                .unwrap(),
            degradation: DegradationModel::default(),
            iou_threshold: 0.5,
        };
        let r = sweep(&setup, &[]).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].condition, "Clear");
        assert!(r.rows[0].metrics.hota >= 99.0);
        assert!(r.to_markdown().contains("| Clear |"));
        assert_eq!(r.to_csv().lines().count(), 2);
    }

    #[test]
    fn scene_file_parses() {
        let text = r#"
            [scene]
            image_size = [320, 240]
            n_frames = 20
            box_size = [20.0, 40.0]
            n_objects = 3
            seed = 4

            [degradation]
            noise_sigma = 0.5
            seed = 9

            [fog]
            heterogeneous = true
            seed = 2
        "#;
        let f = SceneFile::parse(text).unwrap();
        let setup = f.setup().unwrap();
        assert_eq!(setup.scene.objects.len(), 3);
        assert_eq!(setup.degradation.noise_sigma, 0.5);
        assert_eq!(setup.degradation.slope, 1.0);
        let cfgs = f.level_configs(&[1, 3]);
        assert_eq!(cfgs.len(), 2);
        assert_eq!(cfgs[1].mode, FogMode::Heterogeneous);
        assert!(SceneFile::parse("[scene]\nbogus = 1\n").is_err());
    }
}
