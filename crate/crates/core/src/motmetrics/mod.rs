//! Multi-object tracking metrics: CLEAR-MOT, IDF1 and HOTA.

mod assignment;
mod boxes;
mod clear;
mod hota;
mod identity;
mod trackset;

use std::collections::{BTreeSet, HashMap};

pub use assignment::{max_matching_min_cost, min_cost_assignment};
pub use boxes::{iou, BoundingBox};
pub use clear::{clear_mot, ClearMot};
pub use hota::{alphas, hota, hota_scores, HotaScores};
pub use identity::{id_scores, idf1, IdScores};
pub use trackset::{
    load_mot_file, parse_mot, MotSchema, TrackRecord, TrackSet, NO_ID, PEDESTRIAN_CLASS,
};

use crate::error::{FogError, Result};

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

/// Scores for one ground-truth/prediction pair of track sets. Ratios are
/// percentages.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub hota: f64,
    pub deta: f64,
    pub assa: f64,
    pub mota: f64,
    pub motp: f64,
    pub idf1: f64,
    pub id_switches: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub gt_count: usize,
}

/// Computes every metric. Predictions must carry identities.
pub fn evaluate(gt: &TrackSet, pred: &TrackSet, iou_threshold: f64) -> Result<MetricReport> {
    if pred.records().iter().any(|r| r.id < 0) || gt.records().iter().any(|r| r.id < 0) {
        return Err(FogError::InvalidTrackSet(
            "evaluation requires non-negative track ids".into(),
        ));
    }
    let c = clear_mot(gt, pred, iou_threshold)?;
    let h = hota_scores(gt, pred)?;
    let id = id_scores(gt, pred, iou_threshold)?;
    Ok(MetricReport {
        hota: h.hota,
        deta: h.deta,
        assa: h.assa,
        mota: c.mota,
        motp: c.motp,
        idf1: id.idf1,
        id_switches: c.id_switches,
        false_positives: c.false_positives,
        false_negatives: c.false_negatives,
        gt_count: c.gt_count,
    })
}

fn check_threshold(t: f64) -> Result<()> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(FogError::InvalidConfig(format!(
            "IoU threshold must be in (0, 1], got {t}"
        )));
    }
    Ok(())
}

type FrameGroup = (u32, Vec<TrackRecord>, Vec<TrackRecord>);

/// Every frame present in either set, in order, with both sides' records.
fn frame_pairs(gt: &TrackSet, pred: &TrackSet) -> Vec<FrameGroup> {
    let mut g = gt.by_frame();
    let mut p = pred.by_frame();
    let frames: BTreeSet<u32> = g.keys().chain(p.keys()).copied().collect();
    frames
        .into_iter()
        .map(|f| {
            (
                f,
                g.remove(&f).unwrap_or_default(),
                p.remove(&f).unwrap_or_default(),
            )
        })
        .collect()
}

/// Dense indices for the ids of one track set.
struct IdIndex(HashMap<i64, usize>);

impl IdIndex {
    fn new(set: &TrackSet) -> Self {
        Self(
            set.ids()
                .into_iter()
                .enumerate()
                .map(|(i, id)| (id, i))
                .collect(),
        )
    }

    fn index(&self, id: i64) -> usize {
        self.0[&id]
    }

    fn len(&self) -> usize {
        self.0.len()
    }
}
