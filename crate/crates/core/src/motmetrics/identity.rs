//! IDF1: identity-level F1 under a global trajectory matching.

use super::assignment::min_cost_assignment;
use super::boxes::iou;
use super::trackset::TrackSet;
use super::{frame_pairs, IdIndex};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdScores {
    /// Percent.
    pub idf1: f64,
    pub idtp: usize,
    pub idfp: usize,
    pub idfn: usize,
}

/// Matches whole trajectories one-to-one so that the number of frames in
/// which a matched pair overlaps by at least `iou_threshold` is maximal.
pub fn id_scores(gt: &TrackSet, pred: &TrackSet, iou_threshold: f64) -> Result<IdScores> {
    super::check_threshold(iou_threshold)?;
    let gi = IdIndex::new(gt);
    let pi = IdIndex::new(pred);
    let mut overlap = vec![vec![0usize; pi.len()]; gi.len()];
    let (mut n_gt, mut n_pred) = (0usize, 0usize);

    for (_, gts, preds) in frame_pairs(gt, pred) {
        n_gt += gts.len();
        n_pred += preds.len();
        for g in &gts {
            for p in &preds {
                if iou(&g.bbox, &p.bbox) >= iou_threshold {
                    overlap[gi.index(g.id)][pi.index(p.id)] += 1;
                }
            }
        }
    }

    let cost: Vec<Vec<f64>> = overlap
        .iter()
        .map(|row| row.iter().map(|&c| -(c as f64)).collect())
        .collect();
    let idtp: usize = min_cost_assignment(&cost)
        .into_iter()
        .enumerate()
        .filter_map(|(g, p)| p.map(|p| overlap[g][p]))
        .sum();

    let idf1 = if n_gt + n_pred == 0 {
        100.0
    } else {
        100.0 * 2.0 * idtp as f64 / (n_gt + n_pred) as f64
    };
    Ok(IdScores {
        idf1,
        idtp,
        idfp: n_pred - idtp,
        idfn: n_gt - idtp,
    })
}

pub fn idf1(gt: &TrackSet, pred: &TrackSet, iou_threshold: f64) -> Result<f64> {
    Ok(id_scores(gt, pred, iou_threshold)?.idf1)
}
