//! CLEAR-MOT accuracy and precision.

use std::collections::HashMap;

use super::assignment::max_matching_min_cost;
use super::boxes::iou;
use super::frame_pairs;
use super::trackset::TrackSet;
use crate::error::{FogError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClearMot {
    /// Percent; negative when errors outnumber ground-truth boxes.
    pub mota: f64,
    /// Mean IoU of matched pairs, percent.
    pub motp: f64,
    pub matches: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub id_switches: usize,
    pub gt_count: usize,
}

/// Frame-by-frame CLEAR matching.
///
/// Each ground-truth track keeps its last matched prediction while the two
/// still overlap by at least `iou_threshold`. Remaining boxes are matched by
/// maximum cardinality, then minimum total `1 − IoU`, over pairs at or above
/// the threshold. A switch is counted whenever a ground-truth track is matched
/// to a different prediction id than at its previous match.
pub fn clear_mot(gt: &TrackSet, pred: &TrackSet, iou_threshold: f64) -> Result<ClearMot> {
    super::check_threshold(iou_threshold)?;
    let mut last: HashMap<i64, i64> = HashMap::new();
    let (mut matches, mut fp, mut fn_, mut idsw) = (0usize, 0usize, 0usize, 0usize);
    let mut iou_sum = 0.0;
    let mut gt_count = 0usize;

    for (_, gts, preds) in frame_pairs(gt, pred) {
        gt_count += gts.len();
        let sim: Vec<Vec<f64>> = gts
            .iter()
            .map(|g| preds.iter().map(|p| iou(&g.bbox, &p.bbox)).collect())
            .collect();
        let mut gt_used = vec![false; gts.len()];
        let mut pred_used = vec![false; preds.len()];
        let mut pairs = Vec::new();

        for (gi, g) in gts.iter().enumerate() {
            let Some(&pid) = last.get(&g.id) else {
                continue;
            };
            if let Some(pj) = preds.iter().position(|p| p.id == pid) {
                if !pred_used[pj] && sim[gi][pj] >= iou_threshold {
                    gt_used[gi] = true;
                    pred_used[pj] = true;
                    pairs.push((gi, pj));
                }
            }
        }

        let free_g: Vec<usize> = (0..gts.len()).filter(|&i| !gt_used[i]).collect();
        let free_p: Vec<usize> = (0..preds.len()).filter(|&j| !pred_used[j]).collect();
        let fresh = max_matching_min_cost(free_g.len(), free_p.len(), |a, b| {
            let s = sim[free_g[a]][free_p[b]];
            (s >= iou_threshold).then_some(1.0 - s)
        });
        for (a, b) in fresh {
            let (gi, pj) = (free_g[a], free_p[b]);
            if let Some(&prev) = last.get(&gts[gi].id) {
                if prev != preds[pj].id {
                    idsw += 1;
                }
            }
            pairs.push((gi, pj));
        }

        for &(gi, pj) in &pairs {
            last.insert(gts[gi].id, preds[pj].id);
            iou_sum += sim[gi][pj];
        }
        matches += pairs.len();
        fn_ += gts.len() - pairs.len();
        fp += preds.len() - pairs.len();
    }

    if gt_count == 0 {
        return Err(FogError::UndefinedMetric(
            "MOTA needs at least one ground-truth box",
        ));
    }
    Ok(ClearMot {
        mota: 100.0 * (1.0 - (fn_ + fp + idsw) as f64 / gt_count as f64),
        motp: if matches > 0 {
            100.0 * iou_sum / matches as f64
        } else {
            0.0
        },
        matches,
        false_positives: fp,
        false_negatives: fn_,
        id_switches: idsw,
        gt_count,
    })
}
