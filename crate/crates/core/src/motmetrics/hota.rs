//! Higher Order Tracking Accuracy.
//!
//! For every localization threshold α the score is `sqrt(DetA · AssA)`.
//! One matching per frame is shared by all thresholds: it maximizes IoU
//! weighted by how strongly each ground-truth/prediction id pair is aligned
//! over the whole sequence. Matched pairs below α are then discarded.

use super::assignment::min_cost_assignment;
use super::boxes::iou;
use super::trackset::TrackSet;
use super::{frame_pairs, IdIndex};
use crate::error::{FogError, Result};

/// 0.05, 0.10, …, 0.95.
pub fn alphas() -> Vec<f64> {
    (1..=19).map(|i| (5 * i) as f64 / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HotaScores {
    /// Percent, averaged over α.
    pub hota: f64,
    pub deta: f64,
    pub assa: f64,
    /// Per-α HOTA as fractions in `[0, 1]`.
    pub per_alpha: Vec<f64>,
}

pub fn hota_scores(gt: &TrackSet, pred: &TrackSet) -> Result<HotaScores> {
    let gi = IdIndex::new(gt);
    let pi = IdIndex::new(pred);
    let (ng, np) = (gi.len(), pi.len());
    let frames = frame_pairs(gt, pred);

    let n_gt_dets: usize = frames.iter().map(|(_, g, _)| g.len()).sum();
    let n_pred_dets: usize = frames.iter().map(|(_, _, p)| p.len()).sum();
    if n_gt_dets == 0 {
        return Err(FogError::UndefinedMetric(
            "HOTA needs at least one ground-truth box",
        ));
    }

    let alphas = alphas();
    if n_pred_dets == 0 {
        return Ok(HotaScores {
            hota: 0.0,
            deta: 0.0,
            assa: 0.0,
            per_alpha: vec![0.0; alphas.len()],
        });
    }

    // Similarities and soft id co-occurrence.
    let mut potential = vec![vec![0f64; np]; ng];
    let mut gt_id_count = vec![0f64; ng];
    let mut pred_id_count = vec![0f64; np];
    let mut sims = Vec::with_capacity(frames.len());
    for (_, gts, preds) in &frames {
        let sim: Vec<Vec<f64>> = gts
            .iter()
            .map(|g| preds.iter().map(|p| iou(&g.bbox, &p.bbox)).collect())
            .collect();
        let row_sum: Vec<f64> = sim.iter().map(|r| r.iter().sum()).collect();
        let col_sum: Vec<f64> = (0..preds.len())
            .map(|j| sim.iter().map(|r| r[j]).sum())
            .collect();
        for (a, g) in gts.iter().enumerate() {
            for (b, p) in preds.iter().enumerate() {
                let denom = row_sum[a] + col_sum[b] - sim[a][b];
                if denom > f64::EPSILON {
                    potential[gi.index(g.id)][pi.index(p.id)] += sim[a][b] / denom;
                }
            }
        }
        for g in gts {
            gt_id_count[gi.index(g.id)] += 1.0;
        }
        for p in preds {
            pred_id_count[pi.index(p.id)] += 1.0;
        }
        sims.push(sim);
    }
    let alignment: Vec<Vec<f64>> = (0..ng)
        .map(|g| {
            (0..np)
                .map(|p| potential[g][p] / (gt_id_count[g] + pred_id_count[p] - potential[g][p]))
                .collect()
        })
        .collect();

    let mut tp = vec![0usize; alphas.len()];
    let mut match_count = vec![vec![vec![0f64; np]; ng]; alphas.len()];
    for ((_, gts, preds), sim) in frames.iter().zip(&sims) {
        if gts.is_empty() || preds.is_empty() {
            continue;
        }
        let cost: Vec<Vec<f64>> = gts
            .iter()
            .enumerate()
            .map(|(a, g)| {
                preds
                    .iter()
                    .enumerate()
                    .map(|(b, p)| -alignment[gi.index(g.id)][pi.index(p.id)] * sim[a][b])
                    .collect()
            })
            .collect();
        for (a, b) in min_cost_assignment(&cost).into_iter().enumerate() {
            let Some(b) = b else { continue };
            let s = sim[a][b];
            let (g, p) = (gi.index(gts[a].id), pi.index(preds[b].id));
            for (k, &alpha) in alphas.iter().enumerate() {
                if s >= alpha - f64::EPSILON {
                    tp[k] += 1;
                    match_count[k][g][p] += 1.0;
                }
            }
        }
    }

    let mut per_alpha = Vec::with_capacity(alphas.len());
    let (mut deta_sum, mut assa_sum) = (0.0, 0.0);
    for k in 0..alphas.len() {
        let tpk = tp[k] as f64;
        let fnk = (n_gt_dets - tp[k]) as f64;
        let fpk = (n_pred_dets - tp[k]) as f64;
        let deta = tpk / (tpk + fnk + fpk).max(1.0);
        let mut ass = 0.0;
        for g in 0..ng {
            for p in 0..np {
                let m = match_count[k][g][p];
                if m > 0.0 {
                    ass += m * m / (gt_id_count[g] + pred_id_count[p] - m).max(1.0);
                }
            }
        }
        let assa = ass / tpk.max(1.0);
        deta_sum += deta;
        assa_sum += assa;
        per_alpha.push((deta * assa).sqrt());
    }
    let n = alphas.len() as f64;
    Ok(HotaScores {
        hota: 100.0 * per_alpha.iter().sum::<f64>() / n,
        deta: 100.0 * deta_sum / n,
        assa: 100.0 * assa_sum / n,
        per_alpha,
    })
}

pub fn hota(gt: &TrackSet, pred: &TrackSet) -> Result<f64> {
    Ok(hota_scores(gt, pred)?.hota)
}
