//! Exhaustive reference implementations of the tracking metrics.
//!
//! Every matching step enumerates all partial matchings instead of solving
//! an assignment problem, and no code is shared with the library beyond the
//! record types.

use std::collections::{BTreeMap, BTreeSet};

use fogsim::motmetrics::{TrackRecord, TrackSet};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleScores {
    pub mota: f64,
    pub motp: f64,
    pub idf1: f64,
    pub hota: f64,
    pub id_switches: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

pub fn overlap(a: &TrackRecord, b: &TrackRecord) -> f64 {
    let (a, b) = (a.bbox, b.bbox);
    let x1 = if a.left > b.left { a.left } else { b.left };
    let y1 = if a.top > b.top { a.top } else { b.top };
    let x2 = if a.left + a.width < b.left + b.width {
        a.left + a.width
    } else {
        b.left + b.width
    };
    let y2 = if a.top + a.height < b.top + b.height {
        a.top + a.height
    } else {
        b.top + b.height
    };
    if x2 <= x1 || y2 <= y1 {
        return 0.0;
    }
    let inter = (x2 - x1) * (y2 - y1);
    inter / (a.width * a.height + b.width * b.height - inter)
}

/// All partial matchings between `0..n` and `0..m`.
pub fn all_matchings(n: usize, m: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(
        i: usize,
        n: usize,
        used: &mut Vec<bool>,
        cur: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        rec(i + 1, n, used, cur, out);
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                cur.push((i, j));
                rec(i + 1, n, used, cur, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(0, n, &mut vec![false; m], &mut Vec::new(), &mut out);
    out
}

fn frames(set: &TrackSet) -> BTreeMap<u32, Vec<TrackRecord>> {
    let mut map: BTreeMap<u32, Vec<TrackRecord>> = BTreeMap::new();
    for r in set.records() {
        map.entry(r.frame).or_default().push(*r);
    }
    for v in map.values_mut() {
        v.sort_by_key(|r| r.id);
    }
    map
}

fn all_frames(gt: &TrackSet, pred: &TrackSet) -> Vec<(Vec<TrackRecord>, Vec<TrackRecord>)> {
    let g = frames(gt);
    let p = frames(pred);
    let keys: BTreeSet<u32> = g.keys().chain(p.keys()).copied().collect();
    keys.into_iter()
        .map(|k| {
            (
                g.get(&k).cloned().unwrap_or_default(),
                p.get(&k).cloned().unwrap_or_default(),
            )
        })
        .collect()
}

pub fn clear(gt: &TrackSet, pred: &TrackSet, thr: f64) -> (f64, f64, usize, usize, usize) {
    let mut previous: BTreeMap<i64, i64> = BTreeMap::new();
    let (mut tp, mut fp, mut fn_, mut sw, mut total, mut sum) = (0, 0, 0, 0, 0, 0.0);
    for (gts, preds) in all_frames(gt, pred) {
        total += gts.len();
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for (i, g) in gts.iter().enumerate() {
            if let Some(pid) = previous.get(&g.id) {
                for (j, p) in preds.iter().enumerate() {
                    if p.id == *pid && !pairs.iter().any(|&(_, jj)| jj == j) && overlap(g, p) >= thr
                    {
                        pairs.push((i, j));
                    }
                }
            }
        }
        let free_g: Vec<usize> = (0..gts.len())
            .filter(|i| !pairs.iter().any(|p| p.0 == *i))
            .collect();
        let free_p: Vec<usize> = (0..preds.len())
            .filter(|j| !pairs.iter().any(|p| p.1 == *j))
            .collect();
        let mut best: Option<(usize, f64, Vec<(usize, usize)>)> = None;
        for m in all_matchings(free_g.len(), free_p.len()) {
            let mapped: Vec<(usize, usize)> =
                m.iter().map(|&(a, b)| (free_g[a], free_p[b])).collect();
            if mapped
                .iter()
                .any(|&(i, j)| overlap(&gts[i], &preds[j]) < thr)
            {
                continue;
            }
            let cost: f64 = mapped
                .iter()
                .map(|&(i, j)| 1.0 - overlap(&gts[i], &preds[j]))
                .sum();
            let better = match &best {
                None => true,
                Some((n, c, _)) => mapped.len() > *n || (mapped.len() == *n && cost < *c - 1e-12),
            };
            if better {
                best = Some((mapped.len(), cost, mapped));
            }
        }
        for (i, j) in best.map(|b| b.2).unwrap_or_default() {
            if let Some(prev) = previous.get(&gts[i].id) {
                if *prev != preds[j].id {
                    sw += 1;
                }
            }
            pairs.push((i, j));
        }
        for &(i, j) in &pairs {
            previous.insert(gts[i].id, preds[j].id);
            sum += overlap(&gts[i], &preds[j]);
        }
        tp += pairs.len();
        fn_ += gts.len() - pairs.len();
        fp += preds.len() - pairs.len();
    }
    let mota = 100.0 * (1.0 - (fn_ + fp + sw) as f64 / total as f64);
    let motp = if tp == 0 {
        0.0
    } else {
        100.0 * sum / tp as f64
    };
    (mota, motp, sw, fp, fn_)
}

fn id_list(set: &TrackSet) -> Vec<i64> {
    set.records()
        .iter()
        .map(|r| r.id)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

pub fn idf1(gt: &TrackSet, pred: &TrackSet, thr: f64) -> f64 {
    let gids = id_list(gt);
    let pids = id_list(pred);
    let mut table = vec![vec![0usize; pids.len()]; gids.len()];
    for (gts, preds) in all_frames(gt, pred) {
        for g in &gts {
            for p in &preds {
                if overlap(g, p) >= thr {
                    let a = gids.iter().position(|&x| x == g.id).unwrap();
                    let b = pids.iter().position(|&x| x == p.id).unwrap();
                    table[a][b] += 1;
                }
            }
        }
    }
    let best = all_matchings(gids.len(), pids.len())
        .into_iter()
        .map(|m| m.iter().map(|&(a, b)| table[a][b]).sum::<usize>())
        .max()
        .unwrap_or(0);
    let total = gt.len() + pred.len();
    if total == 0 {
        100.0
    } else {
        100.0 * 2.0 * best as f64 / total as f64
    }
}

pub fn hota(gt: &TrackSet, pred: &TrackSet) -> f64 {
    let gids = id_list(gt);
    let pids = id_list(pred);
    if pred.is_empty() {
        return 0.0;
    }
    let gi = |id: i64| gids.iter().position(|&x| x == id).unwrap();
    let pi = |id: i64| pids.iter().position(|&x| x == id).unwrap();
    let data = all_frames(gt, pred);

    let mut gcount = vec![0.0; gids.len()];
    let mut pcount = vec![0.0; pids.len()];
    let mut soft = vec![vec![0.0; pids.len()]; gids.len()];
    for (gts, preds) in &data {
        for g in gts {
            gcount[gi(g.id)] += 1.0;
        }
        for p in preds {
            pcount[pi(p.id)] += 1.0;
        }
        for g in gts {
            for p in preds {
                let s = overlap(g, p);
                let row: f64 = preds.iter().map(|q| overlap(g, q)).sum();
                let col: f64 = gts.iter().map(|h| overlap(h, p)).sum();
                let d = row + col - s;
                if d > f64::EPSILON {
                    soft[gi(g.id)][pi(p.id)] += s / d;
                }
            }
        }
    }

    let alphas: Vec<f64> = (1..=19).map(|i| i as f64 * 0.05).collect();
    let mut tp = [0.0; 19];
    let mut counts = vec![vec![vec![0.0; pids.len()]; gids.len()]; 19];
    for (gts, preds) in &data {
        let score = |i: usize, j: usize| {
            let (a, b) = (gi(gts[i].id), pi(preds[j].id));
            soft[a][b] / (gcount[a] + pcount[b] - soft[a][b]) * overlap(&gts[i], &preds[j])
        };
        let mut best: (f64, Vec<(usize, usize)>) = (-1.0, Vec::new());
        for m in all_matchings(gts.len(), preds.len()) {
            let total: f64 = m.iter().map(|&(i, j)| score(i, j)).sum();
            if total > best.0 + 1e-12 {
                best = (total, m);
            }
        }
        for (i, j) in best.1 {
            let s = overlap(&gts[i], &preds[j]);
            for (k, a) in alphas.iter().enumerate() {
                if s >= a - f64::EPSILON {
                    tp[k] += 1.0;
                    counts[k][gi(gts[i].id)][pi(preds[j].id)] += 1.0;
                }
            }
        }
    }

    let mut acc = 0.0;
    for k in 0..19 {
        let fn_ = gt.len() as f64 - tp[k];
        let fp = pred.len() as f64 - tp[k];
        let det = if tp[k] + fn_ + fp > 0.0 {
            tp[k] / (tp[k] + fn_ + fp)
        } else {
            0.0
        };
        let mut assoc = 0.0;
        for a in 0..gids.len() {
            for b in 0..pids.len() {
                let c = counts[k][a][b];
                if c > 0.0 {
                    assoc += c * c / (gcount[a] + pcount[b] - c);
                }
            }
        }
        let ass = if tp[k] > 0.0 { assoc / tp[k] } else { 0.0 };
        acc += (det * ass).sqrt();
    }
    100.0 * acc / 19.0
}

pub fn scores(gt: &TrackSet, pred: &TrackSet, thr: f64) -> OracleScores {
    let (mota, motp, id_switches, false_positives, false_negatives) = clear(gt, pred, thr);
    OracleScores {
        mota,
        motp,
        idf1: idf1(gt, pred, thr),
        hota: hota(gt, pred),
        id_switches,
        false_positives,
        false_negatives,
    }
}
