#![allow(dead_code)]

use std::path::PathBuf;

use hoopvis::ability::RegionPartition;
use hoopvis::eval::Scored;
use hoopvis::geometry::BoundingBox;
use hoopvis::ingest::{Detection, PlayerId, ShotRecord};

/// SHA-256 of `hoopvis replay` on the shipped demo bundle and gaze trace.
pub const DEMO_REPLAY_SHA256: &str = "406cd8e0a6153d7a3710a9c738bf2ba174645a77b0923630e5da511fe23aec6f";

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_hoopvis"))
}

fn overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inter = overlap(a.x, a.x + a.w, b.x, b.x + b.w) * overlap(a.y, a.y + a.h, b.y, b.y + b.h);
    let union = a.w * a.h + b.w * b.h - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// AP at one threshold for one identity, straight from the definitions:
/// greedy matching over a flat ground-truth list, then the area under the
/// precision envelope taken as max precision at any later rank.
fn ap_one(preds: &[&Scored], truth: &[&Detection], threshold: f64) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (preds[a], preds[b]);
        pb.confidence
            .partial_cmp(&pa.confidence)
            .unwrap()
            .then(pa.frame.cmp(&pb.frame))
            .then(a.cmp(&b))
    });
    let mut taken = vec![false; truth.len()];
    let mut hits = Vec::new();
    for &i in &order {
        let p = preds[i];
        let mut best = None;
        let mut best_iou = -1.0;
        for (j, g) in truth.iter().enumerate() {
            if taken[j] || g.frame != p.frame {
                continue;
            }
            let v = iou(&p.bbox, &g.bbox);
            if v >= threshold && v > best_iou {
                best = Some(j);
                best_iou = v;
            }
        }
        if let Some(j) = best {
            taken[j] = true;
        }
        hits.push(best.is_some());
    }
    let n = hits.len();
    let prec_at = |k: usize| hits[..=k].iter().filter(|h| **h).count() as f64 / (k + 1) as f64;
    let rec_at = |k: usize| hits[..=k].iter().filter(|h| **h).count() as f64 / truth.len() as f64;
    let mut ap = 0.0;
    let mut prev = 0.0;
    for k in 0..n {
        let r = rec_at(k);
        if r > prev {
            let envelope = (k..n).map(prec_at).fold(0.0, f64::max);
            ap += (r - prev) * envelope;
            prev = r;
        }
    }
    ap
}

/// (AP50:95, AP50, AP75) averaged over ground-truth identities.
pub fn brute_force_ap(preds: &[Scored], truth: &[Detection]) -> (f64, f64, f64) {
    let mut ids: Vec<&PlayerId> = truth.iter().map(|d| &d.identity).collect();
    ids.sort();
    ids.dedup();
    let (mut s, mut s50, mut s75) = (0.0, 0.0, 0.0);
    for id in &ids {
        let p: Vec<&Scored> = preds.iter().filter(|p| &&p.identity == id).collect();
        let t: Vec<&Detection> = truth.iter().filter(|d| &&d.identity == id).collect();
        let per: Vec<f64> = (0..10).map(|i| ap_one(&p, &t, (50 + 5 * i) as f64 / 100.0)).collect();
        s += per.iter().sum::<f64>() / 10.0;
        s50 += per[0];
        s75 += per[5];
    }
    let n = ids.len().max(1) as f64;
    (s / n, s50 / n, s75 / n)
}

/// Per (player, region) attempts and makes by testing every shot against
/// every region.
pub fn rescan_counts(shots: &[ShotRecord], partition: &RegionPartition, player: Option<&PlayerId>, region: usize) -> (u32, u32) {
    let r = &partition.regions()[region];
    let mut a = 0;
    let mut m = 0;
    for s in shots {
        if player.is_some_and(|p| p != &s.player) {
            continue;
        }
        let first = partition.regions().iter().position(|q| q.contains(s.position));
        if first == Some(region) && r.contains(s.position) {
            a += 1;
            m += s.made as u32;
        }
    }
    (a, m)
}
