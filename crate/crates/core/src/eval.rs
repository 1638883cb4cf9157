//! Per-identity average precision over IoU thresholds 0.50:0.05:0.95.
//!
//! Identities play the role of detection classes. Predictions are matched
//! greedily in descending confidence to the best-IoU unmatched ground truth
//! of the same identity and frame. AP is the all-point interpolated area
//! under the precision/recall curve.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::geometry::{iou, BoundingBox};
use crate::ingest::{Detection, FrameIndex, PlayerId};
use crate::track::TrackedBox;

/// The ten COCO thresholds, computed from integers so 0.9 is exactly `0.9`.
pub fn iou_thresholds() -> [f64; 10] {
    std::array::from_fn(|i| (50 + 5 * i) as f64 / 100.0)
}

/// Minimal prediction view shared by detections and tracked boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub frame: FrameIndex,
    pub identity: PlayerId,
    pub bbox: BoundingBox,
    pub confidence: f64,
}

impl From<&Detection> for Scored {
    fn from(d: &Detection) -> Self {
        Self {
            frame: d.frame,
            identity: d.identity.clone(),
            bbox: d.bbox,
            confidence: d.confidence,
        }
    }
}

impl From<&TrackedBox> for Scored {
    fn from(b: &TrackedBox) -> Self {
        Self {
            frame: b.frame,
            identity: b.identity.clone(),
            bbox: b.bbox,
            confidence: b.confidence,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityAp {
    pub identity: PlayerId,
    /// AP at each of the ten thresholds.
    pub per_threshold: [f64; 10],
    pub ap_50_95: f64,
    pub gt_count: usize,
    pub prediction_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub ap_50_95: f64,
    pub ap_50: f64,
    pub ap_75: f64,
    pub per_identity: Vec<IdentityAp>,
    pub gt_count: usize,
    pub prediction_count: usize,
    /// Prediction identities that never occur in the ground truth.
    pub unknown_identities: Vec<PlayerId>,
}

/// All-point interpolated AP for one ranked list of TP/FP flags.
pub fn all_point_ap(tp_flags: &[bool], gt_count: usize) -> f64 {
    if gt_count == 0 {
        return 0.0;
    }
    let mut precision = Vec::with_capacity(tp_flags.len());
    let mut recall = Vec::with_capacity(tp_flags.len());
    let mut tp = 0usize;
    for (i, &hit) in tp_flags.iter().enumerate() {
        if hit {
            tp += 1;
        }
        precision.push(tp as f64 / (i + 1) as f64);
        recall.push(tp as f64 / gt_count as f64);
    }
    // precision envelope, right to left
    for i in (0..precision.len().saturating_sub(1)).rev() {
        precision[i] = precision[i].max(precision[i + 1]);
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for (p, r) in precision.iter().zip(&recall) {
        if *r > prev_recall {
            ap += (r - prev_recall) * p;
            prev_recall = *r;
        }
    }
    ap
}

/// Rank predictions: confidence descending, then frame, then input order.
fn ranked<'a>(preds: &[&'a Scored]) -> Vec<&'a Scored> {
    let mut idx: Vec<usize> = (0..preds.len()).collect();
    idx.sort_by(|&a, &b| {
        preds[b]
            .confidence
            .total_cmp(&preds[a].confidence)
            .then(preds[a].frame.cmp(&preds[b].frame))
            .then(a.cmp(&b))
    });
    idx.into_iter().map(|i| preds[i]).collect()
}

/// TP flags for one identity at one threshold.
fn match_identity(ranked: &[&Scored], gt_by_frame: &BTreeMap<FrameIndex, Vec<BoundingBox>>, threshold: f64) -> Vec<bool> {
    let mut used: BTreeMap<FrameIndex, Vec<bool>> = gt_by_frame
        .iter()
        .map(|(f, g)| (*f, vec![false; g.len()]))
        .collect();
    ranked
        .iter()
        .map(|p| {
            let Some(gts) = gt_by_frame.get(&p.frame) else {
                return false;
            };
            let used = used.get_mut(&p.frame).expect("frame present");
            let mut best: Option<(usize, f64)> = None;
            for (gi, g) in gts.iter().enumerate() {
                if used[gi] {
                    continue;
                }
                let s = iou(&p.bbox, g);
                if s >= threshold && best.is_none_or(|(_, b)| s > b) {
                    best = Some((gi, s));
                }
            }
            match best {
                Some((gi, _)) => {
                    used[gi] = true;
                    true
                }
                None => false,
            }
        })
        .collect()
}

pub fn evaluate_ap(predictions: &[Scored], ground_truth: &[Detection]) -> EvaluationReport {
    let thresholds = iou_thresholds();
    let mut gt: BTreeMap<&PlayerId, BTreeMap<FrameIndex, Vec<BoundingBox>>> = BTreeMap::new();
    for g in ground_truth {
        gt.entry(&g.identity).or_default().entry(g.frame).or_default().push(g.bbox);
    }
    let mut preds: BTreeMap<&PlayerId, Vec<&Scored>> = BTreeMap::new();
    for p in predictions {
        preds.entry(&p.identity).or_default().push(p);
    }
    let unknown: BTreeSet<PlayerId> = preds
        .keys()
        .filter(|id| !gt.contains_key(*id))
        .map(|id| (*id).clone())
        .collect();

    let mut per_identity = Vec::new();
    for (id, frames) in &gt {
        let gt_count: usize = frames.values().map(Vec::len).sum();
        let list = preds.get(id).map(|v| ranked(v)).unwrap_or_default();
        let per_threshold: [f64; 10] =
            std::array::from_fn(|i| all_point_ap(&match_identity(&list, frames, thresholds[i]), gt_count));
        per_identity.push(IdentityAp {
            identity: (*id).clone(),
            ap_50_95: per_threshold.iter().sum::<f64>() / 10.0,
            per_threshold,
            gt_count,
            prediction_count: list.len(),
        });
    }

    let n = per_identity.len().max(1) as f64;
    let mean = |f: &dyn Fn(&IdentityAp) -> f64| per_identity.iter().map(f).sum::<f64>() / n;
    EvaluationReport {
        ap_50_95: mean(&|a| a.ap_50_95),
        ap_50: mean(&|a| a.per_threshold[0]),
        ap_75: mean(&|a| a.per_threshold[5]),
        gt_count: ground_truth.len(),
        prediction_count: predictions.len(),
        unknown_identities: unknown.into_iter().collect(),
        per_identity,
    }
}

pub fn evaluate_detections(predictions: &[Detection], ground_truth: &[Detection]) -> EvaluationReport {
    let p: Vec<Scored> = predictions.iter().map(Scored::from).collect();
    evaluate_ap(&p, ground_truth)
}

pub fn evaluate_tracks(predictions: &[TrackedBox], ground_truth: &[Detection]) -> EvaluationReport {
    let p: Vec<Scored> = predictions.iter().map(Scored::from).collect();
    evaluate_ap(&p, ground_truth)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gt(frame: u32, id: &str, b: BoundingBox) -> Detection {
        Detection::new(frame, id, b, 1.0)
    }

    fn pred(frame: u32, id: &str, b: BoundingBox, c: f64) -> Scored {
        Scored {
            frame,
            identity: PlayerId::new(id),
            bbox: b,
            confidence: c,
        }
    }

    const G: BoundingBox = BoundingBox::new(0.0, 0.0, 10.0, 10.0);

    #[test]
    fn perfect_prediction() {
        let r = evaluate_ap(&[pred(0, "A", G, 0.9)], &[gt(0, "A", G)]);
        assert_eq!((r.ap_50_95, r.ap_50, r.ap_75), (1.0, 1.0, 1.0));
    }

    #[test]
    fn iou_point_nine_passes_nine_thresholds() {
        let p = BoundingBox::new(0.0, 0.0, 9.0, 10.0);
        assert_eq!(iou(&p, &G), 0.9);
        let r = evaluate_ap(&[pred(0, "A", p, 0.9)], &[gt(0, "A", G)]);
        assert_eq!(r.ap_50, 1.0);
        assert_eq!(r.ap_75, 1.0);
        assert!((r.ap_50_95 - 0.9).abs() < 1e-12);
    }

    #[test]
    fn trailing_false_positive_does_not_reduce_ap() {
        let far = BoundingBox::new(100.0, 100.0, 10.0, 10.0);
        let r = evaluate_ap(&[pred(0, "A", G, 0.9), pred(0, "A", far, 0.5)], &[gt(0, "A", G)]);
        assert_eq!(r.ap_50, 1.0);
    }

    #[test]
    fn leading_false_positive_halves_precision() {
        let far = BoundingBox::new(100.0, 100.0, 10.0, 10.0);
        let r = evaluate_ap(&[pred(0, "A", G, 0.4), pred(0, "A", far, 0.9)], &[gt(0, "A", G)]);
        assert_eq!(r.ap_50, 0.5);
    }

    #[test]
    fn unknown_identity_flagged_not_averaged() {
        let r = evaluate_ap(&[pred(0, "A", G, 0.9), pred(0, "Z", G, 0.9)], &[gt(0, "A", G)]);
        assert_eq!(r.unknown_identities, vec![PlayerId::new("Z")]);
        assert_eq!(r.per_identity.len(), 1);
        assert_eq!(r.ap_50_95, 1.0);
    }

    #[test]
    fn missing_predictions_score_zero() {
        let r = evaluate_ap(&[pred(0, "A", G, 0.9)], &[gt(0, "A", G), gt(0, "B", G)]);
        assert_eq!(r.ap_50, 0.5);
    }

    #[test]
    fn thresholds_are_exact() {
        let t = iou_thresholds();
        assert_eq!(t[0], 0.5);
        assert_eq!(t[5], 0.75);
        assert_eq!(t[8], 0.9);
        assert_eq!(t[9], 0.95);
    }
}
