//! Average precision by hand-checkable example: one identity, three ground
//! truth boxes, four ranked predictions.

use hoopvis::eval::{all_point_ap, evaluate_ap, iou_thresholds, Scored};
use hoopvis::geometry::{iou, BoundingBox};
use hoopvis::ingest::{Detection, PlayerId};

fn main() {
    let g = |f, x| Detection::new(f, "P1", BoundingBox::new(x, 0.0, 10.0, 20.0), 1.0);
    let truth = vec![g(0, 0.0), g(1, 10.0), g(2, 20.0)];
    let p = |f, x, c| Scored {
        frame: f,
        identity: PlayerId::new("P1"),
        bbox: BoundingBox::new(x, 0.0, 10.0, 20.0),
        confidence: c,
    };
    // exact, one pixel off, a stray box, two pixels off
    let preds = vec![p(0, 0.0, 0.9), p(1, 11.0, 0.8), p(1, 60.0, 0.7), p(2, 22.0, 0.6)];
    for q in &preds {
        let best = truth.iter().filter(|t| t.frame == q.frame).map(|t| iou(&t.bbox, &q.bbox)).fold(0.0, f64::max);
        println!("frame {} conf {:.1} best IoU {best:.4}", q.frame, q.confidence);
    }

    let r = evaluate_ap(&preds, &truth);
    for (t, ap) in iou_thresholds().iter().zip(r.per_identity[0].per_threshold) {
        println!("AP@{t:.2} = {ap:.4}");
    }
    println!("AP50:95 {:.4}  AP50 {:.4}  AP75 {:.4}", r.ap_50_95, r.ap_50, r.ap_75);

    // the same number from the ranked TP/FP list at IoU 0.5
    println!("all-point AP of [T, T, F, T] over 3: {:.4}", all_point_ap(&[true, true, false, true], 3));
}
