use std::cmp::Ordering;

use crate::types::{BBox, FrameDetections};

/// Intersection over union of two boxes; 0 when disjoint.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection_area(b);
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// Non-maximum suppression as applied by the detector.
///
/// Detections scoring below `t_o` are dropped. The rest are visited in
/// descending score order (ties keep input order) and a detection is kept
/// unless an already kept detection of the same class overlaps it with IoU
/// above `t_iou`.
pub fn nms(frame: &FrameDetections, t_o: f64, t_iou: f64) -> FrameDetections {
    let mut candidates: Vec<_> = frame
        .detections
        .iter()
        .filter(|d| d.score >= t_o)
        .copied()
        .collect();
    candidates.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap_or(Ordering::Equal));

    let mut kept = Vec::with_capacity(candidates.len());
    for det in candidates {
        let suppressed = kept
            .iter()
            .any(|k: &crate::types::Detection| k.class == det.class && iou(&k.bbox, &det.bbox) > t_iou);
        if !suppressed {
            kept.push(det);
        }
    }
    FrameDetections::new(frame.frame_index, kept)
}
