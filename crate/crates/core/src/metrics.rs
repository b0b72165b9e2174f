//! Evaluation measures: per-frame agreement, quartiles, activity coverage,
//! provider-count error and single-image average precision.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::Serialize;

use crate::annotation::{Interval, ReferenceAnnotation};
use crate::error::{Error, Result};
use crate::geometry::iou;
use crate::trackpost::TrackTimeline;
use crate::types::{BBox, ObjectClass};

/// An activity counts as detected when the object is detected during more
/// than this fraction of its frames.
pub const ACTIVITY_MIN_OVERLAP: f64 = 0.8;

/// A tracking region is correct when it contains more than this fraction of
/// the object's area.
pub const MIN_OBJECT_COVERAGE: f64 = 0.5;

/// IoU threshold for single-image detection matching.
pub const AP_IOU_THRESHOLD: f64 = 0.5;

/// Percentage of frames on which `detection` equals `reference`.
pub fn frame_performance<T: PartialEq>(detection: &[T], reference: &[T]) -> Result<f64> {
    if detection.len() != reference.len() {
        return Err(Error::LengthMismatch {
            left: detection.len(),
            right: reference.len(),
        });
    }
    if detection.is_empty() {
        return Err(Error::Empty("timeline"));
    }
    let hits = detection.iter().zip(reference).filter(|(d, r)| d == r).count();
    Ok(100.0 * hits as f64 / detection.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quartiles {
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
}

/// Quantile by linear interpolation between closest ranks: position
/// `(n - 1) * p` in the sorted sample (the "type 7" estimator).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    (1.0 - frac) * sorted[lo] + frac * sorted[hi]
}

pub fn quartiles(values: &[f64]) -> Result<Quartiles> {
    if values.is_empty() {
        return Err(Error::Empty("quartiles of an empty sample"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    Ok(Quartiles {
        q25: quantile_sorted(&sorted, 0.25),
        q50: quantile_sorted(&sorted, 0.5),
        q75: quantile_sorted(&sorted, 0.75),
    })
}

/// Whether the object was detected during more than 80 % of the activity.
/// Frames past the end of `detected` count as not detected.
pub fn activity_detected(activity: Interval, detected: &[bool]) -> bool {
    if activity.is_empty() {
        return false;
    }
    let hits = activity
        .frames()
        .filter(|&i| detected.get(i).copied().unwrap_or(false))
        .count();
    hits as f64 / activity.len() as f64 > ACTIVITY_MIN_OVERLAP
}

/// Detected activities out of annotated activities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ActivityRate {
    pub detected: usize,
    pub total: usize,
}

impl ActivityRate {
    /// Percentage detected; 100 when there are no activities at all
    /// (see [`ActivityRate::no_activities`]).
    pub fn percent(&self) -> f64 {
        if self.total == 0 {
            100.0
        } else {
            100.0 * self.detected as f64 / self.total as f64
        }
    }

    pub fn no_activities(&self) -> bool {
        self.total == 0
    }

    pub fn merge(self, other: ActivityRate) -> ActivityRate {
        ActivityRate {
            detected: self.detected + other.detected,
            total: self.total + other.total,
        }
    }
}

pub fn activity_detection_rate(
    annotation: &ReferenceAnnotation,
    class: ObjectClass,
    detected: &[bool],
) -> ActivityRate {
    let intervals = annotation.activities(class);
    ActivityRate {
        detected: intervals
            .iter()
            .filter(|iv| activity_detected(**iv, detected))
            .count(),
        total: intervals.len(),
    }
}

/// Mean absolute difference between predicted and reference provider counts.
pub fn hcp_error(predicted: &[u8], reference: &[u8]) -> Result<f64> {
    if predicted.len() != reference.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: reference.len(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::Empty("timeline"));
    }
    let total: u64 = predicted
        .iter()
        .zip(reference)
        .map(|(&p, &r)| (p as i64 - r as i64).unsigned_abs())
        .sum();
    Ok(total as f64 / predicted.len() as f64)
}

/// Per reference band (0, 1, 2, 3+ providers): frames predicted correctly
/// and frames in the band.
pub fn band_counts(predicted: &[u8], reference: &[u8]) -> [ActivityRate; 4] {
    let mut out = [ActivityRate::default(); 4];
    for (&p, &r) in predicted.iter().zip(reference) {
        let band = r.min(3) as usize;
        out[band].total += 1;
        if p.min(3) == r.min(3) {
            out[band].detected += 1;
        }
    }
    out
}

/// Per-frame detectedness of a tracked object: the track region contains
/// more than half of the true object box.
pub fn detectedness(track: &TrackTimeline, truth: &[Option<BBox>]) -> Vec<bool> {
    track
        .boxes
        .iter()
        .enumerate()
        .map(|(i, b)| match (b, truth.get(i).copied().flatten()) {
            (Some(region), Some(object)) => {
                region.intersection_area(&object) / object.area() > MIN_OBJECT_COVERAGE
            }
            _ => false,
        })
        .collect()
}

/// A scored detection on one image.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub image: String,
    pub bbox: BBox,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub image: String,
    pub bbox: BBox,
}

/// All-points interpolated average precision for one class.
///
/// Predictions are ranked by descending score (ties keep input order). Each
/// is matched to the unmatched ground truth of its image with the highest
/// IoU, and counts as a true positive when that IoU is at least
/// `iou_threshold`. Returns `None` when there is no ground truth.
pub fn average_precision(
    predictions: &[Prediction],
    ground_truths: &[GroundTruth],
    iou_threshold: f64,
) -> Option<f64> {
    if ground_truths.is_empty() {
        return None;
    }
    let mut by_image: HashMap<&str, Vec<usize>> = HashMap::new();
    for (k, gt) in ground_truths.iter().enumerate() {
        by_image.entry(gt.image.as_str()).or_default().push(k);
    }
    let mut matched = vec![false; ground_truths.len()];

    let mut order: Vec<usize> = (0..predictions.len()).collect();
    order.sort_by(|&a, &b| {
        predictions[b]
            .score
            .partial_cmp(&predictions[a].score)
            .unwrap_or(Ordering::Equal)
    });

    let n_gt = ground_truths.len() as f64;
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut recall = Vec::with_capacity(order.len());
    let mut precision = Vec::with_capacity(order.len());
    for k in order {
        let pred = &predictions[k];
        let best = by_image
            .get(pred.image.as_str())
            .into_iter()
            .flatten()
            .filter(|&&g| !matched[g])
            .map(|&g| (g, iou(&pred.bbox, &ground_truths[g].bbox)))
            .fold(None::<(usize, f64)>, |acc, cur| match acc {
                Some(a) if a.1 >= cur.1 => Some(a),
                _ => Some(cur),
            });
        match best {
            Some((g, overlap)) if overlap >= iou_threshold => {
                matched[g] = true;
                tp += 1;
            }
            _ => fp += 1,
        }
        recall.push(tp as f64 / n_gt);
        precision.push(tp as f64 / (tp + fp) as f64);
    }
    Some(area_under_pr(&recall, &precision))
}

/// Area under the precision envelope of a recall-ordered PR curve.
fn area_under_pr(recall: &[f64], precision: &[f64]) -> f64 {
    let mut mrec = Vec::with_capacity(recall.len() + 2);
    mrec.push(0.0);
    mrec.extend_from_slice(recall);
    mrec.push(1.0);
    let mut mpre = Vec::with_capacity(precision.len() + 2);
    mpre.push(0.0);
    mpre.extend_from_slice(precision);
    mpre.push(0.0);
    for i in (0..mpre.len() - 1).rev() {
        mpre[i] = mpre[i].max(mpre[i + 1]);
    }
    (0..mrec.len() - 1)
        .filter(|&i| mrec[i + 1] != mrec[i])
        .map(|i| (mrec[i + 1] - mrec[i]) * mpre[i + 1])
        .sum()
}

/// Unweighted mean of the defined per-class APs.
pub fn mean_average_precision(aps: &[Option<f64>]) -> Result<f64> {
    let defined: Vec<f64> = aps.iter().flatten().copied().collect();
    if defined.is_empty() {
        return Err(Error::Empty("no class with a defined average precision"));
    }
    Ok(defined.iter().sum::<f64>() / defined.len() as f64)
}

/// Labeled and predicted boxes over a set of images.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruthSet {
    pub ground_truths: Vec<(ObjectClass, GroundTruth)>,
    pub predictions: Vec<(ObjectClass, Prediction)>,
}

impl GroundTruthSet {
    pub fn class_ap(&self, class: ObjectClass, iou_threshold: f64) -> Option<f64> {
        let gts: Vec<GroundTruth> = self
            .ground_truths
            .iter()
            .filter(|(c, _)| *c == class)
            .map(|(_, g)| g.clone())
            .collect();
        let preds: Vec<Prediction> = self
            .predictions
            .iter()
            .filter(|(c, _)| *c == class)
            .map(|(_, p)| p.clone())
            .collect();
        average_precision(&preds, &gts, iou_threshold)
    }

    pub fn per_class_ap(&self, iou_threshold: f64) -> Vec<(ObjectClass, Option<f64>)> {
        ObjectClass::ALL
            .iter()
            .map(|&c| (c, self.class_ap(c, iou_threshold)))
            .collect()
    }
}

/// Parses `image,class,x,y,w,h` rows (ground truth) or
/// `image,class,x,y,w,h,score` rows (predictions). A header line starting
/// with `image,` is skipped.
pub fn parse_box_rows(text: &str, with_score: bool) -> Result<Vec<(ObjectClass, Prediction)>> {
    let expected = if with_score { 7 } else { 6 };
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with("image,") {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != expected {
            return Err(Error::parse(line_no, format!("expected {expected} fields, got {}", f.len())));
        }
        let class: ObjectClass = f[1].parse().map_err(|e: Error| Error::parse(line_no, e.to_string()))?;
        let mut nums = Vec::with_capacity(5);
        for v in &f[2..] {
            nums.push(
                v.parse::<f64>()
                    .map_err(|_| Error::parse(line_no, format!("bad number `{v}`")))?,
            );
        }
        let bbox = BBox::new(nums[0], nums[1], nums[2], nums[3])
            .map_err(|e| Error::parse(line_no, e.to_string()))?;
        let score = if with_score { nums[4] } else { 1.0 };
        out.push((
            class,
            Prediction {
                image: f[0].to_string(),
                bbox,
                score,
            },
        ));
    }
    Ok(out)
}
