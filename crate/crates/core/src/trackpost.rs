//! Temporal post-processing of location series and fixed-size track regions.
//!
//! Each axis is handled on its own: gaps are held at the last seen value,
//! short excursions that come back within a few frames are flattened, and
//! the result is smoothed with a centered moving average before a square
//! box is placed around it.

use serde::Serialize;

use crate::config::PipelineConfig;
use crate::locate::{locate_series, LocationSeries};
use crate::types::{BBox, Episode, ObjectClass, Point};

/// Replaces every missing sample after the first present one with the most
/// recent present value. Leading gaps stay missing.
pub fn fill_gaps(raw: &[Option<f64>]) -> Vec<Option<f64>> {
    let mut last = None;
    raw.iter()
        .map(|v| {
            if v.is_some() {
                last = *v;
            }
            last
        })
        .collect()
}

/// Maximal runs of present samples, as `start..end` index ranges.
fn present_runs(series: &[Option<f64>]) -> Vec<std::ops::Range<usize>> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, v) in series.iter().enumerate() {
        match (v.is_some(), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push(s..i);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push(s..series.len());
    }
    runs
}

/// Flattens short false jumps.
///
/// Scanning left to right over the corrected signal, a step larger than
/// `t_peak` at `i` opens a candidate spike. The first `j` in
/// `i + 1 ..= i + lookahead` whose value is back within `t_stable` of the
/// pre-jump sample closes it, and `i..j` is overwritten with that sample.
/// Without such a `j` the jump is kept as a real move. A spike needs at
/// least one lookahead sample inside the series to be removed.
pub fn remove_short_peaks(
    filled: &[Option<f64>],
    t_peak: f64,
    t_stable: f64,
    lookahead: usize,
) -> Vec<Option<f64>> {
    let mut out = filled.to_vec();
    for run in present_runs(filled) {
        let mut values: Vec<f64> = out[run.clone()].iter().map(|v| v.unwrap()).collect();
        remove_short_peaks_dense(&mut values, t_peak, t_stable, lookahead);
        for (slot, v) in out[run].iter_mut().zip(values) {
            *slot = Some(v);
        }
    }
    out
}

fn remove_short_peaks_dense(values: &mut [f64], t_peak: f64, t_stable: f64, lookahead: usize) {
    let n = values.len();
    for i in 1..n {
        let base = values[i - 1];
        if (values[i] - base).abs() <= t_peak {
            continue;
        }
        let last = (i + lookahead).min(n - 1);
        if let Some(j) = (i + 1..=last).find(|&j| (values[j] - base).abs() < t_stable) {
            values[i..j].fill(base);
        }
    }
}

/// Centered moving average over `i - n_f/2 ..= i + n_f/2`, divided by the
/// number of samples actually available, so windows shrink at the ends of
/// each present run.
pub fn smooth(series: &[Option<f64>], n_f: usize) -> Vec<Option<f64>> {
    let mut out = series.to_vec();
    for run in present_runs(series) {
        let values: Vec<f64> = series[run.clone()].iter().map(|v| v.unwrap()).collect();
        for (slot, v) in out[run].iter_mut().zip(moving_average(&values, n_f)) {
            *slot = Some(v);
        }
    }
    out
}

/// Centered, boundary-shrinking moving average of a dense signal.
///
/// The mean is clamped to the window's range so rounding can never push it
/// outside the input values (constant input stays bit-identical).
pub fn moving_average(values: &[f64], n_f: usize) -> Vec<f64> {
    let half = n_f / 2;
    let n = values.len();
    (0..n)
        .map(|i| {
            let window = &values[i.saturating_sub(half)..=(i + half).min(n - 1)];
            let (sum, min, max) = window.iter().fold(
                (0.0, f64::INFINITY, f64::NEG_INFINITY),
                |(s, lo, hi), &v| (s + v, lo.min(v), hi.max(v)),
            );
            (sum / window.len() as f64).clamp(min, max)
        })
        .collect()
}

/// Tracking region per frame for one class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackTimeline {
    pub class: ObjectClass,
    pub boxes: Vec<Option<BBox>>,
}

impl TrackTimeline {
    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }
}

/// Places a `size`×`size` box on the given center, rounded to whole pixels
/// and shifted to lie inside the frame. A frame side shorter than `size`
/// is covered completely.
pub fn place_track_box(center: Point, size: u32, width: u32, height: u32) -> BBox {
    fn axis(c: f64, size: f64, limit: f64) -> (f64, f64) {
        if limit <= size {
            return (0.0, limit);
        }
        let start = (c - size / 2.0).round().clamp(0.0, limit - size);
        (start, size)
    }
    let s = size as f64;
    let (x, w) = axis(center.x, s, width as f64);
    let (y, h) = axis(center.y, s, height as f64);
    BBox { x, y, w, h }
}

pub fn make_track_boxes(
    class: ObjectClass,
    xs: &[Option<f64>],
    ys: &[Option<f64>],
    size: u32,
    width: u32,
    height: u32,
) -> TrackTimeline {
    let boxes = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| match (x, y) {
            (Some(x), Some(y)) => Some(place_track_box(Point::new(*x, *y), size, width, height)),
            _ => None,
        })
        .collect();
    TrackTimeline { class, boxes }
}

/// All intermediate signals of one axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisStages {
    pub raw: Vec<Option<f64>>,
    pub filled: Vec<Option<f64>>,
    pub peaks_removed: Vec<Option<f64>>,
    pub smoothed: Vec<Option<f64>>,
}

impl AxisStages {
    pub fn compute(raw: Vec<Option<f64>>, cfg: &PipelineConfig) -> Self {
        let filled = fill_gaps(&raw);
        let peaks_removed = remove_short_peaks(&filled, cfg.t_peak, cfg.t_stable, cfg.peak_lookahead);
        let smoothed = smooth(&peaks_removed, cfg.n_f1);
        AxisStages {
            raw,
            filled,
            peaks_removed,
            smoothed,
        }
    }
}

/// Full tracking output for one class, with intermediate stages retained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackResult {
    pub location: LocationSeries,
    pub x: AxisStages,
    pub y: AxisStages,
    pub timeline: TrackTimeline,
}

pub fn track_object_stages(episode: &Episode, class: ObjectClass, cfg: &PipelineConfig) -> TrackResult {
    let location = locate_series(episode, class, cfg);
    let x = AxisStages::compute(location.xs(), cfg);
    let y = AxisStages::compute(location.ys(), cfg);
    let timeline = make_track_boxes(
        class,
        &x.smoothed,
        &y.smoothed,
        cfg.track_box_size,
        episode.frame_width,
        episode.frame_height,
    );
    TrackResult {
        location,
        x,
        y,
        timeline,
    }
}

/// Locate, fill gaps, remove short peaks, smooth and box one tracked class.
pub fn track_object(episode: &Episode, class: ObjectClass, cfg: &PipelineConfig) -> TrackTimeline {
    track_object_stages(episode, class, cfg).timeline
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn some(v: &[f64]) -> Vec<Option<f64>> {
        v.iter().copied().map(Some).collect()
    }

    #[test]
    fn fill_gaps_examples() {
        assert_eq!(
            fill_gaps(&[Some(5.0), None, None, Some(8.0)]),
            some(&[5.0, 5.0, 5.0, 8.0])
        );
        assert_eq!(fill_gaps(&[None, None]), vec![None, None]);
        assert_eq!(fill_gaps(&[None, Some(3.0), None]), vec![None, Some(3.0), Some(3.0)]);
    }

    #[test]
    fn peak_removal_examples() {
        let flat = some(&[100.0; 8]);
        assert_eq!(remove_short_peaks(&flat, 200.0, 50.0, 10), flat);

        let mut spike = vec![100.0; 5];
        spike.push(400.0);
        spike.extend([100.0; 10]);
        let out = remove_short_peaks(&some(&spike), 200.0, 50.0, 10);
        assert_eq!(out, some(&[100.0; 16]));

        let mut step = vec![100.0; 5];
        step.extend([400.0; 20]);
        assert_eq!(remove_short_peaks(&some(&step), 200.0, 50.0, 10), some(&step));
    }

    #[test]
    fn two_frame_spike_and_edges() {
        // 30 is within 50 of the pre-jump 10, so it closes the spike and stays
        let s = some(&[10.0, 10.0, 500.0, 480.0, 30.0, 10.0]);
        assert_eq!(
            remove_short_peaks(&s, 200.0, 50.0, 10),
            some(&[10.0, 10.0, 10.0, 10.0, 30.0, 10.0])
        );
        // a jump on the last sample has no lookahead and is kept
        let s = some(&[10.0, 10.0, 500.0]);
        assert_eq!(remove_short_peaks(&s, 200.0, 50.0, 10), s);
        // returning too late counts as a real move
        let mut late = vec![0.0; 3];
        late.extend([300.0; 11]);
        late.push(0.0);
        assert_eq!(remove_short_peaks(&some(&late), 200.0, 50.0, 10), some(&late));
        // leading gaps untouched
        let s = vec![None, Some(0.0), Some(300.0), Some(0.0)];
        assert_eq!(remove_short_peaks(&s, 200.0, 50.0, 10), vec![None, Some(0.0), Some(0.0), Some(0.0)]);
    }

    #[test]
    fn smoothing_examples() {
        assert_eq!(smooth(&some(&[7.0; 9]), 5), some(&[7.0; 9]));
        let imp = smooth(&some(&[0.0, 0.0, 1.0, 0.0, 0.0]), 5);
        let expected = [1.0 / 3.0, 0.25, 0.2, 0.25, 1.0 / 3.0];
        for (a, b) in imp.iter().zip(expected) {
            assert!((a.unwrap() - b).abs() < 1e-15);
        }
        let ramp: Vec<f64> = (0..20).map(|i| 3.0 * i as f64 + 1.0).collect();
        let out = smooth(&some(&ramp), 5);
        for i in 2..18 {
            assert!((out[i].unwrap() - ramp[i]).abs() < 1e-12);
        }
        assert_eq!(smooth(&[None, Some(2.0), Some(4.0)], 5), vec![None, Some(3.0), Some(3.0)]);
    }

    #[test]
    fn track_box_examples() {
        assert_eq!(
            place_track_box(Point::new(300.0, 300.0), 500, 1280, 1024),
            BBox { x: 50.0, y: 50.0, w: 500.0, h: 500.0 }
        );
        assert_eq!(
            place_track_box(Point::new(10.0, 10.0), 500, 1280, 1024),
            BBox { x: 0.0, y: 0.0, w: 500.0, h: 500.0 }
        );
        assert_eq!(
            place_track_box(Point::new(1270.0, 1000.0), 500, 1280, 1024),
            BBox { x: 780.0, y: 524.0, w: 500.0, h: 500.0 }
        );
        assert_eq!(
            place_track_box(Point::new(100.0, 100.0), 500, 400, 1024),
            BBox { x: 0.0, y: 0.0, w: 400.0, h: 500.0 }
        );
        let t = make_track_boxes(ObjectClass::Bmr, &[None, Some(300.0)], &[None, Some(300.0)], 500, 1280, 1024);
        assert_eq!(t.boxes[0], None);
        assert!(t.boxes[1].is_some());
    }

    #[test]
    fn empty_episode_tracks_nothing() {
        let e = Episode::new("e", 640, 480, vec![]).unwrap();
        assert!(track_object(&e, ObjectClass::Bmr, &PipelineConfig::default()).is_empty());
    }

    fn arb_series() -> impl Strategy<Value = Vec<Option<f64>>> {
        prop::collection::vec(prop::option::weighted(0.7, 0.0..1000.0f64), 0..60)
    }

    proptest! {
        #[test]
        fn fill_gaps_idempotent(s in arb_series()) {
            let once = fill_gaps(&s);
            prop_assert_eq!(fill_gaps(&once), once.clone());
            for (a, b) in s.iter().zip(&once) {
                if a.is_some() { prop_assert_eq!(a, b); }
            }
        }

        #[test]
        fn peaks_stay_in_range(s in arb_series()) {
            let f = fill_gaps(&s);
            let out = remove_short_peaks(&f, 200.0, 50.0, 10);
            let vals: Vec<f64> = f.iter().flatten().copied().collect();
            for (a, b) in f.iter().zip(&out) {
                prop_assert_eq!(a.is_some(), b.is_some());
                if let Some(v) = b { prop_assert!(vals.contains(v)); }
            }
        }

        #[test]
        fn smoothing_bounded(s in arb_series(), n_f in 1usize..50) {
            let f = fill_gaps(&s);
            let out = smooth(&f, n_f);
            let vals: Vec<f64> = f.iter().flatten().copied().collect();
            if let (Some(lo), Some(hi)) = (vals.iter().copied().reduce(f64::min), vals.iter().copied().reduce(f64::max)) {
                for v in out.iter().flatten() {
                    prop_assert!(*v >= lo && *v <= hi);
                }
            }
        }

        #[test]
        fn boxes_inside_frame(x in -100.0..2000.0f64, y in -100.0..2000.0f64, size in 1u32..800, w in 1u32..1600, h in 1u32..1600) {
            let b = place_track_box(Point::new(x, y), size, w, h);
            prop_assert!(b.x >= 0.0 && b.y >= 0.0);
            prop_assert!(b.right() <= w as f64 && b.bottom() <= h as f64);
            prop_assert_eq!(b.w, (size.min(w)) as f64);
            prop_assert_eq!(b.h, (size.min(h)) as f64);
        }
    }
}
