use neotrack_core::annotation::{parse_annotations, parse_truth_boxes, write_annotations, write_truth_boxes};
use neotrack_core::locate::{accumulate_objectness, extract_centroid_with, locate_frame};
use neotrack_core::simulate::{generate_episode, Scenario};
use neotrack_core::stream::{parse_episodes, write_detection_stream};
use neotrack_core::timelines::{parse_track_csv, write_track_csv};
use neotrack_core::trackpost::{fill_gaps, moving_average, remove_short_peaks, track_object};
use neotrack_core::{BBox, CentroidMode, Detection, FrameDetections, ObjectClass, PipelineConfig};
use proptest::prelude::*;

const SCENARIO: &str = r#"
episode = "roundtrip"
width = 800
height = 600
frames = 200
seed = 9

[[objects]]
class = "BMR"
size = [100, 80]
path = [{ start = 0, end = 200, from = [200, 200], to = [600, 400] }]

[[objects]]
class = "HRS"
size = [30, 30]
path = [{ start = 40, end = 160, from = [100, 500], to = [100, 500] }]

[[activities]]
class = "HRS"
start = 50
end = 90

[[providers]]
start = 0
end = 200
count = 2

[noise]
dropout = 0.1
false_positive_rate = 0.1
jitter_std = 1.5
score = [0.4, 1.0]
"#;

#[test]
fn files_round_trip_and_tracking_is_stable() {
    let s = Scenario::from_toml(SCENARIO).unwrap();
    let sim = generate_episode(&s).unwrap();
    let cfg = PipelineConfig::default();

    let text = write_detection_stream(&sim.episode);
    let back = parse_episodes(&text).unwrap();
    assert_eq!(back.len(), 1);
    assert_eq!(write_detection_stream(&back[0]), text);

    let ann = parse_annotations(&write_annotations(std::slice::from_ref(&sim.annotation))).unwrap();
    assert_eq!(ann, vec![sim.annotation.clone()]);
    let boxes = parse_truth_boxes(&write_truth_boxes(std::slice::from_ref(&sim.truth))).unwrap();
    assert_eq!(boxes.len(), 1);

    for class in ObjectClass::TRACKED {
        let a = track_object(&sim.episode, class, &cfg);
        let b = track_object(&back[0], class, &cfg);
        assert_eq!(write_track_csv(&a), write_track_csv(&b));
        let parsed = parse_track_csv(&write_track_csv(&a), class).unwrap();
        assert_eq!(parsed.boxes.len(), s.frames);
    }
}

fn frame_strategy() -> impl Strategy<Value = (usize, usize, FrameDetections)> {
    (1usize..40, 1usize..40).prop_flat_map(|(w, h)| {
        let det = (-5.0..w as f64, -5.0..h as f64, 0.5..20.0f64, 0.5..20.0f64, 0usize..3, 0.0..1.0f64).prop_map(
            |(x, y, bw, bh, c, s)| {
                Detection::new(ObjectClass::TRACKED[c], BBox::new(x, y, bw, bh).unwrap(), s).unwrap()
            },
        );
        (Just(w), Just(h), prop::collection::vec(det, 0..6).prop_map(|d| FrameDetections::new(0, d)))
    })
}

proptest! {
    #[test]
    fn sparse_and_dense_locate_agree((w, h, frame) in frame_strategy(), above in any::<bool>()) {
        let mode = if above { CentroidMode::AboveThreshold } else { CentroidMode::Max };
        for class in ObjectClass::TRACKED {
            let field = accumulate_objectness(&frame, class, w, h);
            let dense = extract_centroid_with(&field, 0.1, mode);
            let sparse = locate_frame(&frame, class, w, h, 0.1, mode);
            prop_assert_eq!(dense, sparse);
            if let Some(p) = sparse {
                prop_assert!(p.x >= 0.0 && p.x <= (w - 1) as f64);
                prop_assert!(p.y >= 0.0 && p.y <= (h - 1) as f64);
            }
        }
    }

    #[test]
    fn post_processing_keeps_presence(raw in prop::collection::vec(prop::option::of(0.0..2000.0f64), 0..120)) {
        let filled = fill_gaps(&raw);
        let first = raw.iter().position(Option::is_some);
        for (i, v) in filled.iter().enumerate() {
            prop_assert_eq!(v.is_some(), first.is_some_and(|f| i >= f));
        }
        let cleaned = remove_short_peaks(&filled, 200.0, 50.0, 10);
        prop_assert_eq!(cleaned.len(), filled.len());
        for (a, b) in cleaned.iter().zip(&filled) {
            prop_assert_eq!(a.is_some(), b.is_some());
        }
    }

    #[test]
    fn moving_average_stays_in_range(values in prop::collection::vec(-1000.0..1000.0f64, 1..200), n_f in 1usize..50) {
        let out = moving_average(&values, n_f);
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(out.len(), values.len());
        prop_assert!(out.iter().all(|v| *v >= lo && *v <= hi));
    }
}
