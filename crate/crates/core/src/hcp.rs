//! Number of health care providers present, estimated from hand detections.

use serde::Serialize;

use crate::config::PipelineConfig;
use crate::trackpost::moving_average;
use crate::types::{Episode, FrameDetections, ObjectClass};

/// Hand detections scoring strictly above `t_hcph`.
pub fn count_hands(frame: &FrameDetections, t_hcph: f64) -> u32 {
    frame
        .of_class(ObjectClass::Hcph)
        .filter(|d| d.score > t_hcph)
        .count() as u32
}

/// Centered moving average of the hand counts, same window rule as the
/// position smoother.
pub fn smooth_counts(hands: &[u32], n_f2: usize) -> Vec<f64> {
    let values: Vec<f64> = hands.iter().map(|&n| n as f64).collect();
    moving_average(&values, n_f2)
}

/// Maps a smoothed hand count to a provider count in `0..=3`.
/// Each band is closed on its upper end.
pub fn quantize_count(smoothed: f64, t_zero: f64, t_one: f64, t_two: f64) -> u8 {
    if smoothed <= t_zero {
        0
    } else if smoothed <= t_one {
        1
    } else if smoothed <= t_two {
        2
    } else {
        3
    }
}

pub fn quantize_hcp(smoothed: &[f64], cfg: &PipelineConfig) -> Vec<u8> {
    smoothed
        .iter()
        .map(|&v| quantize_count(v, cfg.t_zero, cfg.t_one, cfg.t_two))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HcpTimeline {
    /// Raw hand count per frame.
    pub hands: Vec<u32>,
    /// Smoothed hand count per frame.
    pub smoothed: Vec<f64>,
    /// Provider count per frame, capped at 3.
    pub providers: Vec<u8>,
}

impl HcpTimeline {
    pub fn len(&self) -> usize {
        self.providers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.providers.is_empty()
    }
}

pub fn hcp_timeline(episode: &Episode, cfg: &PipelineConfig) -> HcpTimeline {
    let hands: Vec<u32> = episode
        .frames
        .iter()
        .map(|f| count_hands(f, cfg.t_hcph))
        .collect();
    let smoothed = smooth_counts(&hands, cfg.n_f2);
    let providers = quantize_hcp(&smoothed, cfg);
    HcpTimeline {
        hands,
        smoothed,
        providers,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{BBox, Detection};
    use proptest::prelude::*;

    fn hand(score: f64) -> Detection {
        Detection::new(ObjectClass::Hcph, BBox::new(0., 0., 5., 5.).unwrap(), score).unwrap()
    }

    #[test]
    fn counting() {
        assert_eq!(count_hands(&FrameDetections::empty(0), 0.1), 0);
        let f = FrameDetections::new(0, vec![hand(0.2), hand(0.15), hand(0.05), hand(0.1)]);
        assert_eq!(count_hands(&f, 0.1), 2);
        let bmr = Detection { class: ObjectClass::Bmr, ..hand(0.9) };
        assert_eq!(count_hands(&FrameDetections::new(0, vec![bmr; 3]), 0.1), 0);
    }

    #[test]
    fn smoothing_counts() {
        assert_eq!(smooth_counts(&[2; 50], 40), vec![2.0; 50]);
        assert_eq!(smooth_counts(&[3], 40), vec![3.0]);
        let alt: Vec<u32> = (0..400).map(|i| if i % 2 == 0 { 0 } else { 2 }).collect();
        let s = smooth_counts(&alt, 40);
        // interior windows hold 41 samples: 20 or 21 twos
        for v in &s[20..380] {
            assert!((v - 1.0).abs() <= 1.0 / 41.0 + 1e-12, "{v}");
        }
    }

    #[test]
    fn bands() {
        let c = PipelineConfig::default();
        assert_eq!(quantize_count(0.2, c.t_zero, c.t_one, c.t_two), 0);
        assert_eq!(quantize_count(0.2000001, c.t_zero, c.t_one, c.t_two), 1);
        assert_eq!(quantize_count(2.0, c.t_zero, c.t_one, c.t_two), 1);
        assert_eq!(quantize_count(4.0, c.t_zero, c.t_one, c.t_two), 2);
        assert_eq!(quantize_count(4.5, c.t_zero, c.t_one, c.t_two), 3);
        assert_eq!(quantize_count(100.0, c.t_zero, c.t_one, c.t_two), 3);
    }

    #[test]
    fn timelines() {
        let cfg = PipelineConfig::default();
        let ep = |n: usize| {
            let frames = (0..30)
                .map(|i| FrameDetections::new(i, vec![hand(0.8); n]))
                .collect();
            Episode::new("e", 100, 100, frames).unwrap()
        };
        assert!(hcp_timeline(&ep(0), &cfg).providers.iter().all(|&p| p == 0));
        assert!(hcp_timeline(&ep(2), &cfg).providers.iter().all(|&p| p == 1));
        assert!(hcp_timeline(&ep(4), &cfg).providers.iter().all(|&p| p == 2));
        assert!(hcp_timeline(&ep(6), &cfg).providers.iter().all(|&p| p == 3));
    }

    proptest! {
        #[test]
        fn quantize_monotone(a in 0.0..10.0f64, b in 0.0..10.0f64) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(quantize_count(lo, 0.2, 2.0, 4.0) <= quantize_count(hi, 0.2, 2.0, 4.0));
        }

        #[test]
        fn smoothing_bounds(counts in prop::collection::vec(0u32..8, 1..120), n_f in 1usize..60) {
            let max = *counts.iter().max().unwrap() as f64;
            for v in smooth_counts(&counts, n_f) {
                prop_assert!(v >= 0.0 && v <= max);
            }
        }
    }
}
