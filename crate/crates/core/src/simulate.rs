//! Scripted episodes with known ground truth and configurable detector noise.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::Deserialize;

use crate::annotation::{intervals_of, Interval, ReferenceAnnotation, TruthBoxes};
use crate::error::{Error, Result};
use crate::types::{BBox, Detection, Episode, FrameDetections, ObjectClass};

/// Linear motion of the box center from `from` (at `start`) towards `to`
/// (reached at `end - 1`). Frames `start..end`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub from: [f64; 2],
    pub to: [f64; 2],
}

impl Segment {
    fn center(&self, frame: usize) -> [f64; 2] {
        let span = (self.end - self.start).saturating_sub(1);
        if span == 0 {
            return self.from;
        }
        let t = (frame - self.start) as f64 / span as f64;
        [
            self.from[0] + (self.to[0] - self.from[0]) * t,
            self.from[1] + (self.to[1] - self.from[1]) * t,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectScript {
    pub class: ObjectClass,
    /// Box width and height.
    pub size: [f64; 2],
    /// Visible only inside these segments.
    pub path: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActivityScript {
    pub class: ObjectClass,
    pub start: usize,
    pub end: usize,
}

/// Number of providers over `start..end`; each contributes two hands.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderScript {
    pub start: usize,
    pub end: usize,
    pub count: u8,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseModel {
    /// Probability that a true object detection is missing.
    pub dropout: f64,
    /// Mean false detections per frame, spread uniformly over the frame.
    pub false_positive_rate: f64,
    pub fp_size: [f64; 2],
    pub fp_score: [f64; 2],
    /// Standard deviation of the box position jitter, pixels.
    pub jitter_std: f64,
    pub score: [f64; 2],
    /// Short displacements of a true detection, per 1000 frames and object.
    pub spikes_per_1000: f64,
    pub spike_frames: usize,
    pub spike_offset: f64,
    pub hand_dropout: f64,
    pub hand_size: [f64; 2],
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            dropout: 0.0,
            false_positive_rate: 0.0,
            fp_size: [60.0, 60.0],
            fp_score: [0.05, 0.3],
            jitter_std: 0.0,
            score: [0.9, 0.9],
            spikes_per_1000: 0.0,
            spike_frames: 2,
            spike_offset: 400.0,
            hand_dropout: 0.0,
            hand_size: [40.0, 40.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub episode: String,
    pub width: u32,
    pub height: u32,
    pub frames: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub objects: Vec<ObjectScript>,
    #[serde(default)]
    pub activities: Vec<ActivityScript>,
    #[serde(default)]
    pub providers: Vec<ProviderScript>,
    #[serde(default)]
    pub noise: NoiseModel,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Scenario(msg.into())
}

fn check_range(what: &str, r: [f64; 2], lo: f64, hi: f64) -> Result<()> {
    if r[0].is_finite() && r[1].is_finite() && lo <= r[0] && r[0] <= r[1] && r[1] <= hi {
        Ok(())
    } else {
        Err(bad(format!("{what} range {:?} must be ordered within [{lo}, {hi}]", r)))
    }
}

fn check_prob(what: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(bad(format!("{what} must be a probability, got {p}")))
    }
}

fn check_disjoint(what: &str, mut spans: Vec<(usize, usize)>, frames: usize) -> Result<()> {
    spans.sort();
    for &(s, e) in &spans {
        if s >= e || e > frames {
            return Err(bad(format!("{what}: interval {s}..{e} is empty or past {frames} frames")));
        }
    }
    if let Some(w) = spans.windows(2).find(|w| w[1].0 < w[0].1) {
        return Err(bad(format!("{what}: intervals {:?} and {:?} overlap", w[0], w[1])));
    }
    Ok(())
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.frames == 0 {
            return Err(bad("width, height and frames must be positive"));
        }
        let (w, h) = (self.width as f64, self.height as f64);
        for (i, o) in self.objects.iter().enumerate() {
            if !o.class.is_tracked() {
                return Err(bad(format!("object {i}: {} is not a tracked class", o.class)));
            }
            if self.objects[..i].iter().any(|p| p.class == o.class) {
                return Err(bad(format!("object {i}: second {} object", o.class)));
            }
            if !(o.size[0] > 0.0 && o.size[1] > 0.0 && o.size[0] <= w && o.size[1] <= h) {
                return Err(bad(format!("object {i}: size {:?} does not fit the frame", o.size)));
            }
            check_disjoint(
                &format!("{} path", o.class),
                o.path.iter().map(|s| (s.start, s.end)).collect(),
                self.frames,
            )?;
            for s in &o.path {
                for c in [s.from, s.to] {
                    let inside = c[0] - o.size[0] / 2.0 >= 0.0
                        && c[0] + o.size[0] / 2.0 <= w
                        && c[1] - o.size[1] / 2.0 >= 0.0
                        && c[1] + o.size[1] / 2.0 <= h;
                    if !inside {
                        return Err(bad(format!("{} path point {:?} puts the box outside the frame", o.class, c)));
                    }
                }
            }
        }
        for class in ObjectClass::TRACKED {
            let spans = self
                .activities
                .iter()
                .filter(|a| a.class == class)
                .map(|a| (a.start, a.end))
                .collect();
            check_disjoint(&format!("{class} activities"), spans, self.frames)?;
        }
        if let Some(a) = self.activities.iter().find(|a| !a.class.is_tracked()) {
            return Err(bad(format!("activity for untracked class {}", a.class)));
        }
        let max_hands = 2 * self.providers.iter().map(|p| p.count as usize).max().unwrap_or(0);
        if max_hands as f64 * self.noise.hand_size[0] > w {
            return Err(bad(format!("{max_hands} hands of width {} do not fit side by side", self.noise.hand_size[0])));
        }
        check_disjoint(
            "providers",
            self.providers.iter().map(|p| (p.start, p.end)).collect(),
            self.frames,
        )?;

        let n = &self.noise;
        check_prob("dropout", n.dropout)?;
        check_prob("hand_dropout", n.hand_dropout)?;
        check_range("score", n.score, 0.0, 1.0)?;
        check_range("fp_score", n.fp_score, 0.0, 1.0)?;
        for (what, size) in [("fp_size", n.fp_size), ("hand_size", n.hand_size)] {
            if !(size[0] > 0.0 && size[1] > 0.0 && size[0] <= w && size[1] <= h) {
                return Err(bad(format!("{what} {:?} does not fit the frame", size)));
            }
        }
        for (what, v) in [
            ("false_positive_rate", n.false_positive_rate),
            ("jitter_std", n.jitter_std),
            ("spikes_per_1000", n.spikes_per_1000),
            ("spike_offset", n.spike_offset),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(bad(format!("{what} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    /// True object box on `frame`, if visible.
    pub fn truth_box(&self, object: &ObjectScript, frame: usize) -> Option<BBox> {
        let seg = object.path.iter().find(|s| (s.start..s.end).contains(&frame))?;
        let [cx, cy] = seg.center(frame);
        Some(BBox {
            x: cx - object.size[0] / 2.0,
            y: cy - object.size[1] / 2.0,
            w: object.size[0],
            h: object.size[1],
        })
    }

    fn provider_count(&self, frame: usize) -> u8 {
        self.providers
            .iter()
            .find(|p| (p.start..p.end).contains(&frame))
            .map_or(0, |p| p.count)
    }

    /// Ground truth implied by the script alone.
    pub fn reference(&self) -> (ReferenceAnnotation, TruthBoxes) {
        let mut ann = ReferenceAnnotation::new(&self.episode);
        let mut providers: Vec<(Interval, u8)> = self
            .providers
            .iter()
            .map(|p| (Interval { start: p.start, end: p.end }, p.count.min(3)))
            .collect();
        providers.sort_by_key(|(i, _)| i.start);
        ann.providers = providers;
        for a in &self.activities {
            let k = a.class.tracked_index().unwrap();
            ann.activities[k].push(Interval { start: a.start, end: a.end });
        }
        for list in ann.activities.iter_mut() {
            list.sort_by_key(|i| i.start);
        }
        let mut truth = TruthBoxes {
            episode_id: self.episode.clone(),
            boxes: Default::default(),
        };
        for o in &self.objects {
            let visible: Vec<bool> = (0..self.frames)
                .map(|i| {
                    let b = self.truth_box(o, i);
                    if let Some(b) = b {
                        truth.boxes.insert((o.class, i), b);
                    }
                    b.is_some()
                })
                .collect();
            ann.visible[o.class.tracked_index().unwrap()] = intervals_of(&visible);
        }
        (ann, truth)
    }

    /// Frames on which each object's detection is displaced, drawn from a
    /// stream separate from the per-frame noise.
    fn spike_frames(&self) -> Vec<Vec<bool>> {
        let n = &self.noise;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(u64::MAX);
        self.objects
            .iter()
            .map(|_| {
                let mut marks = vec![false; self.frames];
                let count = (self.frames as f64 * n.spikes_per_1000 / 1000.0).round() as usize;
                let len = n.spike_frames.max(1);
                // one slot per spike, so spikes never touch each other
                let slots = self.frames / (len + 1);
                if count == 0 || slots == 0 {
                    return marks;
                }
                for s in sample(&mut rng, slots, count.min(slots)).into_iter() {
                    let start = s * (len + 1) + 1;
                    for m in marks.iter_mut().skip(start).take(len) {
                        *m = true;
                    }
                }
                marks
            })
            .collect()
    }

    fn frame(&self, i: usize, spikes: &[Vec<bool>]) -> FrameDetections {
        let n = &self.noise;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(i as u64);
        let (w, h) = (self.width as f64, self.height as f64);
        let mut dets = Vec::new();
        let jitter = Normal::new(0.0, n.jitter_std).expect("validated std");
        let draw = |rng: &mut ChaCha8Rng, r: [f64; 2]| {
            if r[0] == r[1] {
                r[0]
            } else {
                rng.random_range(r[0]..=r[1])
            }
        };

        for (k, o) in self.objects.iter().enumerate() {
            // draw everything unconditionally so streams stay aligned
            let keep = rng.random::<f64>() >= n.dropout;
            let dx = jitter.sample(&mut rng);
            let dy = jitter.sample(&mut rng);
            let score = draw(&mut rng, n.score);
            let Some(mut b) = self.truth_box(o, i) else { continue };
            if !keep {
                continue;
            }
            if n.jitter_std > 0.0 {
                b = b.translate(dx, dy);
            }
            if spikes[k][i] {
                let c = b.center();
                let sx = if c.x + n.spike_offset + b.w / 2.0 <= w { 1.0 } else { -1.0 };
                b = b.translate(sx * n.spike_offset, 0.0);
            }
            if let Some(b) = b.clamp_to_frame(w, h) {
                dets.push(Detection { class: o.class, bbox: b, score });
            }
        }

        // each hand gets its own vertical strip so hands never overlap
        let hands = 2 * self.provider_count(i) as usize;
        let strip = w / hands.max(1) as f64;
        for k in 0..hands {
            let keep = rng.random::<f64>() >= n.hand_dropout;
            let x = k as f64 * strip + rng.random_range(0.0..=strip - n.hand_size[0]);
            let y = rng.random_range(0.0..=h - n.hand_size[1]);
            let score = draw(&mut rng, n.score);
            if keep {
                let bbox = BBox { x, y, w: n.hand_size[0], h: n.hand_size[1] };
                dets.push(Detection { class: ObjectClass::Hcph, bbox, score });
            }
        }

        if n.false_positive_rate > 0.0 && !self.objects.is_empty() {
            let count = Poisson::new(n.false_positive_rate).expect("validated rate").sample(&mut rng) as usize;
            for _ in 0..count {
                let class = self.objects[rng.random_range(0..self.objects.len())].class;
                let x = rng.random_range(0.0..=w - n.fp_size[0]);
                let y = rng.random_range(0.0..=h - n.fp_size[1]);
                let score = draw(&mut rng, n.fp_score);
                let bbox = BBox { x, y, w: n.fp_size[0], h: n.fp_size[1] };
                dets.push(Detection { class, bbox, score });
            }
        }
        FrameDetections::new(i, dets)
    }
}

/// Output of one scripted run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedEpisode {
    pub episode: Episode,
    pub annotation: ReferenceAnnotation,
    pub truth: TruthBoxes,
}

pub fn generate_episode(scenario: &Scenario) -> Result<SimulatedEpisode> {
    scenario.validate()?;
    let spikes = scenario.spike_frames();
    let frames: Vec<FrameDetections> = (0..scenario.frames)
        .into_par_iter()
        .map(|i| scenario.frame(i, &spikes))
        .collect();
    let episode = Episode::new(&scenario.episode, scenario.width, scenario.height, frames)?;
    let (annotation, truth) = scenario.reference();
    Ok(SimulatedEpisode {
        episode,
        annotation,
        truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PipelineConfig;
    use crate::metrics::{detectedness, frame_performance, hcp_error};
    use crate::{hcp, locate, trackpost};

    const STATIC: &str = r#"
episode = "static"
width = 640
height = 480
frames = 120
seed = 3

[[objects]]
class = "BMR"
size = [80, 60]
path = [{ start = 0, end = 120, from = [200, 150], to = [200, 150] }]

[[activities]]
class = "BMR"
start = 10
end = 60

[[providers]]
start = 0
end = 120
count = 2
"#;

    #[test]
    fn static_scene_is_exact() {
        let s = Scenario::from_toml(STATIC).unwrap();
        let sim = generate_episode(&s).unwrap();
        assert_eq!(sim.episode.len(), 120);
        for f in &sim.episode.frames {
            let bmr: Vec<_> = f.of_class(ObjectClass::Bmr).collect();
            assert_eq!(bmr.len(), 1);
            assert_eq!(bmr[0].bbox, BBox { x: 160.0, y: 120.0, w: 80.0, h: 60.0 });
            assert_eq!(f.of_class(ObjectClass::Hcph).count(), 4);
        }
        let cfg = PipelineConfig::default();
        let loc = locate::locate_series(&sim.episode, ObjectClass::Bmr, &cfg);
        assert!(loc.points.iter().all(|p| p.unwrap().x == 199.5 && p.unwrap().y == 149.5));
        let track = trackpost::track_object(&sim.episode, ObjectClass::Bmr, &cfg);
        let d = detectedness(&track, &sim.truth.timeline(ObjectClass::Bmr, 120));
        let v = sim.annotation.visible_timeline(ObjectClass::Bmr, 120);
        assert_eq!(frame_performance(&d, &v).unwrap(), 100.0);
        let providers = hcp::hcp_timeline(&sim.episode, &cfg).providers;
        assert_eq!(hcp_error(&providers, &sim.annotation.provider_timeline(120)).unwrap(), 0.0);
    }

    #[test]
    fn deterministic() {
        let mut s = Scenario::from_toml(STATIC).unwrap();
        s.noise.dropout = 0.3;
        s.noise.jitter_std = 2.0;
        s.noise.false_positive_rate = 0.5;
        s.noise.spikes_per_1000 = 20.0;
        assert_eq!(generate_episode(&s).unwrap(), generate_episode(&s).unwrap());
        let mut t = s.clone();
        t.seed += 1;
        assert_ne!(generate_episode(&s).unwrap().episode, generate_episode(&t).unwrap().episode);
    }

    #[test]
    fn noise_leaves_reference_alone() {
        let clean = Scenario::from_toml(STATIC).unwrap();
        let mut noisy = clean.clone();
        noisy.noise.dropout = 0.5;
        noisy.noise.false_positive_rate = 2.0;
        let a = generate_episode(&clean).unwrap();
        let b = generate_episode(&noisy).unwrap();
        assert_eq!(a.annotation, b.annotation);
        assert_eq!(a.truth, b.truth);
    }

    #[test]
    fn dropout_within_binomial_bound() {
        let mut s = Scenario::from_toml(STATIC).unwrap();
        s.frames = 10_000;
        s.objects[0].path[0].end = 10_000;
        s.activities.clear();
        s.providers.clear();
        s.noise.dropout = 0.2;
        let sim = generate_episode(&s).unwrap();
        let present = sim
            .episode
            .frames
            .iter()
            .filter(|f| f.of_class(ObjectClass::Bmr).count() == 1)
            .count() as f64;
        let n = 10_000.0;
        let sigma = (n * 0.8 * 0.2f64).sqrt();
        assert!((present - 0.8 * n).abs() <= 3.0 * sigma, "{present}");
    }

    #[test]
    fn spikes_are_placed() {
        let mut s = Scenario::from_toml(STATIC).unwrap();
        s.frames = 1000;
        s.objects[0].path[0].end = 1000;
        s.activities.clear();
        s.providers.clear();
        s.noise.spikes_per_1000 = 1.0;
        s.noise.spike_offset = 300.0;
        let sim = generate_episode(&s).unwrap();
        let moved: Vec<usize> = sim
            .episode
            .frames
            .iter()
            .filter(|f| f.of_class(ObjectClass::Bmr).any(|d| d.bbox.x != 160.0))
            .map(|f| f.frame_index)
            .collect();
        assert_eq!(moved.len(), 2);
        assert_eq!(moved[1], moved[0] + 1);
    }

    #[test]
    fn validation() {
        let base = Scenario::from_toml(STATIC).unwrap();
        let mut s = base.clone();
        s.noise.dropout = 1.5;
        assert!(s.validate().is_err());
        let mut s = base.clone();
        s.objects[0].path[0].to = [630.0, 150.0];
        assert!(s.validate().is_err());
        let mut s = base.clone();
        s.objects.push(s.objects[0].clone());
        assert!(s.validate().is_err());
        let mut s = base.clone();
        s.providers.push(ProviderScript { start: 100, end: 130, count: 1 });
        assert!(s.validate().is_err());
        assert!(Scenario::from_toml("episode = 'x'\nwidth = 1\nheight = 1\nframes = 1\nbogus = 2").is_err());
    }

    #[test]
    fn moving_path() {
        let seg = Segment { start: 10, end: 21, from: [0.0, 0.0], to: [100.0, 50.0] };
        assert_eq!(seg.center(10), [0.0, 0.0]);
        assert_eq!(seg.center(15), [50.0, 25.0]);
        assert_eq!(seg.center(20), [100.0, 50.0]);
    }
}
