//! Aggregated evaluation over episodes, rendered as a text table and JSON.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::annotation::ReferenceAnnotation;
use crate::error::{Error, Result};
use crate::metrics::{
    activity_detection_rate, band_counts, frame_performance, hcp_error, mean_average_precision,
    quartiles, ActivityRate, GroundTruthSet, Quartiles, AP_IOU_THRESHOLD,
};
use crate::types::ObjectClass;

/// Row order of the tracked classes in the report.
pub const REPORT_CLASSES: [ObjectClass; 3] = [ObjectClass::Bmr, ObjectClass::Hrs, ObjectClass::Sp];

pub fn activity_name(class: ObjectClass) -> &'static str {
    match class {
        ObjectClass::Bmr => "Ventilation",
        ObjectClass::Hrs => "Attach/remove HRS",
        ObjectClass::Sp => "Suction",
        ObjectClass::Hcph => "-",
    }
}

pub const BAND_NAMES: [&str; 4] = ["No HCP", "One HCP", "Two HCPs", "Three (or more) HCPs"];

/// Everything needed to score one episode.
#[derive(Debug, Clone)]
pub struct EpisodeEvaluation {
    pub episode_id: String,
    pub n_frames: usize,
    /// Detectedness per tracked class, indexed like [`ObjectClass::TRACKED`].
    pub detected: [Vec<bool>; 3],
    pub providers: Vec<u8>,
    pub annotation: ReferenceAnnotation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
}

impl Summary {
    fn of(values: &[f64]) -> Result<Self> {
        let Quartiles { q25, q50, q75 } = quartiles(values)?;
        Ok(Summary {
            mean: values.iter().sum::<f64>() / values.len() as f64,
            q25,
            q50,
            q75,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingRow {
    pub class: ObjectClass,
    /// Per-episode performance summarized over episodes.
    pub performance: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityRow {
    pub class: ObjectClass,
    pub activity: String,
    pub percent: f64,
    pub detected: usize,
    pub total: usize,
    pub no_activities: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandRow {
    pub band: String,
    /// `None` when no reference frame falls in the band.
    pub percent: Option<f64>,
    pub matched: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HcpSection {
    pub bands: Vec<BandRow>,
    pub correct: Summary,
    pub error: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApSection {
    pub per_class: Vec<(ObjectClass, Option<f64>)>,
    pub map: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub episodes: usize,
    pub tracking: Vec<TrackingRow>,
    pub activities: Vec<ActivityRow>,
    pub hcp: HcpSection,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detection: Option<ApSection>,
}

pub fn evaluate(episodes: &[EpisodeEvaluation], boxes: Option<&GroundTruthSet>) -> Result<EvalReport> {
    if episodes.is_empty() {
        return Err(Error::Empty("no episodes to evaluate"));
    }
    for ep in episodes {
        ep.annotation.check_length(ep.n_frames)?;
        if ep.providers.len() != ep.n_frames || ep.detected.iter().any(|d| d.len() != ep.n_frames) {
            return Err(Error::Validation(format!(
                "episode `{}`: timelines do not span {} frames",
                ep.episode_id, ep.n_frames
            )));
        }
    }

    let mut tracking = Vec::new();
    for class in REPORT_CLASSES {
        let k = class.tracked_index().unwrap();
        let per_episode = episodes
            .iter()
            .map(|ep| {
                let visible = ep.annotation.visible_timeline(class, ep.n_frames);
                frame_performance(&ep.detected[k], &visible)
            })
            .collect::<Result<Vec<_>>>()?;
        tracking.push(TrackingRow {
            class,
            performance: Summary::of(&per_episode)?,
        });
    }

    let activities = REPORT_CLASSES
        .iter()
        .map(|&class| {
            let k = class.tracked_index().unwrap();
            let rate = episodes
                .iter()
                .map(|ep| activity_detection_rate(&ep.annotation, class, &ep.detected[k]))
                .fold(ActivityRate::default(), ActivityRate::merge);
            ActivityRow {
                class,
                activity: activity_name(class).to_string(),
                percent: rate.percent(),
                detected: rate.detected,
                total: rate.total,
                no_activities: rate.no_activities(),
            }
        })
        .collect();

    let mut bands = [ActivityRate::default(); 4];
    let mut correct = Vec::new();
    let mut errors = Vec::new();
    for ep in episodes {
        let reference = ep.annotation.provider_timeline(ep.n_frames);
        for (acc, b) in bands.iter_mut().zip(band_counts(&ep.providers, &reference)) {
            *acc = acc.merge(b);
        }
        correct.push(frame_performance(&ep.providers, &reference)?);
        errors.push(hcp_error(&ep.providers, &reference)?);
    }
    let hcp = HcpSection {
        bands: bands
            .iter()
            .zip(BAND_NAMES)
            .map(|(b, name)| BandRow {
                band: name.to_string(),
                percent: (b.total > 0).then(|| b.percent()),
                matched: b.detected,
                total: b.total,
            })
            .collect(),
        correct: Summary::of(&correct)?,
        error: Summary::of(&errors)?,
    };

    let detection = boxes.map(|set| {
        let per_class = set.per_class_ap(AP_IOU_THRESHOLD);
        let aps: Vec<Option<f64>> = per_class.iter().map(|(_, ap)| *ap).collect();
        ApSection {
            per_class,
            map: mean_average_precision(&aps).ok(),
        }
    });

    Ok(EvalReport {
        episodes: episodes.len(),
        tracking,
        activities,
        hcp,
        detection,
    })
}

pub const SECTION_TRACKING: &str = "Object detection (post processed)";
pub const SECTION_ACTIVITY: &str = "Object detection during activity";
pub const SECTION_HCP: &str = "HCP detection";
pub const SECTION_AP: &str = "Single-image detection (AP at IoU 0.5)";

fn num(v: f64) -> String {
    format!("{v:.6}")
}

impl EvalReport {
    /// Pipe-separated text table. Percentages and errors use six decimals,
    /// matching the JSON values rounded to the same precision.
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "episodes | {}", self.episodes);
        let _ = writeln!(s);
        let _ = writeln!(s, "{SECTION_TRACKING}");
        let _ = writeln!(s, "class | P_mean | Q25 | Q50 | Q75");
        for row in &self.tracking {
            let p = &row.performance;
            let _ = writeln!(s, "{} | {} | {} | {} | {}", row.class, num(p.mean), num(p.q25), num(p.q50), num(p.q75));
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "{SECTION_ACTIVITY}");
        let _ = writeln!(s, "class | activity | P | detected/true | note");
        for row in &self.activities {
            let note = if row.no_activities { "no activities" } else { "-" };
            let _ = writeln!(
                s,
                "{} | {} | {} | {}/{} | {note}",
                row.class,
                row.activity,
                num(row.percent),
                row.detected,
                row.total
            );
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "{SECTION_HCP}");
        let _ = writeln!(s, "band | P | matched/total");
        for b in &self.hcp.bands {
            let p = b.percent.map_or_else(|| "n/a".to_string(), num);
            let _ = writeln!(s, "{} | {p} | {}/{}", b.band, b.matched, b.total);
        }
        let _ = writeln!(s, "measure | mean | Q25 | Q50 | Q75");
        for (name, m) in [("HCP correct pred. (P)", &self.hcp.correct), ("HCP pred. error (E)", &self.hcp.error)] {
            let _ = writeln!(s, "{name} | {} | {} | {} | {}", num(m.mean), num(m.q25), num(m.q50), num(m.q75));
        }
        if let Some(ap) = &self.detection {
            let _ = writeln!(s);
            let _ = writeln!(s, "{SECTION_AP}");
            let _ = writeln!(s, "class | AP");
            for (class, v) in &ap.per_class {
                let _ = writeln!(s, "{class} | {}", v.map_or_else(|| "n/a".to_string(), num));
            }
            let _ = writeln!(s, "mAP | {}", ap.map.map_or_else(|| "n/a".to_string(), num));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::Interval;

    fn perfect_episode(id: &str, n: usize) -> EpisodeEvaluation {
        let mut ann = ReferenceAnnotation::new(id);
        ann.providers.push((Interval::new(0, n).unwrap(), 2));
        for k in 0..3 {
            ann.visible[k].push(Interval::new(0, n).unwrap());
            ann.activities[k].push(Interval::new(1, n - 1).unwrap());
        }
        EpisodeEvaluation {
            episode_id: id.into(),
            n_frames: n,
            detected: [vec![true; n], vec![true; n], vec![true; n]],
            providers: vec![2; n],
            annotation: ann,
        }
    }

    #[test]
    fn perfect_run_scores_full_marks() {
        let r = evaluate(&[perfect_episode("a", 20), perfect_episode("b", 30)], None).unwrap();
        assert_eq!(r.episodes, 2);
        assert!(r.tracking.iter().all(|t| t.performance.mean == 100.0 && t.performance.q25 == 100.0));
        assert!(r.activities.iter().all(|a| a.percent == 100.0 && a.detected == 2 && a.total == 2));
        assert_eq!(r.hcp.error.mean, 0.0);
        assert_eq!(r.hcp.correct.mean, 100.0);
        assert_eq!(r.hcp.bands[2].percent, Some(100.0));
        assert_eq!(r.hcp.bands[0].percent, None);
    }

    #[test]
    fn rejects_short_timelines() {
        let mut ep = perfect_episode("a", 20);
        ep.providers.pop();
        assert!(evaluate(&[ep], None).is_err());
        assert!(evaluate(&[], None).is_err());
    }

    #[test]
    fn text_has_all_sections() {
        let r = evaluate(&[perfect_episode("a", 20)], Some(&GroundTruthSet::default())).unwrap();
        let text = r.render_text();
        for section in [SECTION_TRACKING, SECTION_ACTIVITY, SECTION_HCP, SECTION_AP] {
            assert!(text.contains(section), "{section}");
        }
        let back: EvalReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
