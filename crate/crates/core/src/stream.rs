//! Line-delimited JSON detection streams, one frame per line:
//!
//! ```text
//! {"episode":"E1","frame":0,"width":1280,"height":1024,"detections":[{"class":"BMR","x":10,"y":20,"w":80,"h":60,"score":0.9}]}
//! ```

use std::collections::HashMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::nms;
use crate::config::PipelineConfig;
use crate::types::{BBox, Detection, Episode, FrameDetections, ObjectClass};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameRecord {
    episode: String,
    frame: usize,
    width: u32,
    height: u32,
    detections: Vec<DetectionRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectionRecord {
    class: ObjectClass,
    x: f64,
    y: f64,
    w: f64,
    h: f64,
    score: f64,
}

struct Pending {
    id: String,
    width: u32,
    height: u32,
    first_line: usize,
    frames: Vec<FrameDetections>,
}

/// Parses a stream that may interleave several episodes. Episodes are
/// returned in order of first appearance.
pub fn parse_episodes(text: &str) -> Result<Vec<Episode>> {
    parse_lines(text.lines().map(|l| Ok(l.to_string())))
}

/// Same as [`parse_episodes`] over a buffered reader.
pub fn read_episodes<R: BufRead>(reader: R) -> Result<Vec<Episode>> {
    parse_lines(reader.lines().map(|l| l.map_err(Error::from)))
}

/// Parses a single-episode stream. Empty input yields [`Episode::empty`].
pub fn parse_detection_stream(text: &str) -> Result<Episode> {
    let mut episodes = parse_episodes(text)?;
    match episodes.len() {
        0 => Ok(Episode::empty()),
        1 => Ok(episodes.remove(0)),
        n => Err(Error::Validation(format!(
            "expected one episode, stream holds {n}"
        ))),
    }
}

fn parse_lines<I>(lines: I) -> Result<Vec<Episode>>
where
    I: Iterator<Item = Result<String>>,
{
    let mut order: Vec<Pending> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();

    for (n, line) in lines.enumerate() {
        let line_no = n + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: FrameRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(line_no, e.to_string()))?;
        let detections = record
            .detections
            .iter()
            .map(|d| {
                let bbox = BBox {
                    x: d.x,
                    y: d.y,
                    w: d.w,
                    h: d.h,
                };
                Detection::new(d.class, bbox, d.score)
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::parse(line_no, e.to_string()))?;

        let slot = *index.entry(record.episode.clone()).or_insert_with(|| {
            order.push(Pending {
                id: record.episode.clone(),
                width: record.width,
                height: record.height,
                first_line: line_no,
                frames: Vec::new(),
            });
            order.len() - 1
        });
        let pending = &mut order[slot];
        if pending.width != record.width || pending.height != record.height {
            return Err(Error::Validation(format!(
                "line {line_no}: episode `{}` changes frame size from {}x{} (line {}) to {}x{}",
                pending.id, pending.width, pending.height, pending.first_line, record.width, record.height
            )));
        }
        pending
            .frames
            .push(FrameDetections::new(record.frame, detections));
    }

    order
        .into_iter()
        .map(|p| Episode::new(p.id, p.width, p.height, p.frames))
        .collect()
}

/// Serializes an episode, one line per frame (empty frames included).
pub fn write_detection_stream(episode: &Episode) -> String {
    let mut out = String::new();
    for frame in &episode.frames {
        let record = FrameRecord {
            episode: episode.episode_id.clone(),
            frame: frame.frame_index,
            width: episode.frame_width,
            height: episode.frame_height,
            detections: frame
                .detections
                .iter()
                .map(|d| DetectionRecord {
                    class: d.class,
                    x: d.bbox.x,
                    y: d.bbox.y,
                    w: d.bbox.w,
                    h: d.bbox.h,
                    score: d.score,
                })
                .collect(),
        };
        // FrameRecord holds only strings and numbers
        out.push_str(&serde_json::to_string(&record).expect("frame record serializes"));
        out.push('\n');
    }
    out
}

/// Ingestion step: applies non-maximum suppression to every frame when
/// `cfg.nms` is set, otherwise returns the episode unchanged.
pub fn ingest(episode: Episode, cfg: &PipelineConfig) -> Episode {
    if !cfg.nms {
        return episode;
    }
    let frames = episode
        .frames
        .iter()
        .map(|f| nms(f, cfg.t_o, cfg.t_iou))
        .collect();
    Episode { frames, ..episode }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE: &str = r#"{"episode":"E","frame":0,"width":64,"height":48,"detections":[{"class":"BMR","x":1,"y":2,"w":3,"h":4,"score":0.9}]}"#;

    #[test]
    fn empty_input_gives_empty_episode() {
        let e = parse_detection_stream("").unwrap();
        assert_eq!(e.len(), 0);
        assert!(parse_episodes("\n\n").unwrap().is_empty());
    }

    #[test]
    fn single_line() {
        let e = parse_detection_stream(ONE).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e.frames[0].detections.len(), 1);
        assert_eq!(e.frames[0].detections[0].class, ObjectClass::Bmr);
        assert_eq!(e.frame_width, 64);
    }

    #[test]
    fn gaps_are_materialized() {
        let text = r#"{"episode":"E","frame":3,"width":10,"height":10,"detections":[]}
{"episode":"E","frame":0,"width":10,"height":10,"detections":[]}"#;
        let e = parse_detection_stream(text).unwrap();
        assert_eq!(e.len(), 4);
        // manual enumeration of the expected frame indices
        let expected: Vec<usize> = vec![0, 1, 2, 3];
        assert_eq!(e.frames.iter().map(|f| f.frame_index).collect::<Vec<_>>(), expected);
        assert!(e.frames[1].detections.is_empty() && e.frames[2].detections.is_empty());
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = format!("{ONE}\n\n{{not json}}\n");
        match parse_episodes(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let bad_score = ONE.replace("0.9", "1.9");
        assert!(matches!(parse_episodes(&bad_score), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn inconsistent_dimensions_rejected() {
        let text = format!("{ONE}\n{}", ONE.replace("\"frame\":0", "\"frame\":1").replace("64", "65"));
        assert!(matches!(parse_episodes(&text), Err(Error::Validation(_))));
    }

    #[test]
    fn multiple_episodes() {
        let text = format!("{ONE}\n{}", ONE.replace("\"E\"", "\"F\""));
        let eps = parse_episodes(&text).unwrap();
        assert_eq!(eps.len(), 2);
        assert_eq!(eps[1].episode_id, "F");
        assert!(parse_detection_stream(&text).is_err());
    }

    #[test]
    fn serialize_round_trip() {
        let e = parse_detection_stream(ONE).unwrap();
        let again = parse_detection_stream(&write_detection_stream(&e)).unwrap();
        assert_eq!(e, again);
    }
}
