//! Ground-truth timelines used for evaluation.
//!
//! Interval CSV, one row per annotated interval:
//!
//! ```text
//! episode,label,start_frame,end_frame,value
//! E1,nHCP,0,1200,2
//! E1,activity_BMR,310,452,1
//! E1,visible_BMR,0,1200,1
//! ```
//!
//! Intervals are half-open `[start_frame, end_frame)`. Labels are `nHCP`,
//! `activity_<C>`, `visible_<C>` and `detected_<C>` for `C` in BMR, SP, HRS.
//! For the boolean labels `value` is 0 or 1; frames not covered by a row
//! default to 0 / false.
//!
//! Truth-box CSV, one row per visible object per frame:
//!
//! ```text
//! episode,frame,class,x,y,w,h
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::{BBox, ObjectClass};

pub const ANNOTATION_HEADER: &str = "episode,label,start_frame,end_frame,value";
pub const TRUTH_BOX_HEADER: &str = "episode,frame,class,x,y,w,h";

/// Half-open frame interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Interval {
    pub start: usize,
    pub end: usize,
}

impl Interval {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start >= end {
            return Err(Error::Validation(format!("empty interval [{start}, {end})")));
        }
        Ok(Interval { start, end })
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn frames(&self) -> std::ops::Range<usize> {
        self.start..self.end
    }
}

/// Maximal runs of `true` in a boolean timeline.
pub fn intervals_of(timeline: &[bool]) -> Vec<Interval> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &v) in timeline.iter().enumerate() {
        match (v, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push(Interval { start: s, end: i });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Interval {
            start: s,
            end: timeline.len(),
        });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    ProviderCount,
    Activity(ObjectClass),
    Visible(ObjectClass),
    Detected(ObjectClass),
}

impl Label {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "nHCP" {
            return Ok(Label::ProviderCount);
        }
        let (kind, class) = s
            .split_once('_')
            .ok_or_else(|| Error::Validation(format!("unknown label `{s}`")))?;
        let class: ObjectClass = class.parse()?;
        if !class.is_tracked() {
            return Err(Error::Validation(format!("label `{s}` names an untracked class")));
        }
        match kind {
            "activity" => Ok(Label::Activity(class)),
            "visible" => Ok(Label::Visible(class)),
            "detected" => Ok(Label::Detected(class)),
            _ => Err(Error::Validation(format!("unknown label `{s}`"))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Label::ProviderCount => "nHCP".to_string(),
            Label::Activity(c) => format!("activity_{c}"),
            Label::Visible(c) => format!("visible_{c}"),
            Label::Detected(c) => format!("detected_{c}"),
        }
    }
}

/// Annotated timelines of one episode.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ReferenceAnnotation {
    pub episode_id: String,
    /// Provider count per interval; unannotated frames count as 0.
    pub providers: Vec<(Interval, u8)>,
    /// Indexed like [`ObjectClass::TRACKED`].
    pub activities: [Vec<Interval>; 3],
    pub visible: [Vec<Interval>; 3],
    /// `None` when the file carries no `detected_<C>` rows for the class.
    pub detected: [Option<Vec<Interval>>; 3],
}

fn tracked(class: ObjectClass) -> usize {
    class
        .tracked_index()
        .unwrap_or_else(|| panic!("{class} is not a tracked class"))
}

fn to_timeline(intervals: &[Interval], n: usize) -> Vec<bool> {
    let mut t = vec![false; n];
    for iv in intervals {
        t[iv.start.min(n)..iv.end.min(n)].fill(true);
    }
    t
}

fn check_disjoint(label: &str, intervals: &mut [Interval]) -> Result<()> {
    intervals.sort();
    for w in intervals.windows(2) {
        if w[1].start < w[0].end {
            return Err(Error::Validation(format!(
                "overlapping `{label}` intervals [{}, {}) and [{}, {})",
                w[0].start, w[0].end, w[1].start, w[1].end
            )));
        }
    }
    Ok(())
}

impl ReferenceAnnotation {
    pub fn new(episode_id: impl Into<String>) -> Self {
        ReferenceAnnotation {
            episode_id: episode_id.into(),
            ..Default::default()
        }
    }

    pub fn activities(&self, class: ObjectClass) -> &[Interval] {
        &self.activities[tracked(class)]
    }

    pub fn provider_timeline(&self, n: usize) -> Vec<u8> {
        let mut t = vec![0u8; n];
        for (iv, v) in &self.providers {
            t[iv.start.min(n)..iv.end.min(n)].fill(*v);
        }
        t
    }

    pub fn visible_timeline(&self, class: ObjectClass, n: usize) -> Vec<bool> {
        to_timeline(&self.visible[tracked(class)], n)
    }

    pub fn detected_timeline(&self, class: ObjectClass, n: usize) -> Option<Vec<bool>> {
        self.detected[tracked(class)]
            .as_ref()
            .map(|iv| to_timeline(iv, n))
    }

    /// Largest interval end over all labels.
    pub fn extent(&self) -> usize {
        let mut ends = self.providers.iter().map(|(iv, _)| iv.end).collect::<Vec<_>>();
        for group in self.activities.iter().chain(&self.visible) {
            ends.extend(group.iter().map(|iv| iv.end));
        }
        for group in self.detected.iter().flatten() {
            ends.extend(group.iter().map(|iv| iv.end));
        }
        ends.into_iter().max().unwrap_or(0)
    }

    /// Checks that every interval ends inside an episode of `n` frames.
    pub fn check_length(&self, n: usize) -> Result<()> {
        let extent = self.extent();
        if extent > n {
            return Err(Error::Validation(format!(
                "episode `{}`: annotation reaches frame {extent} but the episode has {n} frames",
                self.episode_id
            )));
        }
        Ok(())
    }

    fn validate(&mut self) -> Result<()> {
        let mut ivs: Vec<Interval> = self.providers.iter().map(|(iv, _)| *iv).collect();
        check_disjoint("nHCP", &mut ivs)?;
        self.providers.sort_by_key(|(iv, _)| *iv);
        for (k, &class) in ObjectClass::TRACKED.iter().enumerate() {
            check_disjoint(&Label::Activity(class).name(), &mut self.activities[k])?;
            check_disjoint(&Label::Visible(class).name(), &mut self.visible[k])?;
            if let Some(d) = self.detected[k].as_mut() {
                check_disjoint(&Label::Detected(class).name(), d)?;
            }
        }
        Ok(())
    }
}

/// Parses an interval CSV; episodes come back in order of first appearance.
pub fn parse_annotations(text: &str) -> Result<Vec<ReferenceAnnotation>> {
    let mut out: Vec<ReferenceAnnotation> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim();
        if line.is_empty() || line == ANNOTATION_HEADER {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(Error::parse(line_no, format!("expected 5 fields, got {}", fields.len())));
        }
        let parse_usize = |s: &str, what: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::parse(line_no, format!("bad {what} `{s}`")))
        };
        let label = Label::parse(fields[1]).map_err(|e| Error::parse(line_no, e.to_string()))?;
        let start = parse_usize(fields[2], "start_frame")?;
        let end = parse_usize(fields[3], "end_frame")?;
        let value = parse_usize(fields[4], "value")?;
        let interval = Interval::new(start, end).map_err(|e| Error::parse(line_no, e.to_string()))?;

        let slot = *index.entry(fields[0].to_string()).or_insert_with(|| {
            out.push(ReferenceAnnotation::new(fields[0]));
            out.len() - 1
        });
        let ann = &mut out[slot];
        let flag = |v: usize| match v {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(Error::parse(line_no, format!("boolean label needs 0 or 1, got {v}"))),
        };
        match label {
            Label::ProviderCount => ann.providers.push((interval, value.min(3) as u8)),
            Label::Activity(c) => {
                if flag(value)? {
                    ann.activities[tracked(c)].push(interval)
                }
            }
            Label::Visible(c) => {
                if flag(value)? {
                    ann.visible[tracked(c)].push(interval)
                }
            }
            Label::Detected(c) => {
                let on = flag(value)?;
                let d = ann.detected[tracked(c)].get_or_insert_with(Vec::new);
                if on {
                    d.push(interval);
                }
            }
        }
    }
    for ann in &mut out {
        ann.validate()?;
    }
    Ok(out)
}

/// Renders annotations as interval CSV with header.
pub fn write_annotations(annotations: &[ReferenceAnnotation]) -> String {
    let mut s = String::new();
    s.push_str(ANNOTATION_HEADER);
    s.push('\n');
    for ann in annotations {
        let id = &ann.episode_id;
        for (iv, v) in &ann.providers {
            let _ = writeln!(s, "{id},nHCP,{},{},{v}", iv.start, iv.end);
        }
        for (k, &class) in ObjectClass::TRACKED.iter().enumerate() {
            for iv in &ann.activities[k] {
                let _ = writeln!(s, "{id},{},{},{},1", Label::Activity(class).name(), iv.start, iv.end);
            }
            for iv in &ann.visible[k] {
                let _ = writeln!(s, "{id},{},{},{},1", Label::Visible(class).name(), iv.start, iv.end);
            }
            if let Some(d) = &ann.detected[k] {
                for iv in d {
                    let _ = writeln!(s, "{id},{},{},{},1", Label::Detected(class).name(), iv.start, iv.end);
                }
            }
        }
    }
    s
}

/// True object boxes of one episode, per tracked class and frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TruthBoxes {
    pub episode_id: String,
    pub boxes: BTreeMap<(ObjectClass, usize), BBox>,
}

impl TruthBoxes {
    pub fn timeline(&self, class: ObjectClass, n: usize) -> Vec<Option<BBox>> {
        (0..n).map(|i| self.boxes.get(&(class, i)).copied()).collect()
    }
}

pub fn parse_truth_boxes(text: &str) -> Result<Vec<TruthBoxes>> {
    let mut out: Vec<TruthBoxes> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim();
        if line.is_empty() || line == TRUTH_BOX_HEADER {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 7 {
            return Err(Error::parse(line_no, format!("expected 7 fields, got {}", f.len())));
        }
        let frame: usize = f[1]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad frame `{}`", f[1])))?;
        let class: ObjectClass = f[2].parse().map_err(|e: Error| Error::parse(line_no, e.to_string()))?;
        let mut nums = [0.0f64; 4];
        for (k, v) in f[3..7].iter().enumerate() {
            nums[k] = v
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad number `{v}`")))?;
        }
        let bbox = BBox::new(nums[0], nums[1], nums[2], nums[3])
            .map_err(|e| Error::parse(line_no, e.to_string()))?;
        let slot = *index.entry(f[0].to_string()).or_insert_with(|| {
            out.push(TruthBoxes {
                episode_id: f[0].to_string(),
                boxes: BTreeMap::new(),
            });
            out.len() - 1
        });
        if out[slot].boxes.insert((class, frame), bbox).is_some() {
            return Err(Error::parse(line_no, format!("duplicate {class} box for frame {frame}")));
        }
    }
    Ok(out)
}

pub fn write_truth_boxes(truth: &[TruthBoxes]) -> String {
    let mut s = String::new();
    s.push_str(TRUTH_BOX_HEADER);
    s.push('\n');
    for t in truth {
        let mut rows: Vec<_> = t.boxes.iter().collect();
        rows.sort_by_key(|((class, frame), _)| (*frame, *class));
        for ((class, frame), b) in rows {
            let _ = writeln!(
                s,
                "{},{frame},{class},{:.6},{:.6},{:.6},{:.6}",
                t.episode_id, b.x, b.y, b.w, b.h
            );
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "episode,label,start_frame,end_frame,value
E1,nHCP,0,10,1
E1,nHCP,10,20,5
E1,activity_BMR,2,6,1
E1,visible_SP,0,4,1
E1,detected_SP,0,2,1
E1,detected_HRS,0,2,0
E2,visible_BMR,1,3,1
";

    #[test]
    fn parses_and_expands() {
        let anns = parse_annotations(SAMPLE).unwrap();
        assert_eq!(anns.len(), 2);
        let a = &anns[0];
        let p = a.provider_timeline(22);
        assert_eq!(p[0], 1);
        assert_eq!(p[15], 3);
        assert_eq!(p[21], 0);
        assert_eq!(a.activities(ObjectClass::Bmr), &[Interval { start: 2, end: 6 }]);
        assert_eq!(a.visible_timeline(ObjectClass::Sp, 5), vec![true, true, true, true, false]);
        assert_eq!(a.detected_timeline(ObjectClass::Sp, 3), Some(vec![true, true, false]));
        assert_eq!(a.detected_timeline(ObjectClass::Hrs, 3), Some(vec![false; 3]));
        assert_eq!(a.detected_timeline(ObjectClass::Bmr, 3), None);
        assert_eq!(a.extent(), 20);
        assert!(a.check_length(19).is_err());
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(parse_annotations("E,nHCP,5,5,1").is_err());
        assert!(parse_annotations("E,bogus,0,5,1").is_err());
        assert!(parse_annotations("E,visible_HCPH,0,5,1").is_err());
        assert!(parse_annotations("E,visible_BMR,0,5,2").is_err());
        assert!(parse_annotations("E,visible_BMR,0,5,1\nE,visible_BMR,4,8,1").is_err());
        assert!(parse_annotations("E,nHCP,0,5").is_err());
    }

    #[test]
    fn write_then_parse() {
        let anns = parse_annotations(SAMPLE).unwrap();
        let again = parse_annotations(&write_annotations(&anns)).unwrap();
        // the value-0 row vanishes but its presence marker survives only if
        // another row exists, so compare the timelines instead
        for (a, b) in anns.iter().zip(&again) {
            assert_eq!(a.provider_timeline(30), b.provider_timeline(30));
            for c in ObjectClass::TRACKED {
                assert_eq!(a.visible_timeline(c, 30), b.visible_timeline(c, 30));
                assert_eq!(a.activities(c), b.activities(c));
            }
        }
    }

    #[test]
    fn truth_boxes_round_trip() {
        let text = "episode,frame,class,x,y,w,h\nE,0,BMR,1,2,3,4\nE,2,SP,5,5,5,5\n";
        let t = parse_truth_boxes(text).unwrap();
        assert_eq!(t[0].timeline(ObjectClass::Bmr, 2)[0], Some(BBox { x: 1., y: 2., w: 3., h: 4. }));
        assert_eq!(t[0].timeline(ObjectClass::Sp, 3)[1], None);
        assert_eq!(parse_truth_boxes(&write_truth_boxes(&t)).unwrap(), t);
        assert!(parse_truth_boxes("E,0,BMR,1,2,3,4\nE,0,BMR,1,2,3,4").is_err());
    }

    #[test]
    fn runs_of_true() {
        assert_eq!(
            intervals_of(&[true, true, false, true]),
            vec![Interval { start: 0, end: 2 }, Interval { start: 3, end: 4 }]
        );
        assert!(intervals_of(&[]).is_empty());
    }
}
