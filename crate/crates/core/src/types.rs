//! Domain types shared by every stage of the pipeline.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Object classes produced by the detector.
///
/// `Bmr`, `Sp` and `Hrs` are tracked as single objects; `Hcph` (provider
/// hands) is only counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObjectClass {
    #[serde(rename = "BMR")]
    Bmr = 1,
    #[serde(rename = "SP")]
    Sp = 2,
    #[serde(rename = "HRS")]
    Hrs = 3,
    #[serde(rename = "HCPH")]
    Hcph = 4,
}

impl ObjectClass {
    pub const ALL: [ObjectClass; 4] = [
        ObjectClass::Bmr,
        ObjectClass::Sp,
        ObjectClass::Hrs,
        ObjectClass::Hcph,
    ];

    /// Classes that go through position tracking.
    pub const TRACKED: [ObjectClass; 3] = [ObjectClass::Bmr, ObjectClass::Sp, ObjectClass::Hrs];

    pub fn is_tracked(self) -> bool {
        self != ObjectClass::Hcph
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectClass::Bmr => "BMR",
            ObjectClass::Sp => "SP",
            ObjectClass::Hrs => "HRS",
            ObjectClass::Hcph => "HCPH",
        }
    }

    /// Numeric code (1 = BMR, 2 = SP, 3 = HRS, 4 = HCPH).
    pub fn code(self) -> u8 {
        self as u8
    }

    /// Position of a tracked class inside [`ObjectClass::TRACKED`].
    pub fn tracked_index(self) -> Option<usize> {
        ObjectClass::TRACKED.iter().position(|&c| c == self)
    }
}

impl fmt::Display for ObjectClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObjectClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "BMR" | "1" => Ok(ObjectClass::Bmr),
            "SP" | "2" => Ok(ObjectClass::Sp),
            "HRS" | "3" => Ok(ObjectClass::Hrs),
            "HCPH" | "4" => Ok(ObjectClass::Hcph),
            other => Err(Error::Validation(format!("unknown object class `{other}`"))),
        }
    }
}

/// A real-valued position in pixel-index coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// Axis-aligned box, top-left corner plus size, in pixels.
///
/// The box covers the half-open intervals `[x, x + w) × [y, y + h)`. Pixel
/// `(px, py)` belongs to the box when its center `(px + 0.5, py + 0.5)` lies
/// inside, so integer boxes cover exactly `w * h` pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        let b = BBox { x, y, w, h };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.x, self.y, self.w, self.h].iter().all(|v| v.is_finite()) {
            return Err(Error::Validation(format!("non-finite box {self:?}")));
        }
        if self.w <= 0.0 || self.h <= 0.0 {
            return Err(Error::Validation(format!(
                "box must have positive size, got w={} h={}",
                self.w, self.h
            )));
        }
        Ok(())
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn center(&self) -> Point {
        Point::new(self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    /// Area of the overlap with `other`; zero when disjoint.
    pub fn intersection_area(&self, other: &BBox) -> f64 {
        match self.intersection(other) {
            Some(b) => b.area(),
            None => 0.0,
        }
    }

    pub fn intersection(&self, other: &BBox) -> Option<BBox> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        if x1 > x0 && y1 > y0 {
            Some(BBox {
                x: x0,
                y: y0,
                w: x1 - x0,
                h: y1 - y0,
            })
        } else {
            None
        }
    }

    /// Clip to `[0, width) × [0, height)`. `None` if nothing remains.
    pub fn clamp_to_frame(&self, width: f64, height: f64) -> Option<BBox> {
        self.intersection(&BBox {
            x: 0.0,
            y: 0.0,
            w: width,
            h: height,
        })
    }

    pub fn translate(&self, dx: f64, dy: f64) -> BBox {
        BBox {
            x: self.x + dx,
            y: self.y + dy,
            ..*self
        }
    }

    /// Column indices of the pixels covered by the box, clipped to `[0, limit)`.
    pub fn pixel_columns(&self, limit: usize) -> Range<usize> {
        pixel_span(self.x, self.w, limit)
    }

    /// Row indices of the pixels covered by the box, clipped to `[0, limit)`.
    pub fn pixel_rows(&self, limit: usize) -> Range<usize> {
        pixel_span(self.y, self.h, limit)
    }

    /// Mean pixel index of the covered pixels (unclipped). For an integer box
    /// this is `x + (w - 1) / 2`.
    pub fn pixel_center(&self) -> Point {
        let cols = pixel_span_unclipped(self.x, self.w);
        let rows = pixel_span_unclipped(self.y, self.h);
        Point::new(
            (cols.0 + cols.1 - 1) as f64 / 2.0,
            (rows.0 + rows.1 - 1) as f64 / 2.0,
        )
    }
}

fn pixel_span_unclipped(start: f64, len: f64) -> (i64, i64) {
    let lo = (start - 0.5).ceil() as i64;
    let hi = (start + len - 0.5).ceil() as i64;
    (lo, hi.max(lo))
}

fn pixel_span(start: f64, len: f64, limit: usize) -> Range<usize> {
    let (lo, hi) = pixel_span_unclipped(start, len);
    let limit = limit as i64;
    let lo = lo.clamp(0, limit);
    let hi = hi.clamp(lo, limit);
    lo as usize..hi as usize
}

/// One detector output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub class: ObjectClass,
    pub bbox: BBox,
    /// Objectness score in `[0, 1]`.
    pub score: f64,
}

impl Detection {
    pub fn new(class: ObjectClass, bbox: BBox, score: f64) -> Result<Self> {
        bbox.validate()?;
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::Validation(format!("score {score} outside [0, 1]")));
        }
        Ok(Detection { class, bbox, score })
    }
}

/// All detections of one frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameDetections {
    pub frame_index: usize,
    pub detections: Vec<Detection>,
}

impl FrameDetections {
    pub fn new(frame_index: usize, detections: Vec<Detection>) -> Self {
        FrameDetections {
            frame_index,
            detections,
        }
    }

    pub fn empty(frame_index: usize) -> Self {
        FrameDetections::new(frame_index, Vec::new())
    }

    pub fn of_class(&self, class: ObjectClass) -> impl Iterator<Item = &Detection> + '_ {
        self.detections.iter().filter(move |d| d.class == class)
    }
}

/// The detection stream of one resuscitation recording.
///
/// After construction through [`Episode::new`] or the stream parser the
/// frame list is dense: `frames[i].frame_index == i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub episode_id: String,
    pub frame_width: u32,
    pub frame_height: u32,
    pub frames: Vec<FrameDetections>,
}

impl Episode {
    /// Builds an episode from frames in any order; gaps become empty frames.
    pub fn new(
        episode_id: impl Into<String>,
        frame_width: u32,
        frame_height: u32,
        mut frames: Vec<FrameDetections>,
    ) -> Result<Self> {
        if frame_width == 0 || frame_height == 0 {
            return Err(Error::Validation(format!(
                "frame dimensions must be positive, got {frame_width}x{frame_height}"
            )));
        }
        frames.sort_by_key(|f| f.frame_index);
        for pair in frames.windows(2) {
            if pair[0].frame_index == pair[1].frame_index {
                return Err(Error::Validation(format!(
                    "duplicate frame index {}",
                    pair[0].frame_index
                )));
            }
        }
        let len = frames.last().map_or(0, |f| f.frame_index + 1);
        let mut dense: Vec<FrameDetections> = (0..len).map(FrameDetections::empty).collect();
        for f in frames {
            let idx = f.frame_index;
            dense[idx] = f;
        }
        Ok(Episode {
            episode_id: episode_id.into(),
            frame_width,
            frame_height,
            frames: dense,
        })
    }

    /// The vacuous episode produced by an empty stream. Its dimensions are
    /// zero; it has no frames to which they could apply.
    pub fn empty() -> Self {
        Episode {
            episode_id: String::new(),
            frame_width: 0,
            frame_height: 0,
            frames: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}
