//! Per-frame object position from accumulated objectness.
//!
//! Every detection of a class adds its score to each pixel it covers. The
//! position is the centroid of the pixels attaining the maximum of that
//! field, provided the maximum exceeds the class threshold.
//!
//! [`ObjectnessField`] materializes the raster. [`locate_frame`] gives the
//! identical answer without allocating it by working on the grid of cells
//! cut out by the box edges: within a cell every pixel is covered by the
//! same detections and therefore carries the same value.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{CentroidMode, PipelineConfig};
use crate::types::{BBox, Detection, Episode, FrameDetections, ObjectClass, Point};

/// Dense per-pixel accumulator for one class in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectnessField {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ObjectnessField {
    pub fn zeros(width: usize, height: usize) -> Self {
        ObjectnessField {
            width,
            height,
            values: vec![0.0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Adds the detection's score to every covered pixel; parts outside the
    /// raster are ignored.
    pub fn add(&mut self, det: &Detection) {
        let cols = det.bbox.pixel_columns(self.width);
        for row in det.bbox.pixel_rows(self.height) {
            let line = &mut self.values[row * self.width..(row + 1) * self.width];
            for v in &mut line[cols.clone()] {
                *v += det.score;
            }
        }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Accumulates the scores of all `class` detections of `frame`.
pub fn accumulate_objectness(
    frame: &FrameDetections,
    class: ObjectClass,
    width: usize,
    height: usize,
) -> ObjectnessField {
    let mut field = ObjectnessField::zeros(width, height);
    for det in frame.of_class(class) {
        field.add(det);
    }
    field
}

/// Centroid of the maximum-valued pixels, or `None` when the maximum does
/// not exceed `t_obj`.
pub fn extract_centroid(field: &ObjectnessField, t_obj: f64) -> Option<Point> {
    extract_centroid_with(field, t_obj, CentroidMode::Max)
}

pub fn extract_centroid_with(
    field: &ObjectnessField,
    t_obj: f64,
    mode: CentroidMode,
) -> Option<Point> {
    let max = field.max();
    if max <= t_obj {
        return None;
    }
    let mut acc = CentroidSum::default();
    for y in 0..field.height {
        for x in 0..field.width {
            let v = field.get(x, y);
            let selected = match mode {
                CentroidMode::Max => v == max,
                CentroidMode::AboveThreshold => v > t_obj,
            };
            if selected {
                acc.add_rect(x, x + 1, y, y + 1);
            }
        }
    }
    acc.centroid()
}

/// Integer pixel-coordinate sums; exact until the final division.
#[derive(Default)]
struct CentroidSum {
    sum_x: u128,
    sum_y: u128,
    count: u128,
}

impl CentroidSum {
    fn add_rect(&mut self, x0: usize, x1: usize, y0: usize, y1: usize) {
        let (x0, x1, y0, y1) = (x0 as u128, x1 as u128, y0 as u128, y1 as u128);
        let w = x1 - x0;
        let h = y1 - y0;
        // sum of a..b-1 is (b - a)(a + b - 1) / 2, always an integer
        self.sum_x += h * (w * (x0 + x1 - 1) / 2);
        self.sum_y += w * (h * (y0 + y1 - 1) / 2);
        self.count += w * h;
    }

    fn centroid(&self) -> Option<Point> {
        if self.count == 0 {
            return None;
        }
        let n = self.count as f64;
        Some(Point::new(self.sum_x as f64 / n, self.sum_y as f64 / n))
    }
}

/// Position of `class` in one frame, computed on the cell grid formed by the
/// detection boxes. Agrees exactly with
/// `extract_centroid_with(&accumulate_objectness(..), ..)`.
pub fn locate_frame(
    frame: &FrameDetections,
    class: ObjectClass,
    width: usize,
    height: usize,
    t_obj: f64,
    mode: CentroidMode,
) -> Option<Point> {
    struct Span {
        cols: (usize, usize),
        rows: (usize, usize),
        score: f64,
    }
    let spans: Vec<Span> = frame
        .of_class(class)
        .map(|d| {
            let c = d.bbox.pixel_columns(width);
            let r = d.bbox.pixel_rows(height);
            Span {
                cols: (c.start, c.end),
                rows: (r.start, r.end),
                score: d.score,
            }
        })
        .collect();
    if spans.is_empty() {
        return None;
    }

    let mut xs: Vec<usize> = spans.iter().flat_map(|s| [s.cols.0, s.cols.1]).collect();
    let mut ys: Vec<usize> = spans.iter().flat_map(|s| [s.rows.0, s.rows.1]).collect();
    xs.sort_unstable();
    xs.dedup();
    ys.sort_unstable();
    ys.dedup();

    let nx = xs.len().saturating_sub(1);
    let ny = ys.len().saturating_sub(1);
    let mut cells = vec![0.0f64; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let (x0, y0) = (xs[i], ys[j]);
            let mut v = 0.0;
            for s in &spans {
                if s.cols.0 <= x0 && x0 < s.cols.1 && s.rows.0 <= y0 && y0 < s.rows.1 {
                    v += s.score;
                }
            }
            cells[j * nx + i] = v;
        }
    }

    // uncovered pixels hold 0, which never beats a non-negative threshold
    let max = cells.iter().copied().fold(0.0, f64::max);
    if max <= t_obj {
        return None;
    }
    let mut acc = CentroidSum::default();
    for j in 0..ny {
        for i in 0..nx {
            let v = cells[j * nx + i];
            let selected = match mode {
                CentroidMode::Max => v == max,
                CentroidMode::AboveThreshold => v > t_obj,
            };
            if selected {
                acc.add_rect(xs[i], xs[i + 1], ys[j], ys[j + 1]);
            }
        }
    }
    acc.centroid()
}

/// Per-frame position timeline of one tracked class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocationSeries {
    pub class: ObjectClass,
    pub points: Vec<Option<Point>>,
}

impl LocationSeries {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn xs(&self) -> Vec<Option<f64>> {
        self.points.iter().map(|p| p.map(|p| p.x)).collect()
    }

    pub fn ys(&self) -> Vec<Option<f64>> {
        self.points.iter().map(|p| p.map(|p| p.y)).collect()
    }
}

/// Locates `class` in every frame of the episode.
///
/// With `cfg.raster_downscale = f > 1` the boxes are mapped to a raster `f`
/// times coarser and the centroid mapped back to the center of its coarse
/// pixel, which approximates the full-resolution answer to within `f`
/// pixels.
pub fn locate_series(episode: &Episode, class: ObjectClass, cfg: &PipelineConfig) -> LocationSeries {
    let t_obj = cfg.obj_threshold(class);
    let factor = cfg.raster_downscale.max(1) as usize;
    let width = (episode.frame_width as usize).div_ceil(factor);
    let height = (episode.frame_height as usize).div_ceil(factor);

    let points = episode
        .frames
        .par_iter()
        .map(|frame| {
            if factor == 1 {
                return locate_frame(frame, class, width, height, t_obj, cfg.centroid_mode);
            }
            let f = factor as f64;
            let scaled = FrameDetections::new(
                frame.frame_index,
                frame
                    .of_class(class)
                    .map(|d| Detection {
                        bbox: BBox {
                            x: d.bbox.x / f,
                            y: d.bbox.y / f,
                            w: d.bbox.w / f,
                            h: d.bbox.h / f,
                        },
                        ..*d
                    })
                    .collect(),
            );
            locate_frame(&scaled, class, width, height, t_obj, cfg.centroid_mode)
                .map(|p| Point::new(p.x * f + (f - 1.0) / 2.0, p.y * f + (f - 1.0) / 2.0))
        })
        .collect();

    LocationSeries { class, points }
}
