//! Five-way tiling of annotated images: four quadrants plus a center crop.

use image::RgbImage;
use serde::{Deserialize, Serialize};

use crate::types::{BBox, ObjectClass};

/// A fragment is kept unless its area is below this fraction of the largest
/// fragment of the same object in another tile.
pub const RETAIN_FRACTION: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tile {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Tile {
    pub fn rect(&self) -> BBox {
        BBox {
            x: self.x as f64,
            y: self.y as f64,
            w: self.w as f64,
            h: self.h as f64,
        }
    }
}

/// Box annotation with an object id shared by all fragments of one object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub class: ObjectClass,
    pub bbox: BBox,
    pub object_id: usize,
}

/// Quadrants in reading order, then the centered crop. Odd sizes round down.
pub fn tiles(width: u32, height: u32) -> [Tile; 5] {
    let (w, h) = (width / 2, height / 2);
    let q = |x, y| Tile { x, y, w, h };
    [
        q(0, 0),
        q(w, 0),
        q(0, h),
        q(w, h),
        q((width - w) / 2, (height - h) / 2),
    ]
}

/// Clips every annotation into each tile, in tile coordinates, and applies
/// the fragment retention rule.
pub fn split_annotations(width: u32, height: u32, annotations: &[Annotation]) -> [Vec<Annotation>; 5] {
    let tiles = tiles(width, height);
    let mut out: [Vec<Annotation>; 5] = Default::default();
    for a in annotations {
        let fragments: Vec<Option<BBox>> = tiles
            .iter()
            .map(|t| {
                t.w.min(t.h)
                    .gt(&0)
                    .then(|| a.bbox.intersection(&t.rect()))
                    .flatten()
            })
            .collect();
        for (t, frag) in fragments.iter().enumerate() {
            let Some(frag) = frag else { continue };
            let best_other = fragments
                .iter()
                .enumerate()
                .filter(|(u, _)| *u != t)
                .filter_map(|(_, f)| f.map(|b| b.area()))
                .fold(0.0, f64::max);
            if frag.area() < RETAIN_FRACTION * best_other {
                continue;
            }
            out[t].push(Annotation {
                bbox: frag.translate(-(tiles[t].x as f64), -(tiles[t].y as f64)),
                ..*a
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubImage {
    pub tile: Tile,
    pub image: RgbImage,
    pub annotations: Vec<Annotation>,
}

pub fn split_image(image: &RgbImage, annotations: &[Annotation]) -> Vec<SubImage> {
    let tiles = tiles(image.width(), image.height());
    let parts = split_annotations(image.width(), image.height(), annotations);
    tiles
        .iter()
        .zip(parts)
        .map(|(t, anns)| SubImage {
            tile: *t,
            image: image::imageops::crop_imm(image, t.x, t.y, t.w, t.h).to_image(),
            annotations: anns,
        })
        .collect()
}
