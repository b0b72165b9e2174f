//! Synthetic training data: chroma keying, colour and blur augmentation,
//! histogram matching, scene compositing and split-image tiling.

pub mod blur;
pub mod chroma;
pub mod color;
pub mod composite;
pub mod histmatch;
pub mod split;

use std::fs;
use std::path::{Path, PathBuf};

use image::RgbImage;

use crate::error::Result;
use crate::types::ObjectClass;

pub use blur::{motion_blur, LineKernel};
pub use chroma::{extract_mask, is_object_pixel, key_mask, luminance, ObjectMask};
pub use color::{hsl_jitter, HslFactors};
pub use composite::{
    composite_scene, generate_scene, generate_scenes, parse_annotation_file, scene_rng,
    write_annotation_file, MaskPools, SynthConfig, SynthScene,
};
pub use histmatch::histogram_match;
pub use split::{split_annotations, split_image, tiles, Annotation, SubImage, Tile, RETAIN_FRACTION};

/// PNG files directly inside `dir`, sorted by name.
pub fn png_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .is_some_and(|e| e.eq_ignore_ascii_case("png"))
        })
        .collect();
    files.sort();
    Ok(files)
}

pub fn load_images(dir: &Path) -> Result<Vec<RgbImage>> {
    png_files(dir)?
        .iter()
        .map(|p| Ok(image::open(p)?.to_rgb8()))
        .collect()
}

/// Loads blue-screen frames from `<dir>/<CLASS>/*.png` and keys each one.
/// Missing class directories give empty pools.
pub fn load_object_pools(dir: &Path, cfg: &SynthConfig) -> Result<MaskPools> {
    let mut pools: MaskPools = Default::default();
    for class in ObjectClass::ALL {
        let sub = dir.join(class.as_str());
        if !sub.is_dir() {
            continue;
        }
        let slot = class.code() as usize - 1;
        for frame in load_images(&sub)? {
            pools[slot].push(extract_mask(&frame, class, cfg.t_ck[slot])?);
        }
    }
    Ok(pools)
}
