//! Cut-and-paste scene composition.

use std::fmt::Write as _;

use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::blur::motion_blur;
use super::chroma::ObjectMask;
use super::color::{hsl_jitter, HslFactors};
use super::split::Annotation;
use crate::error::{Error, Result};
use crate::types::{BBox, ObjectClass};

/// Generation parameters. Ranges are inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    /// Chroma key threshold per class, indexed by `code() - 1`.
    pub t_ck: [f64; 4],
    /// Longest object side as a fraction of the background width, per class.
    /// Placeholder values; real ones come from annotated footage statistics.
    pub scale: [(f64, f64); 4],
    pub hsl_factor: (f64, f64),
    pub blur_len: (u32, u32),
    pub blur_angle: (f64, f64),
    pub hands: (u32, u32),
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            t_ck: [80.0; 4],
            scale: [(0.25, 0.40), (0.10, 0.20), (0.08, 0.15), (0.08, 0.15)],
            hsl_factor: (0.6, 1.0),
            blur_len: (3, 7),
            blur_angle: (3.0, 10.0),
            hands: (1, 3),
            seed: 0,
        }
    }
}

pub const SYNTH_KEYS: &[&str] = &[
    "t_ck_bmr", "t_ck_sp", "t_ck_hrs", "t_ck_hcph", "scale_bmr", "scale_sp", "scale_hrs",
    "scale_hcph", "hsl_factor", "blur_len", "blur_angle", "hands", "seed",
];

fn class_slot(suffix: &str) -> Option<usize> {
    suffix
        .to_ascii_uppercase()
        .parse::<ObjectClass>()
        .ok()
        .map(|c| c.code() as usize - 1)
}

fn pair<T: std::str::FromStr>(key: &str, value: &str) -> Result<(T, T)> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    let [a, b] = parts[..] else {
        return Err(Error::config(key, format!("expected `lo,hi`, got `{value}`")));
    };
    let p = |s: &str| s.parse::<T>().map_err(|_| Error::config(key, format!("bad number `{s}`")));
    Ok((p(a)?, p(b)?))
}

impl SynthConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let (key, value) = (key.trim(), value.trim());
        if let Some(slot) = key.strip_prefix("t_ck_").and_then(class_slot) {
            self.t_ck[slot] = value
                .parse()
                .map_err(|_| Error::config(key, format!("bad number `{value}`")))?;
            return Ok(());
        }
        if let Some(slot) = key.strip_prefix("scale_").and_then(class_slot) {
            self.scale[slot] = pair(key, value)?;
            return Ok(());
        }
        match key {
            "hsl_factor" => self.hsl_factor = pair(key, value)?,
            "blur_len" => self.blur_len = pair(key, value)?,
            "blur_angle" => self.blur_angle = pair(key, value)?,
            "hands" => self.hands = pair(key, value)?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| Error::config(key, format!("bad seed `{value}`")))?
            }
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(n + 1, format!("expected `key = value`, got `{line}`")))?;
            self.set(key, value).map_err(|e| Error::parse(n + 1, e.to_string()))?;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let ordered = |key: &str, lo: f64, hi: f64| {
            if lo.is_finite() && hi.is_finite() && lo <= hi {
                Ok(())
            } else {
                Err(Error::config(key, format!("range {lo}..{hi} is empty or not finite")))
            }
        };
        for (i, &(lo, hi)) in self.scale.iter().enumerate() {
            ordered(SYNTH_KEYS[4 + i], lo, hi)?;
            if lo <= 0.0 {
                return Err(Error::config(SYNTH_KEYS[4 + i], "scale must be positive"));
            }
        }
        ordered("hsl_factor", self.hsl_factor.0, self.hsl_factor.1)?;
        if self.hsl_factor.0 < 0.0 {
            return Err(Error::config("hsl_factor", "factors must be non-negative"));
        }
        ordered("blur_len", self.blur_len.0 as f64, self.blur_len.1 as f64)?;
        if self.blur_len.0 == 0 {
            return Err(Error::config("blur_len", "length must be at least 1"));
        }
        ordered("blur_angle", self.blur_angle.0, self.blur_angle.1)?;
        ordered("hands", self.hands.0 as f64, self.hands.1 as f64)?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, c) in ObjectClass::ALL.iter().enumerate() {
            let _ = writeln!(s, "t_ck_{} = {}", c.as_str().to_ascii_lowercase(), self.t_ck[i]);
        }
        for (i, c) in ObjectClass::ALL.iter().enumerate() {
            let (lo, hi) = self.scale[i];
            let _ = writeln!(s, "scale_{} = {lo},{hi}", c.as_str().to_ascii_lowercase());
        }
        let _ = writeln!(s, "hsl_factor = {},{}", self.hsl_factor.0, self.hsl_factor.1);
        let _ = writeln!(s, "blur_len = {},{}", self.blur_len.0, self.blur_len.1);
        let _ = writeln!(s, "blur_angle = {},{}", self.blur_angle.0, self.blur_angle.1);
        let _ = writeln!(s, "hands = {},{}", self.hands.0, self.hands.1);
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }
}

/// Object pools per class, indexed by `code() - 1`.
pub type MaskPools = [Vec<ObjectMask>; 4];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthScene {
    pub image: RgbImage,
    pub annotations: Vec<Annotation>,
}

/// RNG for one output image: stream `index` of the seeded generator.
pub fn scene_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn nearest(src_len: u32, dst_len: u32, i: u32) -> u32 {
    (((2 * i as u64 + 1) * src_len as u64) / (2 * dst_len as u64)) as u32
}

/// Nearest-neighbour resize of patch and mask together.
fn resize_object(obj: &ObjectMask, w: u32, h: u32) -> (RgbImage, Vec<bool>) {
    let mut patch = RgbImage::new(w, h);
    let mut mask = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        let sy = nearest(obj.height(), h, y);
        for x in 0..w {
            let sx = nearest(obj.width(), w, x);
            patch.put_pixel(x, y, *obj.patch.get_pixel(sx, sy));
            mask.push(obj.is_set(sx, sy));
        }
    }
    if !mask.iter().any(|&m| m) {
        // downscaling missed every object pixel; keep the first one
        let first = obj.mask().iter().position(|&m| m).unwrap() as u32;
        let (sx, sy) = (first % obj.width(), first / obj.width());
        let x = (sx as u64 * w as u64 / obj.width() as u64) as u32;
        let y = (sy as u64 * h as u64 / obj.height() as u64) as u32;
        mask[(y * w + x) as usize] = true;
        patch.put_pixel(x, y, *obj.patch.get_pixel(sx, sy));
    }
    (patch, mask)
}

fn target_size(obj: &ObjectMask, rel: f64, bg_w: u32, bg_h: u32) -> (u32, u32) {
    let longest = obj.width().max(obj.height()) as f64;
    let mut f = rel * bg_w as f64 / longest;
    let fits = |f: f64| {
        ((obj.width() as f64 * f).round() as u32) <= bg_w && ((obj.height() as f64 * f).round() as u32) <= bg_h
    };
    if !fits(f) {
        let shrink = (bg_w as f64 / obj.width() as f64).min(bg_h as f64 / obj.height() as f64);
        log::warn!(
            "{} object of {}x{} scaled past the {}x{} background; shrinking to fit",
            obj.class,
            obj.width(),
            obj.height(),
            bg_w,
            bg_h
        );
        f = shrink;
    }
    let w = ((obj.width() as f64 * f).round() as u32).clamp(1, bg_w);
    let h = ((obj.height() as f64 * f).round() as u32).clamp(1, bg_h);
    (w, h)
}

/// Places one BMR, SP and HRS and a random number of hands on a random
/// background, then blurs the whole frame.
pub fn composite_scene<R: Rng>(
    backgrounds: &[RgbImage],
    pools: &MaskPools,
    cfg: &SynthConfig,
    rng: &mut R,
) -> Result<SynthScene> {
    if backgrounds.is_empty() {
        return Err(Error::Empty("background pool"));
    }
    if let Some(c) = ObjectClass::ALL.iter().find(|c| pools[c.code() as usize - 1].is_empty()) {
        return Err(Error::Validation(format!("object pool for {c} is empty")));
    }
    let mut image = backgrounds[rng.random_range(0..backgrounds.len())].clone();
    let (bg_w, bg_h) = image.dimensions();
    if bg_w == 0 || bg_h == 0 {
        return Err(Error::Validation("background has zero size".into()));
    }

    let n_hands = rng.random_range(cfg.hands.0..=cfg.hands.1);
    let mut classes = vec![ObjectClass::Bmr, ObjectClass::Sp, ObjectClass::Hrs];
    classes.extend(std::iter::repeat_n(ObjectClass::Hcph, n_hands as usize));

    let mut annotations = Vec::with_capacity(classes.len());
    for (object_id, class) in classes.into_iter().enumerate() {
        let slot = class.code() as usize - 1;
        let pool = &pools[slot];
        let obj = &pool[rng.random_range(0..pool.len())];
        let (lo, hi) = cfg.scale[slot];
        let rel = rng.random_range(lo..=hi);
        let (w, h) = target_size(obj, rel, bg_w, bg_h);
        let (patch, mask) = resize_object(obj, w, h);
        let (flo, fhi) = cfg.hsl_factor;
        let factors = HslFactors {
            hue: rng.random_range(flo..=fhi),
            saturation: rng.random_range(flo..=fhi),
            lightness: rng.random_range(flo..=fhi),
        };
        let patch = hsl_jitter(&patch, factors);
        let x0 = rng.random_range(0..=bg_w - w);
        let y0 = rng.random_range(0..=bg_h - h);

        let (mut bx0, mut by0, mut bx1, mut by1) = (u32::MAX, u32::MAX, 0, 0);
        for y in 0..h {
            for x in 0..w {
                if mask[(y * w + x) as usize] {
                    image.put_pixel(x0 + x, y0 + y, *patch.get_pixel(x, y));
                    bx0 = bx0.min(x);
                    by0 = by0.min(y);
                    bx1 = bx1.max(x + 1);
                    by1 = by1.max(y + 1);
                }
            }
        }
        annotations.push(Annotation {
            class,
            bbox: BBox {
                x: (x0 + bx0) as f64,
                y: (y0 + by0) as f64,
                w: (bx1 - bx0) as f64,
                h: (by1 - by0) as f64,
            },
            object_id,
        });
    }

    let len = rng.random_range(cfg.blur_len.0..=cfg.blur_len.1);
    let theta = rng.random_range(cfg.blur_angle.0..=cfg.blur_angle.1);
    let image = motion_blur(&image, len, theta);
    Ok(SynthScene { image, annotations })
}

pub fn generate_scene(
    index: u64,
    backgrounds: &[RgbImage],
    pools: &MaskPools,
    cfg: &SynthConfig,
) -> Result<SynthScene> {
    composite_scene(backgrounds, pools, cfg, &mut scene_rng(cfg.seed, index))
}

/// Scenes `0..count`, generated in parallel when `parallel` is set. Output
/// does not depend on the flag.
pub fn generate_scenes(
    count: u64,
    backgrounds: &[RgbImage],
    pools: &MaskPools,
    cfg: &SynthConfig,
    parallel: bool,
) -> Result<Vec<SynthScene>> {
    if parallel {
        (0..count)
            .into_par_iter()
            .map(|i| generate_scene(i, backgrounds, pools, cfg))
            .collect()
    } else {
        (0..count)
            .map(|i| generate_scene(i, backgrounds, pools, cfg))
            .collect()
    }
}

/// Annotation text: one `class x y w h` line per box.
pub fn write_annotation_file(annotations: &[Annotation]) -> String {
    let mut s = String::new();
    for a in annotations {
        let b = &a.bbox;
        let _ = writeln!(s, "{} {:.6} {:.6} {:.6} {:.6}", a.class, b.x, b.y, b.w, b.h);
    }
    s
}

/// Parses annotation text. Object ids are line positions.
pub fn parse_annotation_file(text: &str) -> Result<Vec<Annotation>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [class, x, y, w, h] = fields[..] else {
            return Err(Error::parse(n + 1, "expected `class x y w h`"));
        };
        let class: ObjectClass = class.parse().map_err(|e: Error| Error::parse(n + 1, e.to_string()))?;
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::parse(n + 1, format!("bad number `{s}`")))
        };
        let bbox = BBox::new(num(x)?, num(y)?, num(w)?, num(h)?).map_err(|e| Error::parse(n + 1, e.to_string()))?;
        out.push(Annotation {
            class,
            bbox,
            object_id: out.len(),
        });
    }
    Ok(out)
}

/// Solid-color helper used to build tiny pools in tests and examples.
pub fn solid_object(class: ObjectClass, w: u32, h: u32, color: [u8; 3]) -> ObjectMask {
    ObjectMask::new(class, RgbImage::from_pixel(w, h, Rgb(color)), vec![true; (w * h) as usize])
        .expect("non-empty solid object")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pools() -> MaskPools {
        [
            vec![solid_object(ObjectClass::Bmr, 20, 12, [200, 40, 40])],
            vec![solid_object(ObjectClass::Sp, 6, 10, [40, 200, 40]), solid_object(ObjectClass::Sp, 4, 4, [10, 10, 10])],
            vec![solid_object(ObjectClass::Hrs, 5, 5, [250, 250, 0])],
            vec![solid_object(ObjectClass::Hcph, 8, 8, [220, 180, 150])],
        ]
    }

    fn backgrounds() -> Vec<RgbImage> {
        vec![
            RgbImage::from_pixel(96, 64, Rgb([30, 30, 90])),
            RgbImage::from_fn(80, 80, |x, y| Rgb([x as u8, y as u8, 100])),
        ]
    }

    #[test]
    fn deterministic_and_bounded() {
        let cfg = SynthConfig { seed: 42, ..Default::default() };
        for i in 0..20 {
            let a = generate_scene(i, &backgrounds(), &pools(), &cfg).unwrap();
            let b = generate_scene(i, &backgrounds(), &pools(), &cfg).unwrap();
            assert_eq!(a, b);
            assert!((4..=6).contains(&a.annotations.len()));
            let (w, h) = a.image.dimensions();
            for ann in &a.annotations {
                let bb = ann.bbox;
                assert!(bb.x >= 0.0 && bb.y >= 0.0 && bb.right() <= w as f64 && bb.bottom() <= h as f64);
            }
            let counts: Vec<usize> = ObjectClass::TRACKED
                .iter()
                .map(|c| a.annotations.iter().filter(|x| x.class == *c).count())
                .collect();
            assert_eq!(counts, vec![1, 1, 1]);
        }
    }

    #[test]
    fn parallel_matches_serial() {
        let cfg = SynthConfig { seed: 7, ..Default::default() };
        let s = generate_scenes(16, &backgrounds(), &pools(), &cfg, false).unwrap();
        let p = generate_scenes(16, &backgrounds(), &pools(), &cfg, true).unwrap();
        assert_eq!(s, p);
    }

    #[test]
    fn oversized_objects_shrink() {
        let cfg = SynthConfig {
            scale: [(3.0, 3.0); 4],
            ..Default::default()
        };
        let scene = generate_scene(0, &backgrounds()[..1], &pools(), &cfg).unwrap();
        for a in &scene.annotations {
            assert!(a.bbox.w <= 96.0 && a.bbox.h <= 64.0);
        }
    }

    #[test]
    fn empty_pools_rejected() {
        let mut p = pools();
        p[2].clear();
        assert!(generate_scene(0, &backgrounds(), &p, &SynthConfig::default()).is_err());
        assert!(generate_scene(0, &[], &pools(), &SynthConfig::default()).is_err());
    }

    #[test]
    fn config_text_round_trip() {
        let mut cfg = SynthConfig::default();
        cfg.apply_text("t_ck_sp = 180\nscale_bmr = 0.3, 0.5 # wide\nhands=2,2\nseed=9").unwrap();
        assert_eq!(cfg.t_ck[1], 180.0);
        assert_eq!(cfg.scale[0], (0.3, 0.5));
        assert_eq!(cfg.hands, (2, 2));
        let mut back = SynthConfig::default();
        back.apply_text(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
        assert!(SynthConfig::default().apply_text("hands = 3,1").is_err());
        assert!(SynthConfig::default().apply_text("bogus = 1").is_err());
    }

    #[test]
    fn annotation_text_round_trip() {
        let anns = vec![Annotation {
            class: ObjectClass::Hrs,
            bbox: BBox { x: 1.0, y: 2.0, w: 3.0, h: 4.0 },
            object_id: 0,
        }];
        let text = write_annotation_file(&anns);
        assert_eq!(text, "HRS 1.000000 2.000000 3.000000 4.000000\n");
        assert_eq!(parse_annotation_file(&text).unwrap(), anns);
    }
}
