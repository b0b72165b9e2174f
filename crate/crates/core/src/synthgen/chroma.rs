//! Blue-screen object extraction.

use image::RgbImage;

use crate::error::{Error, Result};
use crate::types::ObjectClass;

/// RGB luminance with weights 0.3 / 0.59 / 0.11.
pub fn luminance(r: u8, g: u8, b: u8) -> f64 {
    0.3 * r as f64 + 0.59 * g as f64 + 0.11 * b as f64
}

/// A pixel belongs to the object when its blue channel exceeds the
/// luminance by less than `t_ck`.
pub fn is_object_pixel(rgb: [u8; 3], t_ck: f64) -> bool {
    let [r, g, b] = rgb;
    (b as f64) - luminance(r, g, b) < t_ck
}

/// Full-frame object mask, row-major.
pub fn key_mask(frame: &RgbImage, t_ck: f64) -> Vec<bool> {
    frame.pixels().map(|p| is_object_pixel(p.0, t_ck)).collect()
}

/// Object patch cut out of a blue-screen frame with its binary mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectMask {
    pub class: ObjectClass,
    pub patch: RgbImage,
    mask: Vec<bool>,
}

impl ObjectMask {
    pub fn new(class: ObjectClass, patch: RgbImage, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != (patch.width() * patch.height()) as usize {
            return Err(Error::Validation(format!(
                "mask has {} entries for a {}x{} patch",
                mask.len(),
                patch.width(),
                patch.height()
            )));
        }
        if !mask.iter().any(|&m| m) {
            return Err(Error::NoObject);
        }
        Ok(ObjectMask { class, patch, mask })
    }

    pub fn width(&self) -> u32 {
        self.patch.width()
    }

    pub fn height(&self) -> u32 {
        self.patch.height()
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_set(&self, x: u32, y: u32) -> bool {
        self.mask[(y * self.width() + x) as usize]
    }

    pub fn pixel_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

/// Keys out the blue background and crops to the object's bounding box.
pub fn extract_mask(frame: &RgbImage, class: ObjectClass, t_ck: f64) -> Result<ObjectMask> {
    let full = key_mask(frame, t_ck);
    let w = frame.width();
    let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0u32, 0u32);
    for (i, _) in full.iter().enumerate().filter(|(_, &m)| m) {
        let (x, y) = (i as u32 % w, i as u32 / w);
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x + 1);
        y1 = y1.max(y + 1);
    }
    if x0 == u32::MAX {
        return Err(Error::NoObject);
    }
    let patch = image::imageops::crop_imm(frame, x0, y0, x1 - x0, y1 - y0).to_image();
    let mut mask = Vec::with_capacity(((x1 - x0) * (y1 - y0)) as usize);
    for y in y0..y1 {
        for x in x0..x1 {
            mask.push(full[(y * w + x) as usize]);
        }
    }
    ObjectMask::new(class, patch, mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;

    #[test]
    fn pixel_examples() {
        // 255 - 28.05 = 226.95 >= 80
        assert!(!is_object_pixel([0, 0, 255], 80.0));
        assert!(is_object_pixel([128, 128, 128], 80.0));
        assert!(is_object_pixel([0, 255, 0], 80.0));
        assert!((luminance(0, 0, 255) - 28.05).abs() < 1e-9);
        // 226.95 passes a 180 threshold? no; a 230 one does
        assert!(!is_object_pixel([0, 0, 255], 180.0));
        assert!(is_object_pixel([0, 0, 255], 230.0));
    }

    #[test]
    fn crops_to_object() {
        let mut img = RgbImage::from_pixel(10, 8, Rgb([0, 0, 255]));
        img.put_pixel(3, 2, Rgb([200, 50, 50]));
        img.put_pixel(5, 4, Rgb([90, 90, 90]));
        let m = extract_mask(&img, ObjectClass::Hrs, 80.0).unwrap();
        assert_eq!((m.width(), m.height()), (3, 3));
        assert!(m.is_set(0, 0) && m.is_set(2, 2) && !m.is_set(1, 1));
        assert_eq!(m.pixel_count(), 2);
        assert_eq!(m.patch.get_pixel(2, 2), &Rgb([90, 90, 90]));
    }

    #[test]
    fn all_blue_is_an_error() {
        let img = RgbImage::from_pixel(4, 4, Rgb([0, 0, 255]));
        assert!(matches!(extract_mask(&img, ObjectClass::Sp, 80.0), Err(Error::NoObject)));
    }
}
