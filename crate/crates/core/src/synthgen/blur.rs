//! Linear motion blur.

use image::{Rgb, RgbImage};

/// Normalized line kernel: `len` unit steps centered on the origin along
/// direction `theta` (degrees, counter-clockwise from the +x axis), each
/// rounded to the nearest pixel offset and weighted `1 / len`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineKernel {
    taps: Vec<(i64, i64, f64)>,
}

impl LineKernel {
    pub fn new(len: u32, theta_deg: f64) -> Self {
        let len = len.max(1);
        let (sin, cos) = theta_deg.to_radians().sin_cos();
        let w = 1.0 / len as f64;
        let mut taps: Vec<(i64, i64, f64)> = Vec::new();
        for k in 0..len {
            let t = k as f64 - (len - 1) as f64 / 2.0;
            let dx = (t * cos).round() as i64;
            let dy = (-t * sin).round() as i64;
            match taps.iter_mut().find(|(x, y, _)| *x == dx && *y == dy) {
                Some(tap) => tap.2 += w,
                None => taps.push((dx, dy, w)),
            }
        }
        LineKernel { taps }
    }

    pub fn taps(&self) -> &[(i64, i64, f64)] {
        &self.taps
    }

    /// Convolves a single-channel plane, replicating edge pixels.
    pub fn apply_plane(&self, data: &[f64], width: usize, height: usize) -> Vec<f64> {
        let mut out = vec![0.0; data.len()];
        for y in 0..height {
            for x in 0..width {
                let mut acc = 0.0;
                for &(dx, dy, w) in &self.taps {
                    let sx = (x as i64 - dx).clamp(0, width as i64 - 1) as usize;
                    let sy = (y as i64 - dy).clamp(0, height as i64 - 1) as usize;
                    acc += w * data[sy * width + sx];
                }
                out[y * width + x] = acc;
            }
        }
        out
    }
}

pub fn motion_blur(image: &RgbImage, len: u32, theta_deg: f64) -> RgbImage {
    let kernel = LineKernel::new(len, theta_deg);
    if kernel.taps.len() == 1 {
        return image.clone();
    }
    let (w, h) = (image.width() as usize, image.height() as usize);
    let planes: Vec<Vec<f64>> = (0..3)
        .map(|c| {
            let plane: Vec<f64> = image.pixels().map(|p| p.0[c] as f64).collect();
            kernel.apply_plane(&plane, w, h)
        })
        .collect();
    let mut out = RgbImage::new(image.width(), image.height());
    for (i, p) in out.pixels_mut().enumerate() {
        *p = Rgb([0, 1, 2].map(|c| planes[c][i].round().clamp(0.0, 255.0) as u8));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_length_is_identity() {
        let img = RgbImage::from_fn(5, 4, |x, y| Rgb([(x * 40) as u8, (y * 60) as u8, 7]));
        assert_eq!(motion_blur(&img, 1, 7.0), img);
    }

    #[test]
    fn constant_image_unchanged() {
        let img = RgbImage::from_pixel(9, 9, Rgb([10, 120, 250]));
        assert_eq!(motion_blur(&img, 7, 10.0), img);
        assert_eq!(motion_blur(&img, 4, 33.0), img);
    }

    #[test]
    fn horizontal_impulse() {
        let k = LineKernel::new(3, 0.0);
        let mut plane = vec![0.0; 25];
        plane[12] = 1.0;
        let out = k.apply_plane(&plane, 5, 5);
        for (i, v) in out.iter().enumerate() {
            let expected = if [11, 12, 13].contains(&i) { 1.0 / 3.0 } else { 0.0 };
            assert!((v - expected).abs() < 1e-15, "index {i}: {v}");
        }
    }

    #[test]
    fn weights_sum_to_one() {
        for len in 1..=9 {
            for theta in [0.0, 3.0, 10.0, 45.0, 90.0] {
                let s: f64 = LineKernel::new(len, theta).taps().iter().map(|t| t.2).sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }
}
