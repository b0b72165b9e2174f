//! Hue / saturation / lightness scaling of object patches.

use image::{Rgb, RgbImage};

/// Multipliers applied to hue (degrees), saturation and lightness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HslFactors {
    pub hue: f64,
    pub saturation: f64,
    pub lightness: f64,
}

impl HslFactors {
    pub const IDENTITY: HslFactors = HslFactors {
        hue: 1.0,
        saturation: 1.0,
        lightness: 1.0,
    };
}

/// RGB in `[0, 1]` to (hue in `[0, 360)`, saturation, lightness).
pub fn rgb_to_hsl(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let l = (max + min) / 2.0;
    let d = max - min;
    if d == 0.0 {
        return (0.0, 0.0, l);
    }
    let s = d / (1.0 - (2.0 * l - 1.0).abs());
    let h = if max == r {
        60.0 * ((g - b) / d).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / d + 2.0)
    } else {
        60.0 * ((r - g) / d + 4.0)
    };
    (h, s, l)
}

pub fn hsl_to_rgb(h: f64, s: f64, l: f64) -> (f64, f64, f64) {
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let hp = h.rem_euclid(360.0) / 60.0;
    let x = c * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    (r + m, g + m, b + m)
}

fn to_u8(v: f64) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

pub fn jitter_pixel(px: [u8; 3], f: HslFactors) -> [u8; 3] {
    let [r, g, b] = px.map(|v| v as f64 / 255.0);
    let (h, s, l) = rgb_to_hsl(r, g, b);
    let (r, g, b) = hsl_to_rgb(
        h * f.hue,
        (s * f.saturation).clamp(0.0, 1.0),
        (l * f.lightness).clamp(0.0, 1.0),
    );
    [to_u8(r), to_u8(g), to_u8(b)]
}

/// Scales each pixel's hue, saturation and lightness by the given factors.
pub fn hsl_jitter(patch: &RgbImage, factors: HslFactors) -> RgbImage {
    let mut out = patch.clone();
    for p in out.pixels_mut() {
        *p = Rgb(jitter_pixel(p.0, factors));
    }
    out
}
