//! Histogram matching of 8-bit channels.

use image::RgbImage;

fn histogram(values: impl Iterator<Item = u8>) -> [u64; 256] {
    let mut h = [0u64; 256];
    for v in values {
        h[v as usize] += 1;
    }
    h
}

fn cumulative(h: &[u64; 256]) -> [u64; 256] {
    let mut c = [0u64; 256];
    let mut acc = 0;
    for (i, &n) in h.iter().enumerate() {
        acc += n;
        c[i] = acc;
    }
    c
}

/// Lookup table sending each source level `v` to the smallest reference
/// level `r` with `cdf_ref(r) >= cdf_src(v)`. CDFs are compared as exact
/// fractions.
pub fn matching_lut(source: &[u64; 256], reference: &[u64; 256]) -> [u8; 256] {
    let cs = cumulative(source);
    let cr = cumulative(reference);
    let (ns, nr) = (cs[255] as u128, cr[255] as u128);
    let mut lut = [0u8; 256];
    if ns == 0 || nr == 0 {
        for (i, v) in lut.iter_mut().enumerate() {
            *v = i as u8;
        }
        return lut;
    }
    let mut r = 0usize;
    for v in 0..256 {
        // cdf_src(v) = cs[v]/ns, cdf_ref(r) = cr[r]/nr; both non-decreasing
        while r < 255 && (cr[r] as u128) * ns < (cs[v] as u128) * nr {
            r += 1;
        }
        lut[v] = r as u8;
    }
    lut
}

/// Matches one channel to a reference sample.
pub fn match_channel(source: &[u8], reference: &[u8]) -> Vec<u8> {
    let lut = matching_lut(
        &histogram(source.iter().copied()),
        &histogram(reference.iter().copied()),
    );
    source.iter().map(|&v| lut[v as usize]).collect()
}

/// Per-channel histogram matching of `image` to `reference`.
pub fn histogram_match(image: &RgbImage, reference: &RgbImage) -> RgbImage {
    let mut out = image.clone();
    for c in 0..3 {
        let lut = matching_lut(
            &histogram(image.pixels().map(|p| p.0[c])),
            &histogram(reference.pixels().map(|p| p.0[c])),
        );
        for p in out.pixels_mut() {
            p.0[c] = lut[p.0[c] as usize];
        }
    }
    out
}
