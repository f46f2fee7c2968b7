//! Frame feature vectors for clustering: 32x32 grayscale in [0, 1].
//!
//! The feature space deliberately ignores color and fine detail; frames
//! only need to be comparable, not reconstructable. Resizing is bilinear
//! with half-pixel centers (the align-corners=false convention), then the
//! standard Rec. 601 luma weights collapse RGB to one channel.

use image::RgbImage;

use super::clip::Clip;

/// Side length of the feature thumbnail.
pub const FEATURE_SIDE: u32 = 32;

/// Flattened feature length.
pub const FEATURE_LEN: usize = (FEATURE_SIDE * FEATURE_SIDE) as usize;

/// Bilinear sample of one channel at fractional source coordinates.
/// Coordinates are clamped to the image, so edges repeat.
fn sample_channel(img: &RgbImage, channel: usize, x: f64, y: f64) -> f64 {
    let (w, h) = img.dimensions();
    let x = x.clamp(0.0, (w - 1) as f64);
    let y = y.clamp(0.0, (h - 1) as f64);
    let x0 = x.floor() as u32;
    let y0 = y.floor() as u32;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let p = |xx: u32, yy: u32| img.get_pixel(xx, yy).0[channel] as f64;
    let top = p(x0, y0) * (1.0 - fx) + p(x1, y0) * fx;
    let bottom = p(x0, y1) * (1.0 - fx) + p(x1, y1) * fx;
    top * (1.0 - fy) + bottom * fy
}

/// Resizes to the thumbnail grid and converts to luma in [0, 1],
/// flattened row-major.
pub fn featurize_frame(frame: &RgbImage) -> Vec<f64> {
    let (w, h) = frame.dimensions();
    let scale_x = w as f64 / FEATURE_SIDE as f64;
    let scale_y = h as f64 / FEATURE_SIDE as f64;
    let mut out = Vec::with_capacity(FEATURE_LEN);
    for dy in 0..FEATURE_SIDE {
        let sy = (dy as f64 + 0.5) * scale_y - 0.5;
        for dx in 0..FEATURE_SIDE {
            let sx = (dx as f64 + 0.5) * scale_x - 0.5;
            let r = sample_channel(frame, 0, sx, sy);
            let g = sample_channel(frame, 1, sx, sy);
            let b = sample_channel(frame, 2, sx, sy);
            let luma = (0.299 * r + 0.587 * g + 0.114 * b) / 255.0;
            out.push(luma.clamp(0.0, 1.0));
        }
    }
    out
}

/// Feature vectors for every frame of the clip.
pub fn featurize(clip: &Clip) -> Vec<Vec<f64>> {
    clip.frames.iter().map(featurize_frame).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;

    fn solid(w: u32, h: u32, value: [u8; 3]) -> RgbImage {
        RgbImage::from_pixel(w, h, Rgb(value))
    }

    #[test]
    fn black_frame_is_zero_vector() {
        let v = featurize_frame(&solid(64, 48, [0, 0, 0]));
        assert_eq!(v.len(), FEATURE_LEN);
        assert!(v.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn white_frame_is_ones_vector() {
        let v = featurize_frame(&solid(64, 48, [255, 255, 255]));
        assert!(v.iter().all(|x| (x - 1.0).abs() < 1e-12));
        assert!(v.iter().all(|x| *x <= 1.0));
    }

    #[test]
    fn mid_gray_lands_near_half() {
        let v = featurize_frame(&solid(100, 100, [128, 128, 128]));
        for x in v {
            assert!((x - 128.0 / 255.0).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_and_size_stable() {
        for (w, h) in [(32, 32), (17, 253), (256, 256), (640, 360)] {
            let img = super::super::clip::testutil::noise_clip(1, w, h, 9).frames[0].clone();
            let a = featurize_frame(&img);
            let b = featurize_frame(&img);
            assert_eq!(a.len(), FEATURE_LEN);
            assert_eq!(a, b);
            assert!(a.iter().all(|x| (0.0..=1.0).contains(x)));
        }
    }

    #[test]
    fn identity_resize_keeps_pixel_luma() {
        // On a 32x32 input the sample grid hits pixel centers exactly.
        let mut img = solid(32, 32, [0, 0, 0]);
        img.put_pixel(5, 7, Rgb([255, 0, 0]));
        let v = featurize_frame(&img);
        let expected = 0.299 * 255.0 / 255.0;
        assert!((v[7 * 32 + 5] - expected).abs() < 1e-12);
    }
}
