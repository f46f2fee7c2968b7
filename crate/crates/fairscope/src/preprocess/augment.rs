//! Seeded augmentation: horizontal flip, small rotation, brightness.
//!
//! A plan is drawn once per clip and applied to every frame, keeping
//! the transform temporally coherent. Draw order is fixed (three coin
//! flips, then the parameters for whichever transforms are on), so a
//! seed fully determines the plan.

use image::RgbImage;
use serde::{Deserialize, Serialize};

use crate::preprocess::clip::Clip;
use crate::rng::Rng;

/// Transform decisions for one clip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentPlan {
    pub flip: bool,
    pub rotate: bool,
    /// Degrees in [-15, 15); present exactly when `rotate` is set.
    pub angle: Option<f64>,
    pub brighten: bool,
    /// Multiplier in [0.75, 1.25); present exactly when `brighten` is set.
    pub factor: Option<f64>,
    pub seed: u64,
}

/// Draws a plan from `seed`: three fair coin flips in fixed order
/// (flip, rotate, brighten), then the angle and factor for the
/// transforms that came up heads.
pub fn plan_augmentation(seed: u64) -> AugmentPlan {
    let mut rng = Rng::seed_from_u64(seed);
    let flip = rng.bernoulli_half();
    let rotate = rng.bernoulli_half();
    let brighten = rng.bernoulli_half();
    let angle = rotate.then(|| rng.uniform(-15.0, 15.0));
    let factor = brighten.then(|| rng.uniform(0.75, 1.25));
    AugmentPlan {
        flip,
        rotate,
        angle,
        brighten,
        factor,
        seed,
    }
}

fn flip_frame(frame: &RgbImage) -> RgbImage {
    let (w, h) = frame.dimensions();
    RgbImage::from_fn(w, h, |x, y| *frame.get_pixel(w - 1 - x, y))
}

/// Bilinear sample with black fill outside the frame.
fn sample_black(frame: &RgbImage, sx: f64, sy: f64) -> [u8; 3] {
    let (w, h) = (frame.width() as i64, frame.height() as i64);
    let x0 = sx.floor();
    let y0 = sy.floor();
    let fx = sx - x0;
    let fy = sy - y0;
    let (x0, y0) = (x0 as i64, y0 as i64);

    let tap = |x: i64, y: i64| -> [f64; 3] {
        if x < 0 || y < 0 || x >= w || y >= h {
            [0.0, 0.0, 0.0]
        } else {
            let p = frame.get_pixel(x as u32, y as u32).0;
            [p[0] as f64, p[1] as f64, p[2] as f64]
        }
    };

    let w00 = (1.0 - fx) * (1.0 - fy);
    let w10 = fx * (1.0 - fy);
    let w01 = (1.0 - fx) * fy;
    let w11 = fx * fy;
    let (p00, p10, p01, p11) = (tap(x0, y0), tap(x0 + 1, y0), tap(x0, y0 + 1), tap(x0 + 1, y0 + 1));

    let mut out = [0u8; 3];
    for c in 0..3 {
        let v = w00 * p00[c] + w10 * p10[c] + w01 * p01[c] + w11 * p11[c];
        out[c] = v.round().clamp(0.0, 255.0) as u8;
    }
    out
}

/// Inverse-mapped rotation about the frame center.
fn rotate_frame(frame: &RgbImage, angle_degrees: f64) -> RgbImage {
    let (w, h) = frame.dimensions();
    let theta = angle_degrees.to_radians();
    let (sin, cos) = theta.sin_cos();
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    RgbImage::from_fn(w, h, |x, y| {
        let dx = x as f64 - cx;
        let dy = y as f64 - cy;
        let sx = cos * dx - sin * dy + cx;
        let sy = sin * dx + cos * dy + cy;
        image::Rgb(sample_black(frame, sx, sy))
    })
}

fn brighten_frame(frame: &RgbImage, factor: f64) -> RgbImage {
    let mut out = frame.clone();
    for p in out.pixels_mut() {
        for c in p.0.iter_mut() {
            *c = (*c as f64 * factor).round().clamp(0.0, 255.0) as u8;
        }
    }
    out
}

/// Applies `plan` to every frame: flip, then rotate, then brighten.
/// Frame count and dimensions are preserved.
pub fn apply_augmentation(plan: &AugmentPlan, clip: &Clip) -> Clip {
    let frames = clip
        .frames
        .iter()
        .map(|frame| {
            let mut out = frame.clone();
            if plan.flip {
                out = flip_frame(&out);
            }
            if let Some(angle) = plan.angle {
                out = rotate_frame(&out, angle);
            }
            if let Some(factor) = plan.factor {
                out = brighten_frame(&out, factor);
            }
            out
        })
        .collect();
    Clip {
        frames,
        fps: clip.fps,
    }
}
