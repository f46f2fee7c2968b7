//! Clip loading and saving. A clip on disk is a directory of PNG frames
//! whose names sort in play order (the writer uses `%06d.png`).

use std::io::Cursor;
use std::path::Path;

use image::{ImageFormat, RgbImage};

use crate::error::{Error, Result};
use crate::fsio::atomic_write;

/// Nominal capture rate of the corpus.
pub const NOMINAL_FPS: f64 = 100.0;

/// An in-memory video: ordered RGB frames of equal size.
#[derive(Debug, Clone, PartialEq)]
pub struct Clip {
    pub frames: Vec<RgbImage>,
    pub fps: f64,
}

impl Clip {
    pub fn new(frames: Vec<RgbImage>) -> Result<Clip> {
        if frames.is_empty() {
            return Err(Error::InvalidClip("clip has no frames".to_string()));
        }
        let dims = frames[0].dimensions();
        if let Some(i) = frames.iter().position(|f| f.dimensions() != dims) {
            return Err(Error::InvalidClip(format!(
                "frame {i} is {:?}, first frame is {dims:?}",
                frames[i].dimensions()
            )));
        }
        Ok(Clip {
            frames,
            fps: NOMINAL_FPS,
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// (width, height) shared by every frame.
    pub fn dimensions(&self) -> (u32, u32) {
        self.frames[0].dimensions()
    }
}

/// Reads every `*.png` in the directory, in lexicographic name order.
pub fn load_clip(dir: &Path) -> Result<Clip> {
    let mut names: Vec<_> = std::fs::read_dir(dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.extension().map(|e| e == "png").unwrap_or(false))
        .collect();
    names.sort();
    if names.is_empty() {
        return Err(Error::InvalidClip(format!(
            "no png frames in {}",
            dir.display()
        )));
    }
    let mut frames = Vec::with_capacity(names.len());
    for path in names {
        frames.push(image::open(&path)?.to_rgb8());
    }
    Clip::new(frames)
}

/// Writes the clip as `000000.png`, `000001.png`, ... into `dir`,
/// creating it if needed. Each frame file is written atomically.
pub fn save_clip(dir: &Path, clip: &Clip) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (i, frame) in clip.frames.iter().enumerate() {
        let mut bytes = Vec::new();
        frame.write_to(&mut Cursor::new(&mut bytes), ImageFormat::Png)?;
        atomic_write(&dir.join(format!("{i:06}.png")), &bytes)?;
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use crate::rng::Rng;

    /// A deterministic noise clip for tests.
    pub fn noise_clip(frames: usize, width: u32, height: u32, seed: u64) -> Clip {
        let mut rng = Rng::seed_from_u64(seed);
        let frames = (0..frames)
            .map(|_| {
                RgbImage::from_fn(width, height, |_, _| {
                    image::Rgb([
                        rng.next_below(256) as u8,
                        rng.next_below(256) as u8,
                        rng.next_below(256) as u8,
                    ])
                })
            })
            .collect();
        Clip::new(frames).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_disk() {
        let clip = testutil::noise_clip(3, 8, 6, 1);
        let dir = tempfile::tempdir().unwrap();
        save_clip(dir.path(), &clip).unwrap();
        let loaded = load_clip(dir.path()).unwrap();
        assert_eq!(loaded.frames, clip.frames);
    }

    #[test]
    fn empty_directory_is_invalid() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_clip(dir.path()), Err(Error::InvalidClip(_))));
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let a = RgbImage::new(4, 4);
        let b = RgbImage::new(5, 4);
        assert!(matches!(Clip::new(vec![a, b]), Err(Error::InvalidClip(_))));
    }
}
