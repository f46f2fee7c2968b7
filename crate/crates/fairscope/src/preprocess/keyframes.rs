//! Keyframe selection: cluster frame features and keep one real frame
//! per cluster.
//!
//! A config expands to candidate segments, each clustered on its own
//! with a shared random stream. The representative of a cluster is the
//! candidate frame nearest its centroid (ties favor the lowest frame
//! index). When clusters collapse onto the same frame, the duplicate
//! falls back to the lowest candidate index not selected yet, so the
//! output always holds exactly `k` distinct indices.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::clip::Clip;
use crate::preprocess::featurize::featurize_frame;
use crate::preprocess::kmeans::kmeans_with_rng;
use crate::rng::Rng;

/// Built-in selection recipes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyframePreset {
    /// 10 frames drawn from the whole clip.
    K10,
    /// 20 frames, skipping the first 100 (the lead-in second at
    /// nominal rate).
    K20,
    /// 20 frames from the first half plus 30 from the second half.
    K50,
}

impl KeyframePreset {
    pub fn name(&self) -> &'static str {
        match self {
            KeyframePreset::K10 => "k10",
            KeyframePreset::K20 => "k20",
            KeyframePreset::K50 => "k50",
        }
    }

    /// Total number of frames the preset keeps.
    pub fn k(&self) -> usize {
        match self {
            KeyframePreset::K10 => 10,
            KeyframePreset::K20 => 20,
            KeyframePreset::K50 => 50,
        }
    }
}

impl fmt::Display for KeyframePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KeyframePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "k10" => Ok(KeyframePreset::K10),
            "k20" => Ok(KeyframePreset::K20),
            "k50" => Ok(KeyframePreset::K50),
            other => Err(Error::Parse {
                line: 0,
                message: format!("unknown keyframe preset `{other}`"),
            }),
        }
    }
}

/// One candidate window with its share of the selection budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentQuota {
    /// First candidate frame index, inclusive.
    pub start: usize,
    /// End of the window, exclusive; `None` runs to the clip length.
    pub end: Option<usize>,
    /// Frames to keep from this window.
    pub k: usize,
}

/// Selection recipe: a preset or explicit segment quotas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KeyframeConfig {
    Preset(KeyframePreset),
    Custom { segments: Vec<SegmentQuota> },
}

impl KeyframeConfig {
    pub fn name(&self) -> &'static str {
        match self {
            KeyframeConfig::Preset(p) => p.name(),
            KeyframeConfig::Custom { .. } => "custom",
        }
    }

    pub fn total_k(&self) -> usize {
        match self {
            KeyframeConfig::Preset(p) => p.k(),
            KeyframeConfig::Custom { segments } => segments.iter().map(|s| s.k).sum(),
        }
    }

    /// Concrete `[start, end)` windows for a clip of `frames` frames.
    fn resolve(&self, frames: usize) -> Vec<SegmentQuota> {
        match self {
            KeyframeConfig::Preset(KeyframePreset::K10) => vec![SegmentQuota {
                start: 0,
                end: Some(frames),
                k: 10,
            }],
            KeyframeConfig::Preset(KeyframePreset::K20) => vec![SegmentQuota {
                start: 100,
                end: Some(frames),
                k: 20,
            }],
            KeyframeConfig::Preset(KeyframePreset::K50) => {
                let half = frames / 2;
                vec![
                    SegmentQuota {
                        start: 0,
                        end: Some(half),
                        k: 20,
                    },
                    SegmentQuota {
                        start: half,
                        end: Some(frames),
                        k: 30,
                    },
                ]
            }
            KeyframeConfig::Custom { segments } => segments.clone(),
        }
    }
}

/// Selection result in the on-disk layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyframeSelection {
    pub video_id: String,
    pub k: usize,
    pub preset: String,
    pub indices: Vec<usize>,
}

impl KeyframeSelection {
    pub fn new(video_id: impl Into<String>, config: &KeyframeConfig, indices: Vec<usize>) -> Self {
        KeyframeSelection {
            video_id: video_id.into(),
            k: config.total_k(),
            preset: config.name().to_string(),
            indices,
        }
    }
}

/// Picks representative frame indices for `clip`, sorted ascending.
pub fn select_keyframes(clip: &Clip, config: &KeyframeConfig, seed: u64) -> Result<Vec<usize>> {
    let n = clip.len();
    let segments = config.resolve(n);
    let mut rng = Rng::seed_from_u64(seed);
    let mut selected: Vec<usize> = Vec::with_capacity(config.total_k());

    for quota in &segments {
        let end = quota.end.unwrap_or(n).min(n);
        let start = quota.start.min(end);
        let candidates: Vec<usize> = (start..end).collect();
        if quota.k == 0 || candidates.len() < quota.k {
            return Err(Error::InfeasibleSelection {
                segment: format!("[{start}, {end})"),
                have: candidates.len(),
                need: quota.k,
            });
        }

        let features: Vec<Vec<f64>> = candidates
            .iter()
            .map(|&i| featurize_frame(&clip.frames[i]))
            .collect();
        let result = kmeans_with_rng(&features, quota.k, &mut rng)?;

        for centroid in &result.centroids {
            let mut best = None;
            let mut best_d = f64::INFINITY;
            for (slot, feature) in features.iter().enumerate() {
                let d: f64 = feature
                    .iter()
                    .zip(centroid.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                if d < best_d {
                    best = Some(candidates[slot]);
                    best_d = d;
                }
            }
            let mut pick = best.expect("segment verified non-empty");
            if selected.contains(&pick) {
                // Degenerate clusters share a nearest frame; hand the
                // duplicate the lowest candidate still available.
                pick = *candidates
                    .iter()
                    .find(|c| !selected.contains(c))
                    .expect("quota is at most the candidate count");
            }
            selected.push(pick);
        }
    }

    selected.sort_unstable();
    Ok(selected)
}
