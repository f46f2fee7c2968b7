//! Video preprocessing: clip I/O, frame features, keyframe selection,
//! and seeded augmentation.

pub mod augment;
pub mod clip;
pub mod featurize;
pub mod keyframes;
pub mod kmeans;

pub use augment::{apply_augmentation, plan_augmentation, AugmentPlan};
pub use clip::{load_clip, save_clip, Clip, NOMINAL_FPS};
pub use featurize::{featurize, featurize_frame, FEATURE_LEN, FEATURE_SIDE};
pub use keyframes::{
    select_keyframes, KeyframeConfig, KeyframePreset, KeyframeSelection, SegmentQuota,
};
pub use kmeans::{kmeans, kmeans_with_rng, KMeansResult, MAX_ITERATIONS, TOLERANCE};
