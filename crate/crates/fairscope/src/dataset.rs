//! Subject inventory and the subject-disjoint train/val/test split.
//!
//! The canonical corpus shape is 50 subjects (18 female, 32 male) with 12
//! videos each, one genuine and one acted clip per emotion. Splits are
//! drawn per subject so no identity leaks across partitions: a fixed test
//! draw of `test_per_gender` subjects per gender, then a per-run
//! validation draw from the remainder.

use std::io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::{EmotionLabel, Gender, Veracity};
use crate::rng::Rng;

/// One video of one subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoEntry {
    pub video_id: String,
    pub path: String,
    pub emotion: EmotionLabel,
    pub veracity: Veracity,
    pub frame_count: u32,
    pub fps: f64,
}

/// One subject and their videos.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectEntry {
    pub id: String,
    pub gender: Gender,
    pub videos: Vec<VideoEntry>,
}

/// The whole corpus inventory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub subjects: Vec<SubjectEntry>,
}

impl Manifest {
    pub fn video_count(&self) -> usize {
        self.subjects.iter().map(|s| s.videos.len()).sum()
    }

    pub fn subject_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.subjects.iter().map(|s| s.id.clone()).collect();
        ids.sort();
        ids
    }

    fn subject(&self, id: &str) -> Option<&SubjectEntry> {
        self.subjects.iter().find(|s| s.id == id)
    }

    /// Deviations from the canonical corpus shape. These are advisory:
    /// a toy manifest is fine for experiments, it just is not the shape
    /// the published counts came from.
    pub fn shape_warnings(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        if self.subjects.len() != 50 {
            warnings.push(format!(
                "expected 50 subjects, manifest has {}",
                self.subjects.len()
            ));
        }
        let females = self
            .subjects
            .iter()
            .filter(|s| s.gender == Gender::Female)
            .count();
        let males = self.subjects.len() - females;
        if self.subjects.len() == 50 && (females != 18 || males != 32) {
            warnings.push(format!(
                "expected 18 female and 32 male subjects, got {females} and {males}"
            ));
        }
        for subject in &self.subjects {
            if subject.videos.len() != 12 {
                warnings.push(format!(
                    "subject {} has {} videos, expected 12",
                    subject.id,
                    subject.videos.len()
                ));
                continue;
            }
            for emotion in EmotionLabel::ALL {
                for veracity in [Veracity::Genuine, Veracity::Fake] {
                    let n = subject
                        .videos
                        .iter()
                        .filter(|v| v.emotion == emotion && v.veracity == veracity)
                        .count();
                    if n != 1 {
                        warnings.push(format!(
                            "subject {} has {n} {veracity} {emotion} videos, expected 1",
                            subject.id
                        ));
                    }
                }
            }
        }
        if let Some(v) = self
            .subjects
            .iter()
            .flat_map(|s| &s.videos)
            .find(|v| v.fps != 100.0)
        {
            warnings.push(format!(
                "video {} has fps {}, nominal rate is 100",
                v.video_id, v.fps
            ));
        }
        warnings
    }
}

/// Reads and validates a manifest JSON document.
pub fn load_manifest(reader: impl io::Read) -> Result<Manifest> {
    let manifest: Manifest = serde_json::from_reader(reader).map_err(Error::from_json)?;
    if manifest.subjects.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "manifest has no subjects".to_string(),
        });
    }
    let mut subject_ids = std::collections::HashSet::new();
    let mut video_ids = std::collections::HashSet::new();
    for subject in &manifest.subjects {
        if !subject_ids.insert(&subject.id) {
            return Err(Error::Duplicate {
                key: format!("subject {}", subject.id),
            });
        }
        for video in &subject.videos {
            if !video_ids.insert(&video.video_id) {
                return Err(Error::Duplicate {
                    key: format!("video {}", video.video_id),
                });
            }
            if video.frame_count == 0 {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("video {} has frame_count 0", video.video_id),
                });
            }
            if video.fps.is_nan() || video.fps <= 0.0 {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("video {} has fps {}", video.video_id, video.fps),
                });
            }
        }
    }
    Ok(manifest)
}

/// Seeds and sizes of a split. The test draw happens once per corpus
/// (test_seed); validation is redrawn per training run (val_seed).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub test_seed: u64,
    pub val_seed: u64,
    pub test_per_gender: usize,
    pub val_subjects: usize,
}

impl SplitConfig {
    pub const DEFAULT_TEST_PER_GENDER: usize = 5;
    pub const DEFAULT_VAL_SUBJECTS: usize = 8;

    pub fn new(test_seed: u64, val_seed: u64) -> SplitConfig {
        SplitConfig {
            test_seed,
            val_seed,
            test_per_gender: Self::DEFAULT_TEST_PER_GENDER,
            val_subjects: Self::DEFAULT_VAL_SUBJECTS,
        }
    }
}

/// Convenience for callers who think of validation as a fraction of the
/// post-test pool rather than a subject count; rounds to the nearest
/// whole subject.
pub fn val_subjects_from_fraction(pool_after_test: usize, fraction: f64) -> usize {
    (fraction * pool_after_test as f64).round() as usize
}

/// A finished split: disjoint sorted subject id lists covering the whole
/// manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub test: Vec<String>,
    pub val: Vec<String>,
    pub train: Vec<String>,
    pub config: SplitConfig,
}

/// The three parts of a split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Partition {
    Test,
    Val,
    Train,
}

impl SplitAssignment {
    pub fn subjects(&self, partition: Partition) -> &[String] {
        match partition {
            Partition::Test => &self.test,
            Partition::Val => &self.val,
            Partition::Train => &self.train,
        }
    }

    /// Video ids of a partition, ordered by subject id and then by the
    /// subject's own video order.
    pub fn videos(&self, manifest: &Manifest, partition: Partition) -> Vec<String> {
        self.subjects(partition)
            .iter()
            .filter_map(|id| manifest.subject(id))
            .flat_map(|s| s.videos.iter().map(|v| v.video_id.clone()))
            .collect()
    }
}

/// Draws the split. Subject ids are sorted before every draw, so the
/// result depends only on the manifest's contents and the seeds, not on
/// subject order. Test subjects are drawn per gender (females first) from
/// `test_seed`; validation subjects from the remaining pool with
/// `val_seed`; the rest train.
pub fn make_split(manifest: &Manifest, config: &SplitConfig) -> Result<SplitAssignment> {
    let mut females: Vec<String> = manifest
        .subjects
        .iter()
        .filter(|s| s.gender == Gender::Female)
        .map(|s| s.id.clone())
        .collect();
    let mut males: Vec<String> = manifest
        .subjects
        .iter()
        .filter(|s| s.gender == Gender::Male)
        .map(|s| s.id.clone())
        .collect();
    females.sort();
    males.sort();

    for (name, pool) in [("female", &females), ("male", &males)] {
        if pool.len() < config.test_per_gender {
            return Err(Error::InfeasibleSplit(format!(
                "{name} pool has {} subjects, test needs {}",
                pool.len(),
                config.test_per_gender
            )));
        }
    }
    let pool_after_test = manifest.subjects.len() - 2 * config.test_per_gender;
    if config.val_subjects >= pool_after_test {
        return Err(Error::InfeasibleSplit(format!(
            "validation wants {} of the {} subjects left after the test draw",
            config.val_subjects, pool_after_test
        )));
    }

    let mut test_rng = Rng::seed_from_u64(config.test_seed);
    let mut test = test_rng.draw_without_replacement(&females, config.test_per_gender);
    test.extend(test_rng.draw_without_replacement(&males, config.test_per_gender));
    test.sort();

    let mut pool: Vec<String> = manifest
        .subjects
        .iter()
        .map(|s| s.id.clone())
        .filter(|id| !test.contains(id))
        .collect();
    pool.sort();

    let mut val_rng = Rng::seed_from_u64(config.val_seed);
    let mut val = val_rng.draw_without_replacement(&pool, config.val_subjects);
    val.sort();

    let mut train: Vec<String> = pool.into_iter().filter(|id| !val.contains(id)).collect();
    train.sort();

    Ok(SplitAssignment {
        test,
        val,
        train,
        config: *config,
    })
}

/// Subject and video ids of one gender within one side of the split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetIds {
    pub subjects: Vec<String>,
    pub videos: Vec<String>,
}

/// The two sides a pure-gender subset can come from. The train pool is
/// everything outside the test set; a pure-gender run redraws its own
/// validation from inside the pool, so the pool is what it trains on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitSide {
    Test,
    TrainPool,
}

/// Filters one side of the split down to one gender, e.g. the
/// pure-female train pool or the male half of the test set.
pub fn gender_subset(
    assignment: &SplitAssignment,
    manifest: &Manifest,
    side: SplitSide,
    gender: Gender,
) -> SubsetIds {
    let mut pool: Vec<&String> = match side {
        SplitSide::Test => assignment.test.iter().collect(),
        SplitSide::TrainPool => assignment.val.iter().chain(assignment.train.iter()).collect(),
    };
    pool.sort();
    let subjects: Vec<String> = pool
        .into_iter()
        .filter(|id| {
            manifest
                .subject(id)
                .map(|s| s.gender == gender)
                .unwrap_or(false)
        })
        .cloned()
        .collect();
    let videos = subjects
        .iter()
        .filter_map(|id| manifest.subject(id))
        .flat_map(|s| s.videos.iter().map(|v| v.video_id.clone()))
        .collect();
    SubsetIds { subjects, videos }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn subject(id: &str, gender: Gender) -> SubjectEntry {
        let mut videos = Vec::new();
        for emotion in EmotionLabel::ALL {
            for veracity in [Veracity::Genuine, Veracity::Fake] {
                let video_id = format!("{id}_{emotion}_{}", veracity.name());
                videos.push(VideoEntry {
                    path: format!("clips/{video_id}"),
                    video_id,
                    emotion,
                    veracity,
                    frame_count: 450,
                    fps: 100.0,
                });
            }
        }
        SubjectEntry {
            id: id.to_string(),
            gender,
            videos,
        }
    }

    fn canonical() -> Manifest {
        let mut subjects = Vec::new();
        for i in 0..18 {
            subjects.push(subject(&format!("f{i:02}"), Gender::Female));
        }
        for i in 0..32 {
            subjects.push(subject(&format!("m{i:02}"), Gender::Male));
        }
        Manifest { subjects }
    }

    #[test]
    fn canonical_manifest_loads_without_warnings() {
        let json = serde_json::to_string(&canonical()).unwrap();
        let manifest = load_manifest(json.as_bytes()).unwrap();
        assert_eq!(manifest.subjects.len(), 50);
        assert_eq!(manifest.video_count(), 600);
        assert!(manifest.shape_warnings().is_empty());
    }

    #[test]
    fn empty_manifest_is_a_parse_error() {
        let err = load_manifest(r#"{"subjects":[]}"#.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn toy_manifest_loads_with_warnings() {
        let manifest = Manifest {
            subjects: vec![
                subject("a", Gender::Female),
                subject("b", Gender::Male),
                subject("c", Gender::Male),
            ],
        };
        let json = serde_json::to_string(&manifest).unwrap();
        let loaded = load_manifest(json.as_bytes()).unwrap();
        assert!(!loaded.shape_warnings().is_empty());
    }

    #[test]
    fn duplicate_subject_id_rejected() {
        let manifest = Manifest {
            subjects: vec![subject("a", Gender::Female), subject("a", Gender::Male)],
        };
        let json = serde_json::to_string(&manifest).unwrap();
        assert!(matches!(
            load_manifest(json.as_bytes()),
            Err(Error::Duplicate { .. })
        ));
    }

    #[test]
    fn zero_frame_count_rejected() {
        let mut manifest = canonical();
        manifest.subjects[0].videos[0].frame_count = 0;
        let json = serde_json::to_string(&manifest).unwrap();
        assert!(matches!(
            load_manifest(json.as_bytes()),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn split_hits_canonical_counts() {
        let manifest = canonical();
        let split = make_split(&manifest, &SplitConfig::new(7, 11)).unwrap();
        assert_eq!(split.test.len(), 10);
        assert_eq!(split.val.len(), 8);
        assert_eq!(split.train.len(), 32);
        assert_eq!(split.videos(&manifest, Partition::Test).len(), 120);
        assert_eq!(split.videos(&manifest, Partition::Val).len(), 96);
        assert_eq!(split.videos(&manifest, Partition::Train).len(), 384);
    }

    #[test]
    fn split_partitions_are_disjoint_and_cover() {
        let manifest = canonical();
        let split = make_split(&manifest, &SplitConfig::new(3, 4)).unwrap();
        let mut all: Vec<String> = split
            .test
            .iter()
            .chain(&split.val)
            .chain(&split.train)
            .cloned()
            .collect();
        all.sort();
        let mut deduped = all.clone();
        deduped.dedup();
        assert_eq!(all, deduped, "partitions overlap");
        assert_eq!(all, manifest.subject_ids());
    }

    #[test]
    fn test_set_is_gender_balanced() {
        let manifest = canonical();
        let split = make_split(&manifest, &SplitConfig::new(5, 6)).unwrap();
        let females = split
            .test
            .iter()
            .filter(|id| id.starts_with('f'))
            .count();
        assert_eq!(females, 5);
        assert_eq!(split.test.len() - females, 5);
    }

    #[test]
    fn same_seeds_same_split() {
        let manifest = canonical();
        let a = make_split(&manifest, &SplitConfig::new(123, 456)).unwrap();
        let b = make_split(&manifest, &SplitConfig::new(123, 456)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn val_seed_never_moves_the_test_set() {
        let manifest = canonical();
        let a = make_split(&manifest, &SplitConfig::new(9, 1)).unwrap();
        let b = make_split(&manifest, &SplitConfig::new(9, 2)).unwrap();
        assert_eq!(a.test, b.test);
        assert_ne!(a.val, b.val);
    }

    #[test]
    fn subject_order_does_not_matter() {
        let manifest = canonical();
        let mut reversed = manifest.clone();
        reversed.subjects.reverse();
        let a = make_split(&manifest, &SplitConfig::new(77, 88)).unwrap();
        let b = make_split(&reversed, &SplitConfig::new(77, 88)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn infeasible_test_draw_errors() {
        let mut manifest = canonical();
        manifest.subjects.retain(|s| {
            s.gender == Gender::Male || s.id.as_str() < "f09"
        });
        let config = SplitConfig {
            test_seed: 1,
            val_seed: 2,
            test_per_gender: 10,
            val_subjects: 8,
        };
        assert!(matches!(
            make_split(&manifest, &config),
            Err(Error::InfeasibleSplit(_))
        ));
    }

    #[test]
    fn oversized_validation_errors() {
        let manifest = canonical();
        let config = SplitConfig {
            test_seed: 1,
            val_seed: 2,
            test_per_gender: 5,
            val_subjects: 40,
        };
        assert!(matches!(
            make_split(&manifest, &config),
            Err(Error::InfeasibleSplit(_))
        ));
    }

    #[test]
    fn gender_subsets_of_canonical_split() {
        let manifest = canonical();
        let split = make_split(&manifest, &SplitConfig::new(21, 22)).unwrap();

        let female_train = gender_subset(&split, &manifest, SplitSide::TrainPool, Gender::Female);
        assert_eq!(female_train.subjects.len(), 13);
        assert_eq!(female_train.videos.len(), 13 * 12);

        let male_test = gender_subset(&split, &manifest, SplitSide::Test, Gender::Male);
        assert_eq!(male_test.subjects.len(), 5);
        assert_eq!(male_test.videos.len(), 60);
    }

    #[test]
    fn gender_subset_empty_when_gender_absent() {
        let manifest = Manifest {
            subjects: (0..12)
                .map(|i| subject(&format!("m{i:02}"), Gender::Male))
                .collect(),
        };
        let config = SplitConfig {
            test_seed: 1,
            val_seed: 2,
            test_per_gender: 0,
            val_subjects: 2,
        };
        let split = make_split(&manifest, &config).unwrap();
        let females = gender_subset(&split, &manifest, SplitSide::TrainPool, Gender::Female);
        assert!(females.subjects.is_empty());
        assert!(females.videos.is_empty());
    }

    #[test]
    fn fraction_helper_rounds_to_subjects() {
        assert_eq!(val_subjects_from_fraction(40, 0.2), 8);
        assert_eq!(val_subjects_from_fraction(40, 0.15), 6);
    }

    #[test]
    fn split_json_shape() {
        let manifest = canonical();
        let split = make_split(&manifest, &SplitConfig::new(1, 2)).unwrap();
        let json = serde_json::to_string(&split).unwrap();
        assert!(json.starts_with("{\"test\":["));
        assert!(json.contains("\"config\":{\"test_seed\":1,\"val_seed\":2"));
        let back: SplitAssignment = serde_json::from_str(&json).unwrap();
        assert_eq!(back, split);
    }
}
