//! Label taxonomy and the prediction-record data model.
//!
//! A record carries the three symbols every fairness definition needs: the
//! ground truth, the model's prediction and the protected gender attribute.
//! Six raw emotions are collapsed into the four-class report taxonomy
//! {surprised, upset, sad, happy}; "upset" merges contempt, disgust and
//! anger.

use std::fmt;
use std::io;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The six raw emotions a clip can display.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmotionLabel {
    Happiness,
    Surprise,
    Sadness,
    Disgust,
    Anger,
    Contempt,
}

impl EmotionLabel {
    pub const ALL: [EmotionLabel; 6] = [
        EmotionLabel::Happiness,
        EmotionLabel::Surprise,
        EmotionLabel::Sadness,
        EmotionLabel::Disgust,
        EmotionLabel::Anger,
        EmotionLabel::Contempt,
    ];

    /// Canonical lowercase name, the one used in files.
    pub fn name(self) -> &'static str {
        match self {
            EmotionLabel::Happiness => "happiness",
            EmotionLabel::Surprise => "surprise",
            EmotionLabel::Sadness => "sadness",
            EmotionLabel::Disgust => "disgust",
            EmotionLabel::Anger => "anger",
            EmotionLabel::Contempt => "contempt",
        }
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EmotionLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "happiness" => Ok(EmotionLabel::Happiness),
            "surprise" => Ok(EmotionLabel::Surprise),
            "sadness" => Ok(EmotionLabel::Sadness),
            "disgust" => Ok(EmotionLabel::Disgust),
            "anger" => Ok(EmotionLabel::Anger),
            "contempt" => Ok(EmotionLabel::Contempt),
            other => Err(format!("unknown emotion label: {other}")),
        }
    }
}

/// The four-class audit taxonomy, in fixed report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FusedLabel {
    Surprised,
    Upset,
    Sad,
    Happy,
}

impl FusedLabel {
    /// Report column order. Every table and report iterates classes in
    /// exactly this order.
    pub const REPORT_ORDER: [FusedLabel; 4] = [
        FusedLabel::Surprised,
        FusedLabel::Upset,
        FusedLabel::Sad,
        FusedLabel::Happy,
    ];

    /// Position of the class in report order.
    pub fn index(self) -> usize {
        match self {
            FusedLabel::Surprised => 0,
            FusedLabel::Upset => 1,
            FusedLabel::Sad => 2,
            FusedLabel::Happy => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FusedLabel::Surprised => "surprised",
            FusedLabel::Upset => "upset",
            FusedLabel::Sad => "sad",
            FusedLabel::Happy => "happy",
        }
    }
}

impl fmt::Display for FusedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FusedLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "surprised" => Ok(FusedLabel::Surprised),
            "upset" => Ok(FusedLabel::Upset),
            "sad" => Ok(FusedLabel::Sad),
            "happy" => Ok(FusedLabel::Happy),
            other => Err(format!("unknown fused label: {other}")),
        }
    }
}

/// Collapses a raw emotion into the report taxonomy. Total: contempt,
/// disgust and anger all become upset, the rest map one to one.
pub fn fuse_label(raw: EmotionLabel) -> FusedLabel {
    match raw {
        EmotionLabel::Surprise => FusedLabel::Surprised,
        EmotionLabel::Contempt | EmotionLabel::Disgust | EmotionLabel::Anger => FusedLabel::Upset,
        EmotionLabel::Sadness => FusedLabel::Sad,
        EmotionLabel::Happiness => FusedLabel::Happy,
    }
}

/// The protected attribute every gap is computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Female,
    Male,
}

impl Gender {
    pub fn name(self) -> &'static str {
        match self {
            Gender::Female => "female",
            Gender::Male => "male",
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Gender {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "female" => Ok(Gender::Female),
            "male" => Ok(Gender::Male),
            other => Err(format!("unknown gender: {other}")),
        }
    }
}

/// Which training population a model saw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "regular")]
    Regular,
    #[serde(rename = "female")]
    FemaleTrained,
    #[serde(rename = "male")]
    MaleTrained,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Regular, Regime::FemaleTrained, Regime::MaleTrained];

    /// Name used in files and on the command line.
    pub fn name(self) -> &'static str {
        match self {
            Regime::Regular => "regular",
            Regime::FemaleTrained => "female",
            Regime::MaleTrained => "male",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "regular" => Ok(Regime::Regular),
            "female" => Ok(Regime::FemaleTrained),
            "male" => Ok(Regime::MaleTrained),
            other => Err(format!("unknown regime: {other}")),
        }
    }
}

/// Whether a clip shows a genuine or an acted expression. Carried for
/// traceability; no metric in this crate distinguishes the two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Veracity {
    Genuine,
    Fake,
}

impl Veracity {
    pub fn name(self) -> &'static str {
        match self {
            Veracity::Genuine => "genuine",
            Veracity::Fake => "fake",
        }
    }
}

impl fmt::Display for Veracity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Veracity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "genuine" => Ok(Veracity::Genuine),
            "fake" => Ok(Veracity::Fake),
            other => Err(format!("unknown veracity: {other}")),
        }
    }
}

/// Per-class scores, either logits or probabilities. Length 6 in the raw
/// taxonomy (order: happiness, surprise, sadness, disgust, anger,
/// contempt) or 4 in the fused one (report order).
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    values: Vec<f64>,
}

impl ScoreVector {
    pub fn new(values: Vec<f64>) -> Result<ScoreVector> {
        if values.len() != 4 && values.len() != 6 {
            return Err(Error::InvalidScore(format!(
                "score vector must have 4 or 6 entries, got {}",
                values.len()
            )));
        }
        Ok(ScoreVector { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Numerically stable softmax. Rejects NaN and infinite entries.
pub fn softmax(scores: &ScoreVector) -> Result<ScoreVector> {
    let values = scores.values();
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidScore(format!("non-finite entry {bad}")));
    }
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = values.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    ScoreVector::new(exps.iter().map(|e| e / sum).collect())
}

/// Argmax over a fused 4-class score vector; ties go to the lowest index
/// in report order so decoding stays deterministic.
pub fn decode(scores: &ScoreVector) -> Result<FusedLabel> {
    if scores.len() != 4 {
        return Err(Error::TaxonomyMismatch {
            expected: 4,
            got: scores.len(),
        });
    }
    let mut best = 0;
    for (i, v) in scores.values().iter().enumerate() {
        if *v > scores.values()[best] {
            best = i;
        }
    }
    Ok(FusedLabel::REPORT_ORDER[best])
}

/// Sums raw 6-class scores into the fused taxonomy: disgust, anger and
/// contempt pool into upset, preserving total mass.
pub fn fuse_scores(raw: &ScoreVector) -> Result<ScoreVector> {
    if raw.len() != 6 {
        return Err(Error::TaxonomyMismatch {
            expected: 6,
            got: raw.len(),
        });
    }
    let v = raw.values();
    // Raw order: happiness, surprise, sadness, disgust, anger, contempt.
    ScoreVector::new(vec![v[1], v[3] + v[4] + v[5], v[2], v[0]])
}

/// A model's output for one video.
#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    Label(FusedLabel),
    Scores(ScoreVector),
}

/// One prediction with everything the audit needs to group it.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub model_id: String,
    pub regime: Regime,
    pub subject_id: String,
    pub gender: Gender,
    pub video_id: String,
    pub veracity: Veracity,
    pub true_label: FusedLabel,
    pub prediction: Prediction,
}

impl PredictionRecord {
    /// Hard prediction for metric counting. Score predictions are
    /// decoded, which requires the fused taxonomy.
    pub fn predicted_label(&self) -> Result<FusedLabel> {
        match &self.prediction {
            Prediction::Label(label) => Ok(*label),
            Prediction::Scores(scores) => decode(scores),
        }
    }
}

/// Whether a set's score vectors are raw 6-class or fused 4-class.
/// Label-only sets are always fused, since labels fuse on parse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Taxonomy {
    Raw6,
    Fused4,
}

impl Taxonomy {
    pub fn name(self) -> &'static str {
        match self {
            Taxonomy::Raw6 => "raw-6",
            Taxonomy::Fused4 => "fused-4",
        }
    }
}

/// A validated, order-preserving collection of prediction records.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordSet {
    records: Vec<PredictionRecord>,
    taxonomy: Taxonomy,
}

const BASE_HEADER: [&str; 7] = [
    "model_id",
    "regime",
    "subject_id",
    "gender",
    "video_id",
    "veracity",
    "true_label",
];

const FUSED_SCORE_COLUMNS: [&str; 4] = [
    "score_surprised",
    "score_upset",
    "score_sad",
    "score_happy",
];

const RAW_SCORE_COLUMNS: [&str; 6] = [
    "score_happiness",
    "score_surprise",
    "score_sadness",
    "score_disgust",
    "score_anger",
    "score_contempt",
];

enum Schema {
    Label,
    FusedScores,
    RawScores,
}

impl RecordSet {
    /// Builds a set from already-parsed records, enforcing the key
    /// uniqueness invariant and a single prediction shape throughout.
    pub fn from_records(records: Vec<PredictionRecord>) -> Result<RecordSet> {
        let mut taxonomy = Taxonomy::Fused4;
        let mut keys = std::collections::HashSet::new();
        for (i, record) in records.iter().enumerate() {
            let key = (
                record.model_id.clone(),
                record.regime,
                record.video_id.clone(),
            );
            if !keys.insert(key) {
                return Err(Error::Duplicate {
                    key: format!(
                        "({}, {}, {})",
                        record.model_id, record.regime, record.video_id
                    ),
                });
            }
            let this = match &record.prediction {
                Prediction::Label(_) => Taxonomy::Fused4,
                Prediction::Scores(s) if s.len() == 4 => Taxonomy::Fused4,
                Prediction::Scores(_) => Taxonomy::Raw6,
            };
            if i == 0 {
                taxonomy = this;
            } else if this != taxonomy {
                return Err(Error::TaxonomyMismatch {
                    expected: if taxonomy == Taxonomy::Fused4 { 4 } else { 6 },
                    got: if this == Taxonomy::Fused4 { 4 } else { 6 },
                });
            }
        }
        Ok(RecordSet { records, taxonomy })
    }

    /// Reads a prediction CSV. With `fuse`, raw 6-class score vectors are
    /// collapsed into the fused taxonomy; label columns fuse either way
    /// because the label mapping is total.
    pub fn ingest(reader: impl io::Read, fuse: bool) -> Result<RecordSet> {
        let mut csv_reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);

        let headers = csv_reader.headers().map_err(Error::from_csv)?.clone();
        let schema = check_header(&headers)?;

        let mut records = Vec::new();
        for row in csv_reader.records() {
            let row = row.map_err(Error::from_csv)?;
            let line = row.position().map(|p| p.line()).unwrap_or(0);
            records.push(parse_row(&row, &schema, fuse, line)?);
        }
        RecordSet::from_records(records)
    }

    /// Collapses a raw 6-class set into the fused taxonomy. Idempotent.
    pub fn fuse(self) -> Result<RecordSet> {
        if self.taxonomy == Taxonomy::Fused4 {
            return Ok(self);
        }
        let records = self
            .records
            .into_iter()
            .map(|mut r| {
                if let Prediction::Scores(ref s) = r.prediction {
                    r.prediction = Prediction::Scores(fuse_scores(s)?);
                }
                Ok(r)
            })
            .collect::<Result<Vec<_>>>()?;
        RecordSet::from_records(records)
    }

    /// Writes the set back out in the same schema it was read in.
    pub fn emit(&self, writer: impl io::Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let score_len = self.records.iter().find_map(|r| match &r.prediction {
            Prediction::Scores(s) => Some(s.len()),
            Prediction::Label(_) => None,
        });

        let mut header: Vec<&str> = BASE_HEADER.to_vec();
        match score_len {
            None => header.push("pred_label"),
            Some(4) => header.extend(FUSED_SCORE_COLUMNS),
            Some(_) => header.extend(RAW_SCORE_COLUMNS),
        }
        w.write_record(&header).map_err(Error::from_csv)?;

        for r in &self.records {
            let mut row = vec![
                r.model_id.clone(),
                r.regime.name().to_string(),
                r.subject_id.clone(),
                r.gender.name().to_string(),
                r.video_id.clone(),
                r.veracity.name().to_string(),
                r.true_label.name().to_string(),
            ];
            match &r.prediction {
                Prediction::Label(label) => row.push(label.name().to_string()),
                Prediction::Scores(s) => {
                    row.extend(s.values().iter().map(|v| format!("{v}")));
                }
            }
            w.write_record(&row).map_err(Error::from_csv)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn records(&self) -> &[PredictionRecord] {
        &self.records
    }

    pub fn taxonomy(&self) -> Taxonomy {
        self.taxonomy
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

fn check_header(headers: &csv::StringRecord) -> Result<Schema> {
    let fields: Vec<&str> = headers.iter().collect();
    let bad = |msg: String| Error::Parse { line: 1, message: msg };
    if fields.len() < BASE_HEADER.len() + 1 {
        return Err(bad(format!("header has {} columns, expected at least 8", fields.len())));
    }
    for (i, want) in BASE_HEADER.iter().enumerate() {
        if fields[i] != *want {
            return Err(bad(format!(
                "header column {} is {:?}, expected {:?}",
                i + 1,
                fields[i],
                want
            )));
        }
    }
    let rest = &fields[BASE_HEADER.len()..];
    if rest == ["pred_label"] {
        Ok(Schema::Label)
    } else if rest == FUSED_SCORE_COLUMNS {
        Ok(Schema::FusedScores)
    } else if rest == RAW_SCORE_COLUMNS {
        Ok(Schema::RawScores)
    } else {
        Err(bad(format!(
            "trailing columns {rest:?} match neither pred_label nor a score layout"
        )))
    }
}

fn parse_row(
    row: &csv::StringRecord,
    schema: &Schema,
    fuse: bool,
    line: u64,
) -> Result<PredictionRecord> {
    let bad = |msg: String| Error::Parse { line, message: msg };
    let field = |i: usize| -> Result<&str> {
        row.get(i)
            .ok_or_else(|| bad(format!("missing column {}", i + 1)))
    };

    let model_id = field(0)?.to_string();
    let regime: Regime = field(1)?.parse().map_err(bad)?;
    let subject_id = field(2)?.to_string();
    let gender: Gender = field(3)?.parse().map_err(bad)?;
    let video_id = field(4)?.to_string();
    let veracity: Veracity = field(5)?.parse().map_err(bad)?;
    let true_label = parse_any_label(field(6)?).map_err(bad)?;

    if model_id.is_empty() || subject_id.is_empty() || video_id.is_empty() {
        return Err(bad("empty identifier field".to_string()));
    }

    let prediction = match schema {
        Schema::Label => {
            expect_columns(row, 8, line)?;
            Prediction::Label(parse_any_label(field(7)?).map_err(bad)?)
        }
        Schema::FusedScores => {
            expect_columns(row, 11, line)?;
            Prediction::Scores(parse_scores(row, 7, 4, line)?)
        }
        Schema::RawScores => {
            expect_columns(row, 13, line)?;
            let raw = parse_scores(row, 7, 6, line)?;
            if fuse {
                Prediction::Scores(fuse_scores(&raw)?)
            } else {
                Prediction::Scores(raw)
            }
        }
    };

    Ok(PredictionRecord {
        model_id,
        regime,
        subject_id,
        gender,
        video_id,
        veracity,
        true_label,
        prediction,
    })
}

/// Accepts either a fused name or a raw emotion name, fusing the latter.
fn parse_any_label(s: &str) -> std::result::Result<FusedLabel, String> {
    if let Ok(fused) = s.parse::<FusedLabel>() {
        return Ok(fused);
    }
    match s.parse::<EmotionLabel>() {
        Ok(raw) => Ok(fuse_label(raw)),
        Err(_) => Err(format!("unknown label: {s}")),
    }
}

fn expect_columns(row: &csv::StringRecord, want: usize, line: u64) -> Result<()> {
    if row.len() != want {
        return Err(Error::Parse {
            line,
            message: format!("row has {} columns, expected {want}", row.len()),
        });
    }
    Ok(())
}

fn parse_scores(row: &csv::StringRecord, start: usize, count: usize, line: u64) -> Result<ScoreVector> {
    let mut values = Vec::with_capacity(count);
    for i in start..start + count {
        let raw = row.get(i).unwrap_or("");
        let v: f64 = raw.parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad score value: {raw:?}"),
        })?;
        if !v.is_finite() {
            return Err(Error::InvalidScore(format!("non-finite score at line {line}")));
        }
        values.push(v);
    }
    ScoreVector::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_csv() -> &'static str {
        "model_id,regime,subject_id,gender,video_id,veracity,true_label,pred_label\n\
         vgg16,regular,s01,female,s01_happy_g,genuine,happy,happy\n\
         vgg16,regular,s02,male,s02_sad_f,fake,sad,upset\n"
    }

    #[test]
    fn fuse_label_merges_three_into_upset() {
        assert_eq!(fuse_label(EmotionLabel::Anger), FusedLabel::Upset);
        assert_eq!(fuse_label(EmotionLabel::Disgust), FusedLabel::Upset);
        assert_eq!(fuse_label(EmotionLabel::Contempt), FusedLabel::Upset);
        assert_eq!(fuse_label(EmotionLabel::Happiness), FusedLabel::Happy);
        assert_eq!(fuse_label(EmotionLabel::Surprise), FusedLabel::Surprised);
        assert_eq!(fuse_label(EmotionLabel::Sadness), FusedLabel::Sad);
        let upset = EmotionLabel::ALL
            .iter()
            .filter(|l| fuse_label(**l) == FusedLabel::Upset)
            .count();
        assert_eq!(upset, 3);
    }

    #[test]
    fn labels_round_trip_through_names() {
        for label in EmotionLabel::ALL {
            assert_eq!(label.name().parse::<EmotionLabel>().unwrap(), label);
        }
        for label in FusedLabel::REPORT_ORDER {
            assert_eq!(label.name().parse::<FusedLabel>().unwrap(), label);
        }
        assert_eq!("ANGER".parse::<EmotionLabel>().unwrap(), EmotionLabel::Anger);
        assert_eq!("Happy".parse::<FusedLabel>().unwrap(), FusedLabel::Happy);
    }

    #[test]
    fn softmax_uniform_on_equal_logits() {
        let out = softmax(&ScoreVector::new(vec![0.0; 4]).unwrap()).unwrap();
        for v in out.values() {
            assert!((v - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_on_ln3_pair() {
        let out = softmax(&ScoreVector::new(vec![0.0, 3f64.ln(), 0.0, 0.0]).unwrap()).unwrap();
        assert!((out.values()[1] - 0.5).abs() < 1e-12);
        assert!((out.values()[0] - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn softmax_survives_large_logits() {
        let out = softmax(&ScoreVector::new(vec![1000.0, 0.0, 0.0, 0.0]).unwrap()).unwrap();
        assert!(out.values()[0] > 0.999999);
        let sum: f64 = out.values().iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        assert!(out.values().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn softmax_rejects_non_finite() {
        let bad = ScoreVector::new(vec![f64::NAN, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(softmax(&bad), Err(Error::InvalidScore(_))));
    }

    #[test]
    fn decode_picks_argmax_and_breaks_ties_low() {
        let v = ScoreVector::new(vec![0.1, 0.7, 0.1, 0.1]).unwrap();
        assert_eq!(decode(&v).unwrap(), FusedLabel::Upset);
        let tie = ScoreVector::new(vec![0.25, 0.25, 0.25, 0.25]).unwrap();
        assert_eq!(decode(&tie).unwrap(), FusedLabel::Surprised);
    }

    #[test]
    fn decode_rejects_raw_width() {
        let v = ScoreVector::new(vec![0.1; 6]).unwrap();
        assert!(matches!(
            decode(&v),
            Err(Error::TaxonomyMismatch { expected: 4, got: 6 })
        ));
    }

    #[test]
    fn ingest_two_rows() {
        let set = RecordSet::ingest(sample_csv().as_bytes(), false).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.taxonomy(), Taxonomy::Fused4);
        assert_eq!(set.records()[0].true_label, FusedLabel::Happy);
        assert_eq!(set.records()[1].gender, Gender::Male);
    }

    #[test]
    fn ingest_rejects_duplicate_key() {
        let csv = "model_id,regime,subject_id,gender,video_id,veracity,true_label,pred_label\n\
                   vgg16,regular,s01,female,v1,genuine,happy,happy\n\
                   vgg16,regular,s01,female,v1,genuine,happy,sad\n";
        let err = RecordSet::ingest(csv.as_bytes(), false).unwrap_err();
        match err {
            Error::Duplicate { key } => {
                assert!(key.contains("vgg16"));
                assert!(key.contains("v1"));
            }
            other => panic!("expected duplicate error, got {other:?}"),
        }
    }

    #[test]
    fn ingest_reports_line_of_bad_row() {
        let csv = "model_id,regime,subject_id,gender,video_id,veracity,true_label,pred_label\n\
                   vgg16,regular,s01,female,v1,genuine,happy,happy\n\
                   vgg16,nonsense,s02,female,v2,genuine,happy,happy\n";
        match RecordSet::ingest(csv.as_bytes(), false).unwrap_err() {
            Error::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("regime"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn raw_label_names_fuse_on_parse() {
        let csv = "model_id,regime,subject_id,gender,video_id,veracity,true_label,pred_label\n\
                   vgg16,regular,s01,female,v1,genuine,anger,contempt\n";
        let set = RecordSet::ingest(csv.as_bytes(), false).unwrap();
        assert_eq!(set.records()[0].true_label, FusedLabel::Upset);
        assert_eq!(set.records()[0].predicted_label().unwrap(), FusedLabel::Upset);
    }

    #[test]
    fn raw_scores_fuse_by_summing() {
        let csv = "model_id,regime,subject_id,gender,video_id,veracity,true_label,\
                   score_happiness,score_surprise,score_sadness,score_disgust,score_anger,score_contempt\n\
                   vgg16,regular,s01,female,v1,genuine,happy,0.1,0.2,0.1,0.2,0.2,0.2\n";
        let set = RecordSet::ingest(csv.as_bytes(), true).unwrap();
        assert_eq!(set.taxonomy(), Taxonomy::Fused4);
        match &set.records()[0].prediction {
            Prediction::Scores(s) => {
                let want = [0.2, 0.6, 0.1, 0.1];
                for (got, want) in s.values().iter().zip(want.iter()) {
                    assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
                }
            }
            other => panic!("expected scores, got {other:?}"),
        }
    }

    #[test]
    fn unfused_raw_scores_keep_six_classes() {
        let csv = "model_id,regime,subject_id,gender,video_id,veracity,true_label,\
                   score_happiness,score_surprise,score_sadness,score_disgust,score_anger,score_contempt\n\
                   vgg16,regular,s01,female,v1,genuine,happy,0.1,0.2,0.1,0.2,0.2,0.2\n";
        let set = RecordSet::ingest(csv.as_bytes(), false).unwrap();
        assert_eq!(set.taxonomy(), Taxonomy::Raw6);
        assert!(set.records()[0].predicted_label().is_err());
        let fused = set.fuse().unwrap();
        assert_eq!(fused.taxonomy(), Taxonomy::Fused4);
        assert_eq!(fused.records()[0].predicted_label().unwrap(), FusedLabel::Upset);
    }

    #[test]
    fn emit_then_ingest_round_trips() {
        let set = RecordSet::ingest(sample_csv().as_bytes(), false).unwrap();
        let mut buf = Vec::new();
        set.emit(&mut buf).unwrap();
        let again = RecordSet::ingest(buf.as_slice(), false).unwrap();
        assert_eq!(set, again);
    }

    #[test]
    fn emit_then_ingest_round_trips_scores() {
        let csv = "model_id,regime,subject_id,gender,video_id,veracity,true_label,\
                   score_surprised,score_upset,score_sad,score_happy\n\
                   vgg16,regular,s01,female,v1,genuine,happy,0.05,0.15,0.25,0.55\n";
        let set = RecordSet::ingest(csv.as_bytes(), false).unwrap();
        let mut buf = Vec::new();
        set.emit(&mut buf).unwrap();
        let again = RecordSet::ingest(buf.as_slice(), false).unwrap();
        assert_eq!(set, again);
    }

    #[test]
    fn header_mismatch_is_a_parse_error() {
        let csv = "model,regime\nx,y\n";
        assert!(matches!(
            RecordSet::ingest(csv.as_bytes(), false),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
