//! Confusion matrices, one-vs-rest counts and per-group ACC/TPR/FPR.
//!
//! Metrics are always computed on the fused 4-class taxonomy and grouped
//! three ways: the whole test set, the female subjects only and the male
//! subjects only. `reconstruct_counts` inverts published rates back into
//! integer counts, which is how fixture integrity gets checked.

use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::{FusedLabel, Gender, PredictionRecord, RecordSet, Regime};

/// One-vs-rest counts for a single class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassCounts {
    pub true_pos: u64,
    pub false_pos: u64,
    pub true_neg: u64,
    pub false_neg: u64,
}

impl ClassCounts {
    pub fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }

    /// Samples that truly belong to the class.
    pub fn positives(&self) -> u64 {
        self.true_pos + self.false_neg
    }

    /// Samples that truly belong to any other class.
    pub fn negatives(&self) -> u64 {
        self.false_pos + self.true_neg
    }
}

/// 4x4 confusion grid, rows true class, columns predicted class, both in
/// report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    counts: [[u64; 4]; 4],
}

impl ConfusionMatrix {
    pub fn new() -> ConfusionMatrix {
        ConfusionMatrix::default()
    }

    pub fn from_counts(counts: [[u64; 4]; 4]) -> ConfusionMatrix {
        ConfusionMatrix { counts }
    }

    pub fn increment(&mut self, truth: FusedLabel, predicted: FusedLabel) {
        self.counts[truth.index()][predicted.index()] += 1;
    }

    pub fn get(&self, truth: FusedLabel, predicted: FusedLabel) -> u64 {
        self.counts[truth.index()][predicted.index()]
    }

    pub fn row_sum(&self, truth: FusedLabel) -> u64 {
        self.counts[truth.index()].iter().sum()
    }

    pub fn col_sum(&self, predicted: FusedLabel) -> u64 {
        self.counts.iter().map(|row| row[predicted.index()]).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Elementwise sum, used to pool gender groups back into the full set.
    pub fn add(&self, other: &ConfusionMatrix) -> ConfusionMatrix {
        let mut out = ConfusionMatrix::new();
        for t in 0..4 {
            for p in 0..4 {
                out.counts[t][p] = self.counts[t][p] + other.counts[t][p];
            }
        }
        out
    }
}

/// The three rates every table cell carries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub acc: f64,
    pub tpr: f64,
    pub fpr: f64,
}

/// Class support within one group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Support {
    pub positives: u64,
    pub negatives: u64,
}

impl Support {
    pub fn new(positives: u64, negatives: u64) -> Support {
        Support { positives, negatives }
    }

    pub fn total(&self) -> u64 {
        self.positives + self.negatives
    }
}

/// Which slice of the test subjects a metric was computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EvalSet {
    #[serde(rename = "test")]
    Test,
    #[serde(rename = "female")]
    FemaleSet,
    #[serde(rename = "male")]
    MaleSet,
}

impl EvalSet {
    pub const ALL: [EvalSet; 3] = [EvalSet::Test, EvalSet::FemaleSet, EvalSet::MaleSet];

    pub fn name(self) -> &'static str {
        match self {
            EvalSet::Test => "test",
            EvalSet::FemaleSet => "female",
            EvalSet::MaleSet => "male",
        }
    }

    /// Whether a record of this gender belongs to the set.
    pub fn includes(self, gender: Gender) -> bool {
        match self {
            EvalSet::Test => true,
            EvalSet::FemaleSet => gender == Gender::Female,
            EvalSet::MaleSet => gender == Gender::Male,
        }
    }
}

impl fmt::Display for EvalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EvalSet {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "test" => Ok(EvalSet::Test),
            "female" => Ok(EvalSet::FemaleSet),
            "male" => Ok(EvalSet::MaleSet),
            other => Err(format!("unknown evaluation set: {other}")),
        }
    }
}

/// Tallies the filtered records into a confusion matrix. `group` only
/// names the slice in error messages.
pub fn confusion<F>(set: &RecordSet, group: &str, filter: F) -> Result<ConfusionMatrix>
where
    F: Fn(&PredictionRecord) -> bool,
{
    let mut matrix = ConfusionMatrix::new();
    let mut any = false;
    for record in set.records() {
        if !filter(record) {
            continue;
        }
        any = true;
        matrix.increment(record.true_label, record.predicted_label()?);
    }
    if !any {
        return Err(Error::EmptyGroup(group.to_string()));
    }
    Ok(matrix)
}

/// Reduces the multiclass matrix to one-vs-rest counts for one class.
pub fn ovr_counts(matrix: &ConfusionMatrix, class: FusedLabel) -> ClassCounts {
    let tp = matrix.get(class, class);
    let fn_count = matrix.row_sum(class) - tp;
    let fp = matrix.col_sum(class) - tp;
    let tn = matrix.total() - tp - fn_count - fp;
    ClassCounts {
        true_pos: tp,
        false_pos: fp,
        true_neg: tn,
        false_neg: fn_count,
    }
}

/// ACC, TPR and FPR from counts. A group with no positives or no
/// negatives for the class has no defined rate and errors out; degenerate
/// slices must be visible, not silently perfect.
pub fn class_metrics(counts: &ClassCounts) -> Result<ClassMetrics> {
    if counts.positives() == 0 {
        return Err(Error::UndefinedRate { side: "positives" });
    }
    if counts.negatives() == 0 {
        return Err(Error::UndefinedRate { side: "negatives" });
    }
    let total = counts.total() as f64;
    Ok(ClassMetrics {
        acc: (counts.true_pos + counts.true_neg) as f64 / total,
        tpr: counts.true_pos as f64 / counts.positives() as f64,
        fpr: counts.false_pos as f64 / counts.negatives() as f64,
    })
}

/// Counts recovered from published rates, plus whether the published
/// accuracy agrees with them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reconstruction {
    pub counts: ClassCounts,
    pub consistent: bool,
}

/// Acceptable gap between a published accuracy and the accuracy implied
/// by reconstructed counts. Published values are truncated to at most six
/// digits, so anything beyond this band means the triple disagrees.
pub const ACC_CONSISTENCY_BAND: f64 = 0.0005;

/// Inverts (acc, tpr, fpr) into integer counts under the given support.
/// Inconsistency is reported in the result, never thrown, so a sweep over
/// a whole table can tally it.
pub fn reconstruct_counts(metrics: &ClassMetrics, support: &Support) -> Reconstruction {
    let tp = (metrics.tpr * support.positives as f64).round() as u64;
    let fp = (metrics.fpr * support.negatives as f64).round() as u64;
    let tp = tp.min(support.positives);
    let fp = fp.min(support.negatives);
    let counts = ClassCounts {
        true_pos: tp,
        false_pos: fp,
        true_neg: support.negatives - fp,
        false_neg: support.positives - tp,
    };
    let implied_acc = (counts.true_pos + counts.true_neg) as f64 / support.total() as f64;
    Reconstruction {
        consistent: (metrics.acc - implied_acc).abs() <= ACC_CONSISTENCY_BAND,
        counts,
    }
}

/// All metric cells of an audit, keyed by regime, evaluation set, model
/// and class. BTreeMap keeps iteration order deterministic.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricTable {
    cells: BTreeMap<(Regime, EvalSet, String, FusedLabel), ClassMetrics>,
}

impl MetricTable {
    pub fn new() -> MetricTable {
        MetricTable::default()
    }

    pub fn insert(
        &mut self,
        regime: Regime,
        set: EvalSet,
        model: &str,
        class: FusedLabel,
        metrics: ClassMetrics,
    ) {
        self.cells
            .insert((regime, set, model.to_string(), class), metrics);
    }

    pub fn get(
        &self,
        regime: Regime,
        set: EvalSet,
        model: &str,
        class: FusedLabel,
    ) -> Option<&ClassMetrics> {
        self.cells
            .get(&(regime, set, model.to_string(), class))
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    /// Sorted model ids appearing in the given regime and set.
    pub fn models(&self, regime: Regime, set: EvalSet) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for (r, s, model, _) in self.cells.keys() {
            if *r == regime && *s == set && out.last() != Some(model) {
                out.push(model.clone());
            }
        }
        out.dedup();
        out
    }

    /// The four per-class cells of one (regime, set, model), in report
    /// order, or an incomplete-table error naming what is missing.
    pub fn class_row(
        &self,
        regime: Regime,
        set: EvalSet,
        model: &str,
    ) -> Result<[ClassMetrics; 4]> {
        let mut out = [ClassMetrics { acc: 0.0, tpr: 0.0, fpr: 0.0 }; 4];
        for class in FusedLabel::REPORT_ORDER {
            out[class.index()] = *self.get(regime, set, model, class).ok_or_else(|| {
                Error::IncompleteTable(format!(
                    "missing cell ({}, {}, {model}, {class})",
                    regime.name(),
                    set.name()
                ))
            })?;
        }
        Ok(out)
    }

    /// Iterates cells in key order.
    pub fn iter(
        &self,
    ) -> impl Iterator<Item = (&(Regime, EvalSet, String, FusedLabel), &ClassMetrics)> {
        self.cells.iter()
    }

    /// Reads the `regime,test_set,model,class,metric,value` layout.
    pub fn from_csv(reader: impl io::Read) -> Result<MetricTable> {
        let mut csv_reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);

        let headers = csv_reader.headers().map_err(Error::from_csv)?;
        let want = ["regime", "test_set", "model", "class", "metric", "value"];
        let got: Vec<&str> = headers.iter().collect();
        if got != want {
            return Err(Error::Parse {
                line: 1,
                message: format!("metric CSV header is {got:?}, expected {want:?}"),
            });
        }

        // Gather per-metric values first; a cell only exists once all
        // three rates for it have been seen.
        let mut partial: BTreeMap<(Regime, EvalSet, String, FusedLabel), [Option<f64>; 3]> =
            BTreeMap::new();
        for row in csv_reader.records() {
            let row = row.map_err(Error::from_csv)?;
            let line = row.position().map(|p| p.line()).unwrap_or(0);
            let bad = |msg: String| Error::Parse { line, message: msg };

            let regime: Regime = row.get(0).unwrap_or("").parse().map_err(bad)?;
            let set: EvalSet = row.get(1).unwrap_or("").parse().map_err(bad)?;
            let model = row.get(2).unwrap_or("").to_string();
            let class: FusedLabel = row.get(3).unwrap_or("").parse().map_err(bad)?;
            let metric = row.get(4).unwrap_or("");
            let value: f64 = row
                .get(5)
                .unwrap_or("")
                .parse()
                .map_err(|_| bad(format!("bad metric value: {:?}", row.get(5).unwrap_or(""))))?;
            if model.is_empty() {
                return Err(bad("empty model id".to_string()));
            }
            if !(0.0..=1.0).contains(&value) {
                return Err(bad(format!("metric value {value} outside [0, 1]")));
            }
            let slot = match metric {
                "acc" => 0,
                "tpr" => 1,
                "fpr" => 2,
                other => return Err(bad(format!("unknown metric: {other}"))),
            };
            let entry = partial.entry((regime, set, model.clone(), class)).or_default();
            if entry[slot].is_some() {
                return Err(Error::Duplicate {
                    key: format!(
                        "({}, {}, {model}, {class}, {metric})",
                        regime.name(),
                        set.name()
                    ),
                });
            }
            entry[slot] = Some(value);
        }

        let mut table = MetricTable::new();
        for ((regime, set, model, class), slots) in partial {
            let [acc, tpr, fpr] = slots;
            let (Some(acc), Some(tpr), Some(fpr)) = (acc, tpr, fpr) else {
                return Err(Error::IncompleteTable(format!(
                    "cell ({}, {}, {model}, {class}) lacks one of acc/tpr/fpr",
                    regime.name(),
                    set.name()
                )));
            };
            table.insert(regime, set, &model, class, ClassMetrics { acc, tpr, fpr });
        }
        Ok(table)
    }

    /// Writes the same layout `from_csv` reads. Values print in Rust's
    /// shortest round-trip float form, so read-back is lossless.
    pub fn to_csv(&self, writer: impl io::Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["regime", "test_set", "model", "class", "metric", "value"])
            .map_err(Error::from_csv)?;
        for ((regime, set, model, class), m) in &self.cells {
            for (name, value) in [("acc", m.acc), ("tpr", m.tpr), ("fpr", m.fpr)] {
                w.write_record([
                    regime.name(),
                    set.name(),
                    model,
                    class.name(),
                    name,
                    &format!("{value}"),
                ])
                .map_err(Error::from_csv)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Computes the full metric table of a record set: per (model, regime),
/// the whole-test metrics plus each gender slice that has records.
pub fn table(records: &RecordSet) -> Result<MetricTable> {
    if records.is_empty() {
        return Err(Error::EmptyGroup("record set".to_string()));
    }

    let mut pairs: Vec<(String, Regime)> = records
        .records()
        .iter()
        .map(|r| (r.model_id.clone(), r.regime))
        .collect();
    pairs.sort();
    pairs.dedup();

    let mut out = MetricTable::new();
    for (model, regime) in pairs {
        for set in EvalSet::ALL {
            let has_any = records
                .records()
                .iter()
                .any(|r| r.model_id == model && r.regime == regime && set.includes(r.gender));
            if !has_any {
                continue;
            }
            let matrix = confusion(records, set.name(), |r| {
                r.model_id == model && r.regime == regime && set.includes(r.gender)
            })?;
            for class in FusedLabel::REPORT_ORDER {
                let metrics = class_metrics(&ovr_counts(&matrix, class))?;
                out.insert(regime, set, &model, class, metrics);
            }
        }
    }
    Ok(out)
}
