//! Report assembly: the bundled appendix transcription, accuracy
//! summaries, the end-to-end audit and the claim verification entry
//! point used by `verify-paper`.

use std::env;
use std::fs;
use std::io::Cursor;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fairness::{
    gaps, verify_claims, Aggregation, ClaimRegister, EqodCombine, FairnessDefinition, GapReport,
};
use crate::metrics::{self, reconstruct_counts, EvalSet, MetricTable, Support};
use crate::records::{FusedLabel, RecordSet, Regime};

/// Checksum of the bundled metric transcription; `fixture_table`
/// refuses to serve a tampered copy.
pub const FIXTURE_SHA256: &str = "d944702a6bfec1a4bf7e3ca9b722523496930d23cdafebd468243560e25aed1e";

/// Environment variable naming a replacement fixture file. Intended for
/// testing; the override skips the checksum.
pub const FIXTURE_ENV: &str = "FAIRSCOPE_FIXTURE";

/// Share of cells that must reconstruct into integer counts for
/// `verify-paper` to pass.
pub const CONSISTENCY_THRESHOLD: f64 = 0.95;

/// The six architectures covered by the bundled tables.
pub const REFERENCE_MODELS: [&str; 6] = [
    "3dcnn",
    "resnet3d",
    "resnet50",
    "senetlstm",
    "vgg16",
    "vggface",
];

const FIXTURE_CSV: &str = include_str!("../data/appendix_metrics.csv");

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Loads the bundled metric table, honoring the [`FIXTURE_ENV`]
/// override.
pub fn fixture_table() -> Result<MetricTable> {
    if let Ok(path) = env::var(FIXTURE_ENV) {
        let bytes = fs::read(path)?;
        return MetricTable::from_csv(Cursor::new(bytes));
    }
    let actual = sha256_hex(FIXTURE_CSV.as_bytes());
    if actual != FIXTURE_SHA256 {
        return Err(Error::CorruptedFixture {
            expected: FIXTURE_SHA256.to_string(),
            actual,
        });
    }
    MetricTable::from_csv(FIXTURE_CSV.as_bytes())
}

/// Positive/negative support for a set: 20/60 for the full test set,
/// 10/30 for either gender half.
pub fn support_for(set: EvalSet) -> Support {
    match set {
        EvalSet::Test => Support::new(20, 60),
        EvalSet::FemaleSet | EvalSet::MaleSet => Support::new(10, 30),
    }
}

/// Five-number summary plus mean and population variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxplotStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Inclusive linear-interpolation quantile over a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

impl BoxplotStats {
    /// Summary of a non-empty sample; `None` when empty.
    pub fn from_values(values: &[f64]) -> Option<BoxplotStats> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        // Corrected two-pass mean: the residual pass cancels the
        // rounding of the naive sum, so a constant sample gets its
        // exact value back and zero variance.
        let naive = sorted.iter().sum::<f64>() / n;
        let mean = naive + sorted.iter().map(|v| v - naive).sum::<f64>() / n;
        let variance = sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Some(BoxplotStats {
            min: sorted[0],
            q1: quantile(&sorted, 0.25),
            median: quantile(&sorted, 0.5),
            q3: quantile(&sorted, 0.75),
            max: *sorted.last().unwrap(),
            mean,
            variance,
        })
    }
}

/// Boxplot-style statistics over the accuracy cells of one regime and
/// set: every model, every class.
pub fn aggregate_stats(table: &MetricTable, regime: Regime, set: EvalSet) -> Result<BoxplotStats> {
    let models = table.models(regime, set);
    if models.is_empty() {
        return Err(Error::IncompleteTable(format!(
            "no accuracy cells for ({}, {})",
            regime.name(),
            set.name()
        )));
    }
    let mut values = Vec::with_capacity(models.len() * 4);
    for model in &models {
        for cell in table.class_row(regime, set, model)? {
            values.push(cell.acc);
        }
    }
    Ok(BoxplotStats::from_values(&values).expect("models list verified non-empty"))
}

/// Knobs of an audit run, recorded in the report provenance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AuditOptions {
    pub aggregation: Aggregation,
    pub eqod_combine: EqodCombine,
}

/// Where the numbers came from: input digest and the options used.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub records_sha256: String,
    pub aggregation: Aggregation,
    pub eqod_combine: EqodCombine,
}

/// One metric cell in row form, the JSON counterpart of the metric CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub regime: Regime,
    pub test_set: EvalSet,
    pub model: String,
    pub class: FusedLabel,
    pub acc: f64,
    pub tpr: f64,
    pub fpr: f64,
}

/// Accuracy summary of one regime and set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsEntry {
    pub regime: Regime,
    pub test_set: EvalSet,
    pub stats: BoxplotStats,
}

/// A gap computation that could not run, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapError {
    pub definition: FairnessDefinition,
    pub regime: Regime,
    pub error: String,
}

/// Everything an audit produces. Field order is the serialization
/// order, which keeps reports byte-stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub tool_version: String,
    pub provenance: Provenance,
    pub metrics: Vec<MetricRow>,
    pub gaps: Vec<GapReport>,
    pub stats: Vec<StatsEntry>,
    pub gap_errors: Vec<GapError>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub claims: Option<ClaimRegister>,
}

/// Whether the table carries the full reference grid, which is what the
/// claim register needs to be meaningful.
fn claims_applicable(table: &MetricTable) -> bool {
    Regime::ALL.iter().all(|&regime| {
        [EvalSet::FemaleSet, EvalSet::MaleSet].iter().all(|&set| {
            let models = table.models(regime, set);
            REFERENCE_MODELS
                .iter()
                .all(|m| models.iter().any(|have| have == m))
        })
    })
}

/// Builds a report from an already-computed table.
pub fn audit_table(
    table: &MetricTable,
    records_sha256: String,
    options: AuditOptions,
) -> Result<AuditReport> {
    let mut present: Vec<Regime> = Vec::new();
    for ((regime, _, _, _), _) in table.iter() {
        if !present.contains(regime) {
            present.push(*regime);
        }
    }
    present.sort_by_key(|r| Regime::ALL.iter().position(|a| a == r));

    let mut gap_reports = Vec::new();
    let mut gap_errors = Vec::new();
    for &regime in &present {
        for definition in [
            FairnessDefinition::DemographicParity,
            FairnessDefinition::EqualOpportunity,
            FairnessDefinition::EqualizedOdds,
        ] {
            match gaps(
                table,
                definition,
                regime,
                options.aggregation,
                options.eqod_combine,
            ) {
                Ok(report) => gap_reports.push(report),
                Err(err) => gap_errors.push(GapError {
                    definition,
                    regime,
                    error: err.to_string(),
                }),
            }
        }
    }

    let mut stats = Vec::new();
    for &regime in &present {
        for set in EvalSet::ALL {
            if !table.models(regime, set).is_empty() {
                stats.push(StatsEntry {
                    regime,
                    test_set: set,
                    stats: aggregate_stats(table, regime, set)?,
                });
            }
        }
    }

    let claims = if claims_applicable(table) {
        verify_claims(table).ok()
    } else {
        None
    };

    let metrics = table
        .iter()
        .map(|((regime, set, model, class), cell)| MetricRow {
            regime: *regime,
            test_set: *set,
            model: model.clone(),
            class: *class,
            acc: cell.acc,
            tpr: cell.tpr,
            fpr: cell.fpr,
        })
        .collect();

    Ok(AuditReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        provenance: Provenance {
            records_sha256,
            aggregation: options.aggregation,
            eqod_combine: options.eqod_combine,
        },
        metrics,
        gaps: gap_reports,
        stats,
        gap_errors,
        claims,
    })
}

/// Full pipeline: prediction CSV in, report out. Records are fused on
/// ingest; gap failures are recorded per regime rather than aborting,
/// so partial inputs still yield their metric rows.
pub fn run_audit(records_path: &Path, options: AuditOptions) -> Result<AuditReport> {
    let bytes = fs::read(records_path)?;
    let records_sha256 = sha256_hex(&bytes);
    let records = RecordSet::ingest(Cursor::new(bytes), true)?;
    let table = metrics::table(&records)?;
    audit_table(&table, records_sha256, options)
}

/// Outcome of the reconstruction sweep plus the claim register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub claims: ClaimRegister,
    pub consistent_cells: usize,
    pub total_cells: usize,
    /// Cells whose rates do not land on integer counts, named
    /// `regime/set/model/class`.
    pub inconsistent: Vec<String>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn consistency(&self) -> f64 {
        self.consistent_cells as f64 / self.total_cells as f64
    }
}

/// Checks every cell of `table` for count reconstruction under the
/// canonical supports, then evaluates the claim register. Passes only
/// when all claims land as expected and at least
/// [`CONSISTENCY_THRESHOLD`] of the cells reconstruct.
pub fn verify_paper(table: &MetricTable) -> Result<VerifyReport> {
    let mut total = 0usize;
    let mut consistent = 0usize;
    let mut inconsistent = Vec::new();
    for ((regime, set, model, class), cell) in table.iter() {
        total += 1;
        let support = support_for(*set);
        if reconstruct_counts(cell, &support).consistent {
            consistent += 1;
        } else {
            inconsistent.push(format!(
                "{}/{}/{model}/{class}",
                regime.name(),
                set.name()
            ));
        }
    }
    if total == 0 {
        return Err(Error::IncompleteTable("empty metric table".to_string()));
    }

    let claims = verify_claims(table)?;
    let pass =
        claims.all_match() && consistent as f64 >= CONSISTENCY_THRESHOLD * total as f64;
    Ok(VerifyReport {
        claims,
        consistent_cells: consistent,
        total_cells: total,
        inconsistent,
        pass,
    })
}

/// Output formats of [`emit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Json,
    Csv,
}

fn metric_table_of(rows: &[MetricRow]) -> MetricTable {
    let mut table = MetricTable::new();
    for row in rows {
        table.insert(
            row.regime,
            row.test_set,
            &row.model,
            row.class,
            crate::metrics::ClassMetrics {
                acc: row.acc,
                tpr: row.tpr,
                fpr: row.fpr,
            },
        );
    }
    table
}

/// Serializes a report. JSON is the full report, pretty-printed. CSV is
/// three blank-line-separated sections reusing the metric and gap row
/// schemas, plus one row per accuracy box; every row is one plot datum.
pub fn emit(report: &AuditReport, format: EmitFormat) -> Result<Vec<u8>> {
    match format {
        EmitFormat::Json => {
            let mut bytes = serde_json::to_vec_pretty(report).map_err(Error::from_json)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        EmitFormat::Csv => {
            let mut metrics_csv = Vec::new();
            metric_table_of(&report.metrics).to_csv(&mut metrics_csv)?;

            let mut gaps_csv = Vec::new();
            let refs: Vec<&GapReport> = report.gaps.iter().collect();
            crate::fairness::write_gap_csv(&refs, &mut gaps_csv)?;

            let mut stats_csv = String::new();
            stats_csv.push_str("regime,test_set,min,q1,median,q3,max,mean,variance\n");
            for entry in &report.stats {
                let s = entry.stats;
                stats_csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    entry.regime.name(),
                    entry.test_set.name(),
                    s.min,
                    s.q1,
                    s.median,
                    s.q3,
                    s.max,
                    s.mean,
                    s.variance
                ));
            }

            let mut out = metrics_csv;
            out.push(b'\n');
            out.extend_from_slice(&gaps_csv);
            out.push(b'\n');
            out.extend_from_slice(stats_csv.as_bytes());
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::ClassMetrics;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn sha256_matches_known_vector() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn fixture_loads_complete() {
        let table = fixture_table().unwrap();
        assert_eq!(table.len(), 216);
        for regime in Regime::ALL {
            for set in EvalSet::ALL {
                assert_eq!(table.models(regime, set).len(), 6);
            }
        }
        let cell = table
            .get(Regime::Regular, EvalSet::Test, "vgg16", FusedLabel::Surprised)
            .unwrap();
        assert!(close(cell.acc, 0.9125));
        assert!(close(cell.tpr, 0.75));
        assert!(close(cell.fpr, 0.033));
    }

    #[test]
    fn constant_sample_collapses() {
        let stats = BoxplotStats::from_values(&[0.8; 24]).unwrap();
        assert_eq!(stats.min, 0.8);
        assert_eq!(stats.q1, 0.8);
        assert_eq!(stats.median, 0.8);
        assert_eq!(stats.q3, 0.8);
        assert_eq!(stats.max, 0.8);
        assert_eq!(stats.mean, 0.8);
        assert_eq!(stats.variance, 0.0);
    }

    #[test]
    fn quartiles_interpolate_inclusively() {
        // Four points: q1 sits three quarters of the way from 1 to 2.
        let stats = BoxplotStats::from_values(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert!(close(stats.q1, 1.75));
        assert!(close(stats.median, 2.5));
        assert!(close(stats.q3, 3.25));
        assert!(close(stats.variance, 1.25));
    }

    #[test]
    fn regular_test_stats_match_the_tables() {
        let table = fixture_table().unwrap();
        let stats = aggregate_stats(&table, Regime::Regular, EvalSet::Test).unwrap();
        assert!(close(stats.min, 0.7125));
        assert!(close(stats.q1, 0.825));
        assert!(close(stats.median, 0.85));
        assert!(close(stats.q3, 0.890625));
        assert!(close(stats.max, 0.925));
        assert!(close(stats.mean, 0.8489583333333335));
        assert!(close(stats.variance, 0.002616102430555554));
    }

    #[test]
    fn gender_set_means_follow_the_recorded_directions() {
        let table = fixture_table().unwrap();
        let female = aggregate_stats(&table, Regime::Regular, EvalSet::FemaleSet).unwrap();
        let male = aggregate_stats(&table, Regime::Regular, EvalSet::MaleSet).unwrap();
        assert!(close(female.mean, 0.8583333333333333));
        assert!(close(male.mean, 0.8166666666666665));
        assert!(female.mean > male.mean);

        let female = aggregate_stats(&table, Regime::MaleTrained, EvalSet::FemaleSet).unwrap();
        let male = aggregate_stats(&table, Regime::MaleTrained, EvalSet::MaleSet).unwrap();
        assert!(close(female.mean, 0.7854166666666668));
        assert!(close(male.mean, 0.8020833333333331));
        assert!(male.mean > female.mean);
    }

    #[test]
    fn stats_ordering_invariant_holds_everywhere() {
        let table = fixture_table().unwrap();
        for regime in Regime::ALL {
            for set in EvalSet::ALL {
                let s = aggregate_stats(&table, regime, set).unwrap();
                assert!(s.min <= s.q1 && s.q1 <= s.median);
                assert!(s.median <= s.q3 && s.q3 <= s.max);
                assert!(s.variance >= 0.0);
            }
        }
    }

    #[test]
    fn missing_set_is_an_incomplete_table() {
        let mut table = MetricTable::new();
        table.insert(
            Regime::Regular,
            EvalSet::Test,
            "m",
            FusedLabel::Happy,
            ClassMetrics { acc: 0.5, tpr: 0.5, fpr: 0.5 },
        );
        assert!(matches!(
            aggregate_stats(&table, Regime::Regular, EvalSet::FemaleSet),
            Err(Error::IncompleteTable(_))
        ));
        // A model present but missing classes is also incomplete.
        assert!(matches!(
            aggregate_stats(&table, Regime::Regular, EvalSet::Test),
            Err(Error::IncompleteTable(_))
        ));
    }

    #[test]
    fn verify_paper_passes_on_the_bundled_fixture() {
        let table = fixture_table().unwrap();
        let report = verify_paper(&table).unwrap();
        assert!(report.pass);
        assert_eq!(report.total_cells, 216);
        assert_eq!(report.consistent_cells, 215);
        assert_eq!(report.inconsistent, vec!["regular/test/senetlstm/upset"]);
        assert!(report.claims.all_match());
        assert_eq!(report.claims.claims.len(), 10);
    }

    #[test]
    fn audit_of_the_fixture_table_is_complete() {
        let table = fixture_table().unwrap();
        let report = audit_table(&table, "test".to_string(), AuditOptions::default()).unwrap();
        assert_eq!(report.metrics.len(), 216);
        assert_eq!(report.gaps.len(), 9);
        assert_eq!(report.stats.len(), 9);
        assert!(report.gap_errors.is_empty());
        let claims = report.claims.expect("full grid carries claims");
        assert!(claims.all_match());

        let dp = report
            .gaps
            .iter()
            .find(|g| {
                g.definition == FairnessDefinition::DemographicParity && g.regime == Regime::Regular
            })
            .unwrap();
        assert!(close(dp.aggregate_of("vgg16").unwrap(), 0.0375));
    }

    #[test]
    fn emitted_json_is_stable_and_round_trips() {
        let table = fixture_table().unwrap();
        let report = audit_table(&table, "digest".to_string(), AuditOptions::default()).unwrap();
        let a = emit(&report, EmitFormat::Json).unwrap();
        let b = emit(&report, EmitFormat::Json).unwrap();
        assert_eq!(a, b);
        let back: AuditReport = serde_json::from_slice(&a).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn emitted_csv_sections_round_trip() {
        let table = fixture_table().unwrap();
        let report = audit_table(&table, "digest".to_string(), AuditOptions::default()).unwrap();
        let bytes = emit(&report, EmitFormat::Csv).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let sections: Vec<&str> = text.split("\n\n").collect();
        assert_eq!(sections.len(), 3);

        let reread = MetricTable::from_csv(sections[0].as_bytes()).unwrap();
        assert_eq!(reread, table);

        // 9 gap reports, 6 models, 4 classes each, one header line.
        let gap_lines = sections[1].lines().count();
        assert_eq!(gap_lines, 1 + 9 * 6 * 4);
        assert!(sections[1].starts_with("definition,regime,model,class,gap"));

        let stats_lines = sections[2].lines().count();
        assert_eq!(stats_lines, 1 + 9);
    }
}
