//! fairscope: a fairness audit toolkit for facial expression
//! classifiers evaluated across gender groups.
//!
//! The library covers the full pipeline: prediction record ingestion,
//! per-class accuracy/TPR/FPR tables, demographic parity and equalized
//! odds style gap reports with rankings, deterministic subject-disjoint
//! splits, and seeded video preprocessing (keyframe selection and
//! augmentation). A transcription of the reference result tables is
//! bundled so audits and the claim register can run self-contained.

pub mod audit;
pub mod dataset;
pub mod error;
pub mod fairness;
pub mod fsio;
pub mod metrics;
pub mod preprocess;
pub mod records;
pub mod rng;

pub use audit::{
    aggregate_stats, emit, fixture_table, run_audit, verify_paper, AuditOptions, AuditReport,
    BoxplotStats, EmitFormat, VerifyReport,
};
pub use error::{Error, Result};
pub use fairness::{
    gaps, rank, verify_claims, Aggregation, ClaimRegister, ClaimStatus, EqodCombine,
    FairnessDefinition, GapReport,
};
pub use metrics::{class_metrics, reconstruct_counts, ClassMetrics, EvalSet, MetricTable, Support};
pub use records::{FusedLabel, Gender, PredictionRecord, RecordSet, Regime, Veracity};
