//! The fairscope command line: audits, gap reports, splits and the
//! seeded preprocessing pipeline.
//!
//! Exit codes are a stable contract: 0 on success, 1 when verify-paper
//! finds a claim or consistency failure, 2 on any input error.

use std::fmt;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use fairscope::audit::{self, AuditOptions, EmitFormat};
use fairscope::dataset::{load_manifest, make_split, SplitConfig};
use fairscope::error::{Error, Result};
use fairscope::fairness::{self, Aggregation, EqodCombine, FairnessDefinition};
use fairscope::fsio::atomic_write;
use fairscope::metrics::{EvalSet, MetricTable};
use fairscope::preprocess::{
    apply_augmentation, load_clip, plan_augmentation, save_clip, select_keyframes, KeyframeConfig,
    KeyframePreset, KeyframeSelection,
};
use fairscope::records::{RecordSet, Regime};

#[derive(Parser)]
#[command(
    name = "fairscope",
    version,
    about = "Gender fairness audits for facial expression classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a prediction CSV and print its canonical form
    Ingest {
        /// Prediction CSV to read
        #[arg(long)]
        records: PathBuf,
        /// Collapse six-way score columns into the four-class taxonomy
        #[arg(long)]
        fuse: bool,
    },
    /// Run the full audit on a prediction CSV and write a JSON report
    Audit {
        /// Prediction CSV to read
        #[arg(long)]
        records: PathBuf,
        /// Report destination (written atomically)
        #[arg(long)]
        out: PathBuf,
        /// How per-class gaps fold into one number: mean | max
        #[arg(long, default_value = "mean")]
        aggregation: String,
        /// How TPR and FPR differences combine per class: mean | max | sum
        #[arg(long, default_value = "mean")]
        eqod_combine: String,
    },
    /// Compute one gap report from a metric CSV
    Gaps {
        /// Metric CSV (regime,test_set,model,class,metric,value)
        #[arg(long)]
        metrics: PathBuf,
        /// dp | eqop | eqod
        #[arg(long)]
        definition: String,
        /// regular | female | male
        #[arg(long)]
        regime: String,
        /// Also list the ranking tiers on stderr
        #[arg(long)]
        rank: bool,
    },
    /// Draw a subject-disjoint test/val/train split from a manifest
    Split {
        /// Corpus manifest JSON
        #[arg(long)]
        manifest: PathBuf,
        /// Seed for the once-only test draw
        #[arg(long)]
        test_seed: u64,
        /// Seed for the per-run validation draw
        #[arg(long)]
        val_seed: u64,
        /// Test subjects drawn per gender
        #[arg(long, default_value_t = SplitConfig::DEFAULT_TEST_PER_GENDER)]
        test_per_gender: usize,
        /// Validation subjects drawn from the remaining pool
        #[arg(long, default_value_t = SplitConfig::DEFAULT_VAL_SUBJECTS)]
        val_subjects: usize,
    },
    /// Select representative frame indices from a clip directory
    Keyframes {
        /// Directory of PNG frames in name order
        #[arg(long)]
        clip: PathBuf,
        /// k10 | k20 | k50
        #[arg(long)]
        preset: String,
        #[arg(long)]
        seed: u64,
        /// Selection JSON destination (written atomically)
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a seeded augmentation plan to a clip directory
    Augment {
        /// Directory of PNG frames in name order
        #[arg(long)]
        clip: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Output frame directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Accuracy summary of one regime and set from a metric CSV
    Stats {
        /// Metric CSV (regime,test_set,model,class,metric,value)
        #[arg(long)]
        metrics: PathBuf,
        /// regular | female | male
        #[arg(long)]
        regime: String,
        /// test | female | male
        #[arg(long)]
        set: String,
    },
    /// Recompute the recorded findings from the bundled tables
    VerifyPaper,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

/// Parses a CLI argument, turning the value error into our parse error.
fn arg<T>(flag: &str, value: &str) -> Result<T>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    value.parse().map_err(|err| Error::Parse {
        line: 0,
        message: format!("--{flag}: {err}"),
    })
}

fn read_metric_csv(path: &Path) -> Result<MetricTable> {
    MetricTable::from_csv(File::open(path)?)
}

fn to_json_pretty<T: serde::Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(Error::from_json)
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Ingest { records, fuse } => {
            let set = RecordSet::ingest(File::open(&records)?, fuse)?;
            let mut out = Vec::new();
            set.emit(&mut out)?;
            io::stdout().write_all(&out)?;
            eprintln!(
                "{} records, {} taxonomy",
                set.len(),
                set.taxonomy().name()
            );
            Ok(0)
        }
        Command::Audit {
            records,
            out,
            aggregation,
            eqod_combine,
        } => {
            let options = AuditOptions {
                aggregation: arg::<Aggregation>("aggregation", &aggregation)?,
                eqod_combine: arg::<EqodCombine>("eqod-combine", &eqod_combine)?,
            };
            let report = audit::run_audit(&records, options)?;
            atomic_write(&out, &audit::emit(&report, EmitFormat::Json)?)?;
            eprintln!("report written to {}", out.display());
            if report.gap_errors.is_empty() {
                Ok(0)
            } else {
                for gap_error in &report.gap_errors {
                    eprintln!(
                        "gap stage failed ({}, {}): {}",
                        gap_error.definition.name(),
                        gap_error.regime.name(),
                        gap_error.error
                    );
                }
                Ok(2)
            }
        }
        Command::Gaps {
            metrics,
            definition,
            regime,
            rank,
        } => {
            let table = read_metric_csv(&metrics)?;
            let definition = arg::<FairnessDefinition>("definition", &definition)?;
            let regime = arg::<Regime>("regime", &regime)?;
            let report = fairness::gaps(
                &table,
                definition,
                regime,
                Aggregation::default(),
                EqodCombine::default(),
            )?;
            println!("{}", to_json_pretty(&report)?);
            if rank {
                for (tier, models) in report.ranking.iter().enumerate() {
                    eprintln!("{}. {}", tier + 1, models.join(", "));
                }
            }
            Ok(0)
        }
        Command::Split {
            manifest,
            test_seed,
            val_seed,
            test_per_gender,
            val_subjects,
        } => {
            let manifest = load_manifest(File::open(&manifest)?)?;
            for warning in manifest.shape_warnings() {
                eprintln!("warning: {warning}");
            }
            let config = SplitConfig {
                test_seed,
                val_seed,
                test_per_gender,
                val_subjects,
            };
            let assignment = make_split(&manifest, &config)?;
            println!("{}", to_json_pretty(&assignment)?);
            Ok(0)
        }
        Command::Keyframes {
            clip,
            preset,
            seed,
            out,
        } => {
            let frames = load_clip(&clip)?;
            let config = KeyframeConfig::Preset(arg::<KeyframePreset>("preset", &preset)?);
            let indices = select_keyframes(&frames, &config, seed)?;
            let video_id = clip
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| clip.display().to_string());
            let selection = KeyframeSelection::new(video_id, &config, indices);
            let mut bytes = serde_json::to_vec(&selection).map_err(Error::from_json)?;
            bytes.push(b'\n');
            atomic_write(&out, &bytes)?;
            eprintln!("selection written to {}", out.display());
            Ok(0)
        }
        Command::Augment { clip, seed, out } => {
            let frames = load_clip(&clip)?;
            let plan = plan_augmentation(seed);
            let augmented = apply_augmentation(&plan, &frames);
            save_clip(&out, &augmented)?;
            println!("{}", serde_json::to_string(&plan).map_err(Error::from_json)?);
            Ok(0)
        }
        Command::Stats {
            metrics,
            regime,
            set,
        } => {
            let table = read_metric_csv(&metrics)?;
            let regime = arg::<Regime>("regime", &regime)?;
            let set = arg::<EvalSet>("set", &set)?;
            let stats = audit::aggregate_stats(&table, regime, set)?;
            println!("{}", to_json_pretty(&stats)?);
            Ok(0)
        }
        Command::VerifyPaper => {
            let table = audit::fixture_table()?;
            let report = audit::verify_paper(&table)?;
            for claim in &report.claims.claims {
                let status = if claim.matches_expectation() {
                    "PASS"
                } else {
                    "FAIL"
                };
                println!(
                    "{status} {}: expected {}, computed {}",
                    claim.id, claim.expected, claim.verdict
                );
            }
            println!(
                "cells: {}/{} reconstruct consistently ({:.2}%)",
                report.consistent_cells,
                report.total_cells,
                report.consistency() * 100.0
            );
            for cell in &report.inconsistent {
                println!("  inconsistent: {cell}");
            }
            if report.pass {
                println!("verify-paper: PASS");
                Ok(0)
            } else {
                println!("verify-paper: FAIL");
                Ok(1)
            }
        }
    }
}
