//! On-disk artifact formats shared by the pipeline commands: instance
//! datasets (JSONL), labeled cut scores (JSONL), model checkpoints (JSON),
//! and the manifests that tie them together by content hash.
//!
//! Every artifact is written deterministically — no timestamps, no absolute
//! paths, map keys sorted — so rerunning a command with the same inputs
//! reproduces the same bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use cutlab::bnc::ScoredCutSet;
use cutlab::gnn::{GnnModel, TrainConfig, TrainReport};
use cutlab::instgen::{DropRecord, DropReason, GenConfig};
use cutlab::IlpInstance;

/// Hex-encoded SHA-256 of a byte string, as stored in manifests.
pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Pretty JSON with a trailing newline, for manifest and report files.
pub fn to_pretty_json<T: Serialize>(value: &T) -> Result<String> {
    let mut doc = serde_json::to_string_pretty(value)?;
    doc.push('\n');
    Ok(doc)
}

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// The file-name component of `path`, as recorded in manifests (absolute
/// paths would break byte-level reproducibility across working copies).
pub fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Serializes instances as JSONL: one canonical instance document per line.
pub fn instances_to_jsonl(insts: &[IlpInstance]) -> String {
    let mut out = String::new();
    for inst in insts {
        out.push_str(&inst.to_json());
        out.push('\n');
    }
    out
}

/// Parses an instance JSONL body, reporting the offending line on failure.
pub fn instances_from_jsonl(text: &str) -> Result<Vec<IlpInstance>> {
    parse_jsonl(text, "instance")
}

fn parse_jsonl<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<Vec<T>> {
    let mut items = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(line)
            .with_context(|| format!("parsing {what} record on line {}", i + 1))?;
        items.push(item);
    }
    Ok(items)
}

/// Labeling outcome for one instance. Failures stay in the file — a bad
/// instance must not silently shrink the dataset — and are skipped by
/// training and evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum LabelStatus {
    /// Every tableau cut scored against the shared baseline tree.
    Scored { scores: ScoredCutSet },
    /// The labeler rejected the instance; the run continued without it.
    Failed { error: String },
}

/// One line of a labeled dataset. The instance is embedded so the file is
/// self-contained for training and evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledRecord {
    pub instance: IlpInstance,
    #[serde(flatten)]
    pub status: LabelStatus,
}

impl LabeledRecord {
    /// Scores usable downstream: labeling succeeded and at least one
    /// tableau cut exists to choose among.
    pub fn usable_scores(&self) -> Option<&ScoredCutSet> {
        match &self.status {
            LabelStatus::Scored { scores } if !scores.entries.is_empty() => Some(scores),
            _ => None,
        }
    }
}

pub fn labeled_to_jsonl(records: &[LabeledRecord]) -> Result<String> {
    let mut out = String::new();
    for rec in records {
        out.push_str(&serde_json::to_string(rec)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn labeled_from_jsonl(text: &str) -> Result<Vec<LabeledRecord>> {
    parse_jsonl(text, "labeled")
}

/// First index of the held-out evaluation segment: the last quarter of the
/// record sequence (250 of 1,000 at full scale) is reserved for testing.
/// Training commands use records `[0, split)`, evaluation `[split, total)`.
pub fn test_split_start(total: usize) -> usize {
    total - total / 4
}

/// Manifest written next to a generated instance file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub config: GenConfig,
    /// Node budget used by the training filter's baseline search.
    pub node_limit: usize,
    /// Instances generated before filtering.
    pub raw_count: usize,
    /// Instances written to the dataset file.
    pub kept_count: usize,
    /// Dropped instances per reason, keys sorted.
    pub drop_counts: BTreeMap<String, usize>,
    /// Every dropped instance with its reason, in generation order.
    pub drops: Vec<DropRecord>,
    pub instances_file: String,
    pub instances_sha256: String,
}

/// Manifest written next to a labeled dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelManifest {
    pub input_file: String,
    pub input_sha256: String,
    pub node_limit: usize,
    pub records: usize,
    pub scored: usize,
    pub failed: usize,
    pub output_file: String,
    pub output_sha256: String,
}

/// Provenance block embedded in every checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainManifest {
    pub config: TrainConfig,
    pub dataset_file: String,
    pub dataset_sha256: String,
    /// Records in the labeled file, train and test segments included.
    pub total_records: usize,
    /// Records `[0, train_split)` were eligible for training.
    pub train_split: usize,
    /// Eligible records actually trained on (usable scores present).
    pub trained_records: usize,
    /// Eligible records skipped for failed labels or empty cut lists.
    pub skipped_records: usize,
    pub report: TrainReport,
}

/// A trained selector plus the manifest describing how it was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub model: GnnModel,
    pub manifest: TrainManifest,
}

impl Checkpoint {
    pub fn to_json(&self) -> Result<String> {
        let mut doc = serde_json::to_string(self)?;
        doc.push('\n');
        Ok(doc)
    }

    pub fn from_json(doc: &str) -> Result<Checkpoint> {
        let ckpt: Checkpoint = serde_json::from_str(doc).context("parsing checkpoint")?;
        let expected = GnnModel::param_count(ckpt.model.rounds, ckpt.model.hidden);
        anyhow::ensure!(
            ckpt.model.params.len() == expected,
            "checkpoint carries {} parameters but its architecture needs {expected}",
            ckpt.model.params.len()
        );
        Ok(ckpt)
    }
}

/// Kebab-case name of a drop reason, matching its JSON serialization.
pub fn drop_reason_slug(reason: DropReason) -> String {
    match serde_json::to_value(reason) {
        Ok(serde_json::Value::String(s)) => s,
        _ => unreachable!("drop reasons serialize as strings"),
    }
}
