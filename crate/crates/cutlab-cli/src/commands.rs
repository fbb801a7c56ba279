//! The pipeline commands behind the `cutlab` binary. Each command reads
//! its input artifacts, delegates the actual work to the library, and
//! writes output artifacts plus a manifest with content hashes. All
//! outputs are byte-deterministic in (inputs, flags).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;

use cutlab::bnc::{label_instance, BncConfig};
use cutlab::gnn::{self, TargetScore, TrainConfig};
use cutlab::instgen::{self, filter_for_training, GenConfig};
use cutlab::IlpInstance;

use crate::artifacts::{
    drop_reason_slug, file_name, instances_from_jsonl, instances_to_jsonl, labeled_from_jsonl,
    labeled_to_jsonl, read_file, sha256_hex, test_split_start, to_pretty_json, write_file,
    Checkpoint, DatasetManifest, LabelManifest, LabelStatus, LabeledRecord, TrainManifest,
};
use crate::eval::{evaluate, DatasetRef, EvalReport, GnnColumn};

/// Files written by [`cmd_generate`].
#[derive(Debug)]
pub struct GenerateOutcome {
    pub manifest: DatasetManifest,
    pub instances_path: PathBuf,
    pub manifest_path: PathBuf,
}

/// Generates instances from `cfg`, drops the ones no labeler could score
/// (integral root vertex, zero gap, infeasible, over budget), and writes
/// `instances.jsonl` plus `manifest.json` into `out_dir`.
pub fn cmd_generate(cfg: &GenConfig, node_limit: usize, out_dir: &Path) -> Result<GenerateOutcome> {
    let raw = instgen::generate(cfg).context("generating instances")?;
    let raw_count = raw.len();
    let (kept, drops) = filter_for_training(raw, &BncConfig { node_limit });

    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let body = instances_to_jsonl(&kept);
    let instances_path = out_dir.join("instances.jsonl");
    write_file(&instances_path, &body)?;

    let mut drop_counts: BTreeMap<String, usize> = BTreeMap::new();
    for d in &drops {
        *drop_counts.entry(drop_reason_slug(d.reason)).or_insert(0) += 1;
    }
    let manifest = DatasetManifest {
        config: cfg.clone(),
        node_limit,
        raw_count,
        kept_count: kept.len(),
        drop_counts,
        drops,
        instances_file: file_name(&instances_path),
        instances_sha256: sha256_hex(body.as_bytes()),
    };
    let manifest_path = out_dir.join("manifest.json");
    write_file(&manifest_path, &to_pretty_json(&manifest)?)?;
    Ok(GenerateOutcome { manifest, instances_path, manifest_path })
}

/// Files written by [`cmd_label`].
#[derive(Debug)]
pub struct LabelOutcome {
    pub manifest: LabelManifest,
    pub output_path: PathBuf,
    pub manifest_path: PathBuf,
}

/// Scores every tableau cut of every instance in `dataset`. Labeling runs
/// in parallel across instances, but records are collected by input index,
/// so the output bytes are identical for every worker count. An instance
/// the labeler rejects becomes a `failed` record and the run continues.
pub fn cmd_label(dataset: &Path, out: &Path, node_limit: usize, workers: usize) -> Result<LabelOutcome> {
    let input = read_file(dataset)?;
    let input_sha256 = sha256_hex(input.as_bytes());
    let insts = instances_from_jsonl(&input)?;
    let bnc = BncConfig { node_limit };

    let label_one = |inst: &IlpInstance| -> LabeledRecord {
        let status = match label_instance(inst, &bnc) {
            Ok(scores) => LabelStatus::Scored { scores },
            Err(err) => LabelStatus::Failed { error: err.to_string() },
        };
        LabeledRecord { instance: inst.clone(), status }
    };
    let records: Vec<LabeledRecord> = if workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .context("building worker pool")?;
        pool.install(|| insts.par_iter().map(label_one).collect())
    } else {
        insts.iter().map(label_one).collect()
    };

    let body = labeled_to_jsonl(&records)?;
    write_file(out, &body)?;
    let scored = records.iter().filter(|r| matches!(r.status, LabelStatus::Scored { .. })).count();
    let manifest = LabelManifest {
        input_file: file_name(dataset),
        input_sha256,
        node_limit,
        records: records.len(),
        scored,
        failed: records.len() - scored,
        output_file: file_name(out),
        output_sha256: sha256_hex(body.as_bytes()),
    };
    let manifest_path = out.with_extension("manifest.json");
    write_file(&manifest_path, &to_pretty_json(&manifest)?)?;
    Ok(LabelOutcome { manifest, output_path: out.to_path_buf(), manifest_path })
}

/// Trains the learned selector on the first three quarters of a labeled
/// dataset (the last quarter is the evaluation split; see
/// [`test_split_start`]) and writes the checkpoint to `out`. Records whose
/// labels failed or carry no cuts are skipped and counted in the manifest.
pub fn cmd_train(labeled: &Path, cfg: &TrainConfig, out: &Path) -> Result<Checkpoint> {
    let text = read_file(labeled)?;
    let dataset_sha256 = sha256_hex(text.as_bytes());
    let records = labeled_from_jsonl(&text)?;
    let total = records.len();
    let split = test_split_start(total);

    let mut data = Vec::new();
    let mut skipped = 0usize;
    for rec in &records[..split] {
        match rec.usable_scores() {
            Some(scores) => data.push((rec.instance.clone(), scores.clone())),
            None => skipped += 1,
        }
    }
    let outcome = gnn::train(&data, cfg).context("training failed")?;

    let manifest = TrainManifest {
        config: cfg.clone(),
        dataset_file: file_name(labeled),
        dataset_sha256,
        total_records: total,
        train_split: split,
        trained_records: data.len(),
        skipped_records: skipped,
        report: outcome.report,
    };
    let ckpt = Checkpoint { model: outcome.model, manifest };
    write_file(out, &ckpt.to_json()?)?;
    Ok(ckpt)
}

/// Report label for a learned column, from the checkpoint's target score.
pub fn column_name(target: TargetScore) -> &'static str {
    match target {
        TargetScore::GapClosed => "gnn-gap-closed",
        TargetScore::TreeReduction => "gnn-tree-reduction",
    }
}

/// Compares the three baseline strategies (and one learned column per
/// checkpoint) on the last quarter of a labeled dataset, optionally
/// writing the full report as JSON.
pub fn cmd_evaluate(
    labeled: &Path,
    checkpoints: &[PathBuf],
    seed: u64,
    out: Option<&Path>,
) -> Result<EvalReport> {
    let text = read_file(labeled)?;
    let dataset = DatasetRef { file: file_name(labeled), sha256: sha256_hex(text.as_bytes()) };
    let records = labeled_from_jsonl(&text)?;

    let mut columns = Vec::new();
    for path in checkpoints {
        let doc = read_file(path)?;
        let ckpt = Checkpoint::from_json(&doc)
            .with_context(|| format!("loading checkpoint {}", path.display()))?;
        columns.push(GnnColumn {
            name: column_name(ckpt.manifest.config.target).to_string(),
            model: ckpt.model,
            checkpoint_sha256: sha256_hex(doc.as_bytes()),
        });
    }

    let report = evaluate(&dataset, &records, &columns, seed)?;
    if let Some(path) = out {
        write_file(path, &to_pretty_json(&report)?)?;
    }
    Ok(report)
}
