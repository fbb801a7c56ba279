//! Strategy comparison on the held-out segment of a labeled dataset.
//!
//! Every strategy picks one tableau cut per instance; the report averages
//! the recorded post-cut tree sizes. Labels already contain the tree size
//! for each cut, so evaluation never re-runs the exact solver.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use cutlab::bnc::ScoredCutSet;
use cutlab::cutgen::parallelism_score;
use cutlab::gnn::{select_cut, GnnModel};
use cutlab::rng::SplitMix64;

use crate::artifacts::{test_split_start, LabelStatus, LabeledRecord};

/// One trained selector column, with provenance for the report.
#[derive(Debug, Clone)]
pub struct GnnColumn {
    /// Report label, derived from the checkpoint's training target.
    pub name: String,
    pub model: GnnModel,
    pub checkpoint_sha256: String,
}

/// Which labeled file the report was computed from.
#[derive(Debug, Clone)]
pub struct DatasetRef {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub strategy: String,
    /// Hash of the checkpoint behind a learned column; `null` for the
    /// three baselines.
    pub checkpoint_sha256: Option<String>,
    pub average_tree_size: f64,
}

/// The cut one strategy chose on one instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutChoice {
    pub row_index: usize,
    pub tree_size_after: usize,
}

/// Per-instance detail: one choice per strategy, aligned with
/// [`EvalReport::strategies`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub instance_id: String,
    pub baseline_tree_size: usize,
    pub choices: Vec<CutChoice>,
}

/// A test-segment record no strategy could act on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedRecord {
    pub instance_id: String,
    pub reason: String,
}

/// Full evaluation output; serialized as the report artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset_file: String,
    pub dataset_sha256: String,
    pub seed: u64,
    pub total_records: usize,
    /// First index of the evaluated segment (see [`test_split_start`]).
    pub test_start: usize,
    /// Records in the evaluated segment, skipped ones included.
    pub test_records: usize,
    /// Records every average is taken over.
    pub evaluated: usize,
    pub skipped: Vec<SkippedRecord>,
    pub strategies: Vec<StrategySummary>,
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    /// Average tree size of a strategy column, by report label.
    pub fn average(&self, strategy: &str) -> Option<f64> {
        self.strategies.iter().find(|s| s.strategy == strategy).map(|s| s.average_tree_size)
    }

    /// Plain-text comparison table, one row per strategy.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "average tree size over {} test instances ({} skipped)\n",
            self.evaluated,
            self.skipped.len()
        ));
        out.push_str(&format!("{:<22} {:>14}\n", "strategy", "avg tree size"));
        for s in &self.strategies {
            out.push_str(&format!("{:<22} {:>14.2}\n", s.strategy, s.average_tree_size));
        }
        out
    }
}

/// Lowest-tree cut; ties go to the lowest tableau row index (entries are
/// stored in row order, so the first minimum wins).
fn pick_optimal(scores: &ScoredCutSet) -> usize {
    let mut best = 0;
    for (i, e) in scores.entries.iter().enumerate() {
        if e.tree_size_after < scores.entries[best].tree_size_after {
            best = i;
        }
    }
    best
}

/// Highest objective-parallelism cut; ties go to the lowest row index.
fn pick_parallelism(rec: &LabeledRecord, scores: &ScoredCutSet) -> Result<usize> {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, e) in scores.entries.iter().enumerate() {
        let s = parallelism_score(&rec.instance, &e.cut)
            .with_context(|| format!("parallelism score on {}", rec.instance.id))?;
        if s > best_score {
            best_score = s;
            best = i;
        }
    }
    Ok(best)
}

/// Compares the three baselines plus any trained columns on the test
/// segment of `records`. `seed` drives the random baseline and learned
/// tie-breaks through per-instance substreams, so results are independent
/// of evaluation order and of which instances get skipped.
pub fn evaluate(
    dataset: &DatasetRef,
    records: &[LabeledRecord],
    columns: &[GnnColumn],
    seed: u64,
) -> Result<EvalReport> {
    let total = records.len();
    let start = test_split_start(total);
    let test = &records[start..];

    let mut strategies: Vec<(String, Option<String>)> = vec![
        ("optimal".into(), None),
        ("parallelism".into(), None),
        ("random".into(), None),
    ];
    for col in columns {
        strategies.push((col.name.clone(), Some(col.checkpoint_sha256.clone())));
    }

    let mut sums = vec![0usize; strategies.len()];
    let mut rows = Vec::new();
    let mut skipped = Vec::new();

    for (k, rec) in test.iter().enumerate() {
        let Some(scores) = rec.usable_scores() else {
            let reason = match &rec.status {
                LabelStatus::Failed { error } => format!("labeling failed: {error}"),
                LabelStatus::Scored { .. } => "no tableau cuts".to_string(),
            };
            skipped.push(SkippedRecord { instance_id: rec.instance.id.clone(), reason });
            continue;
        };
        let len = scores.entries.len();

        let mut picks = Vec::with_capacity(strategies.len());
        picks.push(pick_optimal(scores));
        picks.push(pick_parallelism(rec, scores)?);
        // Substream 2k feeds the random baseline, 2k+1 the learned
        // tie-breaks; indexing by test position keeps draws independent of
        // skipped neighbors.
        let mut random = SplitMix64::substream(seed, 2 * k as u64);
        picks.push(random.below(len as u64) as usize);
        if !columns.is_empty() {
            let tie_seed = SplitMix64::substream(seed, 2 * k as u64 + 1).next_u64();
            let cuts: Vec<_> = scores.entries.iter().map(|e| e.cut.clone()).collect();
            for col in columns {
                let choice = select_cut(&col.model, &rec.instance, &cuts, tie_seed)
                    .with_context(|| format!("selector on {}", rec.instance.id))?;
                picks.push(choice);
            }
        }

        let choices: Vec<CutChoice> = picks
            .iter()
            .map(|&i| {
                let e = &scores.entries[i];
                CutChoice { row_index: e.row_index, tree_size_after: e.tree_size_after }
            })
            .collect();
        for (sum, choice) in sums.iter_mut().zip(&choices) {
            *sum += choice.tree_size_after;
        }
        rows.push(EvalRow {
            instance_id: rec.instance.id.clone(),
            baseline_tree_size: scores.baseline_tree_size,
            choices,
        });
    }

    let evaluated = rows.len();
    if evaluated == 0 {
        bail!("no usable records in the test segment ({} records, all skipped)", test.len());
    }
    let strategies = strategies
        .into_iter()
        .zip(sums)
        .map(|((strategy, checkpoint_sha256), sum)| StrategySummary {
            strategy,
            checkpoint_sha256,
            average_tree_size: sum as f64 / evaluated as f64,
        })
        .collect();

    Ok(EvalReport {
        dataset_file: dataset.file.clone(),
        dataset_sha256: dataset.sha256.clone(),
        seed,
        total_records: total,
        test_start: start,
        test_records: test.len(),
        evaluated,
        skipped,
        strategies,
        rows,
    })
}
