//! Cross-entropy training against labeled cut scores, and argmax inference.

use serde::{Deserialize, Serialize};

use super::encode::{encode, CutGraph};
use super::model::GnnModel;
use super::GnnError;
use crate::bnc::ScoredCutSet;
use crate::instance::{Cut, IlpInstance};
use crate::rng::SplitMix64;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
/// Tolerance on `sum(targets) == 1` when validating probability vectors.
const PROB_TOL: f64 = 1e-9;

/// Which labeled score the targets are built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetScore {
    GapClosed,
    TreeReduction,
}

/// Hyperparameters for [`train`]. Everything that affects the result is in
/// here or in the dataset, so (config, dataset) determines the checkpoint
/// bit-for-bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Softmax temperature for target construction.
    pub tau: f64,
    pub target: TargetScore,
    pub seed: u64,
    /// Message-passing rounds of the trained model.
    pub rounds: usize,
    /// Hidden width of the trained model.
    pub hidden: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 50,
            learning_rate: 1e-3,
            batch_size: 32,
            tau: 1.0,
            target: TargetScore::GapClosed,
            seed: 0,
            rounds: 2,
            hidden: 64,
        }
    }
}

/// One training example: an instance's encoded cut set and its targets.
#[derive(Debug, Clone)]
pub struct Example {
    pub graphs: Vec<CutGraph>,
    pub targets: Vec<f64>,
}

/// Per-epoch losses and the checkpoint location, for run manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs_run: usize,
    /// Epoch whose parameters were returned; 0 is the fresh initialization.
    pub best_epoch: usize,
    pub best_val_loss: f64,
    /// Mean batch loss per epoch (computed before each update).
    pub train_losses: Vec<f64>,
    /// Validation loss at epoch 0 (initialization) then after each epoch.
    pub val_losses: Vec<f64>,
    pub train_records: usize,
    pub val_records: usize,
}

/// The returned checkpoint plus its training history.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: GnnModel,
    pub report: TrainReport,
}

pub(crate) fn validate_targets(num_scores: usize, targets: &[f64]) -> Result<(), GnnError> {
    if num_scores == 0 {
        return Err(GnnError::EmptyCuts);
    }
    if num_scores != targets.len() {
        return Err(GnnError::LengthMismatch { scores: num_scores, targets: targets.len() });
    }
    let mut sum = 0.0;
    for (i, t) in targets.iter().enumerate() {
        if !t.is_finite() || *t < 0.0 {
            return Err(GnnError::BadTargets { detail: format!("entry {i} is {t}") });
        }
        sum += t;
    }
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(GnnError::BadTargets { detail: format!("entries sum to {sum}") });
    }
    Ok(())
}

fn log_sum_exp(vals: &[f64]) -> f64 {
    let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = vals.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

fn softmax(vals: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(vals);
    vals.iter().map(|v| (v - lse).exp()).collect()
}

/// Loss and d(loss)/d(scores) without the probability-vector check; exposed
/// within the module so gradient tooling can exercise scaled targets.
/// For targets summing to S: loss = -(1/k) Σ y_i log softmax(x)_i and
/// d loss/d x_j = (p_j S - y_j)/k.
pub(crate) fn raw_loss_and_score_grad(scores: &[f64], targets: &[f64]) -> (f64, Vec<f64>) {
    let k = scores.len() as f64;
    let lse = log_sum_exp(scores);
    let mut loss = 0.0;
    for (x, y) in scores.iter().zip(targets) {
        loss -= y * (x - lse) / k;
    }
    let target_sum: f64 = targets.iter().sum();
    let grad = scores
        .iter()
        .zip(targets)
        .map(|(x, y)| ((x - lse).exp() * target_sum - y) / k)
        .collect();
    (loss, grad)
}

/// Normalized cross entropy between softmax(scores) and a target
/// probability vector: -(1/k) Σ y_i log softmax(x)_i. Nonnegative.
pub fn loss(scores: &[f64], targets: &[f64]) -> Result<f64, GnnError> {
    validate_targets(scores.len(), targets)?;
    Ok(raw_loss_and_score_grad(scores, targets).0)
}

/// Converts one instance's labeled cut scores into a target distribution:
/// softmax(benefit / tau), where benefit is the gap-closed value or the
/// relative tree-size reduction depending on the configured target score.
pub fn make_targets(scored: &ScoredCutSet, cfg: &TrainConfig) -> Result<Vec<f64>, GnnError> {
    if !(cfg.tau.is_finite() && cfg.tau > 0.0) {
        return Err(GnnError::BadTemperature { tau: cfg.tau });
    }
    if scored.entries.is_empty() {
        return Err(GnnError::EmptyCuts);
    }
    let benefits: Vec<f64> = scored
        .entries
        .iter()
        .map(|e| match cfg.target {
            TargetScore::GapClosed => e.gap_closed_f64,
            TargetScore::TreeReduction => e.relative_reduction_f64,
        })
        .map(|b| b / cfg.tau)
        .collect();
    Ok(softmax(&benefits))
}

fn example_loss(model: &GnnModel, ex: &Example) -> f64 {
    let scores: Vec<f64> = ex.graphs.iter().map(|g| model.forward(g)).collect();
    raw_loss_and_score_grad(&scores, &ex.targets).0
}

fn mean_loss(model: &GnnModel, examples: &[Example], idx: &[usize]) -> f64 {
    let total: f64 = idx.iter().map(|&i| example_loss(model, &examples[i])).sum();
    total / idx.len() as f64
}

/// Trains a fresh model on labeled cut sets.
///
/// The dataset is canonicalized by sorting on instance id (ids must be
/// unique), so the result is independent of input order. A seeded shuffle
/// then holds out max(1, N/10) records for validation — except for a
/// single-record dataset, which validates on its own training record. Runs
/// minibatch Adam for the configured epochs, single-threaded, and returns
/// the parameters with the best validation loss (earliest epoch on ties;
/// epoch 0 is the untouched initialization).
pub fn train(
    data: &[(IlpInstance, ScoredCutSet)],
    cfg: &TrainConfig,
) -> Result<TrainOutcome, GnnError> {
    if data.is_empty() {
        return Err(GnnError::EmptyDataset);
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&a, &b| data[a].1.instance_id.cmp(&data[b].1.instance_id));

    let mut examples = Vec::with_capacity(data.len());
    for &i in &order {
        let (inst, scored) = &data[i];
        if scored.entries.is_empty() {
            return Err(GnnError::UnscoredRecord { id: scored.instance_id.clone() });
        }
        let targets = make_targets(scored, cfg)?;
        let graphs = scored.entries.iter().map(|e| encode(inst, &e.cut)).collect();
        examples.push(Example { graphs, targets });
    }

    let mut indices: Vec<usize> = (0..examples.len()).collect();
    SplitMix64::substream(cfg.seed, 0).shuffle(&mut indices);
    let n_val = (examples.len() / 10).max(1);
    let (val_idx, train_idx): (Vec<usize>, Vec<usize>) = if n_val >= examples.len() {
        (indices.clone(), indices)
    } else {
        let (v, t) = indices.split_at(n_val);
        (v.to_vec(), t.to_vec())
    };

    let mut model =
        GnnModel::xavier(cfg.rounds, cfg.hidden, &mut SplitMix64::substream(cfg.seed, 1));
    let num_params = model.params.len();
    let mut adam_m = vec![0.0; num_params];
    let mut adam_v = vec![0.0; num_params];
    let mut step: i32 = 0;
    let batch_size = cfg.batch_size.max(1);

    let initial_val = mean_loss(&model, &examples, &val_idx);
    if !initial_val.is_finite() {
        return Err(GnnError::Diverged { epoch: 0 });
    }
    let mut best = (initial_val, model.params.clone(), 0usize);
    let mut train_losses = Vec::with_capacity(cfg.epochs);
    let mut val_losses = vec![initial_val];

    let mut epoch_order = train_idx.clone();
    for epoch in 1..=cfg.epochs {
        SplitMix64::substream(cfg.seed, 1 + epoch as u64).shuffle(&mut epoch_order);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in epoch_order.chunks(batch_size) {
            let batch: Vec<Example> = chunk.iter().map(|&i| examples[i].clone()).collect();
            let (batch_loss, grad) = model.backward(&batch)?;
            if !batch_loss.is_finite() {
                return Err(GnnError::Diverged { epoch });
            }
            epoch_loss += batch_loss;
            batches += 1;
            step += 1;
            let m_corr = 1.0 - BETA1.powi(step);
            let v_corr = 1.0 - BETA2.powi(step);
            for i in 0..num_params {
                adam_m[i] = BETA1 * adam_m[i] + (1.0 - BETA1) * grad[i];
                adam_v[i] = BETA2 * adam_v[i] + (1.0 - BETA2) * grad[i] * grad[i];
                let m_hat = adam_m[i] / m_corr;
                let v_hat = adam_v[i] / v_corr;
                model.params[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + ADAM_EPS);
            }
        }
        train_losses.push(epoch_loss / batches.max(1) as f64);

        let val = mean_loss(&model, &examples, &val_idx);
        if !val.is_finite() {
            return Err(GnnError::Diverged { epoch });
        }
        val_losses.push(val);
        if val < best.0 {
            best = (val, model.params.clone(), epoch);
        }
    }

    let report = TrainReport {
        epochs_run: cfg.epochs,
        best_epoch: best.2,
        best_val_loss: best.0,
        train_losses,
        val_losses,
        train_records: train_idx.len(),
        val_records: val_idx.len(),
    };
    model.params = best.1;
    Ok(TrainOutcome { model, report })
}

/// Scores every candidate cut and returns the argmax index; exact float
/// ties are broken uniformly at random from the seed.
pub fn select_cut(
    model: &GnnModel,
    inst: &IlpInstance,
    cuts: &[Cut],
    seed: u64,
) -> Result<usize, GnnError> {
    if cuts.is_empty() {
        return Err(GnnError::EmptyCuts);
    }
    let scores: Vec<f64> = cuts.iter().map(|cut| model.forward(&encode(inst, cut))).collect();
    let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> =
        (0..scores.len()).filter(|&i| scores[i] == best).collect();
    match tied.len() {
        0 => Ok(0), // unreachable for finite scores; defensive for NaN floods
        1 => Ok(tied[0]),
        k => Ok(tied[SplitMix64::new(seed).below(k as u64) as usize]),
    }
}
