//! Message-passing scorer with hand-written reverse-mode gradients.
//!
//! Parameters live in one flat `Vec<f64>` laid out as: input embedding
//! (h x 3 weights, h bias), then per round r the constraint-update map
//! `vc` (h x h, h) followed by the variable-update map `cv` (h x h, h),
//! then the readout (h weights, 1 bias). Matrices are row-major out x in.
//!
//! One round updates constraint embeddings from variable embeddings first,
//! then variable embeddings from the fresh constraint embeddings; both
//! aggregate edge-weight-scaled sums over neighbors and pass through a
//! rectifier (with derivative 0 at 0). The readout is the mean of the final
//! variable embeddings through a linear map.

use serde::{Deserialize, Serialize};

use super::encode::CutGraph;
use super::train::{raw_loss_and_score_grad, validate_targets, Example};
use super::GnnError;
use crate::rng::SplitMix64;

/// Step used for central finite differences in [`GnnModel::grad_check`].
const FD_STEP: f64 = 1e-5;
/// Gradient pairs whose magnitudes both fall below this are counted as
/// matching zeros rather than fed to the relative-error quotient.
const FD_ZERO: f64 = 1e-8;
/// Floor on the relative-error denominator: below this magnitude the
/// difference quotient is dominated by f64 cancellation noise (~1e-10), so
/// errors are measured against the floor instead of the vanishing gradient.
const FD_DENOM_FLOOR: f64 = 1e-5;

#[derive(Debug, Clone, Copy)]
struct Layout {
    rounds: usize,
    h: usize,
}

impl Layout {
    fn round_stride(self) -> usize {
        2 * self.h * self.h + 2 * self.h
    }

    fn param_count(self) -> usize {
        4 * self.h + self.rounds * self.round_stride() + self.h + 1
    }

    fn embed_w(self) -> usize {
        0
    }

    fn embed_b(self) -> usize {
        3 * self.h
    }

    fn round_base(self, r: usize) -> usize {
        4 * self.h + r * self.round_stride()
    }

    fn vc_w(self, r: usize) -> usize {
        self.round_base(r)
    }

    fn vc_b(self, r: usize) -> usize {
        self.vc_w(r) + self.h * self.h
    }

    fn cv_w(self, r: usize) -> usize {
        self.vc_b(r) + self.h
    }

    fn cv_b(self, r: usize) -> usize {
        self.cv_w(r) + self.h * self.h
    }

    fn readout_w(self) -> usize {
        self.round_base(self.rounds)
    }

    fn readout_b(self) -> usize {
        self.readout_w() + self.h
    }
}

/// The scorer: architecture dimensions plus the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnnModel {
    pub rounds: usize,
    pub hidden: usize,
    pub params: Vec<f64>,
}

/// Worst parameter found by a finite-difference gradient check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradSummary {
    pub max_rel_error: f64,
    pub worst_param: usize,
    pub analytic: f64,
    pub numeric: f64,
}

/// `out[o] = sum_i w[o*in + i] * x[i]`, with `in = x.len()`.
fn matvec(w: &[f64], x: &[f64], out: &mut [f64]) {
    let n_in = x.len();
    for (o, slot) in out.iter_mut().enumerate() {
        let row = &w[o * n_in..(o + 1) * n_in];
        let mut acc = 0.0;
        for (wi, xi) in row.iter().zip(x) {
            acc += wi * xi;
        }
        *slot = acc;
    }
}

/// `out[i] += sum_o w[o*in + i] * y[o]` — transpose product, accumulated.
fn matvec_t_add(w: &[f64], n_in: usize, y: &[f64], out: &mut [f64]) {
    for (o, yo) in y.iter().enumerate() {
        if *yo == 0.0 {
            continue;
        }
        let row = &w[o * n_in..(o + 1) * n_in];
        for (slot, wi) in out.iter_mut().zip(row) {
            *slot += wi * yo;
        }
    }
}

fn relu(z: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        0.0
    }
}

/// Everything the backward pass needs, recorded by one forward evaluation.
struct Trace {
    /// Initial variable embeddings (linear image of the features), n*h.
    var_embed: Vec<f64>,
    /// Per round: aggregated inputs and pre-activations for both sides.
    cons_agg: Vec<Vec<f64>>,
    cons_pre: Vec<Vec<f64>>,
    var_agg: Vec<Vec<f64>>,
    var_pre: Vec<Vec<f64>>,
    var_act: Vec<Vec<f64>>,
    output: f64,
}

impl GnnModel {
    fn layout(&self) -> Layout {
        Layout { rounds: self.rounds, h: self.hidden }
    }

    /// Number of parameters fixed by the architecture dimensions.
    pub fn param_count(rounds: usize, hidden: usize) -> usize {
        Layout { rounds, h: hidden }.param_count()
    }

    /// All-zero parameters; scores every graph as 0.
    pub fn zeros(rounds: usize, hidden: usize) -> GnnModel {
        GnnModel { rounds, hidden, params: vec![0.0; Self::param_count(rounds, hidden)] }
    }

    /// Variance-preserving uniform initialization: each layer (weights and
    /// bias alike) is drawn from ±sqrt(6/(fan_in+fan_out)), in parameter
    /// layout order, consuming the supplied stream.
    pub fn xavier(rounds: usize, hidden: usize, rng: &mut SplitMix64) -> GnnModel {
        let mut model = Self::zeros(rounds, hidden);
        let lay = model.layout();
        let mut fill = |params: &mut Vec<f64>, start: usize, len: usize, fan: (usize, usize)| {
            let bound = (6.0 / (fan.0 + fan.1) as f64).sqrt();
            for p in &mut params[start..start + len] {
                *p = rng.f64_symmetric(bound);
            }
        };
        let h = hidden;
        fill(&mut model.params, lay.embed_w(), 3 * h, (3, h));
        fill(&mut model.params, lay.embed_b(), h, (3, h));
        for r in 0..rounds {
            fill(&mut model.params, lay.vc_w(r), h * h, (h, h));
            fill(&mut model.params, lay.vc_b(r), h, (h, h));
            fill(&mut model.params, lay.cv_w(r), h * h, (h, h));
            fill(&mut model.params, lay.cv_b(r), h, (h, h));
        }
        fill(&mut model.params, lay.readout_w(), h, (h, 1));
        fill(&mut model.params, lay.readout_b(), 1, (h, 1));
        model
    }

    /// Scores one encoded (instance, cut) pair.
    pub fn forward(&self, g: &CutGraph) -> f64 {
        self.forward_trace(g).output
    }

    fn forward_trace(&self, g: &CutGraph) -> Trace {
        let lay = self.layout();
        let h = lay.h;
        let n = g.num_vars();
        let m = g.num_cons();
        let p = &self.params;

        let mut var_embed = vec![0.0; n * h];
        for (j, feats) in g.var_features.iter().enumerate() {
            let out = &mut var_embed[j * h..(j + 1) * h];
            matvec(&p[lay.embed_w()..lay.embed_b()], feats, out);
            for (slot, b) in out.iter_mut().zip(&p[lay.embed_b()..lay.embed_b() + h]) {
                *slot += b;
            }
        }

        let mut cons_agg = Vec::with_capacity(lay.rounds);
        let mut cons_pre = Vec::with_capacity(lay.rounds);
        let mut var_agg = Vec::with_capacity(lay.rounds);
        let mut var_pre = Vec::with_capacity(lay.rounds);
        let mut var_act = Vec::with_capacity(lay.rounds);

        let mut hv = var_embed.clone();
        for r in 0..lay.rounds {
            let mut ac = vec![0.0; m * h];
            for e in &g.edges {
                let src = &hv[e.var * h..(e.var + 1) * h];
                let dst = &mut ac[e.cons * h..(e.cons + 1) * h];
                for (slot, s) in dst.iter_mut().zip(src) {
                    *slot += e.weight * s;
                }
            }
            let mut zc = vec![0.0; m * h];
            let mut hc = vec![0.0; m * h];
            for i in 0..m {
                let pre = &mut zc[i * h..(i + 1) * h];
                matvec(&p[lay.vc_w(r)..lay.vc_b(r)], &ac[i * h..(i + 1) * h], pre);
                for (slot, b) in pre.iter_mut().zip(&p[lay.vc_b(r)..lay.vc_b(r) + h]) {
                    *slot += b;
                }
                for (a, z) in hc[i * h..(i + 1) * h].iter_mut().zip(pre.iter()) {
                    *a = relu(*z);
                }
            }

            let mut av = vec![0.0; n * h];
            for e in &g.edges {
                let src = &hc[e.cons * h..(e.cons + 1) * h];
                let dst = &mut av[e.var * h..(e.var + 1) * h];
                for (slot, s) in dst.iter_mut().zip(src) {
                    *slot += e.weight * s;
                }
            }
            let mut zv = vec![0.0; n * h];
            let mut hv_next = vec![0.0; n * h];
            for j in 0..n {
                let pre = &mut zv[j * h..(j + 1) * h];
                matvec(&p[lay.cv_w(r)..lay.cv_b(r)], &av[j * h..(j + 1) * h], pre);
                for (slot, b) in pre.iter_mut().zip(&p[lay.cv_b(r)..lay.cv_b(r) + h]) {
                    *slot += b;
                }
                for (a, z) in hv_next[j * h..(j + 1) * h].iter_mut().zip(pre.iter()) {
                    *a = relu(*z);
                }
            }

            cons_agg.push(ac);
            cons_pre.push(zc);
            var_agg.push(av);
            var_pre.push(zv);
            var_act.push(hv_next.clone());
            hv = hv_next;
        }

        let rw = &p[lay.readout_w()..lay.readout_b()];
        let mut total = 0.0;
        for j in 0..n {
            let emb = &hv[j * h..(j + 1) * h];
            for (w, e) in rw.iter().zip(emb) {
                total += w * e;
            }
        }
        let output = total / n as f64 + p[lay.readout_b()];

        Trace { var_embed, cons_agg, cons_pre, var_agg, var_pre, var_act, output }
    }

    /// Accumulates d(loss)/d(params) for one graph whose score received the
    /// upstream derivative `dout`.
    fn backprop_graph(&self, g: &CutGraph, trace: &Trace, dout: f64, grad: &mut [f64]) {
        let lay = self.layout();
        let h = lay.h;
        let n = g.num_vars();
        let m = g.num_cons();
        let p = &self.params;

        let final_act =
            if lay.rounds == 0 { &trace.var_embed } else { &trace.var_act[lay.rounds - 1] };
        grad[lay.readout_b()] += dout;
        let per_var = dout / n as f64;
        let rw = &p[lay.readout_w()..lay.readout_b()];
        let mut d_hv = vec![0.0; n * h];
        for j in 0..n {
            let emb = &final_act[j * h..(j + 1) * h];
            for k in 0..h {
                grad[lay.readout_w() + k] += per_var * emb[k];
                d_hv[j * h + k] = per_var * rw[k];
            }
        }

        for r in (0..lay.rounds).rev() {
            // Variable update: h_v = relu(cv_w * a_v + cv_b).
            let zv = &trace.var_pre[r];
            let av = &trace.var_agg[r];
            let cv_w = &p[lay.cv_w(r)..lay.cv_b(r)];
            let mut d_av = vec![0.0; n * h];
            for j in 0..n {
                let mut d_zv = vec![0.0; h];
                for k in 0..h {
                    if zv[j * h + k] > 0.0 {
                        d_zv[k] = d_hv[j * h + k];
                    }
                }
                let a = &av[j * h..(j + 1) * h];
                for o in 0..h {
                    if d_zv[o] == 0.0 {
                        continue;
                    }
                    grad[lay.cv_b(r) + o] += d_zv[o];
                    let row = lay.cv_w(r) + o * h;
                    for k in 0..h {
                        grad[row + k] += d_zv[o] * a[k];
                    }
                }
                matvec_t_add(cv_w, h, &d_zv, &mut d_av[j * h..(j + 1) * h]);
            }
            let mut d_hc = vec![0.0; m * h];
            for e in &g.edges {
                let src = &d_av[e.var * h..(e.var + 1) * h];
                let dst = &mut d_hc[e.cons * h..(e.cons + 1) * h];
                for (slot, s) in dst.iter_mut().zip(src) {
                    *slot += e.weight * s;
                }
            }

            // Constraint update: h_c = relu(vc_w * a_c + vc_b).
            let zc = &trace.cons_pre[r];
            let ac = &trace.cons_agg[r];
            let vc_w = &p[lay.vc_w(r)..lay.vc_b(r)];
            let mut d_ac = vec![0.0; m * h];
            for i in 0..m {
                let mut d_zc = vec![0.0; h];
                for k in 0..h {
                    if zc[i * h + k] > 0.0 {
                        d_zc[k] = d_hc[i * h + k];
                    }
                }
                let a = &ac[i * h..(i + 1) * h];
                for o in 0..h {
                    if d_zc[o] == 0.0 {
                        continue;
                    }
                    grad[lay.vc_b(r) + o] += d_zc[o];
                    let row = lay.vc_w(r) + o * h;
                    for k in 0..h {
                        grad[row + k] += d_zc[o] * a[k];
                    }
                }
                matvec_t_add(vc_w, h, &d_zc, &mut d_ac[i * h..(i + 1) * h]);
            }
            let mut d_hv_prev = vec![0.0; n * h];
            for e in &g.edges {
                let src = &d_ac[e.cons * h..(e.cons + 1) * h];
                let dst = &mut d_hv_prev[e.var * h..(e.var + 1) * h];
                for (slot, s) in dst.iter_mut().zip(src) {
                    *slot += e.weight * s;
                }
            }
            d_hv = d_hv_prev;
        }

        // Linear embedding: h_v0 = embed_w * f + embed_b.
        for (j, feats) in g.var_features.iter().enumerate() {
            for o in 0..h {
                let d = d_hv[j * h + o];
                if d == 0.0 {
                    continue;
                }
                grad[lay.embed_b() + o] += d;
                for (t, f) in feats.iter().enumerate() {
                    grad[lay.embed_w() + o * 3 + t] += d * f;
                }
            }
        }
    }

    /// Mean loss and its gradient over a batch of examples. Each example is
    /// one instance's cut set: scores are softmaxed and cross-entropied
    /// against the example's targets, and example losses are averaged.
    pub fn backward(&self, batch: &[Example]) -> Result<(f64, Vec<f64>), GnnError> {
        if batch.is_empty() {
            return Err(GnnError::EmptyDataset);
        }
        let mut grad = vec![0.0; self.params.len()];
        let mut total_loss = 0.0;
        let scale = 1.0 / batch.len() as f64;
        for ex in batch {
            validate_targets(ex.graphs.len(), &ex.targets)?;
            let traces: Vec<Trace> = ex.graphs.iter().map(|g| self.forward_trace(g)).collect();
            let scores: Vec<f64> = traces.iter().map(|t| t.output).collect();
            let (loss, d_scores) = raw_loss_and_score_grad(&scores, &ex.targets);
            total_loss += scale * loss;
            for ((g, trace), d) in ex.graphs.iter().zip(&traces).zip(d_scores) {
                self.backprop_graph(g, trace, scale * d, &mut grad);
            }
        }
        Ok((total_loss, grad))
    }

    /// Compares the analytic gradient against central finite differences
    /// (step 1e-5) on one example, returning the worst relative error.
    pub fn grad_check(&self, graphs: &[CutGraph], targets: &[f64]) -> Result<GradSummary, GnnError> {
        let example = Example { graphs: graphs.to_vec(), targets: targets.to_vec() };
        let (_, analytic) = self.backward(std::slice::from_ref(&example))?;
        let mut probe = self.clone();
        let mut summary =
            GradSummary { max_rel_error: 0.0, worst_param: 0, analytic: 0.0, numeric: 0.0 };
        for idx in 0..self.params.len() {
            let saved = self.params[idx];
            probe.params[idx] = saved + FD_STEP;
            let up = probe.example_loss(&example);
            probe.params[idx] = saved - FD_STEP;
            let down = probe.example_loss(&example);
            probe.params[idx] = saved;
            let numeric = (up - down) / (2.0 * FD_STEP);
            let a = analytic[idx];
            if a.abs().max(numeric.abs()) < FD_ZERO {
                continue;
            }
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(FD_DENOM_FLOOR);
            if rel > summary.max_rel_error {
                summary = GradSummary { max_rel_error: rel, worst_param: idx, analytic: a, numeric };
            }
        }
        Ok(summary)
    }

    fn example_loss(&self, ex: &Example) -> f64 {
        let scores: Vec<f64> = ex.graphs.iter().map(|g| self.forward(g)).collect();
        raw_loss_and_score_grad(&scores, &ex.targets).0
    }

    /// Compact JSON: dimensions plus the flat parameter vector. Round-trips
    /// bit-exactly (decimal shortest-representation floats).
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serialization cannot fail")
    }

    pub fn from_json(doc: &str) -> Result<GnnModel, GnnError> {
        let model: GnnModel = serde_json::from_str(doc)
            .map_err(|e| GnnError::MalformedCheckpoint { detail: e.to_string() })?;
        let expected = Self::param_count(model.rounds, model.hidden);
        if model.params.len() != expected {
            return Err(GnnError::BadCheckpoint { expected, got: model.params.len() });
        }
        Ok(model)
    }
}
