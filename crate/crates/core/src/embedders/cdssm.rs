//! Convolutional encoder over concept sequences: letter-trigram hashing per
//! token, tanh convolution across 3-token windows, max-pooling, and a dense
//! semantic layer. Trained jointly with the utterance mapper by a scaled
//! cosine softmax against sampled negative classes.

use std::collections::{BTreeMap, HashMap};

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::nn::{apply_step, net_param_shapes, DenseNet, LayerGrads, OptimizerState, TrainConfig};
use crate::util::fnv1a64;

use super::{ClassEmbeddingTable, EmbedError, EmbeddingMethod};

#[derive(Debug, Clone)]
pub struct CdssmParams {
    pub trigram_buckets: usize,
    pub conv_dim: usize,
    pub m: usize,
    pub negatives: usize,
    pub gamma: f64,
    /// SGD rate for the convolutional encoder itself; the mapper follows the
    /// optimizer in the shared `TrainConfig`.
    pub learning_rate: f64,
}

impl Default for CdssmParams {
    fn default() -> Self {
        Self {
            trigram_buckets: 4096,
            conv_dim: 300,
            m: 200,
            negatives: 4,
            gamma: 10.0,
            learning_rate: 0.025,
        }
    }
}

/// Typical non-zero count of a 3-token trigram window, used to scale the
/// convolution init for sparse inputs.
const NOMINAL_WINDOW_NNZ: f64 = 30.0;

#[derive(Debug, Clone)]
pub struct CdssmNet {
    buckets: usize,
    /// Row per input feature (slot * buckets + bucket), conv_dim columns.
    conv_weights: Array2<f64>,
    conv_bias: Array1<f64>,
    sem_weights: Array2<f64>,
    sem_bias: Array1<f64>,
}

/// Sparse parameter gradients for one or more backward passes.
#[derive(Debug, Default)]
pub struct CdssmGrads {
    conv_rows: HashMap<usize, Vec<f64>>,
    d_conv_bias: Vec<f64>,
    d_sem_weights: Option<Array2<f64>>,
    d_sem_bias: Vec<f64>,
}

pub struct CdssmTrace {
    window_features: Vec<Vec<(usize, f64)>>,
    hidden: Vec<Array1<f64>>,
    pooled: Array1<f64>,
    argmax: Vec<usize>,
    output: Array1<f64>,
}

impl CdssmTrace {
    pub fn output(&self) -> &Array1<f64> {
        &self.output
    }

    /// Per-window hidden activations, exposed for diagnostics.
    pub fn hidden_windows(&self) -> Vec<Vec<f64>> {
        self.hidden.iter().map(|h| h.to_vec()).collect()
    }
}

fn letter_trigram_counts(token: &str, buckets: usize) -> Vec<(usize, f64)> {
    let padded: Vec<char> = std::iter::once('#')
        .chain(token.chars())
        .chain(std::iter::once('#'))
        .collect();
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    for window in padded.windows(3) {
        let gram: String = window.iter().collect();
        let bucket = (fnv1a64(gram.as_bytes()) % buckets as u64) as usize;
        *counts.entry(bucket).or_insert(0.0) += 1.0;
    }
    counts.into_iter().collect()
}

impl CdssmNet {
    pub fn new(params: &CdssmParams, seed: u64) -> Result<Self, EmbedError> {
        if params.trigram_buckets == 0 || params.conv_dim == 0 || params.m == 0 {
            return Err(EmbedError::Argument(
                "trigram_buckets, conv_dim, and m must be positive".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let conv_limit = (6.0 / (NOMINAL_WINDOW_NNZ + params.conv_dim as f64)).sqrt();
        let conv_weights = Array2::from_shape_fn((3 * params.trigram_buckets, params.conv_dim), |_| {
            rng.random_range(-conv_limit..conv_limit)
        });
        let sem_limit = (6.0 / (params.conv_dim + params.m) as f64).sqrt();
        let sem_weights = Array2::from_shape_fn((params.m, params.conv_dim), |_| {
            rng.random_range(-sem_limit..sem_limit)
        });
        Ok(Self {
            buckets: params.trigram_buckets,
            conv_weights,
            conv_bias: Array1::zeros(params.conv_dim),
            sem_weights,
            sem_bias: Array1::zeros(params.m),
        })
    }

    pub fn output_dim(&self) -> usize {
        self.sem_bias.len()
    }

    pub fn conv_dim(&self) -> usize {
        self.conv_bias.len()
    }

    /// Embed a concept sequence. Sequences shorter than the window pad with
    /// empty slots, so a single token still yields one window.
    pub fn forward(&self, tokens: &[String]) -> Result<CdssmTrace, EmbedError> {
        if tokens.is_empty() {
            return Err(EmbedError::Argument("empty concept sequence".into()));
        }
        let token_feats: Vec<Vec<(usize, f64)>> = tokens
            .iter()
            .map(|t| letter_trigram_counts(t, self.buckets))
            .collect();
        let conv_dim = self.conv_dim();
        let count = tokens.len();
        let mut window_features = Vec::with_capacity(count);
        let mut hidden = Vec::with_capacity(count);
        for j in 0..count {
            let mut feats: Vec<(usize, f64)> = Vec::new();
            for (slot, offset) in [(0usize, -1isize), (1, 0), (2, 1)] {
                let pos = j as isize + offset;
                if pos < 0 || pos >= count as isize {
                    continue;
                }
                for &(bucket, c) in &token_feats[pos as usize] {
                    feats.push((slot * self.buckets + bucket, c));
                }
            }
            let mut z = self.conv_bias.clone();
            for &(feat, c) in &feats {
                z.scaled_add(c, &self.conv_weights.row(feat));
            }
            hidden.push(z.mapv(f64::tanh));
            window_features.push(feats);
        }
        let mut pooled = Array1::from_elem(conv_dim, f64::NEG_INFINITY);
        let mut argmax = vec![0usize; conv_dim];
        for (j, h) in hidden.iter().enumerate() {
            for d in 0..conv_dim {
                if h[d] > pooled[d] {
                    pooled[d] = h[d];
                    argmax[d] = j;
                }
            }
        }
        let z_sem = self.sem_weights.dot(&pooled) + &self.sem_bias;
        let output = z_sem.mapv(f64::tanh);
        Ok(CdssmTrace {
            window_features,
            hidden,
            pooled,
            argmax,
            output,
        })
    }

    /// Accumulate parameter gradients for one sequence given the loss
    /// gradient at the output.
    pub fn backward(&self, trace: &CdssmTrace, output_grad: &[f64], grads: &mut CdssmGrads) {
        let conv_dim = self.conv_dim();
        if grads.d_conv_bias.is_empty() {
            grads.d_conv_bias = vec![0.0; conv_dim];
            grads.d_sem_bias = vec![0.0; self.output_dim()];
            grads.d_sem_weights = Some(Array2::zeros((self.output_dim(), conv_dim)));
        }
        // semantic layer: y = tanh(Ws·pooled + bs)
        let dz_sem: Array1<f64> = Array1::from_iter(
            output_grad
                .iter()
                .zip(trace.output.iter())
                .map(|(g, y)| g * (1.0 - y * y)),
        );
        let d_sem = grads.d_sem_weights.as_mut().expect("allocated above");
        for (r, &dz) in dz_sem.iter().enumerate() {
            if dz != 0.0 {
                let mut row = d_sem.row_mut(r);
                row.scaled_add(dz, &trace.pooled);
            }
        }
        for (b, &dz) in grads.d_sem_bias.iter_mut().zip(dz_sem.iter()) {
            *b += dz;
        }
        let d_pooled = self.sem_weights.t().dot(&dz_sem);
        // max-pool routes each dimension's gradient to its argmax window
        let mut dz_windows: HashMap<usize, Vec<f64>> = HashMap::new();
        for d in 0..conv_dim {
            let j = trace.argmax[d];
            let h = trace.hidden[j][d];
            let dz = d_pooled[d] * (1.0 - h * h);
            if dz != 0.0 {
                dz_windows.entry(j).or_insert_with(|| vec![0.0; conv_dim])[d] += dz;
            }
        }
        for (j, dz) in dz_windows {
            for (b, &g) in grads.d_conv_bias.iter_mut().zip(dz.iter()) {
                *b += g;
            }
            for &(feat, c) in &trace.window_features[j] {
                let row = grads
                    .conv_rows
                    .entry(feat)
                    .or_insert_with(|| vec![0.0; conv_dim]);
                for (r, &g) in row.iter_mut().zip(dz.iter()) {
                    *r += c * g;
                }
            }
        }
    }

    /// Plain SGD step over the touched parameters.
    pub fn apply_sgd(&mut self, grads: &CdssmGrads, lr: f64) {
        for (&feat, delta) in &grads.conv_rows {
            let mut row = self.conv_weights.row_mut(feat);
            for (w, &d) in row.iter_mut().zip(delta) {
                *w -= lr * d;
            }
        }
        for (b, &d) in self.conv_bias.iter_mut().zip(&grads.d_conv_bias) {
            *b -= lr * d;
        }
        if let Some(dw) = &grads.d_sem_weights {
            self.sem_weights.scaled_add(-lr, dw);
        }
        for (b, &d) in self.sem_bias.iter_mut().zip(&grads.d_sem_bias) {
            *b -= lr * d;
        }
    }

    pub fn param_count(&self) -> usize {
        self.conv_weights.len() + self.conv_bias.len() + self.sem_weights.len() + self.sem_bias.len()
    }

    pub fn get_param(&self, mut index: usize) -> f64 {
        for slice in [
            self.conv_weights.as_slice().expect("contiguous"),
            self.conv_bias.as_slice().expect("contiguous"),
            self.sem_weights.as_slice().expect("contiguous"),
            self.sem_bias.as_slice().expect("contiguous"),
        ] {
            if index < slice.len() {
                return slice[index];
            }
            index -= slice.len();
        }
        panic!("parameter index out of range");
    }

    pub fn set_param(&mut self, mut index: usize, value: f64) {
        for slice in [
            self.conv_weights.as_slice_mut().expect("contiguous"),
            self.conv_bias.as_slice_mut().expect("contiguous"),
            self.sem_weights.as_slice_mut().expect("contiguous"),
            self.sem_bias.as_slice_mut().expect("contiguous"),
        ] {
            if index < slice.len() {
                slice[index] = value;
                return;
            }
            index -= slice.len();
        }
        panic!("parameter index out of range");
    }

    fn flat_grads(&self, grads: &CdssmGrads) -> Vec<f64> {
        let conv_dim = self.conv_dim();
        let mut out = vec![0.0; self.param_count()];
        for (&feat, delta) in &grads.conv_rows {
            out[feat * conv_dim..(feat + 1) * conv_dim].copy_from_slice(delta);
        }
        let mut offset = self.conv_weights.len();
        out[offset..offset + conv_dim].copy_from_slice(&grads.d_conv_bias);
        offset += conv_dim;
        if let Some(dw) = &grads.d_sem_weights {
            for (o, &g) in out[offset..offset + dw.len()]
                .iter_mut()
                .zip(dw.as_slice().expect("contiguous"))
            {
                *o = g;
            }
        }
        offset += self.sem_weights.len();
        out[offset..offset + grads.d_sem_bias.len()].copy_from_slice(&grads.d_sem_bias);
        out
    }
}

fn cosine_parts(a: &Array1<f64>, b: &Array1<f64>) -> (f64, f64, f64) {
    let na = a.dot(a).sqrt().max(1e-12);
    let nb = b.dot(b).sqrt().max(1e-12);
    (a.dot(b) / (na * nb), na, nb)
}

/// −log softmax over γ·cos(M(x), C(seq_k)) with the true class at index 0.
/// Returns the loss, the accumulated CdssmNet gradients over all candidates,
/// and the mapper gradients.
pub fn joint_loss_and_grads(
    net: &CdssmNet,
    mapper: &DenseNet,
    x: &[f64],
    candidates: &[&[String]],
    gamma: f64,
) -> Result<(f64, CdssmGrads, Vec<LayerGrads>), EmbedError> {
    let mapper_trace = mapper.forward_traced(x);
    let a = mapper_trace.output().clone();
    let mut traces = Vec::with_capacity(candidates.len());
    let mut cosines = Vec::with_capacity(candidates.len());
    for seq in candidates {
        let trace = net.forward(seq)?;
        let (cos, _, _) = cosine_parts(&a, trace.output());
        cosines.push(cos);
        traces.push(trace);
    }
    let scores: Vec<f64> = cosines.iter().map(|c| gamma * c).collect();
    let probs = crate::nn::softmax(&scores);
    let loss = -probs[0].max(1e-300).ln();

    let mut cdssm_grads = CdssmGrads::default();
    let mut d_a = Array1::zeros(a.len());
    for (k, trace) in traces.iter().enumerate() {
        let d_score = probs[k] - if k == 0 { 1.0 } else { 0.0 };
        let d_cos = gamma * d_score;
        let b = trace.output();
        let (cos, na, nb) = cosine_parts(&a, b);
        // d cos / d a and d cos / d b
        let d_b: Array1<f64> = Array1::from_iter(
            a.iter()
                .zip(b.iter())
                .map(|(&ai, &bi)| d_cos * (ai / (na * nb) - cos * bi / (nb * nb))),
        );
        for ((da, &ai), &bi) in d_a.iter_mut().zip(a.iter()).zip(b.iter()) {
            *da += d_cos * (bi / (na * nb) - cos * ai / (na * na));
        }
        net.backward(trace, d_b.as_slice().expect("contiguous"), &mut cdssm_grads);
    }
    let mapper_grads = mapper.backward(&mapper_trace, d_a.as_slice().expect("contiguous"));
    Ok((loss, cdssm_grads, mapper_grads))
}

#[derive(Debug)]
pub struct CdssmOutcome {
    pub table: ClassEmbeddingTable,
    pub net: CdssmNet,
    pub mapper: DenseNet,
    pub epoch_losses: Vec<f64>,
}

/// Train the convolutional class encoder jointly with the utterance mapper.
/// `sequences` maps every class to its concept tokens; `utterance_data`
/// holds already-encoded training utterances with their class labels.
pub fn cdssm_embed_train(
    sequences: &BTreeMap<String, Vec<String>>,
    utterance_data: &[(Vec<f64>, String)],
    mapper: DenseNet,
    params: &CdssmParams,
    cfg: &TrainConfig,
) -> Result<CdssmOutcome, EmbedError> {
    if sequences.len() < 2 {
        return Err(EmbedError::Argument(
            "need at least two classes for contrastive training".into(),
        ));
    }
    if utterance_data.is_empty() {
        return Err(EmbedError::Argument("no training utterances".into()));
    }
    for (id, seq) in sequences {
        if seq.is_empty() {
            return Err(EmbedError::Argument(format!(
                "class {id:?} has an empty concept sequence"
            )));
        }
    }
    if mapper.output_dim() != params.m {
        return Err(EmbedError::Argument(format!(
            "mapper output dim {} does not match m = {}",
            mapper.output_dim(),
            params.m
        )));
    }
    let classes: Vec<&String> = sequences.keys().collect();
    let class_pos: HashMap<&str, usize> = classes
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let mut data = Vec::with_capacity(utterance_data.len());
    for (x, label) in utterance_data {
        let pos = *class_pos.get(label.as_str()).ok_or_else(|| {
            EmbedError::Argument(format!("label {label:?} has no concept sequence"))
        })?;
        if x.len() != mapper.input_dim() {
            return Err(EmbedError::Argument(format!(
                "utterance vector length {} does not match mapper input {}",
                x.len(),
                mapper.input_dim()
            )));
        }
        data.push((x, pos));
    }

    let mut mapper = mapper;
    let mut net = CdssmNet::new(params, cfg.seed.wrapping_add(0xcd55))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = OptimizerState::new(cfg.optimizer, &net_param_shapes(&mapper));
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    let negatives = params.negatives.min(classes.len() - 1);

    for epoch in 0..cfg.epochs {
        if cfg.shuffle {
            use rand::seq::SliceRandom;
            order.shuffle(&mut rng);
        }
        let mut epoch_loss = 0.0;
        for &i in &order {
            let (x, true_pos) = (data[i].0, data[i].1);
            let mut candidate_idx = Vec::with_capacity(1 + negatives);
            candidate_idx.push(true_pos);
            while candidate_idx.len() <= negatives {
                let pick = rng.random_range(0..classes.len());
                if pick != true_pos && !candidate_idx.contains(&pick) {
                    candidate_idx.push(pick);
                }
            }
            let candidate_seqs: Vec<&[String]> = candidate_idx
                .iter()
                .map(|&k| sequences[classes[k]].as_slice())
                .collect();
            let (loss, cdssm_grads, mapper_grads) =
                joint_loss_and_grads(&net, &mapper, x, &candidate_seqs, params.gamma)?;
            epoch_loss += loss;
            net.apply_sgd(&cdssm_grads, params.learning_rate);
            apply_step(&mut mapper, &mapper_grads, &mut state, cfg.learning_rate);
        }
        epoch_losses.push(epoch_loss / data.len() as f64);

        let embeddings: Vec<Array1<f64>> = classes
            .iter()
            .map(|id| net.forward(&sequences[*id]).map(|t| t.output().clone()))
            .collect::<Result<_, _>>()?;
        let mut cos_sum = 0.0;
        let mut pairs = 0usize;
        for i in 0..embeddings.len() {
            for j in i + 1..embeddings.len() {
                cos_sum += cosine_parts(&embeddings[i], &embeddings[j]).0;
                pairs += 1;
            }
        }
        let mean_cos = cos_sum / pairs.max(1) as f64;
        if mean_cos > 0.999 {
            return Err(EmbedError::Collapse {
                epoch,
                cosine: mean_cos,
            });
        }
    }

    let raw: Vec<(String, Vec<f64>)> = classes
        .iter()
        .map(|id| {
            net.forward(&sequences[*id])
                .map(|t| ((*id).clone(), t.output().to_vec()))
        })
        .collect::<Result<_, _>>()?;
    let table = ClassEmbeddingTable::from_raw(EmbeddingMethod::Cdssm, params.m, raw)?;
    Ok(CdssmOutcome {
        table,
        net,
        mapper,
        epoch_losses,
    })
}

/// Finite-difference verification of the CdssmNet gradients under the joint
/// loss; returns the max relative error over all CdssmNet parameters.
pub fn cdssm_grad_check(
    net: &CdssmNet,
    mapper: &DenseNet,
    x: &[f64],
    candidates: &[Vec<String>],
    gamma: f64,
    h: f64,
) -> Result<f64, EmbedError> {
    let seqs: Vec<&[String]> = candidates.iter().map(Vec::as_slice).collect();
    let (_, grads, _) = joint_loss_and_grads(net, mapper, x, &seqs, gamma)?;
    let analytic = net.flat_grads(&grads);

    let loss_of = |probe: &CdssmNet| -> Result<f64, EmbedError> {
        let mapper_out = Array1::from_vec(mapper.forward_traced(x).output().to_vec());
        let mut scores = Vec::with_capacity(seqs.len());
        for seq in &seqs {
            let trace = probe.forward(seq)?;
            let (cos, _, _) = cosine_parts(&mapper_out, trace.output());
            scores.push(gamma * cos);
        }
        let probs = crate::nn::softmax(&scores);
        Ok(-probs[0].max(1e-300).ln())
    };

    let mut probe = net.clone();
    let mut max_rel = 0.0f64;
    for i in 0..net.param_count() {
        let original = probe.get_param(i);
        probe.set_param(i, original + h);
        let plus = loss_of(&probe)?;
        probe.set_param(i, original - h);
        let minus = loss_of(&probe)?;
        probe.set_param(i, original);
        let numeric = (plus - minus) / (2.0 * h);
        let rel =
            (analytic[i] - numeric).abs() / analytic[i].abs().max(numeric.abs()).max(1e-8);
        max_rel = max_rel.max(rel);
    }
    Ok(max_rel)
}
