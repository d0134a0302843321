//! Skip-gram with negative sampling trained on random-walk node sequences,
//! word2vec style: in/out vector pairs, unigram^0.75 noise distribution,
//! linearly decaying learning rate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{walk_corpus, ProtoTaxonomyGraph};

use super::{ClassEmbeddingTable, EmbedError, EmbeddingMethod};

#[derive(Debug, Clone)]
pub struct DeepWalkParams {
    pub m: usize,
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub min_learning_rate: f64,
    pub seed: u64,
}

impl Default for DeepWalkParams {
    fn default() -> Self {
        Self {
            m: 200,
            walk_length: 20,
            walks_per_node: 10,
            window: 5,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            min_learning_rate: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug)]
pub struct DeepWalkOutcome {
    pub table: ClassEmbeddingTable,
    /// Mean negative-sampling objective per epoch.
    pub epoch_losses: Vec<f64>,
    /// Raw (unnormalized) vectors for every graph node, kept for diagnostics.
    pub node_vectors: Vec<Vec<f64>>,
}

fn sigmoid(x: f64) -> f64 {
    if x > 30.0 {
        1.0
    } else if x < -30.0 {
        0.0
    } else {
        1.0 / (1.0 + (-x).exp())
    }
}

/// Cumulative unigram^0.75 distribution with inverse-cdf sampling.
struct NoiseDistribution {
    cumulative: Vec<f64>,
}

impl NoiseDistribution {
    fn from_counts(counts: &[usize]) -> Self {
        let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(0.75)).collect();
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect();
        Self { cumulative }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let u: f64 = rng.random();
        self.cumulative.partition_point(|&c| c < u).min(self.cumulative.len() - 1)
    }
}

/// Train class embeddings with skip-gram over a walk corpus and return the
/// unit-normalized class-node vectors.
pub fn deepwalk_embed(
    g: &ProtoTaxonomyGraph,
    params: &DeepWalkParams,
) -> Result<DeepWalkOutcome, EmbedError> {
    if g.node_count() < 2 {
        return Err(EmbedError::Argument(
            "graph needs at least two nodes to form context pairs".into(),
        ));
    }
    if params.m == 0 || params.window == 0 || params.epochs == 0 {
        return Err(EmbedError::Argument(
            "m, window, and epochs must be at least 1".into(),
        ));
    }
    let walks = walk_corpus(g, params.walks_per_node, params.walk_length, params.seed)?;

    let mut counts = vec![0usize; g.node_count()];
    let mut total_pairs = 0usize;
    for walk in &walks {
        for (t, &node) in walk.node_indices.iter().enumerate() {
            counts[node] += 1;
            let lo = t.saturating_sub(params.window);
            let hi = (t + params.window).min(walk.node_indices.len() - 1);
            total_pairs += hi - lo; // excludes the center itself
        }
    }
    if total_pairs == 0 {
        return Err(EmbedError::Argument(
            "walks too short to produce any context pairs".into(),
        ));
    }
    let noise = NoiseDistribution::from_counts(&counts);

    let m = params.m;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(0x5eed));
    let mut in_vecs: Vec<f64> = (0..g.node_count() * m)
        .map(|_| (rng.random::<f64>() - 0.5) / m as f64)
        .collect();
    let mut out_vecs: Vec<f64> = vec![0.0; g.node_count() * m];

    let total_steps = (params.epochs * total_pairs) as f64;
    let mut step = 0usize;
    let mut order: Vec<usize> = (0..walks.len()).collect();
    let mut epoch_losses = Vec::with_capacity(params.epochs);
    let mut grad_center = vec![0.0f64; m];

    for _ in 0..params.epochs {
        use rand::seq::SliceRandom;
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut epoch_pairs = 0usize;
        for &wi in &order {
            let nodes = &walks[wi].node_indices;
            for (t, &center) in nodes.iter().enumerate() {
                let lo = t.saturating_sub(params.window);
                let hi = (t + params.window).min(nodes.len() - 1);
                for context_pos in lo..=hi {
                    if context_pos == t {
                        continue;
                    }
                    let context = nodes[context_pos];
                    let lr = params.learning_rate
                        * (1.0 - step as f64 / total_steps).max(0.0)
                        + params.min_learning_rate;
                    step += 1;

                    let c_off = center * m;
                    grad_center.iter_mut().for_each(|v| *v = 0.0);
                    let mut pair_loss = 0.0;
                    // positive example plus sampled negatives
                    for neg in 0..=params.negatives {
                        let (target, label) = if neg == 0 {
                            (context, 1.0)
                        } else {
                            let sampled = noise.sample(&mut rng);
                            if sampled == context {
                                continue;
                            }
                            (sampled, 0.0)
                        };
                        let t_off = target * m;
                        let mut score = 0.0;
                        for d in 0..m {
                            score += in_vecs[c_off + d] * out_vecs[t_off + d];
                        }
                        let prediction = sigmoid(score);
                        pair_loss -= if label > 0.5 {
                            prediction.max(1e-10).ln()
                        } else {
                            (1.0 - prediction).max(1e-10).ln()
                        };
                        let g = (label - prediction) * lr;
                        for d in 0..m {
                            grad_center[d] += g * out_vecs[t_off + d];
                            out_vecs[t_off + d] += g * in_vecs[c_off + d];
                        }
                    }
                    for d in 0..m {
                        in_vecs[c_off + d] += grad_center[d];
                    }
                    epoch_loss += pair_loss;
                    epoch_pairs += 1;
                }
            }
        }
        epoch_losses.push(epoch_loss / epoch_pairs.max(1) as f64);
    }

    let node_vectors: Vec<Vec<f64>> = (0..g.node_count())
        .map(|n| in_vecs[n * m..(n + 1) * m].to_vec())
        .collect();
    let raw = g
        .class_index
        .iter()
        .map(|(id, &node)| (id.clone(), node_vectors[node].clone()));
    let table = ClassEmbeddingTable::from_raw(EmbeddingMethod::DeepWalk, m, raw)?;
    Ok(DeepWalkOutcome {
        table,
        epoch_losses,
        node_vectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use crate::miner::{split_identifier, ConceptSequence, SeparatorKind};
    use crate::util::cosine;

    fn graph_of(ids: &[&str]) -> ProtoTaxonomyGraph {
        let seqs: Vec<_> = ids
            .iter()
            .map(|id| split_identifier(id, SeparatorKind::Underscore))
            .collect();
        build_graph(&seqs).unwrap()
    }

    fn two_clique_graph() -> ProtoTaxonomyGraph {
        graph_of(&[
            "billing_payment",
            "billing_cancel",
            "billing_update",
            "billing_history",
            "billing_dispute",
            "music_play",
            "music_stop",
            "music_skip",
            "music_queue",
            "music_find",
        ])
    }

    fn small_params(seed: u64) -> DeepWalkParams {
        DeepWalkParams {
            m: 32,
            walk_length: 10,
            walks_per_node: 10,
            window: 4,
            negatives: 5,
            epochs: 5,
            seed,
            ..DeepWalkParams::default()
        }
    }

    fn clique_separation(table: &ClassEmbeddingTable) -> (f64, f64) {
        let billing: Vec<&[f64]> = table
            .vectors
            .iter()
            .filter(|(k, _)| k.starts_with("billing"))
            .map(|(_, v)| v.as_slice())
            .collect();
        let music: Vec<&[f64]> = table
            .vectors
            .iter()
            .filter(|(k, _)| k.starts_with("music"))
            .map(|(_, v)| v.as_slice())
            .collect();
        let mut intra = Vec::new();
        for group in [&billing, &music] {
            for i in 0..group.len() {
                for j in i + 1..group.len() {
                    intra.push(cosine(group[i], group[j]));
                }
            }
        }
        let mut inter = Vec::new();
        for a in &billing {
            for b in &music {
                inter.push(cosine(a, b));
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        (mean(&intra), mean(&inter))
    }

    #[test]
    fn cliques_separate() {
        let g = two_clique_graph();
        for seed in [1, 2, 3] {
            let outcome = deepwalk_embed(&g, &small_params(seed)).unwrap();
            let (intra, inter) = clique_separation(&outcome.table);
            assert!(intra > inter, "seed {seed}: intra {intra} vs inter {inter}");
        }
    }

    #[test]
    fn structural_twins_are_most_similar() {
        let mut seqs: Vec<ConceptSequence> = ["billing_payment", "billing_cancel", "account_login"]
            .iter()
            .map(|id| split_identifier(id, SeparatorKind::Underscore))
            .collect();
        // two classes with identical concept sequences share every context
        seqs.push(ConceptSequence {
            intent_id: "twin_a".into(),
            concepts: vec!["shared".into(), "thing".into()],
        });
        seqs.push(ConceptSequence {
            intent_id: "twin_b".into(),
            concepts: vec!["shared".into(), "thing".into()],
        });
        let g = build_graph(&seqs).unwrap();
        let outcome = deepwalk_embed(&g, &small_params(7)).unwrap();
        let ids: Vec<&str> = outcome.table.class_ids().collect();
        let mut best = (f64::NEG_INFINITY, "", "");
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                let c = cosine(
                    outcome.table.get(ids[i]).unwrap(),
                    outcome.table.get(ids[j]).unwrap(),
                );
                if c > best.0 {
                    best = (c, ids[i], ids[j]);
                }
            }
        }
        let pair = [best.1, best.2];
        assert!(pair.contains(&"twin_a") && pair.contains(&"twin_b"), "{best:?}");
    }

    #[test]
    fn vectors_have_requested_width() {
        let g = graph_of(&["a_b", "c_d"]);
        let params = DeepWalkParams {
            m: 200,
            walks_per_node: 2,
            epochs: 1,
            ..DeepWalkParams::default()
        };
        let outcome = deepwalk_embed(&g, &params).unwrap();
        assert!(outcome.table.vectors.values().all(|v| v.len() == 200));
        assert_eq!(outcome.node_vectors.len(), g.node_count());
    }

    #[test]
    fn loss_decreases_over_epochs() {
        let g = two_clique_graph();
        let outcome = deepwalk_embed(&g, &small_params(11)).unwrap();
        let first = outcome.epoch_losses.first().unwrap();
        let last = outcome.epoch_losses.last().unwrap();
        assert!(last < first, "losses {:?}", outcome.epoch_losses);
    }

    #[test]
    fn deterministic_under_seed() {
        let g = two_clique_graph();
        let a = deepwalk_embed(&g, &small_params(5)).unwrap();
        let b = deepwalk_embed(&g, &small_params(5)).unwrap();
        assert_eq!(a.table.vectors, b.table.vectors);
    }

    #[test]
    fn single_node_graph_is_rejected() {
        use crate::graph::NodeKind;
        let g = ProtoTaxonomyGraph {
            nodes: vec![crate::graph::Node {
                kind: NodeKind::Class,
                label: "solo".into(),
                render: "solo".into(),
            }],
            adjacency: vec![vec![]],
            class_index: [("solo".to_string(), 0)].into_iter().collect(),
        };
        assert!(deepwalk_embed(&g, &DeepWalkParams::default()).is_err());
    }
}
