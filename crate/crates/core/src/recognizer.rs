//! The two classifier families: taxonomy recognizers (encoder → MSE mapper →
//! nearest class embedding) and softmax baselines, both with threshold-based
//! out-of-scope rejection.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::LabeledPair;
use crate::embedders::{ClassEmbeddingTable, EmbeddingMethod};
use crate::encoders::{EncoderConfig, EncoderError, SharedEncoder};
use crate::nn::{self, Activation, DenseNet, Loss, NnError, TrainConfig};
use crate::util::{dot, normalize_in_place};

#[derive(Debug, Error)]
pub enum RecognizerError {
    #[error("{0}")]
    Argument(String),
    #[error("training label {0:?} is missing from the class-embedding table")]
    MissingLabel(String),
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("bundle error: {0}")]
    Bundle(String),
}

/// Recognition methods named as reported: the softmax baseline and the three
/// class-embedding variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "BASE")]
    Base,
    #[serde(rename = "T")]
    DeepWalk,
    #[serde(rename = "S")]
    WalkMean,
    #[serde(rename = "C")]
    Cdssm,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Base, Method::DeepWalk, Method::WalkMean, Method::Cdssm];

    pub fn embedding_method(&self) -> Option<EmbeddingMethod> {
        match self {
            Method::Base => None,
            Method::DeepWalk => Some(EmbeddingMethod::DeepWalk),
            Method::WalkMean => Some(EmbeddingMethod::WalkMean),
            Method::Cdssm => Some(EmbeddingMethod::Cdssm),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Base => "BASE",
            Method::DeepWalk => "T",
            Method::WalkMean => "S",
            Method::Cdssm => "C",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "BASE" => Ok(Method::Base),
            "T" => Ok(Method::DeepWalk),
            "S" => Ok(Method::WalkMean),
            "C" => Ok(Method::Cdssm),
            other => Err(format!("unknown method {other:?} (expected BASE, T, S, or C)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMetric {
    Dot,
    NegEuclidean,
}

/// Architecture knobs for the mapper / softmax head.
#[derive(Debug, Clone)]
pub struct MapperConfig {
    pub hidden_dim: usize,
    pub hidden_activation: Activation,
    pub score_metric: ScoreMetric,
}

impl Default for MapperConfig {
    fn default() -> Self {
        Self {
            hidden_dim: 800,
            hidden_activation: Activation::Tanh,
            score_metric: ScoreMetric::Dot,
        }
    }
}

/// Per-class scores for one utterance. Ties resolve to the lowest class
/// index.
#[derive(Debug, Clone)]
pub struct ScoreVector {
    pub scores: Vec<f64>,
    pub argmax: usize,
    pub max_score: f64,
}

impl ScoreVector {
    fn from_scores(scores: Vec<f64>) -> Self {
        let mut argmax = 0;
        for (i, &s) in scores.iter().enumerate() {
            if s > scores[argmax] {
                argmax = i;
            }
        }
        let max_score = scores[argmax];
        Self {
            scores,
            argmax,
            max_score,
        }
    }
}

/// Threshold rejection: reject whenever the best score falls below θ.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RejectionRule {
    pub threshold: f64,
}

/// Outcome of classification with rejection enabled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    Class(String),
    OutOfScope,
}

/// Encoder → mapper → nearest class embedding.
pub struct TaxonomyRecognizer {
    pub encoder: SharedEncoder,
    pub mapper: DenseNet,
    pub table: ClassEmbeddingTable,
    pub score_metric: ScoreMetric,
    class_order: Vec<String>,
    pub training_trace: Vec<f64>,
}

impl TaxonomyRecognizer {
    pub fn new(
        encoder: SharedEncoder,
        mapper: DenseNet,
        table: ClassEmbeddingTable,
        score_metric: ScoreMetric,
        training_trace: Vec<f64>,
    ) -> Result<Self, RecognizerError> {
        if mapper.output_dim() != table.m {
            return Err(RecognizerError::Argument(format!(
                "mapper output dim {} does not match table m = {}",
                mapper.output_dim(),
                table.m
            )));
        }
        if mapper.input_dim() != encoder.dimension() {
            return Err(RecognizerError::Argument(format!(
                "mapper input dim {} does not match encoder dimension {}",
                mapper.input_dim(),
                encoder.dimension()
            )));
        }
        let class_order = table.class_ids().map(str::to_string).collect();
        Ok(Self {
            encoder,
            mapper,
            table,
            score_metric,
            class_order,
            training_trace,
        })
    }

    pub fn class_order(&self) -> &[String] {
        &self.class_order
    }

    pub fn score(&self, utterance: &str) -> Result<ScoreVector, RecognizerError> {
        let encoded = self.encoder.encode(utterance)?;
        let mut mapped = self.mapper.forward(&encoded)?;
        normalize_in_place(&mut mapped);
        let scores = self
            .class_order
            .iter()
            .map(|id| {
                let v = self.table.get(id).expect("order mirrors table");
                match self.score_metric {
                    ScoreMetric::Dot => dot(&mapped, v),
                    ScoreMetric::NegEuclidean => {
                        -mapped
                            .iter()
                            .zip(v)
                            .map(|(a, b)| (a - b).powi(2))
                            .sum::<f64>()
                            .sqrt()
                    }
                }
            })
            .collect();
        Ok(ScoreVector::from_scores(scores))
    }

    pub fn classify_with_rejection(
        &self,
        utterance: &str,
        rule: RejectionRule,
    ) -> Result<Classification, RecognizerError> {
        let sv = self.score(utterance)?;
        Ok(decide(&sv, rule, &self.class_order))
    }
}

/// Encoder → dense head → softmax probabilities.
pub struct SoftmaxRecognizer {
    pub encoder: SharedEncoder,
    pub head: DenseNet,
    class_order: Vec<String>,
    pub training_trace: Vec<f64>,
}

impl SoftmaxRecognizer {
    pub fn class_order(&self) -> &[String] {
        &self.class_order
    }

    pub fn score(&self, utterance: &str) -> Result<ScoreVector, RecognizerError> {
        let encoded = self.encoder.encode(utterance)?;
        let logits = self.head.forward(&encoded)?;
        Ok(ScoreVector::from_scores(nn::softmax(&logits)))
    }

    pub fn classify_with_rejection(
        &self,
        utterance: &str,
        rule: RejectionRule,
    ) -> Result<Classification, RecognizerError> {
        let sv = self.score(utterance)?;
        Ok(decide(&sv, rule, &self.class_order))
    }
}

fn decide(sv: &ScoreVector, rule: RejectionRule, order: &[String]) -> Classification {
    if sv.max_score < rule.threshold {
        Classification::OutOfScope
    } else {
        Classification::Class(order[sv.argmax].clone())
    }
}

/// Either recognizer family behind one scoring surface.
pub enum Recognizer {
    Taxonomy(TaxonomyRecognizer),
    Softmax(SoftmaxRecognizer),
}

impl Recognizer {
    pub fn score(&self, utterance: &str) -> Result<ScoreVector, RecognizerError> {
        match self {
            Recognizer::Taxonomy(r) => r.score(utterance),
            Recognizer::Softmax(r) => r.score(utterance),
        }
    }

    pub fn class_order(&self) -> &[String] {
        match self {
            Recognizer::Taxonomy(r) => r.class_order(),
            Recognizer::Softmax(r) => r.class_order(),
        }
    }

    pub fn classify_with_rejection(
        &self,
        utterance: &str,
        rule: RejectionRule,
    ) -> Result<Classification, RecognizerError> {
        let sv = self.score(utterance)?;
        Ok(decide(&sv, rule, self.class_order()))
    }
}

/// Train the mapper by MSE between mapped utterance encodings and the class
/// embeddings of their labels.
pub fn train_taxonomy(
    train: &[LabeledPair],
    encoder: SharedEncoder,
    table: ClassEmbeddingTable,
    mapper_cfg: &MapperConfig,
    cfg: &TrainConfig,
) -> Result<TaxonomyRecognizer, RecognizerError> {
    if train.is_empty() {
        return Err(RecognizerError::Argument("empty training set".into()));
    }
    let mut data = Vec::with_capacity(train.len());
    for (utterance, label) in train {
        let target = table
            .get(label)
            .ok_or_else(|| RecognizerError::MissingLabel(label.clone()))?
            .to_vec();
        data.push((encoder.encode(utterance)?, target));
    }
    let n = encoder.dimension();
    let mut mapper = DenseNet::new(
        &[n, mapper_cfg.hidden_dim, table.m],
        &[mapper_cfg.hidden_activation, Activation::Identity],
        cfg.seed,
    )?;
    let trace = nn::train(&mut mapper, &data, Loss::Mse, cfg)?;
    TaxonomyRecognizer::new(encoder, mapper, table, mapper_cfg.score_metric, trace)
}

/// Train the softmax baseline head with cross-entropy.
pub fn train_softmax(
    train: &[LabeledPair],
    encoder: SharedEncoder,
    mapper_cfg: &MapperConfig,
    cfg: &TrainConfig,
) -> Result<SoftmaxRecognizer, RecognizerError> {
    if train.is_empty() {
        return Err(RecognizerError::Argument("empty training set".into()));
    }
    let classes: Vec<String> = train
        .iter()
        .map(|(_, l)| l.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if classes.len() < 2 {
        return Err(RecognizerError::Argument(format!(
            "softmax training needs at least 2 classes, got {}",
            classes.len()
        )));
    }
    let index: std::collections::HashMap<&str, usize> = classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let mut data = Vec::with_capacity(train.len());
    for (utterance, label) in train {
        let mut target = vec![0.0; classes.len()];
        target[index[label.as_str()]] = 1.0;
        data.push((encoder.encode(utterance)?, target));
    }
    let n = encoder.dimension();
    let mut head = DenseNet::new(
        &[n, mapper_cfg.hidden_dim, classes.len()],
        &[mapper_cfg.hidden_activation, Activation::Identity],
        cfg.seed,
    )?;
    let trace = nn::train(&mut head, &data, Loss::CrossEntropy, cfg)?;
    Ok(SoftmaxRecognizer {
        encoder,
        head,
        class_order: classes,
        training_trace: trace,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct BundleMeta {
    method: Method,
    seed: u64,
    input_dim: usize,
    output_dim: usize,
    score_metric: Option<ScoreMetric>,
    class_order: Vec<String>,
}

/// Write a recognizer as a bundle directory: network checkpoint, class
/// embeddings (taxonomy only), encoder config, and metadata.
pub fn save_bundle(
    dir: &Path,
    recognizer: &Recognizer,
    method: Method,
    encoder_config: &EncoderConfig,
    seed: u64,
) -> Result<(), RecognizerError> {
    let io = |e: std::io::Error| RecognizerError::Bundle(e.to_string());
    fs::create_dir_all(dir).map_err(io)?;
    let meta = match recognizer {
        Recognizer::Taxonomy(r) => {
            fs::write(dir.join("mapper.json"), r.mapper.to_checkpoint()).map_err(io)?;
            let mut tsv = Vec::new();
            r.table.write_tsv(&mut tsv).map_err(io)?;
            fs::write(dir.join("class_embeddings.tsv"), tsv).map_err(io)?;
            BundleMeta {
                method,
                seed,
                input_dim: r.mapper.input_dim(),
                output_dim: r.mapper.output_dim(),
                score_metric: Some(r.score_metric),
                class_order: r.class_order.clone(),
            }
        }
        Recognizer::Softmax(r) => {
            fs::write(dir.join("head.json"), r.head.to_checkpoint()).map_err(io)?;
            BundleMeta {
                method,
                seed,
                input_dim: r.head.input_dim(),
                output_dim: r.head.output_dim(),
                score_metric: None,
                class_order: r.class_order.clone(),
            }
        }
    };
    fs::write(
        dir.join("metadata.json"),
        serde_json::to_string_pretty(&meta).map_err(|e| RecognizerError::Bundle(e.to_string()))?,
    )
    .map_err(io)?;
    fs::write(
        dir.join("encoder.json"),
        serde_json::to_string(encoder_config)
            .map_err(|e| RecognizerError::Bundle(e.to_string()))?,
    )
    .map_err(io)?;
    Ok(())
}

/// Load a bundle directory written by [`save_bundle`].
pub fn load_bundle(dir: &Path) -> Result<(Recognizer, Method), RecognizerError> {
    let io = |e: std::io::Error| RecognizerError::Bundle(e.to_string());
    let meta: BundleMeta = serde_json::from_str(
        &fs::read_to_string(dir.join("metadata.json")).map_err(io)?,
    )
    .map_err(|e| RecognizerError::Bundle(format!("metadata: {e}")))?;
    let encoder_config: EncoderConfig = serde_json::from_str(
        &fs::read_to_string(dir.join("encoder.json")).map_err(io)?,
    )
    .map_err(|e| RecognizerError::Bundle(format!("encoder config: {e}")))?;
    let encoder = encoder_config.build()?;
    let recognizer = match meta.method {
        Method::Base => {
            let head =
                DenseNet::from_checkpoint(&fs::read_to_string(dir.join("head.json")).map_err(io)?)?;
            Recognizer::Softmax(SoftmaxRecognizer {
                encoder,
                head,
                class_order: meta.class_order.clone(),
                training_trace: Vec::new(),
            })
        }
        m => {
            let mapper = DenseNet::from_checkpoint(
                &fs::read_to_string(dir.join("mapper.json")).map_err(io)?,
            )?;
            let table = ClassEmbeddingTable::read_tsv(
                &fs::read_to_string(dir.join("class_embeddings.tsv")).map_err(io)?,
                m.embedding_method().expect("taxonomy method"),
            )
            .map_err(|e| RecognizerError::Bundle(e.to_string()))?;
            Recognizer::Taxonomy(TaxonomyRecognizer::new(
                encoder,
                mapper,
                table,
                meta.score_metric.unwrap_or(ScoreMetric::Dot),
                Vec::new(),
            )?)
        }
    };
    Ok((recognizer, meta.method))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_synthetic_workspace, ConceptTree};
    use crate::embedders::{walkmean_embed, ClassEmbeddingTable, EmbeddingMethod};
    use crate::encoders::{fit_hashed_encoder, parse_embedding_tsv};
    use crate::graph::build_graph;
    use crate::miner::mine_workspace;
    use crate::nn::Optimizer;
    use std::sync::Arc;

    fn table_of(entries: &[(&str, Vec<f64>)]) -> ClassEmbeddingTable {
        let m = entries[0].1.len();
        ClassEmbeddingTable::from_raw(
            EmbeddingMethod::WalkMean,
            m,
            entries.iter().map(|(k, v)| (k.to_string(), v.clone())),
        )
        .unwrap()
    }

    /// Encoder that returns each class's target vector for its utterance, so
    /// an identity mapping solves the regression exactly.
    fn aligned_encoder_and_table() -> (SharedEncoder, ClassEmbeddingTable, Vec<LabeledPair>) {
        let table = table_of(&[
            ("east", vec![1.0, 0.0, 0.0]),
            ("north", vec![0.0, 1.0, 0.0]),
            ("up", vec![0.0, 0.0, 1.0]),
        ]);
        let tsv = "go east\t1 0 0\ngo north\t0 1 0\ngo up\t0 0 1\n";
        let encoder: SharedEncoder = Arc::new(parse_embedding_tsv(tsv, "inline").unwrap());
        let train = vec![
            ("go east".to_string(), "east".to_string()),
            ("go north".to_string(), "north".to_string()),
            ("go up".to_string(), "up".to_string()),
        ];
        (encoder, table, train)
    }

    #[test]
    fn linearly_reachable_targets_fit_tightly() {
        let (encoder, table, train) = aligned_encoder_and_table();
        let mapper_cfg = MapperConfig {
            hidden_dim: 3,
            hidden_activation: Activation::Identity,
            score_metric: ScoreMetric::Dot,
        };
        let cfg = TrainConfig {
            epochs: 400,
            batch_size: 3,
            learning_rate: 0.05,
            optimizer: Optimizer::adam(),
            seed: 0,
            shuffle: true,
        };
        let r = train_taxonomy(&train, encoder, table, &mapper_cfg, &cfg).unwrap();
        assert!(
            r.training_trace.last().unwrap() < &1e-4,
            "final mse {}",
            r.training_trace.last().unwrap()
        );
        for (utterance, label) in &train {
            let sv = r.score(utterance).unwrap();
            assert_eq!(&r.class_order()[sv.argmax], label);
        }
    }

    #[test]
    fn default_training_returns_fifty_epoch_trace() {
        let (encoder, table, train) = aligned_encoder_and_table();
        let mapper_cfg = MapperConfig {
            hidden_dim: 4,
            ..MapperConfig::default()
        };
        let r = train_taxonomy(&train, encoder, table, &mapper_cfg, &TrainConfig::default())
            .unwrap();
        assert_eq!(r.training_trace.len(), 50);
    }

    #[test]
    fn missing_label_is_named() {
        let (encoder, table, mut train) = aligned_encoder_and_table();
        train.push(("go east".to_string(), "west".to_string()));
        match train_taxonomy(&train, encoder, table, &MapperConfig::default(), &TrainConfig::default()) {
            Err(RecognizerError::MissingLabel(l)) => assert_eq!(l, "west"),
            Err(other) => panic!("expected missing-label error, got {other:?}"),
            Ok(_) => panic!("expected missing-label error, got a recognizer"),
        }
    }

    #[test]
    fn dimension_mismatch_rejected_at_construction() {
        let (encoder, table, _) = aligned_encoder_and_table();
        let mapper = DenseNet::new(&[3, 4, 7], &[Activation::Tanh, Activation::Identity], 0)
            .unwrap();
        assert!(TaxonomyRecognizer::new(encoder, mapper, table, ScoreMetric::Dot, vec![]).is_err());
    }

    fn separable_training_set() -> (SharedEncoder, Vec<LabeledPair>) {
        let mut train = Vec::new();
        let mut corpus = Vec::new();
        for i in 0..30 {
            let a = format!("alpha beta gamma number {i}");
            let b = format!("delta epsilon zeta number {i}");
            corpus.push(a.clone());
            corpus.push(b.clone());
            train.push((a, "first".to_string()));
            train.push((b, "second".to_string()));
        }
        let encoder: SharedEncoder = Arc::new(fit_hashed_encoder(&corpus, 512, 32, 0).unwrap());
        (encoder, train)
    }

    #[test]
    fn softmax_fits_separable_data() {
        let (encoder, train) = separable_training_set();
        let mapper_cfg = MapperConfig {
            hidden_dim: 16,
            ..MapperConfig::default()
        };
        let cfg = TrainConfig {
            epochs: 30,
            seed: 5,
            ..TrainConfig::default()
        };
        let r = train_softmax(&train, encoder, &mapper_cfg, &cfg).unwrap();
        assert_eq!(r.class_order(), &["first".to_string(), "second".to_string()]);
        let mut correct = 0;
        for (utterance, label) in &train {
            let sv = r.score(utterance).unwrap();
            assert!((sv.scores.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            if &r.class_order()[sv.argmax] == label {
                correct += 1;
            }
        }
        assert!(correct as f64 / train.len() as f64 > 0.99);
    }

    #[test]
    fn softmax_needs_two_classes() {
        let (encoder, _) = separable_training_set();
        let train = vec![("hello".to_string(), "only".to_string())];
        assert!(train_softmax(&train, encoder, &MapperConfig::default(), &TrainConfig::default())
            .is_err());
    }

    #[test]
    fn softmax_training_is_deterministic() {
        let (encoder, train) = separable_training_set();
        let mapper_cfg = MapperConfig {
            hidden_dim: 8,
            ..MapperConfig::default()
        };
        let cfg = TrainConfig {
            epochs: 5,
            seed: 42,
            ..TrainConfig::default()
        };
        let a = train_softmax(&train, encoder.clone(), &mapper_cfg, &cfg).unwrap();
        let b = train_softmax(&train, encoder, &mapper_cfg, &cfg).unwrap();
        assert_eq!(a.training_trace, b.training_trace);
        assert_eq!(
            a.score("alpha beta gamma").unwrap().scores,
            b.score("alpha beta gamma").unwrap().scores
        );
    }

    /// Small end-to-end fixture: synthetic workspace, hashed encoder,
    /// walk-mean table, trained mapper.
    fn fixture_taxonomy() -> TaxonomyRecognizer {
        let tree: ConceptTree = serde_json::from_str(
            r#"{"billing":{"payment":["pay","invoice"],"cancel":["stop","end"]},
                "music":{"play":["song","tune"],"volume":["loud","quiet"]}}"#,
        )
        .unwrap();
        let w = generate_synthetic_workspace(&tree, 12, 0.2, 9).unwrap();
        let report = mine_workspace(&w);
        let g = build_graph(&report.sequences).unwrap();
        let pairs = w.pairs();
        let corpus: Vec<String> = pairs.iter().map(|(u, _)| u.clone()).collect();
        let encoder: SharedEncoder = Arc::new(fit_hashed_encoder(&corpus, 512, 64, 1).unwrap());
        let table = walkmean_embed(&g, encoder.as_ref(), 5, 6, 2).unwrap();
        let mapper_cfg = MapperConfig {
            hidden_dim: 32,
            ..MapperConfig::default()
        };
        let cfg = TrainConfig {
            epochs: 40,
            seed: 3,
            ..TrainConfig::default()
        };
        train_taxonomy(&pairs, encoder, table, &mapper_cfg, &cfg).unwrap()
    }

    #[test]
    fn trained_example_attains_max_score_for_its_class() {
        let r = fixture_taxonomy();
        let w_tree: ConceptTree = serde_json::from_str(
            r#"{"billing":{"payment":["pay","invoice"],"cancel":["stop","end"]},
                "music":{"play":["song","tune"],"volume":["loud","quiet"]}}"#,
        )
        .unwrap();
        let w = generate_synthetic_workspace(&w_tree, 12, 0.2, 9).unwrap();
        let pairs = w.pairs();
        let mut correct = 0;
        for (utterance, label) in &pairs {
            let sv = r.score(utterance).unwrap();
            assert!(sv.scores.iter().all(|s| (-1.0 - 1e-9..=1.0 + 1e-9).contains(s)));
            if &r.class_order()[sv.argmax] == label {
                correct += 1;
            }
        }
        // trained examples overwhelmingly score highest for their own class
        assert!(correct as f64 / pairs.len() as f64 > 0.9);
    }

    #[test]
    fn rejection_boundaries_and_monotonicity() {
        let r = fixture_taxonomy();
        let utterance = "pay the invoice now please";
        let never = RejectionRule { threshold: -10.0 };
        let always = RejectionRule { threshold: 10.0 };
        assert!(matches!(
            r.classify_with_rejection(utterance, never).unwrap(),
            Classification::Class(_)
        ));
        assert_eq!(
            r.classify_with_rejection(utterance, always).unwrap(),
            Classification::OutOfScope
        );
        // once rejected at θ₁, rejected at every θ₂ > θ₁
        let sv = r.score(utterance).unwrap();
        let mut rejected = false;
        for step in -20..=20 {
            let theta = step as f64 / 10.0;
            let now = sv.max_score < theta;
            assert!(!rejected || now, "rejection not monotone at θ = {theta}");
            rejected = now;
        }
    }

    #[test]
    fn dot_and_euclidean_agree_on_unit_vectors() {
        let r = fixture_taxonomy();
        let utterances = [
            "pay the invoice",
            "stop my plan end it",
            "song tune please",
            "make it loud",
        ];
        for utterance in utterances {
            let by_dot = r.score(utterance).unwrap();
            let euclid = TaxonomyRecognizer {
                score_metric: ScoreMetric::NegEuclidean,
                ..fixture_taxonomy()
            };
            let by_dist = euclid.score(utterance).unwrap();
            assert_eq!(by_dot.argmax, by_dist.argmax, "utterance {utterance}");
        }
    }

    #[test]
    fn scaling_class_embeddings_preserves_argmax() {
        let r = fixture_taxonomy();
        let mut scaled = fixture_taxonomy();
        for v in scaled.table.vectors.values_mut() {
            for x in v.iter_mut() {
                *x *= 7.5;
            }
        }
        for utterance in ["pay invoice", "song please"] {
            assert_eq!(
                r.score(utterance).unwrap().argmax,
                scaled.score(utterance).unwrap().argmax
            );
        }
    }

    #[test]
    fn bundle_round_trip_preserves_scores() {
        let r = fixture_taxonomy();
        let tree: ConceptTree = serde_json::from_str(
            r#"{"billing":{"payment":["pay","invoice"],"cancel":["stop","end"]},
                "music":{"play":["song","tune"],"volume":["loud","quiet"]}}"#,
        )
        .unwrap();
        let w = generate_synthetic_workspace(&tree, 12, 0.2, 9).unwrap();
        let corpus: Vec<String> = w.pairs().iter().map(|(u, _)| u.clone()).collect();
        let fitted = fit_hashed_encoder(&corpus, 512, 64, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let config = EncoderConfig::Hashed(fitted);
        let before = r.score("pay the invoice").unwrap();
        save_bundle(
            dir.path(),
            &Recognizer::Taxonomy(r),
            Method::WalkMean,
            &config,
            3,
        )
        .unwrap();
        let (loaded, method) = load_bundle(dir.path()).unwrap();
        assert_eq!(method, Method::WalkMean);
        let after = loaded.score("pay the invoice").unwrap();
        assert_eq!(before.argmax, after.argmax);
        for (a, b) in before.scores.iter().zip(&after.scores) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("X".parse::<Method>().is_err());
    }

    #[test]
    fn table_entries_stay_unit_norm() {
        let table = table_of(&[("a", vec![3.0, 4.0]), ("b", vec![0.0, 2.0])]);
        for v in table.vectors.values() {
            assert!((crate::util::l2_norm(v) - 1.0).abs() < 1e-9);
        }
    }
}
