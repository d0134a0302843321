//! Class embeddings ψ: the per-class vector table plus the three methods
//! that produce it — skip-gram over graph walks, walk-mean sentence
//! encoding, and a convolutional encoder over concept sequences.

mod cdssm;
mod deepwalk;

pub use cdssm::{
    cdssm_grad_check, cdssm_embed_train, CdssmNet, CdssmOutcome, CdssmParams,
};
pub use deepwalk::{deepwalk_embed, DeepWalkOutcome, DeepWalkParams};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoders::{EncoderError, SentenceEncoder};
use crate::graph::{random_walk, GraphError, ProtoTaxonomyGraph};
use crate::util::{fnv1a64, normalize_in_place};

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("{0}")]
    Argument(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("encoding walk text failed: {source}")]
    Encoder {
        #[source]
        source: EncoderError,
    },
    #[error("degenerate zero embedding for class {0:?}")]
    Degenerate(String),
    #[error("class embeddings collapsed at epoch {epoch}: mean pairwise cosine {cosine:.6}")]
    Collapse { epoch: usize, cosine: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingMethod {
    DeepWalk,
    WalkMean,
    Cdssm,
}

/// One unit-norm vector per class in a common m-dimensional space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassEmbeddingTable {
    pub m: usize,
    pub vectors: BTreeMap<String, Vec<f64>>,
    pub method: EmbeddingMethod,
}

impl ClassEmbeddingTable {
    pub(crate) fn from_raw(
        method: EmbeddingMethod,
        m: usize,
        raw: impl IntoIterator<Item = (String, Vec<f64>)>,
    ) -> Result<Self, EmbedError> {
        let mut vectors = BTreeMap::new();
        for (id, mut v) in raw {
            debug_assert_eq!(v.len(), m);
            if !normalize_in_place(&mut v) {
                return Err(EmbedError::Degenerate(id));
            }
            vectors.insert(id, v);
        }
        Ok(Self { m, vectors, method })
    }

    pub fn get(&self, intent_id: &str) -> Option<&[f64]> {
        self.vectors.get(intent_id).map(Vec::as_slice)
    }

    pub fn class_ids(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Serialize as embedding-TSV keyed by intent identifier.
    pub fn write_tsv<W: std::io::Write>(&self, writer: &mut W) -> std::io::Result<()> {
        crate::encoders::write_embedding_tsv(
            writer,
            self.vectors.iter().map(|(k, v)| (k.as_str(), v.as_slice())),
        )
    }

    pub fn read_tsv(text: &str, method: EmbeddingMethod) -> Result<Self, EmbedError> {
        let mut vectors = BTreeMap::new();
        let mut m = 0usize;
        for line in text.lines() {
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let (key, rest) = line
                .split_once('\t')
                .ok_or_else(|| EmbedError::Argument(format!("bad table line {line:?}")))?;
            let v: Vec<f64> = rest
                .split_whitespace()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| EmbedError::Argument(format!("bad float {f:?}: {e}")))
                })
                .collect::<Result<_, _>>()?;
            if m == 0 {
                m = v.len();
            } else if v.len() != m {
                return Err(EmbedError::Argument(format!(
                    "ragged table row for {key:?}"
                )));
            }
            vectors.insert(key.to_string(), v);
        }
        if vectors.is_empty() {
            return Err(EmbedError::Argument("empty class-embedding table".into()));
        }
        Ok(Self { m, vectors, method })
    }
}

/// Class embeddings as the mean encoder output over random walks started at
/// each class node, unit-normalized. The per-class walk stream is seeded from
/// the class identifier, so the table does not depend on class order.
pub fn walkmean_embed(
    g: &ProtoTaxonomyGraph,
    encoder: &dyn SentenceEncoder,
    walks_per_class: usize,
    walk_length: usize,
    seed: u64,
) -> Result<ClassEmbeddingTable, EmbedError> {
    if walks_per_class == 0 || walk_length == 0 {
        return Err(EmbedError::Argument(
            "walks_per_class and walk_length must be at least 1".into(),
        ));
    }
    let m = encoder.dimension();
    let mut raw = Vec::with_capacity(g.class_index.len());
    for (intent_id, &node) in &g.class_index {
        use rand::{Rng, SeedableRng};
        let mut walk_seeds =
            rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(fnv1a64(intent_id.as_bytes())));
        let mut mean = vec![0.0f64; m];
        for _ in 0..walks_per_class {
            let walk = random_walk(g, node, walk_length, walk_seeds.random())?;
            let text = walk.render(g);
            let v = encoder
                .encode(&text)
                .map_err(|source| EmbedError::Encoder { source })?;
            for (acc, x) in mean.iter_mut().zip(&v) {
                *acc += x;
            }
        }
        for x in mean.iter_mut() {
            *x /= walks_per_class as f64;
        }
        raw.push((intent_id.clone(), mean));
    }
    ClassEmbeddingTable::from_raw(EmbeddingMethod::WalkMean, m, raw)
}
