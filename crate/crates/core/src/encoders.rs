//! Sentence encoders: the pluggable embedding contract plus two
//! implementations, a self-contained hashed n-gram encoder and a loader for
//! precomputed embedding files.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::sync::Arc;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::util::{collapse_whitespace, fnv1a64, normalize_in_place};

#[derive(Debug, Error)]
pub enum EncoderError {
    #[error("{0}")]
    Argument(String),
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("format error in {path} at line {line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },
    #[error("cannot unit-normalize the empty encoding of {text:?}")]
    EmptyEncoding { text: String },
    #[error("no precomputed embedding for {text:?}")]
    Miss { text: String },
}

/// The sentence-embedding contract: a deterministic map from utterances to
/// fixed-width vectors.
pub trait SentenceEncoder: Send + Sync {
    fn dimension(&self) -> usize;
    fn encode(&self, utterance: &str) -> Result<Vec<f64>, EncoderError>;
}

pub type SharedEncoder = Arc<dyn SentenceEncoder>;

/// Feature-hashing encoder over word unigrams and character 3–5 grams with
/// idf weighting and an optional seeded random projection.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HashedNgramEncoder {
    bucket_count: usize,
    dim: usize,
    idf: Vec<f64>,
    projection: Option<Array2<f64>>,
    unit_norm: bool,
    seed: u64,
}

const CHAR_NGRAM_MIN: usize = 3;
const CHAR_NGRAM_MAX: usize = 5;

fn feature_buckets(text: &str, bucket_count: usize) -> Vec<usize> {
    let normalized = collapse_whitespace(text).to_lowercase();
    let mask = bucket_count - 1;
    let mut buckets = Vec::new();
    for word in normalized.split(' ') {
        if !word.is_empty() {
            buckets.push(fnv1a64(word.as_bytes()) as usize & mask);
        }
    }
    let chars: Vec<char> = normalized.chars().collect();
    for n in CHAR_NGRAM_MIN..=CHAR_NGRAM_MAX {
        if chars.len() < n {
            break;
        }
        for window in chars.windows(n) {
            let gram: String = window.iter().collect();
            buckets.push(fnv1a64(gram.as_bytes()) as usize & mask);
        }
    }
    buckets
}

/// Fit the hashed encoder on a corpus: document frequencies per bucket turn
/// into idf weights `ln(1 + N/(1+df))`, and a seeded ±1/√n projection maps
/// the bucket space down to `n` dimensions when `n != bucket_count`.
pub fn fit_hashed_encoder(
    corpus: &[String],
    bucket_count: usize,
    n: usize,
    seed: u64,
) -> Result<HashedNgramEncoder, EncoderError> {
    if corpus.is_empty() {
        return Err(EncoderError::Argument("corpus is empty".into()));
    }
    if bucket_count == 0 || !bucket_count.is_power_of_two() {
        return Err(EncoderError::Argument(format!(
            "bucket_count must be a power of two, got {bucket_count}"
        )));
    }
    if n == 0 {
        return Err(EncoderError::Argument("dimension must be positive".into()));
    }
    let mut df = vec![0usize; bucket_count];
    for doc in corpus {
        let present: HashSet<usize> = feature_buckets(doc, bucket_count).into_iter().collect();
        for b in present {
            df[b] += 1;
        }
    }
    let total = corpus.len() as f64;
    let idf: Vec<f64> = df
        .iter()
        .map(|&d| (1.0 + total / (1.0 + d as f64)).ln())
        .collect();
    let projection = if n == bucket_count {
        None
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (n as f64).sqrt();
        Some(Array2::from_shape_fn((n, bucket_count), |_| {
            if rng.random::<bool>() {
                scale
            } else {
                -scale
            }
        }))
    };
    Ok(HashedNgramEncoder {
        bucket_count,
        dim: n,
        idf,
        projection,
        unit_norm: true,
        seed,
    })
}

impl HashedNgramEncoder {
    pub fn with_unit_norm(mut self, unit_norm: bool) -> Self {
        self.unit_norm = unit_norm;
        self
    }

    pub fn idf_weights(&self) -> &[f64] {
        &self.idf
    }

    fn raw_encode(&self, utterance: &str) -> Vec<f64> {
        let mut tf = vec![0.0f64; self.bucket_count];
        for b in feature_buckets(utterance, self.bucket_count) {
            tf[b] += 1.0;
        }
        for (t, w) in tf.iter_mut().zip(&self.idf) {
            *t *= w;
        }
        match &self.projection {
            None => tf,
            Some(p) => p.dot(&Array1::from_vec(tf)).to_vec(),
        }
    }
}

impl SentenceEncoder for HashedNgramEncoder {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn encode(&self, utterance: &str) -> Result<Vec<f64>, EncoderError> {
        let mut v = self.raw_encode(utterance);
        if self.unit_norm && !normalize_in_place(&mut v) {
            return Err(EncoderError::EmptyEncoding {
                text: utterance.to_string(),
            });
        }
        Ok(v)
    }
}

/// Canonical lookup key: trimmed, whitespace-collapsed, NFC-normalized,
/// case preserved.
pub fn normalize_key(utterance: &str) -> String {
    collapse_whitespace(utterance).nfc().collect()
}

/// Fixed lookup table of precomputed sentence embeddings. Misses are errors,
/// never zero vectors.
#[derive(Debug, Clone)]
pub struct PrecomputedEncoder {
    table: HashMap<String, Vec<f64>>,
    dim: usize,
}

/// Parse an embedding-TSV file: `<utterance>\t<v1> <v2> ... <vn>` per line,
/// `#`-prefixed comment lines ignored, width fixed by the first record.
pub fn load_precomputed(path: &Path) -> Result<PrecomputedEncoder, EncoderError> {
    let text = fs::read_to_string(path).map_err(|source| EncoderError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_embedding_tsv(&text, &path.display().to_string())
}

pub fn parse_embedding_tsv(text: &str, path: &str) -> Result<PrecomputedEncoder, EncoderError> {
    let mut table: HashMap<String, Vec<f64>> = HashMap::new();
    let mut dim: Option<usize> = None;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let (key_raw, values_raw) = line.split_once('\t').ok_or_else(|| EncoderError::Format {
            path: path.to_string(),
            line: line_no,
            message: "expected <utterance>\\t<values>".into(),
        })?;
        let mut values = Vec::new();
        for field in values_raw.split_whitespace() {
            values.push(field.parse::<f64>().map_err(|e| EncoderError::Format {
                path: path.to_string(),
                line: line_no,
                message: format!("bad float {field:?}: {e}"),
            })?);
        }
        match dim {
            None => {
                if values.is_empty() {
                    return Err(EncoderError::Format {
                        path: path.to_string(),
                        line: line_no,
                        message: "record has no vector components".into(),
                    });
                }
                dim = Some(values.len());
            }
            Some(d) if d != values.len() => {
                return Err(EncoderError::Format {
                    path: path.to_string(),
                    line: line_no,
                    message: format!("vector length {} differs from {}", values.len(), d),
                });
            }
            _ => {}
        }
        let key = normalize_key(key_raw);
        if table.insert(key.clone(), values).is_some() {
            return Err(EncoderError::Format {
                path: path.to_string(),
                line: line_no,
                message: format!("duplicate utterance key {key:?}"),
            });
        }
    }
    let dim = dim.ok_or_else(|| EncoderError::Format {
        path: path.to_string(),
        line: 0,
        message: "no records".into(),
    })?;
    Ok(PrecomputedEncoder { table, dim })
}

impl PrecomputedEncoder {
    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

impl SentenceEncoder for PrecomputedEncoder {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn encode(&self, utterance: &str) -> Result<Vec<f64>, EncoderError> {
        self.table
            .get(&normalize_key(utterance))
            .cloned()
            .ok_or_else(|| EncoderError::Miss {
                text: utterance.to_string(),
            })
    }
}

/// Rebuildable description of an encoder, stored inside recognizer bundles
/// and resolved configs. The hashed variant embeds its full fitted state; the
/// precomputed variant references the table file by path.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum EncoderConfig {
    Hashed(HashedNgramEncoder),
    Precomputed { path: std::path::PathBuf },
}

impl EncoderConfig {
    pub fn build(&self) -> Result<Arc<dyn SentenceEncoder>, EncoderError> {
        match self {
            EncoderConfig::Hashed(enc) => Ok(Arc::new(enc.clone())),
            EncoderConfig::Precomputed { path } => Ok(Arc::new(load_precomputed(path)?)),
        }
    }
}

/// Write records in the embedding-TSV format used by [`load_precomputed`].
pub fn write_embedding_tsv<'a, W: std::io::Write>(
    writer: &mut W,
    records: impl Iterator<Item = (&'a str, &'a [f64])>,
) -> std::io::Result<()> {
    for (key, values) in records {
        let rendered: Vec<String> = values.iter().map(|v| format!("{v}")).collect();
        writeln!(writer, "{key}\t{}", rendered.join(" "))?;
    }
    Ok(())
}
