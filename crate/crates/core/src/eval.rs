//! Evaluation: FAR/FRR/EER/ISER metrics, threshold sweeps, the multi-sampling
//! out-of-scope protocol, and method comparison with improvement buckets.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{make_oos_scenarios, split_train_test, CorpusError, OosScenario, Workspace};
use crate::embedders::{
    cdssm_embed_train, deepwalk_embed, walkmean_embed, CdssmParams, DeepWalkParams, EmbedError,
};
use crate::encoders::{fit_hashed_encoder, load_precomputed, EncoderError, SharedEncoder};
use crate::graph::{build_graph, GraphError};
use crate::miner::{mine_workspace, MiningReport};
use crate::nn::{Activation, DenseNet, NnError, TrainConfig};
use crate::recognizer::{
    train_softmax, train_taxonomy, MapperConfig, Method, Recognizer, RecognizerError,
    TaxonomyRecognizer,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{0}")]
    Argument(String),
    #[error("scores contain no {0} samples")]
    MissingPopulation(&'static str),
    #[error("no BASE results for workspace {0:?}")]
    MissingBase(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    #[error(transparent)]
    Recognizer(#[from] RecognizerError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("csv error: {0}")]
    Csv(String),
}

/// Ground truth for one scored test sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TruthLabel {
    InScope(String),
    Oos,
}

/// One scored test sample: the top score, the predicted class, and the truth.
#[derive(Debug, Clone)]
pub struct LabeledScore {
    pub max_score: f64,
    pub predicted: Option<String>,
    pub truth: TruthLabel,
}

impl LabeledScore {
    fn is_oos(&self) -> bool {
        self.truth == TruthLabel::Oos
    }
}

/// Metrics of one evaluation run at its equal-error threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalResult {
    pub far: f64,
    pub frr: f64,
    pub iser: f64,
    pub eer_crossing: f64,
    pub total_error_at_eer: f64,
    pub theta_star: f64,
    pub sweep: Vec<(f64, f64, f64)>,
    pub seed: u64,
}

fn check_populations(scores: &[LabeledScore]) -> Result<(), EvalError> {
    if !scores.iter().any(LabeledScore::is_oos) {
        return Err(EvalError::MissingPopulation("out-of-scope"));
    }
    if !scores.iter().any(|s| !s.is_oos()) {
        return Err(EvalError::MissingPopulation("in-scope"));
    }
    Ok(())
}

/// False acceptance and false rejection rates at a threshold. A sample is
/// accepted when its top score is at least θ.
pub fn far_frr(scores: &[LabeledScore], theta: f64) -> Result<(f64, f64), EvalError> {
    check_populations(scores)?;
    let mut oos_total = 0usize;
    let mut oos_accepted = 0usize;
    let mut is_total = 0usize;
    let mut is_rejected = 0usize;
    for s in scores {
        let accepted = s.max_score >= theta;
        if s.is_oos() {
            oos_total += 1;
            if accepted {
                oos_accepted += 1;
            }
        } else {
            is_total += 1;
            if !accepted {
                is_rejected += 1;
            }
        }
    }
    Ok((
        oos_accepted as f64 / oos_total as f64,
        is_rejected as f64 / is_total as f64,
    ))
}

/// In-scope error rate with rejection disabled; a missing prediction counts
/// as an error.
pub fn iser(scores: &[LabeledScore]) -> Result<f64, EvalError> {
    let mut is_total = 0usize;
    let mut wrong = 0usize;
    for s in scores {
        if let TruthLabel::InScope(truth) = &s.truth {
            is_total += 1;
            match &s.predicted {
                Some(p) if p == truth => {}
                _ => wrong += 1,
            }
        }
    }
    if is_total == 0 {
        return Err(EvalError::MissingPopulation("in-scope"));
    }
    Ok(wrong as f64 / is_total as f64)
}

/// Candidate thresholds: ±∞ plus the midpoints between consecutive distinct
/// scores.
pub fn candidate_thresholds(scores: &[LabeledScore]) -> Vec<f64> {
    let mut distinct: Vec<f64> = scores.iter().map(|s| s.max_score).collect();
    distinct.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    distinct.dedup();
    let mut candidates = Vec::with_capacity(distinct.len() + 1);
    candidates.push(f64::NEG_INFINITY);
    for pair in distinct.windows(2) {
        candidates.push((pair[0] + pair[1]) / 2.0);
    }
    candidates.push(f64::INFINITY);
    candidates
}

/// Sweep all candidate thresholds and settle on θ*: the candidate minimizing
/// |FAR − FRR|, ties broken by smaller FAR+FRR, then smaller θ. Reports both
/// the conventional crossing value and the total error rate at θ*.
pub fn eer(scores: &[LabeledScore]) -> Result<EvalResult, EvalError> {
    check_populations(scores)?;
    let candidates = candidate_thresholds(scores);
    let mut sweep = Vec::with_capacity(candidates.len());
    let mut best: Option<(f64, f64, f64)> = None; // (theta, far, frr)
    for &theta in &candidates {
        let (far, frr) = far_frr(scores, theta)?;
        sweep.push((theta, far, frr));
        let better = match &best {
            None => true,
            Some((bt, bf, br)) => {
                let gap = (far - frr).abs();
                let best_gap = (bf - br).abs();
                gap < best_gap
                    || (gap == best_gap && far + frr < bf + br)
                    || (gap == best_gap && far + frr == bf + br && theta < *bt)
            }
        };
        if better {
            best = Some((theta, far, frr));
        }
    }
    let (theta_star, far, frr) = best.expect("candidates are never empty");

    let mut errors = 0usize;
    for s in scores {
        let accepted = s.max_score >= theta_star;
        let wrong = match &s.truth {
            TruthLabel::Oos => accepted,
            TruthLabel::InScope(truth) => {
                if accepted {
                    !matches!(&s.predicted, Some(p) if p == truth)
                } else {
                    true
                }
            }
        };
        if wrong {
            errors += 1;
        }
    }
    Ok(EvalResult {
        far,
        frr,
        iser: iser(scores)?,
        eer_crossing: (far + frr) / 2.0,
        total_error_at_eer: errors as f64 / scores.len() as f64,
        theta_star,
        sweep,
        seed: 0,
    })
}

/// Deployment-style thresholding: pick θ* on held-out validation scores,
/// then measure FAR/FRR on fresh test scores at that fixed θ. Returns
/// `(theta, far, frr)`.
pub fn far_frr_at_validation_threshold(
    validation: &[LabeledScore],
    test: &[LabeledScore],
) -> Result<(f64, f64, f64), EvalError> {
    let theta = eer(validation)?.theta_star;
    let (far, frr) = far_frr(test, theta)?;
    Ok((theta, far, frr))
}

/// Evaluation protocol parameters mirroring the multi-sampling experiments.
#[derive(Debug, Clone)]
pub struct Protocol {
    pub num_removed: usize,
    pub num_samplings: usize,
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for Protocol {
    fn default() -> Self {
        Self {
            num_removed: 5,
            num_samplings: 20,
            train_fraction: 0.75,
            seed: 0,
        }
    }
}

/// How utterances get encoded inside the protocol.
#[derive(Debug, Clone)]
pub enum EncoderSpec {
    Hashed { bucket_count: usize, dim: usize },
    Precomputed { path: PathBuf },
}

impl Default for EncoderSpec {
    fn default() -> Self {
        EncoderSpec::Hashed {
            bucket_count: 4096,
            dim: 512,
        }
    }
}

#[derive(Debug, Clone)]
pub struct WalkMeanParams {
    pub walks_per_class: usize,
    pub walk_length: usize,
}

impl Default for WalkMeanParams {
    fn default() -> Self {
        Self {
            walks_per_class: 10,
            walk_length: 20,
        }
    }
}

/// All model hyperparameters used by the protocol.
#[derive(Debug, Clone, Default)]
pub struct ProtocolConfig {
    pub mapper: MapperConfig,
    pub train: TrainConfig,
    pub deepwalk: DeepWalkParams,
    pub walkmean: WalkMeanParams,
    pub cdssm: CdssmParams,
}

/// Why a method produced no result for a sampling.
#[derive(Debug, Clone)]
pub struct MethodFailure {
    /// Skipped (structurally unavailable, e.g. no separator mined) rather
    /// than failed at runtime.
    pub skipped: bool,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct SamplingOutcome {
    pub seed: u64,
    pub result: Result<EvalResult, MethodFailure>,
}

pub type ProtocolResults = BTreeMap<Method, Vec<SamplingOutcome>>;

/// The deterministic split + scenario for sampling `k` of a protocol.
pub fn sampling_scenario(
    w: &Workspace,
    protocol: &Protocol,
    k: u64,
) -> Result<OosScenario, EvalError> {
    let seed = protocol.seed + k;
    let (train, test) = split_train_test(w, protocol.train_fraction, seed)?;
    let mut scenarios = make_oos_scenarios(&train, &test, protocol.num_removed, 1, seed)?;
    Ok(scenarios.remove(0))
}

fn score_scenario(
    recognizer: &Recognizer,
    scenario: &OosScenario,
) -> Result<Vec<LabeledScore>, EvalError> {
    let order = recognizer.class_order();
    let mut scores = Vec::with_capacity(scenario.test_is.len() + scenario.test_oos.len());
    for (utterance, label) in &scenario.test_is {
        let sv = recognizer.score(utterance)?;
        scores.push(LabeledScore {
            max_score: sv.max_score,
            predicted: Some(order[sv.argmax].clone()),
            truth: TruthLabel::InScope(label.clone()),
        });
    }
    for utterance in &scenario.test_oos {
        let sv = recognizer.score(utterance)?;
        scores.push(LabeledScore {
            max_score: sv.max_score,
            predicted: Some(order[sv.argmax].clone()),
            truth: TruthLabel::Oos,
        });
    }
    Ok(scores)
}

fn taxonomy_recognizer_for(
    method: Method,
    report: &MiningReport,
    scenario: &OosScenario,
    encoder: &SharedEncoder,
    config: &ProtocolConfig,
    seed: u64,
) -> Result<TaxonomyRecognizer, EvalError> {
    if report.separator.is_none() {
        return Err(EvalError::Argument(
            "no separator mined; taxonomy methods unavailable".into(),
        ));
    }
    let train_classes: BTreeSet<&str> = scenario
        .train_set
        .iter()
        .map(|(_, l)| l.as_str())
        .collect();
    let sequences: Vec<_> = report
        .sequences
        .iter()
        .filter(|s| train_classes.contains(s.intent_id.as_str()))
        .cloned()
        .collect();
    let mut cfg = config.train.clone();
    cfg.seed = seed;
    match method {
        Method::DeepWalk => {
            let g = build_graph(&sequences)?;
            let params = DeepWalkParams {
                seed,
                ..config.deepwalk.clone()
            };
            let outcome = deepwalk_embed(&g, &params)?;
            Ok(train_taxonomy(
                &scenario.train_set,
                encoder.clone(),
                outcome.table,
                &config.mapper,
                &cfg,
            )?)
        }
        Method::WalkMean => {
            let g = build_graph(&sequences)?;
            let table = walkmean_embed(
                &g,
                encoder.as_ref(),
                config.walkmean.walks_per_class,
                config.walkmean.walk_length,
                seed,
            )?;
            Ok(train_taxonomy(
                &scenario.train_set,
                encoder.clone(),
                table,
                &config.mapper,
                &cfg,
            )?)
        }
        Method::Cdssm => {
            let seq_map: BTreeMap<String, Vec<String>> = sequences
                .iter()
                .map(|s| (s.intent_id.clone(), s.concepts.clone()))
                .collect();
            let mut data = Vec::with_capacity(scenario.train_set.len());
            for (utterance, label) in &scenario.train_set {
                data.push((encoder.encode(utterance)?, label.clone()));
            }
            let mapper = DenseNet::new(
                &[
                    encoder.dimension(),
                    config.mapper.hidden_dim,
                    config.cdssm.m,
                ],
                &[config.mapper.hidden_activation, Activation::Identity],
                seed,
            )?;
            let outcome = cdssm_embed_train(&seq_map, &data, mapper, &config.cdssm, &cfg)?;
            Ok(TaxonomyRecognizer::new(
                encoder.clone(),
                outcome.mapper,
                outcome.table,
                config.mapper.score_metric,
                outcome.epoch_losses,
            )?)
        }
        Method::Base => unreachable!("BASE is not a taxonomy method"),
    }
}

/// One workspace's protocol run, prepared once (mining, precomputed encoder
/// load) so individual samplings can execute independently, in parallel if
/// the caller wants.
pub struct ProtocolRunner<'a> {
    workspace: &'a Workspace,
    methods: &'a [Method],
    protocol: &'a Protocol,
    encoder_spec: &'a EncoderSpec,
    config: &'a ProtocolConfig,
    report: MiningReport,
    precomputed: Option<SharedEncoder>,
}

impl<'a> ProtocolRunner<'a> {
    pub fn new(
        workspace: &'a Workspace,
        methods: &'a [Method],
        protocol: &'a Protocol,
        encoder_spec: &'a EncoderSpec,
        config: &'a ProtocolConfig,
    ) -> Result<Self, EvalError> {
        if methods.is_empty() {
            return Err(EvalError::Argument("no methods requested".into()));
        }
        workspace.validate()?;
        let report = mine_workspace(workspace);
        let precomputed: Option<SharedEncoder> = match encoder_spec {
            EncoderSpec::Precomputed { path } => Some(Arc::new(load_precomputed(path)?)),
            EncoderSpec::Hashed { .. } => None,
        };
        Ok(Self {
            workspace,
            methods,
            protocol,
            encoder_spec,
            config,
            report,
            precomputed,
        })
    }

    pub fn num_samplings(&self) -> usize {
        self.protocol.num_samplings
    }

    pub fn mining_report(&self) -> &MiningReport {
        &self.report
    }

    /// Split, build the shared scenario, and evaluate every method for
    /// sampling `k`. Deterministic in `(inputs, k)`.
    pub fn run_sampling(&self, k: u64) -> Result<Vec<(Method, SamplingOutcome)>, EvalError> {
        let seed = self.protocol.seed + k;
        let scenario = sampling_scenario(self.workspace, self.protocol, k)?;
        let encoder: SharedEncoder = match (&self.precomputed, self.encoder_spec) {
            (Some(enc), _) => enc.clone(),
            (None, EncoderSpec::Hashed { bucket_count, dim }) => {
                let corpus: Vec<String> = scenario
                    .train_set
                    .iter()
                    .map(|(u, _)| u.clone())
                    .collect();
                Arc::new(fit_hashed_encoder(&corpus, *bucket_count, *dim, seed)?)
            }
            _ => unreachable!(),
        };
        let mut out = Vec::with_capacity(self.methods.len());
        for &method in self.methods {
            let outcome = match method {
                Method::Base => {
                    let mut cfg = self.config.train.clone();
                    cfg.seed = seed;
                    train_softmax(
                        &scenario.train_set,
                        encoder.clone(),
                        &self.config.mapper,
                        &cfg,
                    )
                    .map_err(EvalError::from)
                    .map(Recognizer::Softmax)
                }
                m => taxonomy_recognizer_for(m, &self.report, &scenario, &encoder, self.config, seed)
                    .map(Recognizer::Taxonomy),
            };
            let result = outcome
                .and_then(|rec| score_scenario(&rec, &scenario))
                .and_then(|scores| eer(&scores))
                .map(|mut r| {
                    r.seed = seed;
                    r
                })
                .map_err(|e| MethodFailure {
                    skipped: matches!(&e, EvalError::Argument(msg) if msg.contains("no separator mined")),
                    message: e.to_string(),
                });
            out.push((method, SamplingOutcome { seed, result }));
        }
        Ok(out)
    }
}

/// Run the full protocol: for each sampling, split, build one shared OOS
/// scenario, then train and evaluate every requested method on it. The
/// taxonomy is mined once per workspace.
pub fn run_protocol(
    w: &Workspace,
    methods: &[Method],
    protocol: &Protocol,
    encoder_spec: &EncoderSpec,
    config: &ProtocolConfig,
) -> Result<ProtocolResults, EvalError> {
    let runner = ProtocolRunner::new(w, methods, protocol, encoder_spec, config)?;
    let mut results: ProtocolResults = methods.iter().map(|&m| (m, Vec::new())).collect();
    for k in 0..protocol.num_samplings as u64 {
        for (method, outcome) in runner.run_sampling(k)? {
            results
                .get_mut(&method)
                .expect("method present")
                .push(outcome);
        }
    }
    Ok(results)
}

/// Column means over the successful results of one method.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MeanMetrics {
    pub far: f64,
    pub frr: f64,
    pub iser: f64,
    pub eer_crossing: f64,
    pub total_error_at_eer: f64,
}

impl MeanMetrics {
    pub fn from_results<'a>(results: impl Iterator<Item = &'a EvalResult>) -> Option<Self> {
        let mut n = 0usize;
        let mut acc = [0.0f64; 5];
        for r in results {
            acc[0] += r.far;
            acc[1] += r.frr;
            acc[2] += r.iser;
            acc[3] += r.eer_crossing;
            acc[4] += r.total_error_at_eer;
            n += 1;
        }
        if n == 0 {
            return None;
        }
        let n = n as f64;
        Some(Self {
            far: acc[0] / n,
            frr: acc[1] / n,
            iser: acc[2] / n,
            eer_crossing: acc[3] / n,
            total_error_at_eer: acc[4] / n,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BucketMetric {
    Eer,
    Far,
    Iser,
}

impl std::str::FromStr for BucketMetric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "eer" => Ok(Self::Eer),
            "far" => Ok(Self::Far),
            "iser" => Ok(Self::Iser),
            other => Err(format!("unknown metric {other:?} (expected eer, far, or iser)")),
        }
    }
}

/// Which reading of EER feeds the improvement buckets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EerMode {
    Crossing,
    TotalError,
}

pub const BUCKET_LABELS: [&str; 5] = [
    "imp < -5%",
    "-5% <= imp < 5%",
    "5% <= imp < 10%",
    "10% <= imp < 20%",
    "20% <= imp",
];

/// Workspace counts per improvement range, per method, plus the per-workspace
/// best column.
#[derive(Debug, Clone)]
pub struct ImprovementBuckets {
    pub methods: Vec<Method>,
    pub counts: BTreeMap<Method, [usize; 5]>,
    pub best: [usize; 5],
    pub total_workspaces: usize,
}

fn metric_of(m: &MeanMetrics, metric: BucketMetric, eer_mode: EerMode) -> f64 {
    match metric {
        BucketMetric::Far => m.far,
        BucketMetric::Iser => m.iser,
        BucketMetric::Eer => match eer_mode {
            EerMode::Crossing => m.eer_crossing,
            EerMode::TotalError => m.total_error_at_eer,
        },
    }
}

/// Relative improvement in percent; positive means better than BASE. A zero
/// baseline maps to 0 when the method is also zero and to −∞ otherwise.
fn improvement(base: f64, method: f64) -> f64 {
    if base > 0.0 {
        100.0 * (base - method) / base
    } else if method <= 0.0 {
        0.0
    } else {
        f64::NEG_INFINITY
    }
}

fn bucket_of(imp: f64) -> usize {
    if imp < -5.0 {
        0
    } else if imp < 5.0 {
        1
    } else if imp < 10.0 {
        2
    } else if imp < 20.0 {
        3
    } else {
        4
    }
}

/// Bucket each workspace by the relative improvement of every taxonomy
/// method over BASE, mirroring the comparison table layout.
pub fn bucket_report(
    results: &BTreeMap<String, BTreeMap<Method, MeanMetrics>>,
    metric: BucketMetric,
    eer_mode: EerMode,
) -> Result<ImprovementBuckets, EvalError> {
    let mut methods: BTreeSet<Method> = BTreeSet::new();
    for per_method in results.values() {
        for &m in per_method.keys() {
            if m != Method::Base {
                methods.insert(m);
            }
        }
    }
    let methods: Vec<Method> = methods.into_iter().collect();
    let mut counts: BTreeMap<Method, [usize; 5]> =
        methods.iter().map(|&m| (m, [0usize; 5])).collect();
    let mut best = [0usize; 5];
    for (workspace, per_method) in results {
        let base = per_method
            .get(&Method::Base)
            .ok_or_else(|| EvalError::MissingBase(workspace.clone()))?;
        let base_value = metric_of(base, metric, eer_mode);
        let mut best_imp = f64::NEG_INFINITY;
        let mut any = false;
        for &m in &methods {
            if let Some(metrics) = per_method.get(&m) {
                let imp = improvement(base_value, metric_of(metrics, metric, eer_mode));
                counts.get_mut(&m).expect("present")[bucket_of(imp)] += 1;
                best_imp = best_imp.max(imp);
                any = true;
            }
        }
        if any {
            best[bucket_of(best_imp)] += 1;
        }
    }
    Ok(ImprovementBuckets {
        methods,
        counts,
        best,
        total_workspaces: results.len(),
    })
}

// --- CSV / TSV serialization -------------------------------------------

/// One row of the results CSV; metric fields are empty for non-ok rows.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ResultRow {
    pub workspace: String,
    pub method: String,
    pub seed: u64,
    pub status: String,
    pub far: Option<f64>,
    pub frr: Option<f64>,
    pub iser: Option<f64>,
    pub eer_crossing: Option<f64>,
    pub total_error_at_eer: Option<f64>,
    pub theta_star: Option<f64>,
}

impl ResultRow {
    pub fn from_outcome(workspace: &str, method: Method, outcome: &SamplingOutcome) -> Self {
        match &outcome.result {
            Ok(r) => Self {
                workspace: workspace.to_string(),
                method: method.to_string(),
                seed: outcome.seed,
                status: "ok".into(),
                far: Some(r.far),
                frr: Some(r.frr),
                iser: Some(r.iser),
                eer_crossing: Some(r.eer_crossing),
                total_error_at_eer: Some(r.total_error_at_eer),
                theta_star: Some(r.theta_star),
            },
            Err(failure) => Self {
                workspace: workspace.to_string(),
                method: method.to_string(),
                seed: outcome.seed,
                status: if failure.skipped { "skipped" } else { "error" }.into(),
                far: None,
                frr: None,
                iser: None,
                eer_crossing: None,
                total_error_at_eer: None,
                theta_star: None,
            },
        }
    }
}

pub fn write_results_csv<W: std::io::Write>(
    writer: W,
    rows: &[ResultRow],
) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row).map_err(|e| EvalError::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| EvalError::Csv(e.to_string()))?;
    Ok(())
}

pub fn read_results_csv<R: std::io::Read>(reader: R) -> Result<Vec<ResultRow>, EvalError> {
    let mut r = csv::Reader::from_reader(reader);
    let mut rows = Vec::new();
    for (i, record) in r.deserialize::<ResultRow>().enumerate() {
        rows.push(record.map_err(|e| EvalError::Csv(format!("row {}: {e}", i + 2)))?);
    }
    Ok(rows)
}

/// Bucket CSV mirroring the comparison table: one row per range, one column
/// per method plus best, cells are percentages of workspaces.
pub fn write_bucket_csv<W: std::io::Write>(
    writer: &mut W,
    buckets: &ImprovementBuckets,
) -> std::io::Result<()> {
    let header: Vec<String> = std::iter::once("range".to_string())
        .chain(buckets.methods.iter().map(|m| m.to_string()))
        .chain(std::iter::once("best".to_string()))
        .collect();
    writeln!(writer, "{}", header.join(","))?;
    let total = buckets.total_workspaces.max(1) as f64;
    for (i, label) in BUCKET_LABELS.iter().enumerate() {
        let mut cells = vec![format!("\"{label}\"")];
        for m in &buckets.methods {
            cells.push(format!("{:.1}", 100.0 * buckets.counts[m][i] as f64 / total));
        }
        cells.push(format!("{:.1}", 100.0 * buckets.best[i] as f64 / total));
        writeln!(writer, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Per-run sweep dump: θ, FAR, FRR per line.
pub fn write_sweep_tsv<W: std::io::Write>(
    writer: &mut W,
    sweep: &[(f64, f64, f64)],
) -> std::io::Result<()> {
    writeln!(writer, "# theta\tfar\tfrr")?;
    for (theta, far, frr) in sweep {
        writeln!(writer, "{theta}\t{far}\t{frr}")?;
    }
    Ok(())
}
