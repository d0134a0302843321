//! Workspace data model: loading, train/test splitting, out-of-scope scenario
//! generation, workspace filtering, and a deterministic synthetic generator.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::miner::SeparatorKind;
use crate::util::collapse_whitespace;

/// An (utterance, intent identifier) training or test pair.
pub type LabeledPair = (String, String);

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path} at line {line}, column {column}: {message}")]
    Format {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Argument(String),
}

/// One intent: its raw identifier, whether the platform predefined it, and
/// its example utterances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intent {
    #[serde(rename = "intent")]
    pub identifier: String,
    #[serde(default)]
    pub predefined: bool,
    pub examples: Vec<String>,
}

/// A named set of intents with example utterances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Workspace {
    pub name: String,
    #[serde(rename = "language")]
    pub language_tag: String,
    pub intents: Vec<Intent>,
}

impl Workspace {
    /// Check the workspace invariants: non-empty name, unique non-empty
    /// identifiers, at least one non-empty example per intent.
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.name.is_empty() {
            return Err(CorpusError::Validation("workspace name is empty".into()));
        }
        let mut seen = HashSet::new();
        for intent in &self.intents {
            if intent.identifier.is_empty() {
                return Err(CorpusError::Validation(format!(
                    "workspace {:?} has an intent with an empty identifier",
                    self.name
                )));
            }
            if !seen.insert(intent.identifier.as_str()) {
                return Err(CorpusError::Validation(format!(
                    "duplicate intent identifier {:?}",
                    intent.identifier
                )));
            }
            if intent.examples.is_empty() {
                return Err(CorpusError::Validation(format!(
                    "intent {:?} has no examples",
                    intent.identifier
                )));
            }
            if let Some(e) = intent
                .examples
                .iter()
                .find(|e| e.trim().is_empty() || e.trim() != e.as_str())
            {
                return Err(CorpusError::Validation(format!(
                    "intent {:?} has an empty or untrimmed example {:?}",
                    intent.identifier, e
                )));
            }
        }
        Ok(())
    }

    /// Total number of example utterances across all intents.
    pub fn example_count(&self) -> usize {
        self.intents.iter().map(|i| i.examples.len()).sum()
    }

    /// Intents not predefined by the platform.
    pub fn user_intents(&self) -> impl Iterator<Item = &Intent> {
        self.intents.iter().filter(|i| !i.predefined)
    }

    /// All (utterance, intent) pairs in workspace order.
    pub fn pairs(&self) -> Vec<LabeledPair> {
        self.intents
            .iter()
            .flat_map(|i| {
                i.examples
                    .iter()
                    .map(move |e| (e.clone(), i.identifier.clone()))
            })
            .collect()
    }
}

/// On-disk workspace formats accepted by [`load_workspace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorkspaceFormat {
    /// `{"name", "language", "intents": [{"intent", "predefined", "examples"}]}`
    WorkspaceJson,
    /// Keys among train/val/test/oos_train/oos_val/oos_test, each a list of
    /// `[sentence, label]` pairs.
    PairsJson,
}

impl std::str::FromStr for WorkspaceFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "workspace-json" => Ok(Self::WorkspaceJson),
            "pairs-json" => Ok(Self::PairsJson),
            other => Err(format!(
                "unknown format {other:?} (expected workspace-json or pairs-json)"
            )),
        }
    }
}

/// A pairs-format dataset kept with its published split intact.
#[derive(Debug, Clone, Default)]
pub struct PairsDataset {
    pub train: Vec<LabeledPair>,
    pub val: Vec<LabeledPair>,
    pub test: Vec<LabeledPair>,
    pub oos_train: Vec<String>,
    pub oos_val: Vec<String>,
    pub oos_test: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPairs {
    #[serde(default)]
    train: Vec<(String, String)>,
    #[serde(default)]
    val: Vec<(String, String)>,
    #[serde(default)]
    test: Vec<(String, String)>,
    #[serde(default)]
    oos_train: Vec<(String, String)>,
    #[serde(default)]
    oos_val: Vec<(String, String)>,
    #[serde(default)]
    oos_test: Vec<(String, String)>,
}

fn read_file(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn json_error(path: &Path, err: serde_json::Error) -> CorpusError {
    CorpusError::Format {
        path: path.display().to_string(),
        line: err.line(),
        column: err.column(),
        message: err.to_string(),
    }
}

/// Load a workspace from disk in the declared format.
///
/// Utterances are trimmed and internal whitespace collapsed; duplicate
/// (utterance, intent) pairs are preserved as-is. For the pairs format the
/// validation split is merged into train (see [`workspace_from_pairs`]).
pub fn load_workspace(path: &Path, format: WorkspaceFormat) -> Result<Workspace, CorpusError> {
    match format {
        WorkspaceFormat::WorkspaceJson => {
            let text = read_file(path)?;
            let mut w: Workspace =
                serde_json::from_str(&text).map_err(|e| json_error(path, e))?;
            for intent in &mut w.intents {
                for example in &mut intent.examples {
                    *example = collapse_whitespace(example);
                }
            }
            w.validate()?;
            Ok(w)
        }
        WorkspaceFormat::PairsJson => {
            let ds = load_pairs(path)?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "pairs".to_string());
            let w = workspace_from_pairs(&name, &ds, true)?;
            w.validate()?;
            Ok(w)
        }
    }
}

/// Load a pairs-format file keeping its published train/val/test split.
pub fn load_pairs(path: &Path) -> Result<PairsDataset, CorpusError> {
    let text = read_file(path)?;
    let raw: RawPairs = serde_json::from_str(&text).map_err(|e| json_error(path, e))?;
    let norm = |pairs: Vec<(String, String)>| -> Vec<LabeledPair> {
        pairs
            .into_iter()
            .map(|(s, l)| (collapse_whitespace(&s), l))
            .collect()
    };
    let sentences = |pairs: Vec<(String, String)>| -> Vec<String> {
        pairs
            .into_iter()
            .map(|(s, _)| collapse_whitespace(&s))
            .collect()
    };
    Ok(PairsDataset {
        train: norm(raw.train),
        val: norm(raw.val),
        test: norm(raw.test),
        oos_train: sentences(raw.oos_train),
        oos_val: sentences(raw.oos_val),
        oos_test: sentences(raw.oos_test),
    })
}

/// Aggregate a pairs dataset into a workspace, grouping examples by label in
/// first-appearance order. `merge_val` folds the validation split into the
/// intents as well; the out-of-scope lists never become intents.
pub fn workspace_from_pairs(
    name: &str,
    ds: &PairsDataset,
    merge_val: bool,
) -> Result<Workspace, CorpusError> {
    let mut order: Vec<String> = Vec::new();
    let mut by_label: HashMap<String, Vec<String>> = HashMap::new();
    let mut add = |pairs: &[LabeledPair]| {
        for (utt, label) in pairs {
            if !by_label.contains_key(label) {
                order.push(label.clone());
            }
            by_label.entry(label.clone()).or_default().push(utt.clone());
        }
    };
    add(&ds.train);
    if merge_val {
        add(&ds.val);
    }
    add(&ds.test);
    let intents = order
        .into_iter()
        .map(|identifier| {
            let examples = by_label.remove(&identifier).unwrap_or_default();
            Intent {
                identifier,
                predefined: false,
                examples,
            }
        })
        .collect();
    let w = Workspace {
        name: name.to_string(),
        language_tag: "en".to_string(),
        intents,
    };
    w.validate()?;
    Ok(w)
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Per-intent stratified train/test split. The train share is rounded
/// half-up per intent and both sides keep at least one example.
pub fn split_train_test(
    w: &Workspace,
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<LabeledPair>, Vec<LabeledPair>), CorpusError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(CorpusError::Argument(format!(
            "train_fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let singletons: Vec<&str> = w
        .intents
        .iter()
        .filter(|i| i.examples.len() < 2)
        .map(|i| i.identifier.as_str())
        .collect();
    if !singletons.is_empty() {
        return Err(CorpusError::Validation(format!(
            "intents with fewer than 2 examples cannot be split: {}",
            singletons.join(", ")
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for intent in &w.intents {
        let n = intent.examples.len();
        let k = round_half_up(n as f64 * train_fraction).clamp(1, n - 1);
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        for (pos, &i) in idx.iter().enumerate() {
            let pair = (intent.examples[i].clone(), intent.identifier.clone());
            if pos < k {
                train.push(pair);
            } else {
                test.push(pair);
            }
        }
    }
    Ok((train, test))
}

/// One simulated out-of-scope evaluation round: a handful of intents removed
/// from training, their test utterances relabeled as out-of-scope.
#[derive(Debug, Clone)]
pub struct OosScenario {
    pub removed_intents: BTreeSet<String>,
    pub train_set: Vec<LabeledPair>,
    pub test_is: Vec<LabeledPair>,
    pub test_oos: Vec<String>,
    pub seed: u64,
}

/// Build `num_samplings` scenarios, each removing `num_removed` intents drawn
/// uniformly without replacement. Scenario `k` is seeded with `seed + k`.
pub fn make_oos_scenarios(
    train: &[LabeledPair],
    test: &[LabeledPair],
    num_removed: usize,
    num_samplings: usize,
    seed: u64,
) -> Result<Vec<OosScenario>, CorpusError> {
    let mut intents: Vec<&str> = Vec::new();
    let mut seen = HashSet::new();
    for (_, label) in train {
        if seen.insert(label.as_str()) {
            intents.push(label.as_str());
        }
    }
    intents.sort_unstable();
    if num_removed >= intents.len() {
        return Err(CorpusError::Argument(format!(
            "cannot remove {num_removed} intents from {} distinct train intents",
            intents.len()
        )));
    }
    if num_removed > 0 {
        let test_labels: HashSet<&str> = test.iter().map(|(_, l)| l.as_str()).collect();
        let missing: Vec<&str> = intents
            .iter()
            .copied()
            .filter(|i| !test_labels.contains(i))
            .collect();
        if !missing.is_empty() {
            return Err(CorpusError::Argument(format!(
                "removal candidates missing from the test set: {}",
                missing.join(", ")
            )));
        }
    }
    let mut scenarios = Vec::with_capacity(num_samplings);
    for k in 0..num_samplings as u64 {
        let scenario_seed = seed + k;
        let mut rng = ChaCha8Rng::seed_from_u64(scenario_seed);
        let removed: BTreeSet<String> = index::sample(&mut rng, intents.len(), num_removed)
            .into_iter()
            .map(|i| intents[i].to_string())
            .collect();
        let train_set = train
            .iter()
            .filter(|(_, l)| !removed.contains(l))
            .cloned()
            .collect();
        let mut test_is = Vec::new();
        let mut test_oos = Vec::new();
        for (utt, label) in test {
            if removed.contains(label) {
                test_oos.push(utt.clone());
            } else {
                test_is.push((utt.clone(), label.clone()));
            }
        }
        scenarios.push(OosScenario {
            removed_intents: removed,
            train_set,
            test_is,
            test_oos,
            seed: scenario_seed,
        });
    }
    Ok(scenarios)
}

/// Thresholds for keeping a workspace in an evaluation population.
#[derive(Debug, Clone)]
pub struct FilterPolicy {
    pub min_intents: usize,
    pub min_taxonomy_rate: f64,
    pub min_examples_per_intent_ratio: f64,
    pub sigma_rule: f64,
}

impl Default for FilterPolicy {
    fn default() -> Self {
        Self {
            min_intents: 8,
            min_taxonomy_rate: 0.3,
            min_examples_per_intent_ratio: 10.0,
            sigma_rule: 3.0,
        }
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Keep workspaces that clear the policy thresholds, then run one sigma-rule
/// outlier pass on intent and example counts over the surviving population.
pub fn filter_workspaces(
    workspaces: Vec<Workspace>,
    policy: &FilterPolicy,
    rates: &BTreeMap<String, f64>,
) -> Result<Vec<Workspace>, CorpusError> {
    for w in &workspaces {
        if !rates.contains_key(&w.name) {
            return Err(CorpusError::Argument(format!(
                "no taxonomy rate provided for workspace {:?}",
                w.name
            )));
        }
    }
    let survivors: Vec<Workspace> = workspaces
        .into_iter()
        .filter(|w| {
            let intents = w.intents.len();
            let ratio = w.example_count() as f64 / intents.max(1) as f64;
            intents >= policy.min_intents
                && rates[&w.name] > policy.min_taxonomy_rate
                && ratio > policy.min_examples_per_intent_ratio
        })
        .collect();
    if survivors.is_empty() {
        return Ok(survivors);
    }
    let intent_counts: Vec<f64> = survivors.iter().map(|w| w.intents.len() as f64).collect();
    let example_counts: Vec<f64> = survivors.iter().map(|w| w.example_count() as f64).collect();
    let (mi, si) = mean_std(&intent_counts);
    let (me, se) = mean_std(&example_counts);
    Ok(survivors
        .into_iter()
        .filter(|w| {
            let ic = w.intents.len() as f64;
            let ec = w.example_count() as f64;
            (ic - mi).abs() <= policy.sigma_rule * si && (ec - me).abs() <= policy.sigma_rule * se
        })
        .collect())
}

/// Concept tree for the synthetic generator: branches map a concept name to
/// its children, leaves carry the vocabulary used in example utterances.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConceptTree {
    Leaf(Vec<String>),
    Branch(BTreeMap<String, ConceptTree>),
}

impl ConceptTree {
    fn paths(&self) -> Vec<(Vec<String>, Vec<String>)> {
        let mut out = Vec::new();
        match self {
            ConceptTree::Leaf(_) => {}
            ConceptTree::Branch(children) => {
                for (concept, child) in children {
                    Self::walk(&mut vec![concept.clone()], child, &mut out);
                }
            }
        }
        out
    }

    fn walk(
        prefix: &mut Vec<String>,
        node: &ConceptTree,
        out: &mut Vec<(Vec<String>, Vec<String>)>,
    ) {
        match node {
            ConceptTree::Leaf(vocab) => out.push((prefix.clone(), vocab.clone())),
            ConceptTree::Branch(children) => {
                for (concept, child) in children {
                    prefix.push(concept.clone());
                    Self::walk(prefix, child, out);
                    prefix.pop();
                }
            }
        }
    }
}

const NOISE_WORDS: &[&str] = &[
    "please", "would", "like", "the", "a", "to", "my", "me", "can", "you", "i", "need", "want",
    "how", "do", "about", "for", "with", "now", "today",
];

/// [`generate_synthetic_workspace_with`] joined by underscores.
pub fn generate_synthetic_workspace(
    spec: &ConceptTree,
    examples_per_intent: usize,
    noise_rate: f64,
    seed: u64,
) -> Result<Workspace, CorpusError> {
    generate_synthetic_workspace_with(
        spec,
        examples_per_intent,
        noise_rate,
        seed,
        SeparatorKind::Underscore,
    )
}

/// Generate a workspace with one intent per root-to-leaf path of the concept
/// tree. Identifiers join the path concepts with the given separator; each
/// example mixes the leaf vocabulary and path concepts with noise tokens at
/// `noise_rate`. Deterministic in `(spec, parameters, seed)`.
pub fn generate_synthetic_workspace_with(
    spec: &ConceptTree,
    examples_per_intent: usize,
    noise_rate: f64,
    seed: u64,
    separator: SeparatorKind,
) -> Result<Workspace, CorpusError> {
    let paths = spec.paths();
    if paths.len() < 2 {
        return Err(CorpusError::Argument(format!(
            "concept tree needs at least 2 leaves, found {}",
            paths.len()
        )));
    }
    if paths.iter().all(|(p, _)| p.len() < 2) {
        return Err(CorpusError::Argument(
            "concept tree depth must be at least 2".into(),
        ));
    }
    if examples_per_intent == 0 {
        return Err(CorpusError::Argument(
            "examples_per_intent must be at least 1".into(),
        ));
    }
    if let Some((path, _)) = paths.iter().find(|(_, vocab)| vocab.is_empty()) {
        return Err(CorpusError::Argument(format!(
            "empty vocabulary at leaf {:?}",
            path.join("/")
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut intents = Vec::with_capacity(paths.len());
    for (path, vocab) in &paths {
        let identifier = separator.join(path);
        let mut pool: Vec<&str> = vocab.iter().map(String::as_str).collect();
        pool.extend(path.iter().map(String::as_str));
        let mut examples = Vec::with_capacity(examples_per_intent);
        for _ in 0..examples_per_intent {
            let len = rng.random_range(4..=8);
            let mut tokens = Vec::with_capacity(len);
            // Anchor every sentence with one leaf-vocabulary token.
            tokens.push(vocab[rng.random_range(0..vocab.len())].as_str());
            for _ in 1..len {
                if rng.random::<f64>() < noise_rate {
                    tokens.push(NOISE_WORDS[rng.random_range(0..NOISE_WORDS.len())]);
                } else {
                    tokens.push(pool[rng.random_range(0..pool.len())]);
                }
            }
            examples.push(tokens.join(" "));
        }
        intents.push(Intent {
            identifier,
            predefined: false,
            examples,
        });
    }
    let w = Workspace {
        name: "synthetic".to_string(),
        language_tag: "en".to_string(),
        intents,
    };
    w.validate()?;
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn tree_json(text: &str) -> ConceptTree {
        serde_json::from_str(text).unwrap()
    }

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_workspace_json() {
        let f = write_temp(
            r#"{"name":"shop","language":"en","intents":[
                {"intent":"billing_update","predefined":false,"examples":["change  my card","update billing","new card "]},
                {"intent":"greeting","predefined":false,"examples":["hi there","hello","hey"]}
            ]}"#,
        );
        let w = load_workspace(f.path(), WorkspaceFormat::WorkspaceJson).unwrap();
        assert_eq!(w.intents.len(), 2);
        assert_eq!(w.example_count(), 6);
        // whitespace collapsed and trimmed
        assert_eq!(w.intents[0].examples[0], "change my card");
        assert_eq!(w.intents[0].examples[2], "new card");
    }

    #[test]
    fn duplicate_identifier_rejected() {
        let f = write_temp(
            r#"{"name":"x","language":"en","intents":[
                {"intent":"billing","examples":["a"]},
                {"intent":"billing","examples":["b"]}
            ]}"#,
        );
        let err = load_workspace(f.path(), WorkspaceFormat::WorkspaceJson).unwrap_err();
        assert!(err.to_string().contains("billing"), "{err}");
    }

    #[test]
    fn empty_intent_rejected() {
        let f = write_temp(
            r#"{"name":"x","language":"en","intents":[{"intent":"billing","examples":[]}]}"#,
        );
        assert!(load_workspace(f.path(), WorkspaceFormat::WorkspaceJson).is_err());
    }

    #[test]
    fn malformed_json_reports_position() {
        let f = write_temp("{\"name\": \"x\",\n  broken\n}");
        match load_workspace(f.path(), WorkspaceFormat::WorkspaceJson) {
            Err(CorpusError::Format { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn pairs_json_aggregates_by_label() {
        let f = write_temp(
            r#"{"train":[["pay my bill","billing"],["hello","greeting"],["more billing","billing"]],
                "val":[["bill me","billing"]],
                "test":[["hi","greeting"]],
                "oos_test":[["weather today","oos"]]}"#,
        );
        let w = load_workspace(f.path(), WorkspaceFormat::PairsJson).unwrap();
        assert_eq!(w.intents.len(), 2);
        let billing = &w.intents[0];
        assert_eq!(billing.identifier, "billing");
        assert_eq!(billing.examples.len(), 3); // train + merged val
        assert_eq!(w.intents[1].examples.len(), 2); // train + test
        // the oos list never becomes an intent
        assert!(w.intents.iter().all(|i| i.identifier != "oos"));

        let ds = load_pairs(f.path()).unwrap();
        assert_eq!(ds.train.len(), 3);
        assert_eq!(ds.oos_test, vec!["weather today".to_string()]);

        let unmerged = workspace_from_pairs("x", &ds, false).unwrap();
        assert_eq!(unmerged.intents[0].examples.len(), 2);
    }

    fn fixture_workspace() -> Workspace {
        Workspace {
            name: "fix".into(),
            language_tag: "en".into(),
            intents: vec![
                Intent {
                    identifier: "a".into(),
                    predefined: false,
                    examples: (0..4).map(|i| format!("a{i}")).collect(),
                },
                Intent {
                    identifier: "b".into(),
                    predefined: false,
                    examples: (0..5).map(|i| format!("b{i}")).collect(),
                },
            ],
        }
    }

    #[test]
    fn split_rounds_half_up_per_intent() {
        let w = fixture_workspace();
        let (train, test) = split_train_test(&w, 0.75, 7).unwrap();
        let count = |pairs: &[LabeledPair], label: &str| {
            pairs.iter().filter(|(_, l)| l == label).count()
        };
        assert_eq!(count(&train, "a"), 3); // 4 * 0.75 = 3
        assert_eq!(count(&test, "a"), 1);
        assert_eq!(count(&train, "b"), 4); // round_half_up(3.75) = 4
        assert_eq!(count(&test, "b"), 1);
    }

    #[test]
    fn split_is_deterministic_and_partitions() {
        let w = fixture_workspace();
        let (tr1, te1) = split_train_test(&w, 0.5, 99).unwrap();
        let (tr2, te2) = split_train_test(&w, 0.5, 99).unwrap();
        assert_eq!(tr1, tr2);
        assert_eq!(te1, te2);
        let mut all: Vec<LabeledPair> = tr1.iter().chain(te1.iter()).cloned().collect();
        all.sort();
        let mut expected = w.pairs();
        expected.sort();
        assert_eq!(all, expected);
    }

    #[test]
    fn split_rejects_singleton_intents() {
        let w = Workspace {
            name: "x".into(),
            language_tag: "en".into(),
            intents: vec![Intent {
                identifier: "solo".into(),
                predefined: false,
                examples: vec!["only one".into()],
            }],
        };
        let err = split_train_test(&w, 0.75, 0).unwrap_err();
        assert!(err.to_string().contains("solo"));
    }

    #[test]
    fn split_global_share_near_fraction() {
        // 200 intents with example counts cycling 3..=22.
        let intents: Vec<Intent> = (0..200)
            .map(|i| Intent {
                identifier: format!("intent_{i}"),
                predefined: false,
                examples: (0..(3 + i % 20)).map(|j| format!("u{i}_{j}")).collect(),
            })
            .collect();
        let w = Workspace {
            name: "big".into(),
            language_tag: "en".into(),
            intents,
        };
        let (train, test) = split_train_test(&w, 0.75, 3).unwrap();
        let share = train.len() as f64 / (train.len() + test.len()) as f64;
        assert!((share - 0.75).abs() < 0.02, "train share {share}");
    }

    #[test]
    fn scenarios_have_expected_shape() {
        let intents: Vec<Intent> = (0..10)
            .map(|i| Intent {
                identifier: format!("c{i}"),
                predefined: false,
                examples: (0..6).map(|j| format!("u{i}_{j}")).collect(),
            })
            .collect();
        let w = Workspace {
            name: "oos".into(),
            language_tag: "en".into(),
            intents,
        };
        let (train, test) = split_train_test(&w, 0.75, 1).unwrap();
        let scenarios = make_oos_scenarios(&train, &test, 3, 5, 40).unwrap();
        assert_eq!(scenarios.len(), 5);
        for (k, s) in scenarios.iter().enumerate() {
            assert_eq!(s.seed, 40 + k as u64);
            assert_eq!(s.removed_intents.len(), 3);
            // no removed intent leaks into train
            assert!(s.train_set.iter().all(|(_, l)| !s.removed_intents.contains(l)));
            assert!(s.test_is.iter().all(|(_, l)| !s.removed_intents.contains(l)));
            // counts: 10 intents, 6 examples each -> 5 train / 1 test per intent
            assert_eq!(s.train_set.len(), 7 * 5);
            assert_eq!(s.test_is.len(), 7);
            assert_eq!(s.test_oos.len(), 3);
        }
        let again = make_oos_scenarios(&train, &test, 3, 5, 40).unwrap();
        assert_eq!(scenarios[2].removed_intents, again[2].removed_intents);
    }

    #[test]
    fn zero_removed_yields_empty_oos() {
        let w = fixture_workspace();
        let (train, test) = split_train_test(&w, 0.5, 0).unwrap();
        let scenarios = make_oos_scenarios(&train, &test, 0, 2, 0).unwrap();
        assert!(scenarios.iter().all(|s| s.test_oos.is_empty()));
        assert!(scenarios.iter().all(|s| s.train_set.len() == train.len()));
    }

    #[test]
    fn too_many_removed_is_an_error() {
        let w = fixture_workspace();
        let (train, test) = split_train_test(&w, 0.5, 0).unwrap();
        assert!(make_oos_scenarios(&train, &test, 2, 1, 0).is_err());
    }

    fn sized_workspace(name: &str, intents: usize, examples_each: usize) -> Workspace {
        Workspace {
            name: name.into(),
            language_tag: "en".into(),
            intents: (0..intents)
                .map(|i| Intent {
                    identifier: format!("i{i}"),
                    predefined: false,
                    examples: (0..examples_each).map(|j| format!("u{j}")).collect(),
                })
                .collect(),
        }
    }

    #[test]
    fn filter_applies_thresholds_strictly() {
        let policy = FilterPolicy::default();
        let mut rates = BTreeMap::new();
        rates.insert("small".to_string(), 0.9);
        rates.insert("low_rate".to_string(), 0.30); // boundary: excluded
        rates.insert("keeper".to_string(), 0.5);
        let ws = vec![
            sized_workspace("small", 7, 20),
            sized_workspace("low_rate", 20, 20),
            sized_workspace("keeper", 20, 20),
        ];
        let kept = filter_workspaces(ws, &policy, &rates).unwrap();
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].name, "keeper");
    }

    #[test]
    fn filter_sigma_rule_drops_outlier() {
        let policy = FilterPolicy {
            min_intents: 8,
            min_taxonomy_rate: 0.0,
            min_examples_per_intent_ratio: 0.0,
            sigma_rule: 3.0,
        };
        let mut ws: Vec<Workspace> = (0..30)
            .map(|i| sized_workspace(&format!("w{i}"), 20 + i % 5, 3))
            .collect();
        ws.push(sized_workspace("huge", 10_000, 3));
        let rates: BTreeMap<String, f64> =
            ws.iter().map(|w| (w.name.clone(), 1.0)).collect();

        // independent check that 10_000 lies beyond 3 sigma of the population
        let counts: Vec<f64> = ws.iter().map(|w| w.intents.len() as f64).collect();
        let mean = counts.iter().sum::<f64>() / counts.len() as f64;
        let sd = (counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>()
            / counts.len() as f64)
            .sqrt();
        assert!((10_000.0 - mean).abs() > 3.0 * sd);

        let kept = filter_workspaces(ws, &policy, &rates).unwrap();
        assert_eq!(kept.len(), 30);
        assert!(kept.iter().all(|w| w.name != "huge"));
    }

    #[test]
    fn generator_builds_one_intent_per_path() {
        let tree = tree_json(
            r#"{"billing":{"payment":["pay","invoice"],"cancel":["stop","cancel"]},
                "account":{"login":["signin","password"]}}"#,
        );
        let w = generate_synthetic_workspace(&tree, 3, 0.2, 11).unwrap();
        let ids: Vec<&str> = w.intents.iter().map(|i| i.identifier.as_str()).collect();
        assert_eq!(ids, vec!["account_login", "billing_cancel", "billing_payment"]);
        assert!(w.intents.iter().all(|i| i.examples.len() == 3));
    }

    #[test]
    fn generator_is_byte_deterministic() {
        let tree = tree_json(r#"{"a":{"b":["x","y"],"c":["z","w"]}}"#);
        let w1 = generate_synthetic_workspace(&tree, 5, 0.3, 123).unwrap();
        let w2 = generate_synthetic_workspace(&tree, 5, 0.3, 123).unwrap();
        assert_eq!(
            serde_json::to_vec(&w1).unwrap(),
            serde_json::to_vec(&w2).unwrap()
        );
    }

    #[test]
    fn generator_rejects_bad_specs() {
        let empty_leaf = tree_json(r#"{"a":{"b":[],"c":["z"]}}"#);
        assert!(generate_synthetic_workspace(&empty_leaf, 2, 0.0, 0).is_err());
        let single_leaf = tree_json(r#"{"a":{"b":["x"]}}"#);
        assert!(generate_synthetic_workspace(&single_leaf, 2, 0.0, 0).is_err());
        let depth_one = tree_json(r#"{"a":["x"],"b":["y"]}"#);
        assert!(generate_synthetic_workspace(&depth_one, 2, 0.0, 0).is_err());
    }
}
