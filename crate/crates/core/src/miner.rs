//! Proto-taxonomy mining from intent identifiers: separator ranking by
//! concept-bag perplexity, identifier splitting, the level-grouping rule, and
//! the taxonomy rate.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::Workspace;

/// The four identifier conventions considered when splitting names into
/// concepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeparatorKind {
    Underscore,
    Dash,
    Period,
    Camelcase,
}

impl SeparatorKind {
    /// All separators in tie-break priority order.
    pub const ALL: [SeparatorKind; 4] = [
        SeparatorKind::Underscore,
        SeparatorKind::Dash,
        SeparatorKind::Period,
        SeparatorKind::Camelcase,
    ];

    /// Join concepts into an identifier; the inverse of [`split_identifier`].
    pub fn join(&self, concepts: &[String]) -> String {
        match self {
            SeparatorKind::Underscore => concepts.join("_"),
            SeparatorKind::Dash => concepts.join("-"),
            SeparatorKind::Period => concepts.join("."),
            SeparatorKind::Camelcase => concepts
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if i == 0 {
                        c.clone()
                    } else {
                        let mut chars = c.chars();
                        match chars.next() {
                            Some(first) => {
                                first.to_uppercase().collect::<String>() + chars.as_str()
                            }
                            None => String::new(),
                        }
                    }
                })
                .collect(),
        }
    }
}

impl std::fmt::Display for SeparatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SeparatorKind::Underscore => "underscore",
            SeparatorKind::Dash => "dash",
            SeparatorKind::Period => "period",
            SeparatorKind::Camelcase => "camelcase",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for SeparatorKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "underscore" => Ok(Self::Underscore),
            "dash" => Ok(Self::Dash),
            "period" => Ok(Self::Period),
            "camelcase" => Ok(Self::Camelcase),
            other => Err(format!("unknown separator {other:?}")),
        }
    }
}

/// An intent identifier split into its ordered lowercase concepts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptSequence {
    pub intent_id: String,
    pub concepts: Vec<String>,
}

/// Outcome of mining one workspace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MiningReport {
    pub separator: Option<SeparatorKind>,
    pub sequences: Vec<ConceptSequence>,
    pub intents_with_taxonomy: BTreeSet<String>,
    pub taxonomy_rate: f64,
    pub per_separator_perplexity: BTreeMap<SeparatorKind, f64>,
}

/// Split an identifier into lowercase concepts. Literal separators drop empty
/// tokens from adjacent occurrences; camelcase splits before an uppercase
/// letter preceded by a lowercase letter or digit. An identifier without any
/// separator occurrence yields a single-token sequence.
pub fn split_identifier(id: &str, sep: SeparatorKind) -> ConceptSequence {
    let concepts: Vec<String> = match sep {
        SeparatorKind::Underscore => literal_split(id, '_'),
        SeparatorKind::Dash => literal_split(id, '-'),
        SeparatorKind::Period => literal_split(id, '.'),
        SeparatorKind::Camelcase => camel_split(id),
    };
    let concepts = if concepts.is_empty() {
        vec![id.to_lowercase()]
    } else {
        concepts
    };
    ConceptSequence {
        intent_id: id.to_string(),
        concepts,
    }
}

fn literal_split(id: &str, sep: char) -> Vec<String> {
    id.split(sep)
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

fn camel_split(id: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut prev: Option<char> = None;
    for c in id.chars() {
        let boundary = c.is_uppercase()
            && prev.is_some_and(|p| p.is_lowercase() || p.is_ascii_digit());
        if boundary && !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
        current.push(c);
        prev = Some(c);
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens.into_iter().map(|t| t.to_lowercase()).collect()
}

/// Perplexity (2^entropy, base 2) of the bag of concepts produced by
/// splitting every identifier with `sep`. A bag of N all-distinct tokens
/// scores N; a single repeated token scores 1.
pub fn bag_perplexity(ids: &[String], sep: SeparatorKind) -> f64 {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut total = 0usize;
    for id in ids {
        for token in split_identifier(id, sep).concepts {
            *counts.entry(token).or_insert(0) += 1;
            total += 1;
        }
    }
    if total == 0 {
        return 1.0;
    }
    let total = total as f64;
    let entropy: f64 = counts
        .values()
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum();
    entropy.exp2()
}

/// Default fraction of identifiers a separator must actually split for it to
/// be eligible.
pub const DEFAULT_ELIGIBILITY_FRACTION: f64 = 0.5;

/// Pick the separator with minimum concept-bag perplexity among those that
/// split at least `eligibility_fraction` of the identifiers into two or more
/// tokens. Ties resolve in the order underscore > dash > period > camelcase.
/// Returns the chosen separator (if any) and the full perplexity map.
pub fn rank_separators(
    ids: &[String],
    eligibility_fraction: f64,
) -> (Option<SeparatorKind>, BTreeMap<SeparatorKind, f64>) {
    let mut perplexities = BTreeMap::new();
    let mut best: Option<(SeparatorKind, f64)> = None;
    for sep in SeparatorKind::ALL {
        let perplexity = bag_perplexity(ids, sep);
        perplexities.insert(sep, perplexity);
        let split_count = ids
            .iter()
            .filter(|id| split_identifier(id, sep).concepts.len() >= 2)
            .count();
        let eligible = !ids.is_empty()
            && split_count as f64 / ids.len() as f64 >= eligibility_fraction;
        if eligible && best.is_none_or(|(_, b)| perplexity < b) {
            best = Some((sep, perplexity));
        }
    }
    (best.map(|(sep, _)| sep), perplexities)
}

/// Mine a workspace: rank separators over all intent identifiers, split, and
/// apply the level rule. At each 1-based level the multiset of concepts (over
/// intents deep enough to reach it) is evaluated only when it is neither
/// all-equal nor all-distinct; an intent has taxonomy when its concept at
/// some evaluated level occurs at least twice there. The rate counts
/// user-created intents only.
pub fn mine_workspace(w: &Workspace) -> MiningReport {
    let ids: Vec<String> = w.intents.iter().map(|i| i.identifier.clone()).collect();
    let (separator, per_separator_perplexity) =
        rank_separators(&ids, DEFAULT_ELIGIBILITY_FRACTION);

    let user_total = w.user_intents().count();
    let sequences: Vec<ConceptSequence> = match separator {
        Some(sep) => ids.iter().map(|id| split_identifier(id, sep)).collect(),
        // No structuring separator: keep whole-name sequences for reporting.
        None => ids
            .iter()
            .map(|id| ConceptSequence {
                intent_id: id.clone(),
                concepts: vec![id.to_lowercase()],
            })
            .collect(),
    };

    let mut with_taxonomy: BTreeSet<String> = BTreeSet::new();
    if separator.is_some() {
        let max_depth = sequences.iter().map(|s| s.concepts.len()).max().unwrap_or(0);
        for level in 0..max_depth {
            let at_level: Vec<&ConceptSequence> = sequences
                .iter()
                .filter(|s| s.concepts.len() > level)
                .collect();
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            for seq in &at_level {
                *counts.entry(seq.concepts[level].as_str()).or_insert(0) += 1;
            }
            let all_equal = counts.len() <= 1;
            let all_distinct = counts.values().all(|&c| c == 1);
            if all_equal || all_distinct {
                continue;
            }
            for seq in &at_level {
                if counts[seq.concepts[level].as_str()] >= 2 {
                    with_taxonomy.insert(seq.intent_id.clone());
                }
            }
        }
    }
    // Predefined intents shape the levels but never count toward the rate.
    let predefined: BTreeSet<&str> = w
        .intents
        .iter()
        .filter(|i| i.predefined)
        .map(|i| i.identifier.as_str())
        .collect();
    with_taxonomy.retain(|id| !predefined.contains(id.as_str()));

    let taxonomy_rate = if user_total > 0 {
        with_taxonomy.len() as f64 / user_total as f64
    } else {
        0.0
    };
    MiningReport {
        separator,
        sequences,
        intents_with_taxonomy: with_taxonomy,
        taxonomy_rate,
        per_separator_perplexity,
    }
}
