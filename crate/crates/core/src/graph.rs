//! The proto-taxonomy graph: class nodes linked to the concepts and concept
//! bigrams of their identifiers, plus uniform random walks over it.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::miner::ConceptSequence;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("{0}")]
    Argument(String),
    #[error("node {0} has no neighbors")]
    IsolatedNode(usize),
}

/// Separator used in bigram node labels; deliberately outside the four
/// identifier separator characters so labels cannot collide with concepts.
pub const BIGRAM_JOINER: char = '»';

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Class,
    Concept,
    Bigram,
}

impl std::fmt::Display for NodeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NodeKind::Class => "class",
            NodeKind::Concept => "concept",
            NodeKind::Bigram => "bigram",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Node {
    pub kind: NodeKind,
    pub label: String,
    /// Natural-language rendering used when walks are spelled out as text:
    /// classes render as their concept sequence, bigrams as their two
    /// concepts, concepts as themselves.
    pub render: String,
}

/// Undirected simple graph with class, concept, and bigram nodes. Edges only
/// ever join a class node with a non-class node.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtoTaxonomyGraph {
    pub nodes: Vec<Node>,
    pub adjacency: Vec<Vec<usize>>,
    pub class_index: BTreeMap<String, usize>,
}

impl ProtoTaxonomyGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Node index of a class by intent identifier.
    pub fn class_node(&self, intent_id: &str) -> Option<usize> {
        self.class_index.get(intent_id).copied()
    }

    /// Intent identifier of a class node, the inverse of [`Self::class_node`].
    pub fn intent_of(&self, node: usize) -> Option<&str> {
        match self.nodes[node].kind {
            NodeKind::Class => Some(self.nodes[node].label.as_str()),
            _ => None,
        }
    }

    pub fn class_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.kind == NodeKind::Class)
            .map(|(i, _)| i)
    }

    /// One edge per line as `kind:label<TAB>kind:label`.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (i, neighbors) in self.adjacency.iter().enumerate() {
            for &j in neighbors {
                if i < j {
                    let a = &self.nodes[i];
                    let b = &self.nodes[j];
                    let _ = writeln!(
                        out,
                        "{}:{}\t{}:{}",
                        a.kind, a.label, b.kind, b.label
                    );
                }
            }
        }
        out
    }
}

/// Build the graph from concept sequences: one class node per intent, one
/// concept node per distinct token, one bigram node per distinct adjacent
/// pair, and edges from each class to its own concepts and bigrams.
pub fn build_graph(sequences: &[ConceptSequence]) -> Result<ProtoTaxonomyGraph, GraphError> {
    if sequences.is_empty() {
        return Err(GraphError::Argument("no concept sequences given".into()));
    }
    let mut nodes: Vec<Node> = Vec::new();
    let mut adjacency: Vec<Vec<usize>> = Vec::new();
    let mut class_index: BTreeMap<String, usize> = BTreeMap::new();
    let mut concept_index: BTreeMap<&str, usize> = BTreeMap::new();
    let mut bigram_index: BTreeMap<String, usize> = BTreeMap::new();

    let add_node = |nodes: &mut Vec<Node>, adjacency: &mut Vec<Vec<usize>>, node: Node| {
        nodes.push(node);
        adjacency.push(Vec::new());
        nodes.len() - 1
    };

    for seq in sequences {
        if class_index.contains_key(&seq.intent_id) {
            return Err(GraphError::Argument(format!(
                "duplicate intent identifier {:?}",
                seq.intent_id
            )));
        }
        if seq.concepts.is_empty() {
            return Err(GraphError::Argument(format!(
                "intent {:?} has an empty concept sequence",
                seq.intent_id
            )));
        }
        let class = add_node(
            &mut nodes,
            &mut adjacency,
            Node {
                kind: NodeKind::Class,
                label: seq.intent_id.clone(),
                render: seq.concepts.join(" "),
            },
        );
        class_index.insert(seq.intent_id.clone(), class);

        let mut targets: Vec<usize> = Vec::new();
        for concept in &seq.concepts {
            let idx = match concept_index.get(concept.as_str()) {
                Some(&i) => i,
                None => {
                    let i = add_node(
                        &mut nodes,
                        &mut adjacency,
                        Node {
                            kind: NodeKind::Concept,
                            label: concept.clone(),
                            render: concept.clone(),
                        },
                    );
                    concept_index.insert(concept.as_str(), i);
                    i
                }
            };
            targets.push(idx);
        }
        for pair in seq.concepts.windows(2) {
            let label = format!("{}{}{}", pair[0], BIGRAM_JOINER, pair[1]);
            let idx = *bigram_index.entry(label.clone()).or_insert_with(|| {
                add_node(
                    &mut nodes,
                    &mut adjacency,
                    Node {
                        kind: NodeKind::Bigram,
                        label,
                        render: format!("{} {}", pair[0], pair[1]),
                    },
                )
            });
            targets.push(idx);
        }
        targets.sort_unstable();
        targets.dedup();
        for t in targets {
            adjacency[class].push(t);
            adjacency[t].push(class);
        }
    }
    // Canonical neighbor order: by (kind, label) of the target, so walks are
    // insensitive to the order classes arrived in.
    let keys: Vec<(NodeKind, String)> = nodes
        .iter()
        .map(|n| (n.kind, n.label.clone()))
        .collect();
    for neighbors in &mut adjacency {
        neighbors.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    }
    Ok(ProtoTaxonomyGraph {
        nodes,
        adjacency,
        class_index,
    })
}

/// A single random walk; the first node is the start node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub node_indices: Vec<usize>,
}

impl Walk {
    /// Spell the walk out as text by joining node renderings.
    pub fn render(&self, g: &ProtoTaxonomyGraph) -> String {
        self.node_indices
            .iter()
            .map(|&i| g.nodes[i].render.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Uniform random walk of exactly `walk_length` nodes starting at `start`.
pub fn random_walk(
    g: &ProtoTaxonomyGraph,
    start: usize,
    walk_length: usize,
    seed: u64,
) -> Result<Walk, GraphError> {
    if start >= g.node_count() {
        return Err(GraphError::Argument(format!(
            "start node {start} out of range ({} nodes)",
            g.node_count()
        )));
    }
    if walk_length == 0 {
        return Err(GraphError::Argument("walk_length must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut node_indices = Vec::with_capacity(walk_length);
    let mut current = start;
    node_indices.push(current);
    for _ in 1..walk_length {
        let neighbors = &g.adjacency[current];
        if neighbors.is_empty() {
            return Err(GraphError::IsolatedNode(current));
        }
        current = neighbors[rng.random_range(0..neighbors.len())];
        node_indices.push(current);
    }
    Ok(Walk { node_indices })
}

/// `walks_per_node` passes over all nodes, shuffling the node order each
/// pass, one walk per node per pass.
pub fn walk_corpus(
    g: &ProtoTaxonomyGraph,
    walks_per_node: usize,
    walk_length: usize,
    seed: u64,
) -> Result<Vec<Walk>, GraphError> {
    if g.node_count() == 0 {
        return Err(GraphError::Argument("empty graph".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut walks = Vec::with_capacity(walks_per_node * g.node_count());
    let mut order: Vec<usize> = (0..g.node_count()).collect();
    for _ in 0..walks_per_node {
        use rand::seq::SliceRandom;
        order.shuffle(&mut rng);
        for &start in &order {
            let walk_seed = rng.random::<u64>();
            walks.push(random_walk(g, start, walk_length, walk_seed)?);
        }
    }
    Ok(walks)
}
