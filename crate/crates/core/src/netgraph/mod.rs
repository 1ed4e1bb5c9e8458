//! Weighted directed user-mention graphs and their analytics.
//!
//! An edge `u -> v` of weight `k` means `u` mentioned `v` in `k` tweets.
//! Nodes are kept sorted by handle, so node index order is also the
//! lexicographic order used for every tie-break and label numbering.

mod community;
mod pathweight;

pub use community::{detect_communities, modularity, CommunityMethod, CommunityOptions};
pub use pathweight::{path_weight_matrix, spectral_radius, DenseMatrix};

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use thiserror::Error;

use crate::ingest::Tweet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("density is undefined for {0} node(s)")]
    UndefinedDensity(usize),
    #[error("average degree is undefined for an empty graph")]
    UndefinedAverageDegree,
    #[error("graph is empty")]
    EmptyGraph,
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("attenuation {attenuation} must be positive and finite")]
    InvalidAttenuation { attenuation: f64 },
    #[error(
        "path series diverges: attenuation {attenuation} * spectral radius {radius} = {product} >= 1; use an attenuation below {limit}"
    )]
    Divergent {
        attenuation: f64,
        radius: f64,
        product: f64,
        limit: f64,
    },
    #[error("singular system at column {column} (largest pivot {pivot:e})")]
    Singular { column: usize, pivot: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Node {
    pub handle: String,
    pub agency_type: Option<String>,
    /// Tweets authored in the corpus the graph was built from.
    pub tweet_count: usize,
}

/// Weighted directed simple graph: no self-loops, at most one edge per
/// ordered pair, weights at least 1.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MentionGraph {
    nodes: Vec<Node>,
    index: BTreeMap<String, usize>,
    /// `(source, target) -> weight`, sorted.
    edges: BTreeMap<(usize, usize), usize>,
}

/// Accumulates nodes and weighted edges into a [`MentionGraph`].
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    nodes: BTreeMap<String, Node>,
    edges: BTreeMap<(String, String), usize>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&mut self, handle: &str) -> &mut Node {
        self.nodes.entry(handle.into()).or_insert_with(|| Node {
            handle: handle.into(),
            ..Node::default()
        })
    }

    /// Adds `weight` to `source -> target`; self-loops and zero weights
    /// are ignored, endpoints are added as nodes.
    pub fn edge(&mut self, source: &str, target: &str, weight: usize) -> &mut Self {
        self.node(source);
        self.node(target);
        if source != target && weight > 0 {
            *self.edges.entry((source.into(), target.into())).or_insert(0) += weight;
        }
        self
    }

    pub fn build(self) -> MentionGraph {
        let nodes: Vec<Node> = self.nodes.into_values().collect();
        let index: BTreeMap<String, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.handle.clone(), i))
            .collect();
        let edges = self
            .edges
            .into_iter()
            .map(|((s, t), w)| ((index[&s], index[&t]), w))
            .collect();
        MentionGraph { nodes, index, edges }
    }
}

/// Authors and mentioned handles become nodes; each mention adds one to
/// the author's edge weight toward the mentioned handle.
pub fn build_mention_graph<'a>(tweets: impl IntoIterator<Item = &'a Tweet>) -> MentionGraph {
    let mut builder = GraphBuilder::new();
    for tweet in tweets {
        builder.node(&tweet.author_handle).tweet_count += 1;
        for mention in &tweet.mentions {
            builder.edge(&tweet.author_handle, mention, 1);
        }
    }
    builder.build()
}

impl MentionGraph {
    /// Builds from `(source, target, weight)` triples plus extra
    /// isolated nodes.
    pub fn from_edges<'a>(
        nodes: impl IntoIterator<Item = &'a str>,
        edges: impl IntoIterator<Item = (&'a str, &'a str, usize)>,
    ) -> Self {
        let mut b = GraphBuilder::new();
        for n in nodes {
            b.node(n);
        }
        for (s, t, w) in edges {
            b.edge(s, t, w);
        }
        b.build()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_weight(&self) -> usize {
        self.edges.values().sum()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn handle(&self, i: usize) -> &str {
        &self.nodes[i].handle
    }

    pub fn node_id(&self, handle: &str) -> Option<usize> {
        self.index.get(handle).copied()
    }

    pub fn weight(&self, source: &str, target: &str) -> usize {
        match (self.node_id(source), self.node_id(target)) {
            (Some(s), Some(t)) => self.edges.get(&(s, t)).copied().unwrap_or(0),
            _ => 0,
        }
    }

    /// `(source, target, weight)` by index, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.edges.iter().map(|(&(s, t), &w)| (s, t, w))
    }

    pub fn set_agency_types<'a>(&mut self, types: impl IntoIterator<Item = (&'a str, &'a str)>) {
        for (handle, kind) in types {
            if let Some(i) = self.node_id(handle) {
                self.nodes[i].agency_type = Some(kind.into());
            }
        }
    }

    /// Sorted, deduplicated neighbor lists ignoring direction.
    pub fn undirected_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (&(s, t), _) in &self.edges {
            adj[s].push(t);
            adj[t].push(s);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// In plus out edge count per node, weights ignored.
    pub fn total_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for &(s, t) in self.edges.keys() {
            deg[s] += 1;
            deg[t] += 1;
        }
        deg
    }

    /// 0/1 adjacency matrix; `directed = false` symmetrizes it.
    pub fn adjacency_matrix(&self, directed: bool) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.nodes.len());
        for &(s, t) in self.edges.keys() {
            m[(s, t)] = 1.0;
            if !directed {
                m[(t, s)] = 1.0;
            }
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PartitionKind {
    Component,
    Community,
}

impl PartitionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PartitionKind::Component => "component",
            PartitionKind::Community => "community",
        }
    }
}

/// A total labeling of a graph's nodes into disjoint groups. Labels are
/// numbered by the smallest member handle of each group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
    groups: usize,
    pub kind: PartitionKind,
}

impl Partition {
    /// Canonicalizes arbitrary group ids into first-appearance order.
    pub fn from_raw(raw: &[usize], kind: PartitionKind) -> Self {
        let mut remap = BTreeMap::new();
        let labels = raw
            .iter()
            .map(|r| {
                let next = remap.len();
                *remap.entry(*r).or_insert(next)
            })
            .collect();
        Self {
            labels,
            groups: remap.len(),
            kind,
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> usize {
        self.labels[node]
    }

    pub fn group_count(&self) -> usize {
        self.groups
    }

    /// Member node indices per label.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.groups];
        for (node, &l) in self.labels.iter().enumerate() {
            out[l].push(node);
        }
        out
    }

    /// True when both partitions group nodes identically.
    pub fn same_grouping(&self, other: &Partition) -> bool {
        self.labels == other.labels
    }
}

/// Connected components of the undirected view.
pub fn weak_components(g: &MentionGraph) -> Partition {
    let adj = g.undirected_adjacency();
    let mut raw = vec![usize::MAX; g.node_count()];
    let mut next = 0;
    for start in 0..g.node_count() {
        if raw[start] != usize::MAX {
            continue;
        }
        raw[start] = next;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if raw[v] == usize::MAX {
                    raw[v] = next;
                    queue.push_back(v);
                }
            }
        }
        next += 1;
    }
    Partition::from_raw(&raw, PartitionKind::Component)
}

/// Keeps the listed nodes and every edge between them.
pub fn induced_subgraph<S: AsRef<str>>(
    g: &MentionGraph,
    handles: &[S],
) -> Result<MentionGraph, GraphError> {
    let mut keep = BTreeSet::new();
    for h in handles {
        let id = g
            .node_id(h.as_ref())
            .ok_or_else(|| GraphError::UnknownNode(h.as_ref().into()))?;
        keep.insert(id);
    }
    Ok(induced_by_index(g, &keep))
}

fn induced_by_index(g: &MentionGraph, keep: &BTreeSet<usize>) -> MentionGraph {
    let remap: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(new, &old)| (old, new)).collect();
    let nodes: Vec<Node> = keep.iter().map(|&i| g.nodes[i].clone()).collect();
    let index = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.handle.clone(), i))
        .collect();
    let edges = g
        .edges
        .iter()
        .filter_map(|(&(s, t), &w)| Some(((*remap.get(&s)?, *remap.get(&t)?), w)))
        .collect();
    MentionGraph { nodes, index, edges }
}

/// Subgraph induced by the members of one partition group.
pub fn group_subgraph(g: &MentionGraph, partition: &Partition, label: usize) -> MentionGraph {
    let keep = (0..g.node_count())
        .filter(|&i| partition.label(i) == label)
        .collect();
    induced_by_index(g, &keep)
}

/// Label of the component with the most nodes; ties go to the lower label.
pub fn largest_group(partition: &Partition) -> Option<usize> {
    partition
        .groups()
        .iter()
        .enumerate()
        .max_by_key(|(l, members)| (members.len(), Reverse(*l)))
        .map(|(l, _)| l)
}

pub fn largest_component(g: &MentionGraph) -> MentionGraph {
    let comps = weak_components(g);
    match largest_group(&comps) {
        Some(label) => group_subgraph(g, &comps, label),
        None => MentionGraph::default(),
    }
}

/// `E / (N (N - 1))`.
pub fn density_from_counts(nodes: usize, edges: usize) -> Result<f64, GraphError> {
    if nodes < 2 {
        return Err(GraphError::UndefinedDensity(nodes));
    }
    Ok(edges as f64 / (nodes as f64 * (nodes as f64 - 1.0)))
}

/// `E / N`.
pub fn average_degree_from_counts(nodes: usize, edges: usize) -> Result<f64, GraphError> {
    if nodes == 0 {
        return Err(GraphError::UndefinedAverageDegree);
    }
    Ok(edges as f64 / nodes as f64)
}

pub fn density(g: &MentionGraph) -> Result<f64, GraphError> {
    density_from_counts(g.node_count(), g.edge_count())
}

pub fn average_degree(g: &MentionGraph) -> Result<f64, GraphError> {
    average_degree_from_counts(g.node_count(), g.edge_count())
}

/// Longest shortest path (undirected, unweighted) inside the largest
/// weak component. Zero for graphs with fewer than two nodes.
pub fn diameter(g: &MentionGraph) -> usize {
    let comps = weak_components(g);
    let Some(label) = largest_group(&comps) else {
        return 0;
    };
    let adj = g.undirected_adjacency();
    let members: Vec<usize> = (0..g.node_count()).filter(|&i| comps.label(i) == label).collect();
    let mut dist = vec![usize::MAX; g.node_count()];
    let mut best = 0;
    for &source in &members {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            best = best.max(dist[u]);
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    best
}

/// Per group, up to `k` `(handle, total degree)` pairs ranked by degree
/// then handle.
pub fn top_nodes(g: &MentionGraph, partition: &Partition, k: usize) -> Vec<Vec<(String, usize)>> {
    let degrees = g.total_degrees();
    partition
        .groups()
        .into_iter()
        .map(|mut members| {
            // members are ascending, i.e. already lexicographic
            members.sort_by_key(|&i| Reverse(degrees[i]));
            members
                .into_iter()
                .take(k)
                .map(|i| (g.handle(i).into(), degrees[i]))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub label: usize,
    pub nodes: usize,
    pub edges: usize,
    pub density: Option<f64>,
    pub avg_degree: Option<f64>,
    pub diameter: usize,
}

impl GroupSummary {
    pub fn of(label: usize, g: &MentionGraph) -> Self {
        Self {
            label,
            nodes: g.node_count(),
            edges: g.edge_count(),
            density: density(g).ok(),
            avg_degree: average_degree(g).ok(),
            diameter: diameter(g),
        }
    }
}

/// Metrics of every group's induced subgraph.
pub fn summarize(g: &MentionGraph, partition: &Partition) -> Vec<GroupSummary> {
    (0..partition.group_count())
        .map(|label| GroupSummary::of(label, &group_subgraph(g, partition, label)))
        .collect()
}
