//! The community-of-attention network: a weighted directed user graph built
//! from mention and retweet interactions.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engagement::{classify_tweet, retweet_handle, TweetKind};
use crate::model::AttentionDataset;

mod export;
mod stats;

pub use export::{
    export_graph, parse_edges_csv, parse_graphml, ExportError, ExportFormat, ParsedGraph,
};
pub use stats::{
    diameter_of, graph_stats, scatter_data, top_nodes, weakly_connected_components, DegreeRanking,
    DegreeThresholdCounts, DiameterMode, GraphError, GraphStats, ScatterRow,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeWeight {
    pub mention_count: u64,
    pub retweet_count: u64,
}

impl EdgeWeight {
    pub fn total(&self) -> u64 {
        self.mention_count + self.retweet_count
    }
}

/// Directed, loop-free, with nodes kept in sorted id order so that node
/// indices and every derived output are deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InteractionGraph {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    edges: BTreeMap<(usize, usize), EdgeWeight>,
    has_profile: Vec<bool>,
}

impl InteractionGraph {
    /// Builds a graph from explicit node and edge lists. Edge endpoints are
    /// added as nodes; self-loops and zero-weight edges are dropped; weights
    /// of repeated pairs accumulate.
    pub fn from_parts<'a>(
        nodes: impl IntoIterator<Item = &'a str>,
        edges: impl IntoIterator<Item = (&'a str, &'a str, EdgeWeight)>,
    ) -> Self {
        let edges: Vec<_> = edges.into_iter().collect();
        let mut ids: BTreeSet<&str> = nodes.into_iter().collect();
        for (s, t, _) in &edges {
            ids.insert(s);
            ids.insert(t);
        }
        let mut g = Self::with_nodes(ids.into_iter().map(str::to_string).collect());
        for (s, t, w) in edges {
            if s == t || w.total() == 0 {
                continue;
            }
            let key = (g.index[s], g.index[t]);
            let e = g.edges.entry(key).or_default();
            e.mention_count += w.mention_count;
            e.retweet_count += w.retweet_count;
        }
        g
    }

    fn with_nodes(nodes: Vec<String>) -> Self {
        let index = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let has_profile = vec![false; nodes.len()];
        Self {
            nodes,
            index,
            edges: BTreeMap::new(),
            has_profile,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn has_profile(&self, idx: usize) -> bool {
        self.has_profile[idx]
    }

    /// Edges as `(source index, target index, weight)` in index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &EdgeWeight)> + '_ {
        self.edges.iter().map(|(&(s, t), w)| (s, t, w))
    }

    pub fn edge(&self, source: &str, target: &str) -> Option<&EdgeWeight> {
        let key = (self.node_index(source)?, self.node_index(target)?);
        self.edges.get(&key)
    }

    /// Distinct-edge in- and out-degree per node index.
    pub fn degrees(&self) -> (Vec<usize>, Vec<usize>) {
        let mut indeg = vec![0; self.nodes.len()];
        let mut outdeg = vec![0; self.nodes.len()];
        for &(s, t) in self.edges.keys() {
            outdeg[s] += 1;
            indeg[t] += 1;
        }
        (indeg, outdeg)
    }

    /// Neighbour lists of the undirected projection, sorted.
    pub fn undirected_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.nodes.len()];
        for &(s, t) in self.edges.keys() {
            adj[s].insert(t);
            adj[t].insert(s);
        }
        adj.into_iter().map(|s| s.into_iter().collect()).collect()
    }

    /// Number of unordered node pairs joined by at least one directed edge.
    pub fn undirected_edge_count(&self) -> usize {
        self.edges
            .keys()
            .filter(|&&(s, t)| s < t || !self.edges.contains_key(&(t, s)))
            .count()
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().map(EdgeWeight::total).sum()
    }
}

/// Turns every mention into one interaction from the author to each mentioned
/// user and every retweet into one interaction from the author to the
/// original poster. A retweet without a structured origin falls back to the
/// handle in its `RT @handle:` prefix, resolved against profile handles.
pub fn build_graph(ds: &AttentionDataset) -> InteractionGraph {
    let handles: HashMap<String, &str> = ds
        .profiles
        .values()
        .map(|p| {
            (
                p.handle.trim_start_matches('@').to_lowercase(),
                p.user_id.as_str(),
            )
        })
        .collect();

    let mut ids: BTreeSet<&str> = BTreeSet::new();
    let mut interactions: Vec<(&str, &str, EdgeWeight)> = Vec::new();
    for ev in &ds.events {
        ids.insert(&ev.user_id);
        match classify_tweet(ev) {
            TweetKind::Mention => {
                for target in &ev.mentioned_user_ids {
                    ids.insert(target);
                    interactions.push((
                        &ev.user_id,
                        target,
                        EdgeWeight {
                            mention_count: 1,
                            retweet_count: 0,
                        },
                    ));
                }
            }
            TweetKind::Retweet => {
                let origin = ev.retweet_of_user_id.as_deref().or_else(|| {
                    retweet_handle(&ev.text).and_then(|h| handles.get(&h.to_lowercase()).copied())
                });
                if let Some(origin) = origin {
                    ids.insert(origin);
                    interactions.push((
                        &ev.user_id,
                        origin,
                        EdgeWeight {
                            mention_count: 0,
                            retweet_count: 1,
                        },
                    ));
                }
            }
            TweetKind::Regular => {}
        }
    }
    let mut g = InteractionGraph::from_parts(ids, interactions);
    for (i, id) in g.nodes.iter().enumerate() {
        g.has_profile[i] = ds.profiles.contains_key(id);
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeRole {
    InformativeOnly,
    SourceOnly,
    SinkOnly,
    Mixed,
}

impl NodeRole {
    pub const ALL: [NodeRole; 4] = [
        NodeRole::SourceOnly,
        NodeRole::SinkOnly,
        NodeRole::Mixed,
        NodeRole::InformativeOnly,
    ];

    pub fn from_degrees(indegree: usize, outdegree: usize) -> Self {
        match (indegree > 0, outdegree > 0) {
            (false, false) => NodeRole::InformativeOnly,
            (false, true) => NodeRole::SourceOnly,
            (true, false) => NodeRole::SinkOnly,
            (true, true) => NodeRole::Mixed,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            NodeRole::InformativeOnly => "InformativeOnly",
            NodeRole::SourceOnly => "SourceOnly",
            NodeRole::SinkOnly => "SinkOnly",
            NodeRole::Mixed => "Mixed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        NodeRole::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

impl fmt::Display for NodeRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Roles from distinct-edge degrees; weights play no part.
pub fn assign_roles(g: &InteractionGraph) -> BTreeMap<String, NodeRole> {
    let (indeg, outdeg) = g.degrees();
    g.nodes
        .iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), NodeRole::from_degrees(indeg[i], outdeg[i])))
        .collect()
}
