use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{assign_roles, InteractionGraph, NodeRole};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("graph has no edges")]
    NoEdges,
    #[error("log base must be greater than 1, got {0}")]
    InvalidLogBase(String),
}

/// Counts behind the "degree > 1" reading of hub statistics, reported next to
/// the role table because the two readings disagree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeThresholdCounts {
    pub indegree_at_least_2: usize,
    pub indegree_at_least_2_with_outdegree: usize,
    pub outdegree_at_least_2: usize,
    pub outdegree_at_least_2_with_indegree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub node_count: usize,
    /// Distinct directed edges.
    pub edge_count: usize,
    pub undirected_edge_count: usize,
    /// `edge_count / node_count`.
    pub mean_degree: f64,
    /// `2 E_u / (N (N - 1))` over the undirected projection.
    pub density: f64,
    /// `E / (N (N - 1))`, for comparison.
    pub density_directed: f64,
    /// Undirected diameter of the largest weakly connected component.
    pub diameter: usize,
    pub largest_component_size: usize,
    pub component_count: usize,
    pub isolated_count: usize,
    pub role_counts: BTreeMap<NodeRole, usize>,
    pub degree_thresholds: DegreeThresholdCounts,
}

/// Weakly connected components as sorted node-index lists, ordered by their
/// smallest member.
pub fn weakly_connected_components(g: &InteractionGraph) -> Vec<Vec<usize>> {
    let adj = g.undirected_adjacency();
    let mut comp = vec![usize::MAX; g.node_count()];
    let mut out = Vec::new();
    for start in 0..g.node_count() {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![start];
        comp[start] = id;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = id;
                    members.push(v);
                    queue.push_back(v);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

fn largest_component(comps: &[Vec<usize>]) -> Option<&Vec<usize>> {
    // ties go to the component listed first (smallest member)
    comps.iter().rev().max_by_key(|c| c.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiameterMode {
    #[default]
    Undirected,
}

/// Longest shortest path (in edges) inside the largest weakly connected
/// component, by breadth-first search from every member.
pub fn diameter_of(g: &InteractionGraph, _treat_as: DiameterMode) -> Result<usize, GraphError> {
    if g.edge_count() == 0 {
        return Err(GraphError::NoEdges);
    }
    let adj = g.undirected_adjacency();
    let comps = weakly_connected_components(g);
    let comp = largest_component(&comps).expect("graph with edges has a component");
    let mut dist = vec![usize::MAX; g.node_count()];
    let mut best = 0;
    for &src in comp {
        for &v in comp {
            dist[v] = usize::MAX;
        }
        dist[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u];
            best = best.max(du);
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = du + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    Ok(best)
}

pub fn graph_stats(g: &InteractionGraph) -> Result<GraphStats, GraphError> {
    let n = g.node_count();
    if n == 0 {
        return Err(GraphError::EmptyGraph);
    }
    let e = g.edge_count();
    let eu = g.undirected_edge_count();
    let pairs = n as f64 * (n as f64 - 1.0);
    let (density, density_directed) = if n > 1 {
        (2.0 * eu as f64 / pairs, e as f64 / pairs)
    } else {
        (0.0, 0.0)
    };
    let comps = weakly_connected_components(g);
    let diameter = match diameter_of(g, DiameterMode::Undirected) {
        Ok(d) => d,
        Err(GraphError::NoEdges) => 0,
        Err(other) => return Err(other),
    };

    let mut role_counts: BTreeMap<NodeRole, usize> =
        NodeRole::ALL.iter().map(|r| (*r, 0)).collect();
    for role in assign_roles(g).values() {
        *role_counts.get_mut(role).expect("all roles present") += 1;
    }

    let (indeg, outdeg) = g.degrees();
    let degree_thresholds = DegreeThresholdCounts {
        indegree_at_least_2: indeg.iter().filter(|&&d| d >= 2).count(),
        indegree_at_least_2_with_outdegree: (0..n)
            .filter(|&i| indeg[i] >= 2 && outdeg[i] > 0)
            .count(),
        outdegree_at_least_2: outdeg.iter().filter(|&&d| d >= 2).count(),
        outdegree_at_least_2_with_indegree: (0..n)
            .filter(|&i| outdeg[i] >= 2 && indeg[i] > 0)
            .count(),
    };

    Ok(GraphStats {
        node_count: n,
        edge_count: e,
        undirected_edge_count: eu,
        mean_degree: e as f64 / n as f64,
        density,
        density_directed,
        diameter,
        largest_component_size: largest_component(&comps).map_or(0, Vec::len),
        component_count: comps.len(),
        isolated_count: role_counts[&NodeRole::InformativeOnly],
        role_counts,
        degree_thresholds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub user_id: String,
    pub indegree: usize,
    pub outdegree: usize,
    pub log1p_in: f64,
    pub log1p_out: f64,
}

/// One row per node, sorted by id, with `log(1 + degree)` in `log_base`.
pub fn scatter_data(g: &InteractionGraph, log_base: f64) -> Result<Vec<ScatterRow>, GraphError> {
    if !(log_base > 1.0 && log_base.is_finite()) {
        return Err(GraphError::InvalidLogBase(log_base.to_string()));
    }
    let (indeg, outdeg) = g.degrees();
    let denom = log_base.ln();
    Ok(g.nodes()
        .iter()
        .enumerate()
        .map(|(i, id)| ScatterRow {
            user_id: id.clone(),
            indegree: indeg[i],
            outdegree: outdeg[i],
            log1p_in: (indeg[i] as f64).ln_1p() / denom,
            log1p_out: (outdeg[i] as f64).ln_1p() / denom,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeRanking {
    pub user_id: String,
    pub indegree: usize,
    pub outdegree: usize,
}

/// The `k` highest in-degree and out-degree nodes (ties by id).
pub fn top_nodes(g: &InteractionGraph, k: usize) -> (Vec<DegreeRanking>, Vec<DegreeRanking>) {
    let (indeg, outdeg) = g.degrees();
    let rows: Vec<DegreeRanking> = g
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, id)| DegreeRanking {
            user_id: id.clone(),
            indegree: indeg[i],
            outdegree: outdeg[i],
        })
        .collect();
    let mut by_in = rows.clone();
    by_in.sort_by(|a, b| {
        b.indegree
            .cmp(&a.indegree)
            .then_with(|| a.user_id.cmp(&b.user_id))
    });
    by_in.truncate(k);
    let mut by_out = rows;
    by_out.sort_by(|a, b| {
        b.outdegree
            .cmp(&a.outdegree)
            .then_with(|| a.user_id.cmp(&b.user_id))
    });
    by_out.truncate(k);
    (by_in, by_out)
}
