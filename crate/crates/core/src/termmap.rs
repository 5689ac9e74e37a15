//! Bio term maps: frequent unigrams and bigrams, their co-occurrence across
//! bios, association-strength normalization and greedy modularity
//! clustering of the resulting term graph.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::textprep::TokenizedBio;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TermMapError {
    #[error("term `{0}` has zero frequency")]
    ZeroFrequency(String),
    #[error("ngram_max must be 1 or 2, got {0}")]
    InvalidNgram(usize),
    #[error("resolution must be positive")]
    InvalidResolution,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermStats {
    pub term: String,
    /// Number of bios containing the term.
    pub frequency: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TermMapParams {
    pub min_frequency: u64,
    pub ngram_max: usize,
    pub resolution: f64,
}

impl Default for TermMapParams {
    fn default() -> Self {
        Self {
            min_frequency: 2,
            ngram_max: 2,
            resolution: 1.0,
        }
    }
}

/// The distinct unigrams, and bigrams of adjacent tokens when `ngram_max`
/// is 2, present in one bio.
fn bio_terms(tokens: &[String], ngram_max: usize) -> BTreeSet<String> {
    let mut set: BTreeSet<String> = tokens.iter().cloned().collect();
    if ngram_max >= 2 {
        for w in tokens.windows(2) {
            set.insert(format!("{} {}", w[0], w[1]));
        }
    }
    set
}

/// Terms with document frequency at least `min_frequency`, sorted by
/// frequency descending then term.
pub fn extract_terms(
    bios: &[TokenizedBio],
    min_frequency: u64,
    ngram_max: usize,
) -> Result<Vec<TermStats>, TermMapError> {
    if !(1..=2).contains(&ngram_max) {
        return Err(TermMapError::InvalidNgram(ngram_max));
    }
    let mut df: BTreeMap<String, u64> = BTreeMap::new();
    for bio in bios {
        for t in bio_terms(&bio.tokens, ngram_max) {
            *df.entry(t).or_default() += 1;
        }
    }
    let mut terms: Vec<TermStats> = df
        .into_iter()
        .filter(|(_, f)| *f >= min_frequency.max(1))
        .map(|(term, frequency)| TermStats { term, frequency })
        .collect();
    terms.sort_by(|a, b| {
        b.frequency
            .cmp(&a.frequency)
            .then_with(|| a.term.cmp(&b.term))
    });
    Ok(terms)
}

/// Symmetric term-by-term counts of bios containing both terms; the
/// diagonal is always zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CooccurrenceMatrix {
    pub terms: Vec<String>,
    /// Upper triangle only, keyed `(i, j)` with `i < j`.
    cells: BTreeMap<(usize, usize), u64>,
}

impl CooccurrenceMatrix {
    pub fn get(&self, i: usize, j: usize) -> u64 {
        if i == j {
            return 0;
        }
        let key = if i < j { (i, j) } else { (j, i) };
        self.cells.get(&key).copied().unwrap_or(0)
    }

    /// Non-zero cells `(i, j, count)` with `i < j`.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.cells.iter().map(|(&(i, j), &c)| (i, j, c))
    }
}

pub fn cooccurrence_matrix(bios: &[TokenizedBio], terms: &[TermStats]) -> CooccurrenceMatrix {
    let names: Vec<String> = terms.iter().map(|t| t.term.clone()).collect();
    let index: BTreeMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let ngram_max = if names.iter().any(|t| t.contains(' ')) {
        2
    } else {
        1
    };
    let mut cells: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for bio in bios {
        let present: Vec<usize> = bio_terms(&bio.tokens, ngram_max)
            .iter()
            .filter_map(|t| index.get(t.as_str()).copied())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        for (a, &i) in present.iter().enumerate() {
            for &j in &present[a + 1..] {
                *cells.entry((i, j)).or_default() += 1;
            }
        }
    }
    CooccurrenceMatrix {
        terms: names,
        cells,
    }
}

/// Symmetric non-negative term similarities; absent pairs are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMap {
    pub terms: Vec<String>,
    values: BTreeMap<(usize, usize), f64>,
}

impl SimilarityMap {
    /// Builds a map from upper- or lower-triangle entries; the diagonal and
    /// non-positive values are ignored.
    pub fn from_pairs(
        terms: Vec<String>,
        pairs: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Self {
        let mut values = BTreeMap::new();
        for (i, j, v) in pairs {
            if i == j || v <= 0.0 || !v.is_finite() {
                continue;
            }
            let key = if i < j { (i, j) } else { (j, i) };
            values.insert(key, v);
        }
        Self { terms, values }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let key = if i < j { (i, j) } else { (j, i) };
        self.values.get(&key).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Non-zero pairs `(i, j, s)` with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.values.iter().map(|(&(i, j), &v)| (i, j, v))
    }
}

/// `s(i, j) = c(i, j) / (f_i f_j)`.
pub fn association_strength(
    c: &CooccurrenceMatrix,
    freqs: &[u64],
) -> Result<SimilarityMap, TermMapError> {
    if let Some(i) = freqs.iter().position(|&f| f == 0) {
        return Err(TermMapError::ZeroFrequency(
            c.terms.get(i).cloned().unwrap_or_default(),
        ));
    }
    Ok(SimilarityMap::from_pairs(
        c.terms.clone(),
        c.nonzero()
            .map(|(i, j, n)| (i, j, n as f64 / (freqs[i] as f64 * freqs[j] as f64))),
    ))
}

// ---------------------------------------------------------------------------
// Modularity clustering
// ---------------------------------------------------------------------------

struct WeightedGraph {
    adj: Vec<Vec<(usize, f64)>>,
    strength: Vec<f64>,
    /// Sum of strengths, i.e. twice the total edge weight.
    two_m: f64,
}

impl WeightedGraph {
    fn from_similarity(sim: &SimilarityMap) -> Self {
        let n = sim.len();
        let mut adj = vec![Vec::new(); n];
        let mut strength = vec![0.0; n];
        for (i, j, w) in sim.pairs() {
            adj[i].push((j, w));
            adj[j].push((i, w));
            strength[i] += w;
            strength[j] += w;
        }
        let two_m = strength.iter().sum();
        Self {
            adj,
            strength,
            two_m,
        }
    }
}

/// Newman modularity with a resolution parameter for a node-to-community
/// assignment. Zero for a graph without edges.
pub fn modularity(sim: &SimilarityMap, membership: &[usize], resolution: f64) -> f64 {
    let g = WeightedGraph::from_similarity(sim);
    modularity_of(&g, membership, resolution)
}

fn modularity_of(g: &WeightedGraph, membership: &[usize], resolution: f64) -> f64 {
    if g.two_m <= 0.0 {
        return 0.0;
    }
    let mut internal: BTreeMap<usize, f64> = BTreeMap::new();
    let mut total: BTreeMap<usize, f64> = BTreeMap::new();
    for (i, nbrs) in g.adj.iter().enumerate() {
        *total.entry(membership[i]).or_default() += g.strength[i];
        for &(j, w) in nbrs {
            if membership[i] == membership[j] {
                *internal.entry(membership[i]).or_default() += w;
            }
        }
    }
    total
        .iter()
        .map(|(c, k)| {
            internal.get(c).copied().unwrap_or(0.0) / g.two_m
                - resolution * (k / g.two_m) * (k / g.two_m)
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringTrace {
    /// Modularity after the initial singleton partition, each merge, and each
    /// refinement pass, in order.
    pub modularity: Vec<f64>,
}

/// Relabels communities 1.. in order of their smallest member.
fn relabel(membership: &[usize]) -> Vec<usize> {
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    membership
        .iter()
        .map(|c| {
            let next = map.len() + 1;
            *map.entry(*c).or_insert(next)
        })
        .collect()
}

const EPS: f64 = 1e-13;

/// A mutable partition with per-community strength totals. Community ids
/// live in `0..n`, which always leaves a free id for a new community.
struct Partition<'g> {
    g: &'g WeightedGraph,
    resolution: f64,
    membership: Vec<usize>,
    total: Vec<f64>,
    size: Vec<usize>,
}

impl<'g> Partition<'g> {
    fn new(g: &'g WeightedGraph, resolution: f64, membership: Vec<usize>) -> Self {
        let n = membership.len();
        let mut p = Self {
            g,
            resolution,
            membership,
            total: vec![0.0; n],
            size: vec![0; n],
        };
        p.recount();
        p
    }

    fn recount(&mut self) {
        self.total.iter_mut().for_each(|t| *t = 0.0);
        self.size.iter_mut().for_each(|s| *s = 0);
        for (i, &c) in self.membership.iter().enumerate() {
            self.total[c] += self.g.strength[i];
            self.size[c] += 1;
        }
    }

    fn set(&mut self, membership: Vec<usize>) {
        self.membership = membership;
        self.recount();
    }

    fn modularity(&self) -> f64 {
        modularity_of(self.g, &self.membership, self.resolution)
    }

    /// An unused community id; `None` only when every node is a singleton.
    fn free_id(&self) -> Option<usize> {
        self.size.iter().position(|&s| s == 0)
    }

    fn communities(&self) -> Vec<usize> {
        (0..self.size.len()).filter(|&c| self.size[c] > 0).collect()
    }

    /// Weight from `i` to each community, self-loops excluded.
    fn links(&self, i: usize) -> BTreeMap<usize, f64> {
        let mut links = BTreeMap::new();
        for &(j, w) in &self.g.adj[i] {
            if j != i {
                *links.entry(self.membership[j]).or_insert(0.0) += w;
            }
        }
        links
    }

    /// Modularity change from moving `i` into community `to`.
    fn move_gain(&self, i: usize, to: usize, links: &BTreeMap<usize, f64>) -> f64 {
        let from = self.membership[i];
        if to == from {
            return 0.0;
        }
        let two_m = self.g.two_m;
        let k = self.g.strength[i];
        let link = |c| links.get(&c).copied().unwrap_or(0.0);
        2.0 * (link(to) - link(from)) / two_m
            - 2.0 * self.resolution * k * (self.total[to] - self.total[from] + k) / (two_m * two_m)
    }

    fn apply(&mut self, i: usize, to: usize) {
        let from = self.membership[i];
        let k = self.g.strength[i];
        self.total[from] -= k;
        self.size[from] -= 1;
        self.total[to] += k;
        self.size[to] += 1;
        self.membership[i] = to;
    }

    /// Agglomeration: merge the adjacent pair with the largest positive gain
    /// until none is left; ties go to the lowest pair of ids.
    fn merge_greedily(&mut self, trace: &mut Vec<f64>) {
        let two_m = self.g.two_m;
        loop {
            let mut between: BTreeMap<(usize, usize), f64> = BTreeMap::new();
            for (i, nbrs) in self.g.adj.iter().enumerate() {
                for &(j, w) in nbrs {
                    let (a, b) = (self.membership[i], self.membership[j]);
                    if a < b {
                        *between.entry((a, b)).or_default() += w;
                    }
                }
            }
            let mut best: Option<((usize, usize), f64)> = None;
            for (&(a, b), &e) in &between {
                let gain = 2.0
                    * (e / two_m
                        - self.resolution * self.total[a] * self.total[b] / (two_m * two_m));
                if gain > EPS && best.is_none_or(|(_, g0)| gain > g0) {
                    best = Some(((a, b), gain));
                }
            }
            let Some(((a, b), _)) = best else { break };
            let merged = self
                .membership
                .iter()
                .map(|&c| if c == b { a } else { c })
                .collect();
            self.set(merged);
            trace.push(self.modularity());
        }
    }

    /// Moves each node, in `order`, to the neighbouring community with the
    /// best strictly positive gain; repeats until a pass moves nothing.
    fn local_moves(&mut self, order: &[usize]) -> bool {
        let mut any = false;
        loop {
            let mut moved = false;
            for &i in order {
                let links = self.links(i);
                let mut best = (self.membership[i], EPS);
                for &c in links.keys() {
                    let gain = self.move_gain(i, c, &links);
                    if gain > best.1 {
                        best = (c, gain);
                    }
                }
                if best.0 != self.membership[i] {
                    self.apply(i, best.0);
                    moved = true;
                }
            }
            if !moved {
                return any;
            }
            any = true;
        }
    }

    /// Kernighan-Lin style fine-tuning over `nodes`: every node moves once,
    /// each time taking the best available move even at a loss, and the pass
    /// then rolls back to the best partition it visited.
    fn fine_tune(&mut self, nodes: &[usize]) -> bool {
        let start = self.membership.clone();
        let mut current = 0.0;
        let mut best = (EPS, None::<Vec<usize>>);
        let mut moved = vec![false; self.membership.len()];
        for _ in 0..nodes.len() {
            let fresh = self.free_id();
            let mut choice: Option<(usize, usize, f64)> = None;
            for &i in nodes.iter().filter(|&&i| !moved[i]) {
                let links = self.links(i);
                let own = self.membership[i];
                let candidates = links.keys().copied().chain(fresh);
                for c in candidates.filter(|&c| c != own) {
                    if Some(c) == fresh && self.size[own] == 1 {
                        continue;
                    }
                    let gain = self.move_gain(i, c, &links);
                    if choice.is_none_or(|(_, _, g)| gain > g + EPS) {
                        choice = Some((i, c, gain));
                    }
                }
            }
            let Some((i, c, gain)) = choice else { break };
            self.apply(i, c);
            moved[i] = true;
            current += gain;
            if current > best.0 {
                best = (current, Some(self.membership.clone()));
            }
        }
        match best.1 {
            Some(m) => {
                self.set(m);
                true
            }
            None => {
                self.set(start);
                false
            }
        }
    }

    /// Splits `nodes`, currently all in one community, along the sign of the
    /// leading eigenvector of their modularity matrix, fine-tunes, and keeps
    /// the result only if modularity rises.
    fn try_split(&mut self, nodes: &[usize], rng: &mut ChaCha8Rng) -> bool {
        let Some(side) = leading_eigen_split(self.g, self.resolution, nodes, rng) else {
            return false;
        };
        let before = self.modularity();
        let snapshot = self.membership.clone();
        let fresh = self
            .free_id()
            .expect("a community of two or more leaves an id free");
        for (t, &i) in nodes.iter().enumerate() {
            if side[t] {
                self.apply(i, fresh);
            }
        }
        while self.fine_tune(nodes) {}
        if self.modularity() > before + EPS {
            true
        } else {
            self.set(snapshot);
            false
        }
    }

    fn members(&self, c: usize) -> Vec<usize> {
        (0..self.membership.len())
            .filter(|&i| self.membership[i] == c)
            .collect()
    }

    /// Tries to split every community, then to re-split the union of every
    /// adjacent pair of communities.
    fn split_passes(&mut self, rng: &mut ChaCha8Rng) -> bool {
        let mut any = false;
        for c in self.communities() {
            let nodes = self.members(c);
            if nodes.len() > 1 && self.size[c] == nodes.len() {
                any |= self.try_split(&nodes, rng);
            }
        }
        let mut adjacent: BTreeSet<(usize, usize)> = BTreeSet::new();
        for (i, nbrs) in self.g.adj.iter().enumerate() {
            for &(j, _) in nbrs {
                let (a, b) = (self.membership[i], self.membership[j]);
                if a < b {
                    adjacent.insert((a, b));
                }
            }
        }
        for (a, b) in adjacent {
            // earlier re-splits may have reshaped or emptied either community
            if self.size[a] == 0 || self.size[b] == 0 {
                continue;
            }
            let before = self.modularity();
            let snapshot = self.membership.clone();
            let nodes: Vec<usize> = (0..self.membership.len())
                .filter(|&i| self.membership[i] == a || self.membership[i] == b)
                .collect();
            let merged = self
                .membership
                .iter()
                .map(|&c| if c == b { a } else { c })
                .collect();
            self.set(merged);
            if self.try_split(&nodes, rng) && self.modularity() > before + EPS {
                any = true;
            } else {
                self.set(snapshot);
            }
        }
        any
    }
}

/// Sign pattern of the leading eigenvector of the generalized modularity
/// matrix restricted to `nodes`, or `None` when that eigenvalue is not
/// positive (the group is indivisible).
fn leading_eigen_split(
    g: &WeightedGraph,
    resolution: f64,
    nodes: &[usize],
    rng: &mut ChaCha8Rng,
) -> Option<Vec<bool>> {
    use rand::Rng;
    let s = nodes.len();
    let local: BTreeMap<usize, usize> = nodes.iter().enumerate().map(|(t, &i)| (i, t)).collect();
    let adj: Vec<Vec<(usize, f64)>> = nodes
        .iter()
        .map(|&i| {
            g.adj[i]
                .iter()
                .filter_map(|&(j, w)| local.get(&j).map(|&t| (t, w)))
                .collect()
        })
        .collect();
    let k: Vec<f64> = nodes.iter().map(|&i| g.strength[i]).collect();
    let k_sum: f64 = k.iter().sum();
    let scale = resolution / g.two_m;
    // row sums of B restricted to the group, subtracted on the diagonal
    let row: Vec<f64> = (0..s)
        .map(|t| adj[t].iter().map(|&(_, w)| w).sum::<f64>() - scale * k[t] * k_sum)
        .collect();
    let multiply = |x: &[f64]| -> Vec<f64> {
        let kx: f64 = k.iter().zip(x).map(|(a, b)| a * b).sum();
        (0..s)
            .map(|t| {
                adj[t].iter().map(|&(u, w)| w * x[u]).sum::<f64>()
                    - scale * k[t] * kx
                    - row[t] * x[t]
            })
            .collect()
    };
    // shift by a bound on the spectral radius so the top eigenvalue dominates
    let shift = (0..s)
        .map(|t| adj[t].iter().map(|&(_, w)| w).sum::<f64>() + scale * k[t] * k_sum + row[t].abs())
        .fold(0.0, f64::max);
    let mut v: Vec<f64> = (0..s).map(|_| rng.gen_range(-1.0..1.0)).collect();
    for _ in 0..2000 {
        let bv = multiply(&v);
        let next: Vec<f64> = bv.iter().zip(&v).map(|(b, x)| b + shift * x).collect();
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return None;
        }
        let next: Vec<f64> = next.into_iter().map(|x| x / norm).collect();
        let delta: f64 = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        if delta < 1e-12 {
            break;
        }
    }
    let bv = multiply(&v);
    let eigenvalue: f64 = bv.iter().zip(&v).map(|(a, b)| a * b).sum();
    let side: Vec<bool> = v.iter().map(|&x| x > 0.0).collect();
    let mixed = side.iter().any(|&b| b) && side.iter().any(|&b| !b);
    (eigenvalue > EPS && mixed).then_some(side)
}

/// Runs refinement rounds until one no longer raises modularity. A round is
/// community splits and pair re-splits, fine-tuning, local moves and a merge
/// pass; each stage only ever keeps improvements.
fn refine(p: &mut Partition, order: &[usize], rng: &mut ChaCha8Rng, trace: &mut Vec<f64>) {
    let all: Vec<usize> = (0..p.membership.len()).collect();
    loop {
        let before = p.modularity();
        p.split_passes(rng);
        trace.push(p.modularity());
        while p.fine_tune(&all) {}
        trace.push(p.modularity());
        p.local_moves(order);
        trace.push(p.modularity());
        p.merge_greedily(trace);
        if p.modularity() <= before + EPS {
            break;
        }
    }
}

/// Greedy modularity maximization with refinement.
///
/// Two starts are refined and the better result kept: agglomeration from
/// singletons (the pair of communities with the largest positive gain is
/// merged until none helps, ties to the lowest pair), and local moves from
/// singletons in a seed-determined node order. Refinement alternates
/// leading-eigenvector splits of communities and of adjacent community
/// pairs, Kernighan-Lin fine-tuning, local moves and merges until a round
/// stops improving. The trace belongs to the kept start and never decreases.
pub fn cluster_terms_traced(
    sim: &SimilarityMap,
    resolution: f64,
    seed: u64,
) -> Result<(Vec<usize>, ClusteringTrace), TermMapError> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(TermMapError::InvalidResolution);
    }
    let n = sim.len();
    let g = WeightedGraph::from_similarity(sim);
    let singletons: Vec<usize> = (0..n).collect();
    let initial = modularity_of(&g, &singletons, resolution);
    if g.two_m <= 0.0 {
        return Ok((
            relabel(&singletons),
            ClusteringTrace {
                modularity: vec![initial],
            },
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = singletons.clone();
    order.shuffle(&mut rng);

    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
    for start in 0..2 {
        let mut p = Partition::new(&g, resolution, singletons.clone());
        let mut trace = vec![initial];
        if start == 0 {
            p.merge_greedily(&mut trace);
        } else {
            p.local_moves(&order);
            trace.push(p.modularity());
        }
        refine(&mut p, &order, &mut rng, &mut trace);
        let q = p.modularity();
        if best.as_ref().is_none_or(|(b, _, _)| q > b + EPS) {
            best = Some((q, p.membership.clone(), trace));
        }
    }
    let (_, membership, trace) = best.expect("two starts ran");
    Ok((relabel(&membership), ClusteringTrace { modularity: trace }))
}

/// Term to cluster id (contiguous from 1).
pub fn cluster_terms(
    sim: &SimilarityMap,
    resolution: f64,
    seed: u64,
) -> Result<BTreeMap<String, usize>, TermMapError> {
    let (membership, _) = cluster_terms_traced(sim, resolution, seed)?;
    Ok(sim.terms.iter().cloned().zip(membership).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermMapResult {
    pub terms: Vec<TermStats>,
    pub clusters: BTreeMap<String, usize>,
    pub similarity: SimilarityMap,
    pub modularity: f64,
}

/// Extraction, co-occurrence, normalization and clustering in one call.
pub fn build_term_map(
    bios: &[TokenizedBio],
    params: &TermMapParams,
    seed: u64,
) -> Result<TermMapResult, TermMapError> {
    let terms = extract_terms(bios, params.min_frequency, params.ngram_max)?;
    let matrix = cooccurrence_matrix(bios, &terms);
    let freqs: Vec<u64> = terms.iter().map(|t| t.frequency).collect();
    let similarity = association_strength(&matrix, &freqs)?;
    let (membership, trace) = cluster_terms_traced(&similarity, params.resolution, seed)?;
    let clusters = similarity.terms.iter().cloned().zip(membership).collect();
    Ok(TermMapResult {
        terms,
        clusters,
        similarity,
        modularity: trace.modularity.last().copied().unwrap_or(0.0),
    })
}

/// `term,frequency,cluster` rows, with `x,y` columns when positions are given.
pub fn term_map_csv(
    result: &TermMapResult,
    positions: Option<&BTreeMap<String, [f64; 2]>>,
) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["term", "frequency", "cluster"];
    if positions.is_some() {
        header.extend(["x", "y"]);
    }
    w.write_record(&header).expect("in-memory csv write");
    for t in &result.terms {
        let mut row = vec![
            t.term.clone(),
            t.frequency.to_string(),
            result.clusters[&t.term].to_string(),
        ];
        if let Some(pos) = positions {
            let [x, y] = pos.get(&t.term).copied().unwrap_or([f64::NAN, f64::NAN]);
            row.push(format!("{x:?}"));
            row.push(format!("{y:?}"));
        }
        w.write_record(&row).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("utf-8")
}

/// `term_a,term_b,similarity` for every non-zero pair.
pub fn similarity_csv(sim: &SimilarityMap) -> String {
    let mut out = String::from("term_a,term_b,similarity\n");
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    for (i, j, s) in sim.pairs() {
        w.write_record([
            sim.terms[i].as_str(),
            sim.terms[j].as_str(),
            &format!("{s:?}"),
        ])
        .expect("in-memory csv write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("utf-8");
    let _ = write!(out, "{body}");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bio(tokens: &[&str]) -> TokenizedBio {
        TokenizedBio {
            user_id: String::new(),
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn extract_counts_documents() {
        let bios = [bio(&["amo", "vida"]), bio(&["amo", "mãe"])];
        assert_eq!(
            extract_terms(&bios, 2, 1).unwrap(),
            vec![TermStats {
                term: "amo".into(),
                frequency: 2
            }]
        );
        assert!(extract_terms(&bios, 3, 1).unwrap().is_empty());
        assert!(extract_terms(&bios, 1, 3).is_err());
    }

    #[test]
    fn bigrams_are_adjacent_pairs() {
        let bios = [
            bio(&["senador", "república"]),
            bio(&["senador", "república", "senador"]),
        ];
        let terms = extract_terms(&bios, 2, 2).unwrap();
        let names: Vec<&str> = terms.iter().map(|t| t.term.as_str()).collect();
        assert_eq!(names, vec!["república", "senador", "senador república"]);
    }

    #[test]
    fn cooccurrence_cells() {
        let terms = vec![
            TermStats {
                term: "t1".into(),
                frequency: 1,
            },
            TermStats {
                term: "t2".into(),
                frequency: 1,
            },
            TermStats {
                term: "t3".into(),
                frequency: 1,
            },
        ];
        let c = cooccurrence_matrix(&[bio(&["t1", "t2", "t1"])], &terms);
        assert_eq!(c.get(0, 1), 1);
        assert_eq!(c.get(1, 0), 1);
        assert_eq!(c.get(0, 0), 0);
        assert_eq!(c.get(0, 2), 0);
        let c = cooccurrence_matrix(&[bio(&["t1"]), bio(&["t2"]), bio(&["t3"])], &terms);
        assert_eq!(c.nonzero().count(), 0);
    }

    #[test]
    fn association_strength_formula() {
        let terms = vec![
            TermStats {
                term: "a".into(),
                frequency: 4,
            },
            TermStats {
                term: "b".into(),
                frequency: 2,
            },
        ];
        let bios = [bio(&["a", "b"]), bio(&["a", "b"]), bio(&["a"]), bio(&["a"])];
        let c = cooccurrence_matrix(&bios, &terms);
        let s = association_strength(&c, &[4, 2]).unwrap();
        assert_eq!(s.get(0, 1), 0.25);
        assert_eq!(s.get(1, 0), 0.25);
        assert_eq!(
            association_strength(&c, &[4, 0]),
            Err(TermMapError::ZeroFrequency("b".into()))
        );
        let empty = cooccurrence_matrix(&[bio(&["a"]), bio(&["b"])], &terms);
        assert_eq!(
            association_strength(&empty, &[4, 2]).unwrap().get(0, 1),
            0.0
        );
    }

    #[test]
    fn zero_similarity_gives_singletons() {
        let sim = SimilarityMap::from_pairs(vec!["a".into(), "b".into(), "c".into()], []);
        let clusters = cluster_terms(&sim, 1.0, 7).unwrap();
        let ids: BTreeSet<usize> = clusters.values().copied().collect();
        assert_eq!(ids, BTreeSet::from([1, 2, 3]));
    }

    #[test]
    fn two_cliques_split() {
        let names: Vec<String> = (0..8).map(|i| format!("t{i}")).collect();
        let mut pairs = Vec::new();
        for block in [0..4, 4..8] {
            let idx: Vec<usize> = block.collect();
            for (a, &i) in idx.iter().enumerate() {
                for &j in &idx[a + 1..] {
                    pairs.push((i, j, 1.0));
                }
            }
        }
        pairs.push((3, 4, 0.1));
        let sim = SimilarityMap::from_pairs(names, pairs);
        let (m, trace) = cluster_terms_traced(&sim, 1.0, 1).unwrap();
        assert_eq!(m, vec![1, 1, 1, 1, 2, 2, 2, 2]);
        assert!(trace.modularity.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn resolution_must_be_positive() {
        let sim = SimilarityMap::from_pairs(vec!["a".into()], []);
        assert_eq!(
            cluster_terms(&sim, 0.0, 1),
            Err(TermMapError::InvalidResolution)
        );
    }

    #[test]
    fn csv_outputs() {
        let bios = [bio(&["amo", "vida"]), bio(&["amo", "vida"])];
        let r = build_term_map(&bios, &TermMapParams::default(), 1).unwrap();
        let csv = term_map_csv(&r, None);
        assert!(csv.starts_with("term,frequency,cluster\n"));
        assert_eq!(csv.lines().count(), 4);
        assert!(similarity_csv(&r.similarity).starts_with("term_a,term_b,similarity\n"));
    }
}
