//! ForceAtlas2 force-directed layout.
//!
//! Degree-weighted repulsion (exact or Barnes-Hut), linear or LinLog
//! attraction with optional hub dissuasion, gravity toward the origin,
//! overlap prevention, and the swing/traction adaptive speed scheme.

mod quadtree;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::InteractionGraph;
use crate::termmap::SimilarityMap;

pub use quadtree::{Body, QuadTree};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LayoutError {
    #[error("layout needs at least one node")]
    NoNodes,
    #[error("nodes `{0}` and `{1}` occupy the same position")]
    DegenerateGeometry(String, String),
    #[error("invalid layout parameter: {0}")]
    InvalidParams(String),
    #[error("initial positions cover {got} nodes, graph has {expected}")]
    PositionCount { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutParams {
    pub gravity: f64,
    /// Barnes-Hut opening threshold on width / distance; 0 means exact
    /// pairwise repulsion. Smaller values also tighten the convergence and
    /// border-factor checks, so accuracy improves monotonically.
    pub bh_theta: f64,
    /// Highest moment kept for Barnes-Hut cells; 1 is a plain centre of mass.
    pub bh_order: usize,
    /// With overlap prevention, cells nearer than this many combined radii
    /// are always opened.
    pub bh_near_field: f64,
    /// Repulsion constant.
    pub scaling: f64,
    pub dissuade_hubs: bool,
    pub prevent_overlap: bool,
    pub linlog: bool,
    pub iterations: usize,
    pub seed: u64,
    /// Node radius used by overlap prevention; missing nodes get 1.0.
    pub node_sizes: Option<BTreeMap<String, f64>>,
    pub speed_constant: f64,
    pub max_displacement: f64,
    pub jitter_tolerance: f64,
    /// Stop early once the mean displacement of a step falls below this.
    pub displacement_threshold: Option<f64>,
}

impl Default for LayoutParams {
    fn default() -> Self {
        Self {
            gravity: 1.0,
            bh_theta: 1.2,
            bh_order: 16,
            bh_near_field: 8.0,
            scaling: 2.0,
            dissuade_hubs: true,
            prevent_overlap: true,
            linlog: false,
            iterations: 1000,
            seed: 0,
            node_sizes: None,
            speed_constant: 0.1,
            max_displacement: 10.0,
            jitter_tolerance: 1.0,
            displacement_threshold: None,
        }
    }
}

impl LayoutParams {
    pub fn validate(&self) -> Result<(), LayoutError> {
        let bad = |what: &str| Err(LayoutError::InvalidParams(what.to_string()));
        if !(self.gravity >= 0.0 && self.gravity.is_finite()) {
            return bad("gravity must be a finite value >= 0");
        }
        if !(self.bh_theta >= 0.0 && self.bh_theta.is_finite()) {
            return bad("bh_theta must be a finite value >= 0");
        }
        if !(self.scaling > 0.0 && self.scaling.is_finite()) {
            return bad("scaling must be > 0");
        }
        if self.bh_order == 0 {
            return bad("bh_order must be >= 1");
        }
        if self.iterations == 0 {
            return bad("iterations must be positive");
        }
        if !(self.speed_constant > 0.0
            && self.max_displacement > 0.0
            && self.jitter_tolerance > 0.0)
        {
            return bad("speed constant, displacement cap and jitter tolerance must be > 0");
        }
        if let Some(sizes) = &self.node_sizes {
            if sizes.values().any(|r| !(*r >= 0.0 && r.is_finite())) {
                return bad("node sizes must be finite and >= 0");
            }
        }
        Ok(())
    }
}

/// Undirected weighted view of a graph for layout. Degree counts incident
/// edges; nodes are indexed in the order given.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutGraph {
    pub nodes: Vec<String>,
    /// `(source, target, weight)`; direction only matters for hub dissuasion.
    pub edges: Vec<(usize, usize, f64)>,
}

impl LayoutGraph {
    pub fn new(nodes: Vec<String>, edges: Vec<(usize, usize, f64)>) -> Self {
        Self { nodes, edges }
    }

    /// Every distinct directed edge with unit weight.
    pub fn from_interaction(g: &InteractionGraph) -> Self {
        Self {
            nodes: g.nodes().to_vec(),
            edges: g.edges().map(|(s, t, _)| (s, t, 1.0)).collect(),
        }
    }

    /// Term graph with edges weighted by similarity.
    pub fn from_similarity(sim: &SimilarityMap) -> Self {
        Self {
            nodes: sim.terms.clone(),
            edges: sim.pairs().collect(),
        }
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.nodes.len()];
        for &(s, t, _) in &self.edges {
            d[s] += 1;
            d[t] += 1;
        }
        d
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutState {
    pub positions: Vec<[f64; 2]>,
    pub prev_forces: Vec<[f64; 2]>,
    pub global_speed: f64,
    pub step: u64,
    /// Steps where a displacement was clipped to the cap.
    pub cap_hits: u64,
    /// Times coincident nodes had to be separated by jitter.
    pub jitter_events: u64,
}

impl LayoutState {
    pub fn from_positions(positions: Vec<[f64; 2]>) -> Self {
        let n = positions.len();
        Self {
            positions,
            prev_forces: vec![[0.0; 2]; n],
            global_speed: 1.0,
            step: 0,
            cap_hits: 0,
            jitter_events: 0,
        }
    }

    pub fn position_map(&self, nodes: &[String]) -> BTreeMap<String, [f64; 2]> {
        nodes
            .iter()
            .cloned()
            .zip(self.positions.iter().copied())
            .collect()
    }
}

/// Seeded uniform positions in a square whose side grows with `sqrt(n)`.
pub fn init_layout(nodes: &[String], seed: u64) -> Result<LayoutState, LayoutError> {
    if nodes.is_empty() {
        return Err(LayoutError::NoNodes);
    }
    let half = 10.0 * (nodes.len() as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::BTreeSet::new();
    let mut positions = Vec::with_capacity(nodes.len());
    while positions.len() < nodes.len() {
        let p = [rng.gen_range(-half..half), rng.gen_range(-half..half)];
        if seen.insert((p[0].to_bits(), p[1].to_bits())) {
            positions.push(p);
        }
    }
    Ok(LayoutState::from_positions(positions))
}

struct Prepared {
    mass: Vec<f64>,
    radius: Vec<f64>,
}

fn prepare(g: &LayoutGraph, p: &LayoutParams) -> Prepared {
    let mass = g.degrees().into_iter().map(|d| d as f64 + 1.0).collect();
    let radius = g
        .nodes
        .iter()
        .map(|n| {
            p.node_sizes
                .as_ref()
                .and_then(|s| s.get(n).copied())
                .unwrap_or(1.0)
        })
        .collect();
    Prepared { mass, radius }
}

/// Magnitude factor `f` such that the repulsive force on `a` is
/// `f * (a - b)`.
#[inline]
fn repulsion_factor(dx: f64, dy: f64, ma: f64, mb: f64, ra: f64, rb: f64, p: &LayoutParams) -> f64 {
    let d = (dx * dx + dy * dy).sqrt();
    if d == 0.0 {
        return 0.0;
    }
    if p.prevent_overlap {
        let border = d - ra - rb;
        if border > 0.0 {
            p.scaling * ma * mb / border / d
        } else {
            100.0 * p.scaling * ma * mb / d
        }
    } else {
        p.scaling * ma * mb / (d * d)
    }
}

fn check_distinct(g: &LayoutGraph, st: &LayoutState) -> Result<(), LayoutError> {
    let mut order: Vec<usize> = (0..st.positions.len()).collect();
    let key = |i: &usize| (st.positions[*i][0].to_bits(), st.positions[*i][1].to_bits());
    order.sort_by_key(key);
    for w in order.windows(2) {
        if key(&w[0]) == key(&w[1]) {
            let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(LayoutError::DegenerateGeometry(
                g.nodes[a].clone(),
                g.nodes[b].clone(),
            ));
        }
    }
    Ok(())
}

/// Repulsive force per node, indexed like `g.nodes`. This is the only
/// term Barnes-Hut approximates.
pub fn repulsion_forces(
    g: &LayoutGraph,
    st: &LayoutState,
    p: &LayoutParams,
) -> Result<Vec<[f64; 2]>, LayoutError> {
    validate_state(g, st)?;
    Ok(repulsion(st, &prepare(g, p), p))
}

fn validate_state(g: &LayoutGraph, st: &LayoutState) -> Result<(), LayoutError> {
    let n = g.nodes.len();
    if n == 0 {
        return Err(LayoutError::NoNodes);
    }
    if st.positions.len() != n {
        return Err(LayoutError::PositionCount {
            expected: n,
            got: st.positions.len(),
        });
    }
    check_distinct(g, st)
}

fn repulsion(st: &LayoutState, prep: &Prepared, p: &LayoutParams) -> Vec<[f64; 2]> {
    let pos = &st.positions;
    let n = pos.len();
    let mut forces = vec![[0.0f64; 2]; n];

    if p.bh_theta == 0.0 {
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let dx = pos[a][0] - pos[b][0];
                let dy = pos[a][1] - pos[b][1];
                let f = repulsion_factor(
                    dx,
                    dy,
                    prep.mass[a],
                    prep.mass[b],
                    prep.radius[a],
                    prep.radius[b],
                    p,
                );
                forces[a][0] += f * dx;
                forces[a][1] += f * dy;
            }
        }
    } else {
        let tree = QuadTree::build(pos, &prep.mass, &prep.radius, p.bh_order);
        for a in 0..n {
            let mut fa = [0.0; 2];
            let near = p
                .prevent_overlap
                .then_some((prep.radius[a], p.bh_near_field));
            tree.for_each_body(pos[a], a, p.bh_theta, near, |body| match body {
                Body::Single(b) => {
                    let dx = pos[a][0] - pos[b][0];
                    let dy = pos[a][1] - pos[b][1];
                    let f = repulsion_factor(
                        dx,
                        dy,
                        prep.mass[a],
                        prep.mass[b],
                        prep.radius[a],
                        prep.radius[b],
                        p,
                    );
                    fa[0] += f * dx;
                    fa[1] += f * dy;
                }
                Body::Aggregate {
                    centroid,
                    mass,
                    mean_radius,
                    reach,
                    moments,
                } => {
                    let z = [pos[a][0] - centroid[0], pos[a][1] - centroid[1]];
                    let mut k = p.scaling * prep.mass[a];
                    if p.prevent_overlap {
                        // border distance, as for a single body of the mean radius
                        let d = (z[0] * z[0] + z[1] * z[1]).sqrt();
                        let border = d - prep.radius[a] - mean_radius;
                        if border > 0.0 {
                            k *= d / border;
                        }
                    }
                    let f = quadtree::far_field(z, mass, reach, moments);
                    fa[0] += k * f[0];
                    fa[1] += k * f[1];
                }
            });
            forces[a] = fa;
        }
    }
    forces
}

/// Net force per node, indexed like `g.nodes`.
pub fn compute_forces(
    g: &LayoutGraph,
    st: &LayoutState,
    p: &LayoutParams,
) -> Result<Vec<[f64; 2]>, LayoutError> {
    validate_state(g, st)?;
    let prep = prepare(g, p);
    let pos = &st.positions;
    let mut forces = repulsion(st, &prep, p);

    for &(s, t, w) in &g.edges {
        if s == t {
            continue;
        }
        let dx = pos[t][0] - pos[s][0];
        let dy = pos[t][1] - pos[s][1];
        let d = (dx * dx + dy * dy).sqrt();
        let reach = if p.prevent_overlap {
            d - prep.radius[s] - prep.radius[t]
        } else {
            d
        };
        if reach <= 0.0 || d == 0.0 {
            continue;
        }
        let mut magnitude = if p.linlog { reach.ln_1p() } else { reach } * w;
        if p.dissuade_hubs {
            magnitude /= prep.mass[s];
        }
        let (ux, uy) = (dx / d * magnitude, dy / d * magnitude);
        forces[s][0] += ux;
        forces[s][1] += uy;
        forces[t][0] -= ux;
        forces[t][1] -= uy;
    }

    if p.gravity > 0.0 {
        for a in 0..pos.len() {
            let d = (pos[a][0] * pos[a][0] + pos[a][1] * pos[a][1]).sqrt();
            if d > 0.0 {
                let f = p.gravity * prep.mass[a] / d;
                forces[a][0] -= f * pos[a][0];
                forces[a][1] -= f * pos[a][1];
            }
        }
    }
    Ok(forces)
}

/// Moves every node sharing a position with an earlier node by a small
/// seeded offset. Returns whether anything moved.
fn separate_coincident(st: &mut LayoutState, seed: u64) -> bool {
    let mut seen = std::collections::BTreeSet::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ st.step.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut moved = false;
    for i in 0..st.positions.len() {
        loop {
            let p = st.positions[i];
            if seen.insert((p[0].to_bits(), p[1].to_bits())) {
                break;
            }
            let scale = p[0].abs().max(p[1].abs()).max(1.0) * 1e-6;
            st.positions[i] = [
                p[0] + rng.gen_range(-scale..scale),
                p[1] + rng.gen_range(-scale..scale),
            ];
            moved = true;
        }
    }
    moved
}

/// One adaptive-speed iteration. Returns the new state and the mean
/// displacement of the step.
pub fn step_layout(
    g: &LayoutGraph,
    st: &LayoutState,
    p: &LayoutParams,
) -> Result<(LayoutState, f64), LayoutError> {
    let mut next = st.clone();
    let forces = match compute_forces(g, &next, p) {
        Ok(f) => f,
        Err(LayoutError::DegenerateGeometry(..)) => {
            separate_coincident(&mut next, p.seed);
            next.jitter_events += 1;
            compute_forces(g, &next, p)?
        }
        Err(e) => return Err(e),
    };
    let prep = prepare(g, p);
    let n = forces.len();

    let mut swing = vec![0.0; n];
    let mut total_swing = 0.0;
    let mut total_traction = 0.0;
    for i in 0..n {
        let (f, q) = (forces[i], st.prev_forces[i]);
        swing[i] = ((f[0] - q[0]).powi(2) + (f[1] - q[1]).powi(2)).sqrt();
        let traction = ((f[0] + q[0]).powi(2) + (f[1] + q[1]).powi(2)).sqrt() / 2.0;
        total_swing += prep.mass[i] * swing[i];
        total_traction += prep.mass[i] * traction;
    }
    let mut speed = st.global_speed;
    if total_swing > 0.0 {
        let target = p.jitter_tolerance * total_traction / total_swing;
        speed = target.min(1.5 * speed).max(1e-12);
    }

    let mut moved = 0.0;
    let mut capped = false;
    for i in 0..n {
        let f = forces[i];
        let norm = (f[0] * f[0] + f[1] * f[1]).sqrt();
        if norm == 0.0 {
            continue;
        }
        let factor = p.speed_constant * speed / (1.0 + speed * swing[i].sqrt());
        let mut dist = factor * norm;
        if dist > p.max_displacement {
            dist = p.max_displacement;
            capped = true;
        }
        let scale = dist / norm;
        next.positions[i][0] += f[0] * scale;
        next.positions[i][1] += f[1] * scale;
        moved += dist;
    }
    if capped {
        next.cap_hits += 1;
    }
    next.prev_forces = forces;
    next.global_speed = speed;
    next.step += 1;
    Ok((next, moved / n as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: u64,
    pub mean_displacement: f64,
    pub global_speed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutRun {
    pub positions: BTreeMap<String, [f64; 2]>,
    pub state: LayoutState,
    pub trace: Vec<TraceRow>,
}

/// Seeded initialization followed by up to `iterations` steps.
pub fn run_layout(g: &LayoutGraph, p: &LayoutParams) -> Result<LayoutRun, LayoutError> {
    p.validate()?;
    let st = init_layout(&g.nodes, p.seed)?;
    run_layout_from(g, st, p)
}

pub fn run_layout_from(
    g: &LayoutGraph,
    mut st: LayoutState,
    p: &LayoutParams,
) -> Result<LayoutRun, LayoutError> {
    p.validate()?;
    if g.nodes.is_empty() {
        return Err(LayoutError::NoNodes);
    }
    let mut trace = Vec::with_capacity(p.iterations);
    for _ in 0..p.iterations {
        let (next, mean) = step_layout(g, &st, p)?;
        st = next;
        trace.push(TraceRow {
            step: st.step,
            mean_displacement: mean,
            global_speed: st.global_speed,
        });
        if p.displacement_threshold.is_some_and(|t| mean < t) {
            break;
        }
    }
    Ok(LayoutRun {
        positions: st.position_map(&g.nodes),
        state: st,
        trace,
    })
}

/// `node,x,y` in node order.
pub fn positions_csv(positions: &BTreeMap<String, [f64; 2]>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["node", "x", "y"])
        .expect("in-memory csv write");
    for (node, [x, y]) in positions {
        w.write_record([node.as_str(), &format!("{x:?}"), &format!("{y:?}")])
            .expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("utf-8")
}

pub fn trace_csv(trace: &[TraceRow]) -> String {
    let mut out = String::from("step,mean_displacement,global_speed\n");
    for r in trace {
        let _ = writeln!(
            out,
            "{},{:?},{:?}",
            r.step, r.mean_displacement, r.global_speed
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("n{i:03}")).collect()
    }

    fn plain() -> LayoutParams {
        LayoutParams {
            bh_theta: 0.0,
            prevent_overlap: false,
            ..LayoutParams::default()
        }
    }

    #[test]
    fn gravity_on_single_node() {
        let g = LayoutGraph::new(names(1), vec![]);
        let st = LayoutState::from_positions(vec![[3.0, 4.0]]);
        let f = compute_forces(&g, &st, &plain()).unwrap();
        assert!((f[0][0] + 0.6).abs() < 1e-12 && (f[0][1] + 0.8).abs() < 1e-12);
    }

    #[test]
    fn disconnected_pair_is_symmetric() {
        let g = LayoutGraph::new(names(2), vec![]);
        let st = LayoutState::from_positions(vec![[-1.5, 0.0], [2.5, 0.0]]);
        let p = LayoutParams {
            gravity: 0.0,
            ..plain()
        };
        let f = compute_forces(&g, &st, &p).unwrap();
        assert_eq!(f[0][0], -f[1][0]);
        assert_eq!(f[0][1], 0.0);
        assert_eq!(f[1][1], 0.0);
        // kr (1)(1) / d
        assert!((f[1][0] - 2.0 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn coincident_nodes_reported_then_jittered() {
        let g = LayoutGraph::new(names(2), vec![]);
        let st = LayoutState::from_positions(vec![[1.0, 1.0], [1.0, 1.0]]);
        assert_eq!(
            compute_forces(&g, &st, &plain()),
            Err(LayoutError::DegenerateGeometry(
                "n000".into(),
                "n001".into()
            ))
        );
        let (next, _) = step_layout(&g, &st, &plain()).unwrap();
        assert_eq!(next.jitter_events, 1);
        assert_ne!(next.positions[0], next.positions[1]);
    }

    #[test]
    fn zero_force_leaves_positions() {
        let g = LayoutGraph::new(names(1), vec![]);
        let st = LayoutState::from_positions(vec![[0.0, 0.0]]);
        let (next, mean) = step_layout(&g, &st, &plain()).unwrap();
        assert_eq!(next.positions, st.positions);
        assert_eq!(mean, 0.0);
    }

    #[test]
    fn init_is_seeded_and_distinct() {
        let n = names(50);
        let a = init_layout(&n, 3).unwrap();
        assert_eq!(a, init_layout(&n, 3).unwrap());
        assert_ne!(a.positions, init_layout(&n, 4).unwrap().positions);
        assert_eq!(init_layout(&[], 1), Err(LayoutError::NoNodes));
        let one = init_layout(&names(1), 9).unwrap();
        assert!(one.positions[0].iter().all(|v| v.is_finite()));
    }

    #[test]
    fn overlapping_pair_gets_strong_repulsion_and_no_attraction() {
        let g = LayoutGraph::new(names(2), vec![(0, 1, 1.0)]);
        let st = LayoutState::from_positions(vec![[0.0, 0.0], [1.0, 0.0]]);
        let p = LayoutParams {
            gravity: 0.0,
            bh_theta: 0.0,
            dissuade_hubs: false,
            ..LayoutParams::default()
        };
        let f = compute_forces(&g, &st, &p).unwrap();
        // masses 2 and 2: 100 * 2 * 4
        assert!((f[1][0] - 800.0).abs() < 1e-9);
    }

    #[test]
    fn params_validation() {
        assert!(LayoutParams::default().validate().is_ok());
        let p = LayoutParams {
            scaling: 0.0,
            ..LayoutParams::default()
        };
        assert!(p.validate().is_err());
        let p = LayoutParams {
            iterations: 0,
            ..LayoutParams::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn csv_headers() {
        let pos = BTreeMap::from([("a".to_string(), [1.0, 2.0])]);
        assert_eq!(positions_csv(&pos), "node,x,y\na,1.0,2.0\n");
        let t = [TraceRow {
            step: 1,
            mean_displacement: 0.5,
            global_speed: 1.0,
        }];
        assert_eq!(
            trace_csv(&t),
            "step,mean_displacement,global_speed\n1,0.5,1.0\n"
        );
    }
}
