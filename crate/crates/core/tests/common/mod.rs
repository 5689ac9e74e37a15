//! Shared generators and independent oracles for integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};

use canet_core::layout::LayoutGraph;
use canet_core::model::{parse_timestamp, DatePrecision};
use canet_core::{AttentionDataset, PaperRecord, TweetEvent, UserProfile};
use chrono::{Duration, NaiveDate};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn node_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i:04}")).collect()
}

/// Directed G(n, p) without self-loops.
pub fn random_digraph(n: usize, p: f64, seed: u64) -> Vec<(usize, usize)> {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && r.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    edges
}

pub fn random_layout_graph(n: usize, p: f64, seed: u64) -> LayoutGraph {
    LayoutGraph::new(
        node_names(n),
        random_digraph(n, p, seed)
            .into_iter()
            .map(|(a, b)| (a, b, 1.0))
            .collect(),
    )
}

pub fn norm(v: [f64; 2]) -> f64 {
    (v[0] * v[0] + v[1] * v[1]).sqrt()
}

/// Largest per-node `|approx - exact| / |exact|`.
pub fn max_relative_error(approx: &[[f64; 2]], exact: &[[f64; 2]]) -> f64 {
    approx
        .iter()
        .zip(exact)
        .map(|(a, e)| norm([a[0] - e[0], a[1] - e[1]]) / norm(*e))
        .fold(0.0, f64::max)
}

/// Diameter of the undirected projection's largest weakly connected
/// component via Floyd-Warshall; ties between equally large components go
/// to the one holding the smallest node index. Edgeless graphs give 0.
pub fn floyd_warshall_diameter(n: usize, edges: &[(usize, usize)]) -> usize {
    const INF: usize = usize::MAX / 4;
    let mut d = vec![vec![INF; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for &(a, b) in edges {
        d[a][b] = 1;
        d[b][a] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    // components from reachability
    let mut comp = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if comp[i] == usize::MAX {
            let members: Vec<usize> = (0..n).filter(|&j| d[i][j] < INF).collect();
            for &j in &members {
                comp[j] = comps.len();
            }
            comps.push(members);
        }
    }
    let Some(best) = comps
        .iter()
        .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
    else {
        return 0;
    };
    let mut diam = 0;
    for &i in best {
        for &j in best {
            diam = diam.max(d[i][j]);
        }
    }
    diam
}

/// Modularity with resolution for a weighted undirected graph given as a
/// dense symmetric matrix, computed from the textbook double sum.
pub fn dense_modularity(w: &[Vec<f64>], membership: &[usize], resolution: f64) -> f64 {
    let n = w.len();
    let k: Vec<f64> = w.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if membership[i] == membership[j] {
                q += w[i][j] - resolution * k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Best modularity over every set partition (restricted growth strings).
pub fn exhaustive_best_modularity(w: &[Vec<f64>], resolution: f64) -> f64 {
    let n = w.len();
    let mut labels = vec![0usize; n];
    let mut best = f64::MIN;
    fn rec(
        i: usize,
        max_label: usize,
        labels: &mut Vec<usize>,
        w: &[Vec<f64>],
        res: f64,
        best: &mut f64,
    ) {
        if i == labels.len() {
            *best = best.max(dense_modularity(w, labels, res));
            return;
        }
        for l in 0..=max_label + 1 {
            labels[i] = l;
            rec(i + 1, max_label.max(l), labels, w, res, best);
        }
    }
    if n == 0 {
        return 0.0;
    }
    labels[0] = 0;
    rec(1, 0, &mut labels, w, resolution, &mut best);
    best
}

/// Plain BFS eccentricities, used to sanity-check the Floyd-Warshall oracle.
pub fn bfs_distances(n: usize, edges: &[(usize, usize)], src: usize) -> Vec<Option<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut dist = vec![None; n];
    dist[src] = Some(0);
    let mut q = VecDeque::from([src]);
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(dist[u].unwrap() + 1);
                q.push_back(v);
            }
        }
    }
    dist
}

/// Separation at which two linked nodes of equal mass, placed
/// symmetrically about the origin on a line, feel zero net force, found by
/// bisection on a bracketing sweep of the one-dimensional force balance.
pub fn two_node_equilibrium(scaling: f64, gravity: f64, radius: f64, dissuade: bool) -> f64 {
    let mass = 2.0;
    let net_outward = |r: f64| {
        let border = r - 2.0 * radius;
        let repulsion = scaling * mass * mass / border;
        let attraction = if dissuade { border / mass } else { border };
        repulsion - attraction - gravity * mass
    };
    let mut lo = 2.0 * radius + 1e-9;
    let mut hi = lo;
    let mut step = 0.01;
    while net_outward(hi) > 0.0 {
        lo = hi;
        hi += step;
        step *= 1.1;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if net_outward(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn counts<T: Ord + Clone>(items: impl IntoIterator<Item = T>) -> BTreeMap<T, usize> {
    let mut m = BTreeMap::new();
    for i in items {
        *m.entry(i).or_default() += 1;
    }
    m
}

pub const USERS: usize = 8;

const BIO_WORDS: &[&str] = &[
    "amo",
    "vida",
    "mãe",
    "médica",
    "deputado",
    "federal",
    "saúde",
    "professora",
    "casadas",
    "inibidores",
    "minha",
    "de",
    "kkk",
    "@fulano",
    "#fé",
    "http://x.co",
    "2017",
    "!",
];

/// Raw event shape: author, kind (0 regular, 1 mention, 2 structured
/// retweet, 3 `RT @` text retweet), targets and seconds after 2015-01-01.
pub type RawEvent = (usize, u8, Vec<usize>, i64);

pub fn arb_raw_events(max: usize) -> impl Strategy<Value = Vec<RawEvent>> {
    prop::collection::vec(
        (
            0..USERS,
            0u8..4,
            prop::collection::vec(0..USERS, 1..4),
            0i64..200_000_000,
        ),
        1..max,
    )
}

pub fn arb_bio() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(BIO_WORDS), 0..10).prop_map(|w| w.join(" "))
}

pub fn paper() -> PaperRecord {
    PaperRecord {
        paper_id: "p1".into(),
        title: "A paper".into(),
        publication_date: NaiveDate::from_ymd_opt(2012, 1, 1).unwrap(),
        date_precision: DatePrecision::Year,
        doi: None,
    }
}

pub fn user(i: usize) -> String {
    format!("u{i}")
}

pub fn make_event(idx: usize, raw: &RawEvent) -> TweetEvent {
    let (author, kind, targets, offset) = raw;
    let base = parse_timestamp("2015-01-01T00:00:00Z").unwrap();
    let mut ev = TweetEvent {
        event_id: format!("e{idx:04}"),
        user_id: user(*author),
        timestamp: base + Duration::seconds(*offset),
        text: "reading this paper".into(),
        mentioned_user_ids: vec![],
        retweet_of_user_id: None,
        is_retweet: None,
    };
    match kind {
        1 => {
            ev.mentioned_user_ids = targets.iter().map(|&t| user(t)).collect();
            ev.text = format!("@h{} look", targets[0]);
        }
        2 => {
            ev.retweet_of_user_id = Some(user(targets[0]));
            ev.is_retweet = Some(true);
        }
        3 => ev.text = format!("RT @h{}: reading this paper", targets[0]),
        _ => {}
    }
    ev
}

/// A dataset with a profile (handle `h<i>`) for every user.
pub fn make_dataset(
    raw: &[RawEvent],
    followers: &[i64],
    bios: &[Option<String>],
) -> AttentionDataset {
    AttentionDataset {
        paper: paper(),
        events: raw
            .iter()
            .enumerate()
            .map(|(i, r)| make_event(i, r))
            .collect(),
        profiles: (0..USERS)
            .map(|i| {
                (
                    user(i),
                    UserProfile {
                        user_id: user(i),
                        handle: format!("h{i}"),
                        bio: bios.get(i).cloned().flatten(),
                        followers_count: followers.get(i).copied().unwrap_or(0),
                        language_hint: None,
                    },
                )
            })
            .collect(),
    }
}

pub fn arb_dataset() -> impl Strategy<Value = AttentionDataset> {
    (
        arb_raw_events(40),
        prop::collection::vec(0i64..100_000, USERS),
        prop::collection::vec(prop::option::of(arb_bio()), USERS),
    )
        .prop_map(|(raw, followers, bios)| make_dataset(&raw, &followers, &bios))
}
