//! Seeded synthetic dataset matching the aggregate shape of one paper's
//! Twitter attention network: 736 events (31 plain shares, 210 mentions,
//! 495 retweets), a 242-node interaction graph with 571 distinct edges,
//! 27 isolated sharers, diameter 6, and a two-year dormancy ended by the
//! activist's tweet of 2017-01-05.
//!
//! Raw tweets are not available, so everything below is constructed: the
//! designated hubs get their exact degrees from fixed edges and the rest of
//! the degree sequence is realized by a greedy bipartite fill.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{
    parse_dataset, AttentionDataset, DatePrecision, IngestError, InputFormat, PaperRecord,
    TweetEvent, UserProfile,
};

pub const FIXTURE_STEM: &str = "mancini2002_aggregate";
pub const FIXTURE_SEED: u64 = 2002;

/// Most engaged activist: 68 outgoing and 17 incoming edges.
pub const ACTIVIST_ID: &str = "user_017";
/// Mixed-role hub: 77 incoming, 5 outgoing.
pub const MIXED_HUB_ID: &str = "user_157";
/// News accounts with only incoming edges (77 and 45).
pub const MEDIA_HUB_ID: &str = "user_167";
pub const MEDIA_SECOND_ID: &str = "user_205";
/// Two of the most active pure sources (12 and 13 outgoing edges).
pub const SOURCE_A_ID: &str = "user_035";
pub const SOURCE_B_ID: &str = "user_061";

pub const TOTAL_FOLLOWERS: u64 = 459_018;

const N_NODES: usize = 242;

fn uid(label: usize) -> String {
    format!("user_{label:03}")
}

fn handle(label: usize) -> String {
    format!("user{label:03}")
}

/// Directory of the shipped fixture files.
pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

/// Paths `(events, profiles, paper)` of the shipped fixture.
pub fn fixture_paths() -> (PathBuf, PathBuf, PathBuf) {
    let d = fixture_dir();
    (
        d.join(format!("{FIXTURE_STEM}.jsonl")),
        d.join(format!("{FIXTURE_STEM}.profiles.jsonl")),
        d.join(format!("{FIXTURE_STEM}.paper.json")),
    )
}

/// Parses the shipped fixture files.
pub fn load_fixture() -> Result<AttentionDataset, IngestError> {
    let (e, p, paper) = fixture_paths();
    parse_dataset(&e, Some(&p), &paper, InputFormat::Jsonl)
}

pub fn generate_fixture() -> AttentionDataset {
    generate_fixture_with_seed(FIXTURE_SEED)
}

struct Cast {
    sources: Vec<usize>,
    sinks: Vec<usize>,
    /// Mixed nodes other than the activist and the mixed hub.
    mixed: Vec<usize>,
    isolated: Vec<usize>,
}

fn cast(rng: &mut ChaCha8Rng) -> Cast {
    let fixed = [17, 157, 167, 205, 35, 61];
    let mut free: Vec<usize> = (1..=N_NODES).filter(|l| !fixed.contains(l)).collect();
    free.shuffle(rng);
    let mixed = free[..10].to_vec();
    let mut sources = vec![35, 61];
    sources.extend_from_slice(&free[10..130]);
    let mut sinks = vec![167, 205];
    sinks.extend_from_slice(&free[130..209]);
    let isolated = free[209..].to_vec();
    Cast {
        sources,
        sinks,
        mixed,
        isolated,
    }
}

/// Spreads `extra` units over `slots` starting values, one unit at a time,
/// each to a weighted-random slot still below its cap.
fn spread(rng: &mut ChaCha8Rng, base: &mut [usize], extra: usize, cap: usize) {
    let weights: Vec<f64> = base
        .iter()
        .map(|_| rng.gen::<f64>().powi(2) + 0.02)
        .collect();
    let total: f64 = weights.iter().sum();
    let mut left = extra;
    while left > 0 {
        let mut x = rng.gen::<f64>() * total;
        let mut pick = weights.len() - 1;
        for (i, w) in weights.iter().enumerate() {
            if x < *w {
                pick = i;
                break;
            }
            x -= w;
        }
        if base[pick] < cap {
            base[pick] += 1;
            left -= 1;
        }
    }
}

/// Directed edges between node labels.
fn build_edges(rng: &mut ChaCha8Rng, c: &Cast) -> BTreeSet<(usize, usize)> {
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let (activist, hub, media) = (17usize, 157usize, 167usize);

    // role-defining picks
    let plain_sources: Vec<usize> = c.sources[2..].to_vec();
    let (t1, t2) = (plain_sources[0], plain_sources[1]);
    let single_out: Vec<usize> = plain_sources[2..5].to_vec();
    let free_sinks: Vec<usize> = c.sinks[2..].to_vec();
    let (k1, k2) = (free_sinks[0], free_sinks[1]);
    let rest_sinks: Vec<usize> = free_sinks[2..].to_vec();

    // every mixed node feeds the media hub
    for &m in c.mixed.iter().chain([&activist, &hub]) {
        edges.insert((m, media));
    }
    // pendant paths that fix the diameter: k1 - t1 - hub ... activist - t2 - k2
    edges.insert((t1, hub));
    edges.insert((t1, k1));
    edges.insert((t2, activist));
    edges.insert((t2, k2));

    // anchor every other source on the media hub or the mixed hub
    let mut anchored: Vec<usize> = c
        .sources
        .iter()
        .copied()
        .filter(|s| *s != t1 && *s != t2)
        .collect();
    anchored.retain(|s| !single_out.contains(s));
    anchored.shuffle(rng);
    let on_media: Vec<usize> = anchored[..65].to_vec();
    let mut on_hub: Vec<usize> = anchored[65..].to_vec();
    on_hub.extend(&single_out);
    for &s in &on_media {
        edges.insert((s, media));
    }
    for &s in &on_hub {
        edges.insert((s, hub));
    }

    // in-degree targets: the second media account takes 45, the other 77
    // sinks split into 29 with a single edge and 48 with at least two
    let mut sink_pool = rest_sinks.clone();
    sink_pool.shuffle(rng);
    let singles: Vec<usize> = sink_pool[..29].to_vec();
    let multi: Vec<usize> = sink_pool[29..].to_vec();
    let mut multi_in = vec![2usize; multi.len()];
    spread(rng, &mut multi_in, 311 - 2 * multi.len(), 30);
    let mut target_in: BTreeMap<usize, usize> = BTreeMap::new();
    target_in.insert(205, 45);
    for &s in &singles {
        target_in.insert(s, 1);
    }
    for (s, d) in multi.iter().zip(&multi_in) {
        target_in.insert(*s, *d);
    }

    // activist: mixed nodes plus 57 sinks (the second media account, 44
    // multi-edge sinks, 12 single-edge sinks)
    for &m in &c.mixed {
        edges.insert((activist, m));
    }
    edges.insert((activist, 205));
    let mut picks = multi.clone();
    picks.shuffle(rng);
    for &s in &picks[..44] {
        edges.insert((activist, s));
    }
    for &s in &singles[..12] {
        edges.insert((activist, s));
    }
    // mixed hub: four multi-edge sinks
    picks.shuffle(rng);
    for &s in &picks[..4] {
        edges.insert((hub, s));
    }

    // two further mixed nodes receive more than one incoming edge
    let mut target_mixed_in: BTreeMap<usize, usize> = BTreeMap::new();
    target_mixed_in.insert(c.mixed[0], 3);
    target_mixed_in.insert(c.mixed[1], 2);

    // outgoing targets; anchors and fixed edges are already counted
    let mut residual_out: BTreeMap<usize, usize> = BTreeMap::new();
    let others: Vec<usize> = c
        .sources
        .iter()
        .copied()
        .filter(|s| ![t1, t2, 35, 61].contains(s) && !single_out.contains(s))
        .collect();
    let mut base = vec![1usize; others.len() + c.mixed.len()];
    let extra = 341 - base.len();
    spread(rng, &mut base, extra, 7);
    for (s, r) in others.iter().chain(&c.mixed).zip(&base) {
        residual_out.insert(*s, *r);
    }
    residual_out.insert(35, 11);
    residual_out.insert(61, 12);

    // residual demands
    let indeg =
        |edges: &BTreeSet<(usize, usize)>, n: usize| edges.iter().filter(|e| e.1 == n).count();
    let mut demands: Vec<(usize, usize)> = Vec::new();
    demands.push((hub, 77 - indeg(&edges, hub)));
    demands.push((activist, 17 - indeg(&edges, activist)));
    for (&m, &t) in &target_mixed_in {
        demands.push((m, t - indeg(&edges, m)));
    }
    for (&s, &t) in &target_in {
        demands.push((s, t - indeg(&edges, s)));
    }
    demands.retain(|d| d.1 > 0);
    let supply: usize = residual_out.values().sum();
    let demand: usize = demands.iter().map(|d| d.1).sum();
    assert_eq!(supply, demand, "fixture degree budget out of balance");

    // tie-break keys so equal residuals are taken in seeded order
    let mut keys: BTreeMap<usize, u64> = BTreeMap::new();
    for &s in residual_out.keys() {
        keys.insert(s, rng.gen());
    }
    demands.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let is_mixed = |n: usize| c.mixed.contains(&n);
    for (target, need) in demands {
        let sink_target = !(target == hub || target == activist || is_mixed(target));
        let mut cands: Vec<usize> = residual_out
            .iter()
            .filter(|(s, r)| {
                **r > 0 && !edges.contains(&(**s, target)) && (sink_target || !is_mixed(**s))
            })
            .map(|(s, _)| *s)
            .collect();
        cands.sort_by(|a, b| {
            residual_out[b]
                .cmp(&residual_out[a])
                .then(keys[a].cmp(&keys[b]))
        });
        assert!(
            cands.len() >= need,
            "fixture fill ran out of sources for {target}"
        );
        for &s in &cands[..need] {
            edges.insert((s, target));
            *residual_out.get_mut(&s).expect("supplier") -= 1;
        }
    }
    edges
}

fn url(rng: &mut ChaCha8Rng) -> String {
    const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
    let code: String = (0..10)
        .map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())] as char)
        .collect();
    format!("https://t.co/{code}")
}

const EARLY_BODIES: &[&str] = &[
    "Com prescrição médica esses remédios são ótimos, estudos que comprovam",
    "Posicionamento ABESO e ABRAN sobre os inibidores de apetite",
    "Leiam o artigo sobre tratamento farmacológico da obesidade",
    "Apoiem o PL 2431/2011 e votem a favor dos anorexígenos",
    "Audiência pública sobre sibutramina e anfepramona",
    "A justiça decidiu contra o projeto, vejam os estudos",
];
const WAKE_BODIES: &[&str] = &[
    "precisamos de ajuda, a Anvisa tem os estudos",
    "como dizem que não há estudos? A prova de que existem está aqui",
    "Bom dia deputado, a Anvisa disse que não há estudos sobre inibidores mas nós temos #pl2431_11",
];
const LATE_BODIES: &[&str] = &[
    "#LEI_13454 Para ler: Tratamento farmacológico da obesidade #PL2431_11",
    "o projeto levou 7 anos e agora está encerrado #PL2431_11 #LEI_13454",
    "Sancionada a lei dos inibidores de apetite, leiam o artigo",
];
const PLAIN_BODIES: &[&str] = &[
    "Tratamento farmacológico da obesidade",
    "Artigo de 2002 sobre anorexígenos, vale a leitura",
    "Estudos sobre inibidores de apetite existem",
];

const PUBLIC_BIOS: &[&str] = &[
    "Casada, mãe e apaixonada pela vida",
    "Amo minha família e a vida",
    "Mãe, casada, cristã. Amo a vida!",
    "Sou contra a esquerda. CPI já!",
    "Quero inibidores de apetite de volta!",
    "Quero inibidores de apetite de volta. Sou contra a esquerda",
    "Mãe de dois, amo viver a vida",
    "Vida saudável, casada e feliz",
    "CPI da obesidade já. Sou contra a esquerda",
    "Mãe em tempo integral, amo meus filhos 💕",
    "Casada, amo a vida e quero inibidores de apetite de volta",
];
const OTHER_TWEETER_BIOS: &[&str] = &[
    "Médica endocrinologista, CRM 52123",
    "Nutricionista clínica e esportiva",
    "Professora universitária e pesquisadora em saúde",
    "Jornalista de saúde e política",
    "Brasileiro, futebol e política",
    "Farmacêutica. Saúde em primeiro lugar",
];
const SINK_BIOS: &[&str] = &[
    "Deputado federal pelo Rio de Janeiro",
    "Deputada federal por São Paulo",
    "Senador da República pelo Paraná",
    "Senadora da República",
    "Presidente do partido e deputado federal",
    "Líder do governo na Câmara Federal",
    "Prefeito de Campinas",
    "Vice-prefeito de Niterói",
    "Deputado federal, presidente do partido",
    "Senador da República, líder na Câmara Federal",
];

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn at(y: i32, m: u32, d: u32, h: u32, mi: u32, s: u32) -> DateTime<Utc> {
    Utc.with_ymd_and_hms(y, m, d, h, mi, s)
        .single()
        .expect("valid fixture date")
}

struct Draft {
    user: usize,
    kind: DraftKind,
}

enum DraftKind {
    Mention(Vec<usize>),
    Retweet(usize),
    Plain,
}

pub fn generate_fixture_with_seed(seed: u64) -> AttentionDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = cast(&mut rng);
    let edges = build_edges(&mut rng, &c);
    let activist = 17usize;

    // --- events ----------------------------------------------------------
    let mut drafts: Vec<Draft> = Vec::new();
    let mut activist_targets: Vec<usize> = edges
        .iter()
        .filter(|e| e.0 == activist)
        .map(|e| e.1)
        .collect();
    activist_targets.shuffle(&mut rng);
    let mut activist_events: Vec<Vec<usize>> =
        activist_targets[..60].iter().map(|t| vec![*t]).collect();
    let mut slots: Vec<usize> = (0..60).collect();
    slots.shuffle(&mut rng);
    for (t, slot) in activist_targets[60..].iter().zip(&slots) {
        activist_events[*slot].push(*t);
    }
    for mut targets in activist_events {
        targets.sort();
        drafts.push(Draft {
            user: activist,
            kind: DraftKind::Mention(targets),
        });
    }
    let activist_count = drafts.len();

    let mut rest: Vec<(usize, usize)> = edges.iter().copied().filter(|e| e.0 != activist).collect();
    rest.shuffle(&mut rng);
    let (mention_edges, retweet_edges) = rest.split_at(83);
    let mut mention_events: Vec<(usize, usize)> = mention_edges.to_vec();
    for _ in 0..(150 - 83) {
        mention_events.push(*mention_edges.choose(&mut rng).expect("edges"));
    }
    let mut retweet_events: Vec<(usize, usize)> = retweet_edges.to_vec();
    for _ in 0..(495 - retweet_edges.len()) {
        retweet_events.push(*retweet_edges.choose(&mut rng).expect("edges"));
    }
    for (s, t) in mention_events {
        drafts.push(Draft {
            user: s,
            kind: DraftKind::Mention(vec![t]),
        });
    }
    for (s, t) in retweet_events {
        drafts.push(Draft {
            user: s,
            kind: DraftKind::Retweet(t),
        });
    }
    let mut plain_users = c.isolated.clone();
    for _ in 0..4 {
        plain_users.push(*c.isolated.choose(&mut rng).expect("isolated"));
    }
    for u in plain_users {
        drafts.push(Draft {
            user: u,
            kind: DraftKind::Plain,
        });
    }
    assert_eq!(drafts.len(), 736);

    // --- timeline --------------------------------------------------------
    // phase 0: 2013-10-20 .. 2014-06-30, phase 1: the first days of 2017
    // (opened by the activist), phase 2: 2017-01-09 .. 2017-09-01
    let mut phase = vec![0u8; drafts.len()];
    let mut act: Vec<usize> = (0..activist_count).collect();
    act.shuffle(&mut rng);
    for &i in &act[..32] {
        phase[i] = 1;
    }
    for &i in &act[32..50] {
        phase[i] = 2;
    }
    let mut others: Vec<usize> = (activist_count..drafts.len()).collect();
    others.shuffle(&mut rng);
    for &i in &others[..18] {
        phase[i] = 1;
    }
    for &i in &others[18..18 + 248] {
        phase[i] = 2;
    }
    let first_event = at(2013, 10, 20, 14, 32, 11);
    let awakening = at(2017, 1, 5, 9, 41, 23);
    let last_event = at(2017, 9, 1, 12, 7, 45);
    let ranges = [
        (
            first_event.timestamp() + 1,
            at(2014, 6, 30, 23, 59, 59).timestamp(),
        ),
        (
            awakening.timestamp() + 1,
            at(2017, 1, 8, 23, 59, 59).timestamp(),
        ),
        (
            at(2017, 1, 9, 0, 0, 0).timestamp(),
            last_event.timestamp() - 1,
        ),
    ];
    let mut used: BTreeSet<i64> = BTreeSet::from([
        first_event.timestamp(),
        awakening.timestamp(),
        last_event.timestamp(),
    ]);
    let mut times: Vec<i64> = Vec::with_capacity(drafts.len());
    for &p in &phase {
        let (lo, hi) = ranges[p as usize];
        loop {
            let t = rng.gen_range(lo..=hi);
            if used.insert(t) {
                times.push(t);
                break;
            }
        }
    }
    // pin the opening mention, the awakening tweet and the closing tweet
    let opening = (activist_count..activist_count + 150)
        .find(|&i| phase[i] == 0)
        .expect("an early mention");
    times[opening] = first_event.timestamp();
    times[act[0]] = awakening.timestamp();
    let closing = (activist_count..drafts.len())
        .filter(|&i| phase[i] == 2)
        .max_by_key(|&i| times[i])
        .expect("a late event");
    times[closing] = last_event.timestamp();

    let mut order: Vec<usize> = (0..drafts.len()).collect();
    order.sort_by_key(|&i| (times[i], i));
    let mut events = Vec::with_capacity(drafts.len());
    for (n, &i) in order.iter().enumerate() {
        let d = &drafts[i];
        let ts = DateTime::<Utc>::from_timestamp(times[i], 0).expect("in range");
        let bodies = match phase[i] {
            // credibility arguments in 2013, lobbying for the bill in 2014
            0 if times[i] < at(2014, 1, 1, 0, 0, 0).timestamp() => &EARLY_BODIES[..3],
            0 => &EARLY_BODIES[3..],
            1 => WAKE_BODIES,
            _ => LATE_BODIES,
        };
        let body = bodies[rng.gen_range(0..bodies.len())];
        let link = url(&mut rng);
        let (text, mentioned, retweet_of, is_retweet) = match &d.kind {
            DraftKind::Mention(targets) => {
                let tags: Vec<String> =
                    targets.iter().map(|t| format!("@{}", handle(*t))).collect();
                (
                    format!("{} {body} {link}", tags.join(" ")),
                    targets.iter().map(|t| uid(*t)).collect(),
                    None,
                    None,
                )
            }
            DraftKind::Retweet(t) => (
                format!("RT @{}: {body} {link}", handle(*t)),
                Vec::new(),
                Some(uid(*t)),
                Some(true),
            ),
            DraftKind::Plain => {
                let plain = PLAIN_BODIES[rng.gen_range(0..PLAIN_BODIES.len())];
                (format!("{plain} {link}"), Vec::new(), None, None)
            }
        };
        events.push(TweetEvent {
            event_id: format!("ev_{:04}", n + 1),
            user_id: uid(d.user),
            timestamp: ts,
            text,
            mentioned_user_ids: mentioned,
            retweet_of_user_id: retweet_of,
            is_retweet,
        });
    }

    // --- profiles --------------------------------------------------------
    let mut profiles = BTreeMap::new();
    let mut tweeters: Vec<usize> = c.sources.iter().chain(&c.mixed).copied().collect();
    tweeters.extend([17, 157]);
    tweeters.sort();
    let weights: Vec<f64> = tweeters
        .iter()
        .map(|_| (1.4 * normal(&mut rng)).exp())
        .collect();
    let wsum: f64 = weights.iter().sum();
    let mut followers: Vec<u64> = weights
        .iter()
        .map(|w| (TOTAL_FOLLOWERS as f64 * w / wsum).floor() as u64)
        .collect();
    let short = TOTAL_FOLLOWERS - followers.iter().sum::<u64>();
    let top = (0..followers.len())
        .max_by_key(|&i| followers[i])
        .expect("tweeters");
    followers[top] += short;
    let mut bio_kind: Vec<u8> = (0..tweeters.len())
        .map(|i| {
            if i < 85 {
                0
            } else if i < 115 {
                1
            } else {
                2
            }
        })
        .collect();
    bio_kind.shuffle(&mut rng);
    for (i, &t) in tweeters.iter().enumerate() {
        let bio = match bio_kind[i] {
            0 => Some(PUBLIC_BIOS[rng.gen_range(0..PUBLIC_BIOS.len())].to_string()),
            1 => Some(OTHER_TWEETER_BIOS[rng.gen_range(0..OTHER_TWEETER_BIOS.len())].to_string()),
            _ => None,
        };
        profiles.insert(
            uid(t),
            UserProfile {
                user_id: uid(t),
                handle: handle(t),
                bio,
                followers_count: followers[i] as i64,
                language_hint: Some("pt".into()),
            },
        );
    }
    let mut profiled_sinks: Vec<usize> = c.sinks[2..].to_vec();
    profiled_sinks.shuffle(&mut rng);
    profiled_sinks.truncate(70);
    profiled_sinks.extend([167, 205]);
    profiled_sinks.sort();
    for s in profiled_sinks {
        let (bio, count) = match s {
            167 => (
                "Portal de notícias de política e economia".to_string(),
                1_850_000,
            ),
            205 => ("Notícias do Congresso Nacional".to_string(), 420_000),
            _ => (
                SINK_BIOS[rng.gen_range(0..SINK_BIOS.len())].to_string(),
                (9.5 + 1.2 * normal(&mut rng)).exp().round() as i64,
            ),
        };
        profiles.insert(
            uid(s),
            UserProfile {
                user_id: uid(s),
                handle: handle(s),
                bio: Some(bio),
                followers_count: count,
                language_hint: Some("pt".into()),
            },
        );
    }

    AttentionDataset {
        paper: PaperRecord {
            paper_id: "mancini2002".into(),
            title: "Tratamento farmacológico da obesidade".into(),
            publication_date: NaiveDate::from_ymd_opt(2002, 1, 1).expect("valid date"),
            date_precision: DatePrecision::Year,
            doi: None,
        },
        events,
        profiles,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_balances_and_is_deterministic() {
        let a = generate_fixture();
        let b = generate_fixture();
        assert_eq!(a, b);
        assert_eq!(a.events.len(), 736);
    }
}
