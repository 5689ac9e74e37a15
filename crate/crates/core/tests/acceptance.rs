//! End-to-end acceptance suite. Runs without the libtest harness so that one
//! PASS/FAIL line per criterion, with its runtime, is always printed.

mod common;

use std::collections::BTreeSet;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use canet_core::cli::run_command;
use canet_core::engagement::first_iso_week;
use canet_core::fixture::{fixture_paths, load_fixture, ACTIVIST_ID, TOTAL_FOLLOWERS};
use canet_core::graph::scatter_data;
use canet_core::layout::{compute_forces, init_layout, LayoutState};
use canet_core::model::{parse_timestamp, AttentionDataset};
use canet_core::report::{sha256_hex, Manifest};
use canet_core::termmap::{cluster_terms, cluster_terms_traced, SimilarityMap};
use canet_core::textprep::{preprocess_bio, PipelineConfig};
use canet_core::{
    build_graph, compute_exposure, graph_stats, lifespan_report, run_layout, window_share,
    LayoutParams, NodeRole,
};
use common::*;
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::Value;
use unicode_normalization::char::is_combining_mark;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(got: f64, want: f64, tol: f64, what: &str) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || {
        format!("{what}: got {got}, want {want} ± {tol}")
    })
}

fn fixture() -> AttentionDataset {
    load_fixture().expect("shipped fixture loads")
}

fn fixture_args() -> Vec<String> {
    let (e, p, paper) = fixture_paths();
    vec![
        "--events".into(),
        e.display().to_string(),
        "--profiles".into(),
        p.display().to_string(),
        "--paper".into(),
        paper.display().to_string(),
    ]
}

fn cli(sub: &str, out: &Path) -> i32 {
    let mut argv = vec!["canet".to_string(), sub.to_string()];
    argv.extend(fixture_args());
    argv.extend(["--out-dir".to_string(), out.display().to_string()]);
    run_command(argv)
}

fn c1_engagement() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    ensure(cli("summary", dir.path()) == 0, || {
        "summary exited non-zero".into()
    })?;
    let doc: Value =
        serde_json::from_slice(&fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    let s = &doc["summary"];
    let e = &s["engagement"];
    let n = |v: &Value| v.as_f64().unwrap();
    ensure(
        (
            e["regular_count"].as_u64(),
            e["mention_count"].as_u64(),
            e["retweet_count"].as_u64(),
        ) == (Some(31), Some(210), Some(495)),
        || format!("kind counts {e}"),
    )?;
    close(
        n(&s["sharing_degree_pct"]["exact"]),
        4.21,
        0.01,
        "sharing %",
    )?;
    close(
        n(&s["recommendation_level_pct"]["exact"]),
        28.53,
        0.01,
        "recommendation %",
    )?;
    close(
        n(&s["spreading_degree_pct"]["exact"]),
        67.26,
        0.01,
        "spreading %",
    )?;
    close(n(&e["ct_index"]), 0.957, 0.001, "CT")?;
    close(n(&e["ct_index"]), 0.9579, 0.0001, "CT (4 dp)")?;
    close(n(&e["it_index"]), 0.042, 0.001, "IT")?;
    ensure(e["conversational_tweeters"].as_u64() == Some(134), || {
        format!("conversational tweeters {}", e["conversational_tweeters"])
    })?;
    Ok(format!(
        "sharing {:.2}% recommendation {:.2}% spreading {:.2}% CT {:.4} IT {:.4}, 134 conversational tweeters",
        n(&s["sharing_degree_pct"]["exact"]),
        n(&s["recommendation_level_pct"]["exact"]),
        n(&s["spreading_degree_pct"]["exact"]),
        n(&e["ct_index"]),
        n(&e["it_index"])
    ))
}

fn c2_exposure() -> Outcome {
    let ds = fixture();
    let graph = build_graph(&ds);
    let (indeg, outdeg) = graph.degrees();
    // followers of the 134 conversational tweeters, summed straight from profiles
    let conversational: BTreeSet<&str> = graph
        .nodes()
        .iter()
        .enumerate()
        .filter(|&(i, _)| outdeg[i] > 0)
        .map(|(_, id)| id.as_str())
        .collect();
    let _ = indeg;
    ensure(conversational.len() == 134, || {
        format!("{} conversational tweeters", conversational.len())
    })?;
    let direct: i64 = conversational
        .iter()
        .map(|u| ds.profile(u).map_or(0, |p| p.followers_count))
        .sum();
    ensure(direct as u64 == TOTAL_FOLLOWERS, || {
        format!("profile sum {direct}")
    })?;
    let exposure = compute_exposure(&ds);
    ensure(exposure == TOTAL_FOLLOWERS, || {
        format!("compute_exposure {exposure}")
    })?;
    for u in ds.tweeters() {
        let mut dup = ds.clone();
        let extra: Vec<_> = ds
            .events
            .iter()
            .filter(|e| e.user_id == u)
            .cloned()
            .collect();
        for mut e in extra {
            e.event_id.push_str("-dup");
            dup.events.push(e);
        }
        let got = compute_exposure(&dup);
        ensure(got == exposure, || {
            format!("duplicating {u} changed exposure to {got}")
        })?;
    }
    Ok(format!(
        "exposure {exposure}, unchanged after duplicating each of {} tweeters",
        ds.tweeters().len()
    ))
}

fn c3_graph() -> Outcome {
    let st = graph_stats(&build_graph(&fixture())).map_err(|e| e.to_string())?;
    ensure(
        (st.node_count, st.edge_count, st.isolated_count) == (242, 571, 27),
        || {
            format!(
                "N/E/isolated {}/{}/{}",
                st.node_count, st.edge_count, st.isolated_count
            )
        },
    )?;
    close(st.mean_degree, 2.36, 0.005, "mean degree")?;
    close(st.density, 0.0196, 0.0005, "density")?;
    ensure((st.density * 100.0).round() / 100.0 == 0.02, || {
        "density does not round to 0.02".into()
    })?;
    ensure(st.diameter == 6, || format!("diameter {}", st.diameter))?;
    let role = |r| st.role_counts.get(&r).copied().unwrap_or(0);
    let roles = [
        role(NodeRole::SourceOnly),
        role(NodeRole::SinkOnly),
        role(NodeRole::Mixed),
        role(NodeRole::InformativeOnly),
    ];
    ensure(roles == [122, 81, 12, 27], || format!("roles {roles:?}"))?;
    Ok(format!(
        "242 nodes, 571 edges, 27 isolated, mean degree {:.4}, density {:.4}, diameter 6, roles 122/81/12/27",
        st.mean_degree, st.density
    ))
}

fn c4_scatter() -> Outcome {
    let rows = scatter_data(&build_graph(&fixture()), 10.0).map_err(|e| e.to_string())?;
    let one_sided = rows
        .iter()
        .filter(|r| (r.indegree == 0) != (r.outdegree == 0))
        .count();
    let share = one_sided as f64 / rows.len() as f64;
    ensure(share >= 0.8, || format!("share {share}"))?;
    Ok(format!(
        "{one_sided}/{} nodes ({:.2}%) have exactly one zero degree",
        rows.len(),
        share * 100.0
    ))
}

fn c5_lifespan() -> Outcome {
    let ds = fixture();
    let r = lifespan_report(&ds, 365).map_err(|e| e.to_string())?;
    let y2015 = parse_timestamp("2015-01-01T00:00:00Z").unwrap();
    let y2017 = parse_timestamp("2017-01-01T00:00:00Z").unwrap();
    let covering = r
        .dormancy_intervals
        .iter()
        .find(|d| d.start <= y2015 && d.end >= y2017);
    let covering = covering
        .ok_or_else(|| format!("no interval covers 2015-2016: {:?}", r.dormancy_intervals))?;
    let awake: Vec<_> = ds
        .events
        .iter()
        .filter(|e| r.awakening_events.contains(&e.event_id))
        .collect();
    ensure(
        awake
            .iter()
            .any(|e| e.timestamp.date_naive().to_string() == "2017-01-05"),
        || "no awakening on 2017-01-05".into(),
    )?;
    let (start, end) = first_iso_week(2017);
    let share = window_share(&ds, ACTIVIST_ID, start, end).map_err(|e| e.to_string())?;
    close(share, 0.64, 0.01, "activist window share")?;
    Ok(format!(
        "dormancy {} .. {}, awakening 2017-01-05, activist share {share:.4}",
        covering.start.date_naive(),
        covering.end.date_naive()
    ))
}

fn c6_diameter_oracle() -> Outcome {
    let mut r = rng(6);
    let mut checked = 0;
    for case in 0..300u64 {
        let n = r.gen_range(1..=50);
        let p = r.gen_range(0.0..(4.0 / n as f64).min(1.0));
        let edges = random_digraph(n, p, 1000 + case);
        let names = node_names(n);
        let g = canet_core::InteractionGraph::from_parts(
            names.iter().map(String::as_str),
            edges.iter().map(|&(a, b)| {
                (
                    names[a].as_str(),
                    names[b].as_str(),
                    canet_core::graph::EdgeWeight {
                        mention_count: 1,
                        retweet_count: 0,
                    },
                )
            }),
        );
        let got = graph_stats(&g).map_err(|e| e.to_string())?.diameter;
        let want = floyd_warshall_diameter(n, &edges);
        ensure(got == want, || {
            format!("case {case} (n={n}): BFS {got} vs oracle {want}")
        })?;
        checked += 1;
    }
    Ok(format!("{checked} random graphs, all exact"))
}

fn exact(p: &LayoutParams) -> LayoutParams {
    LayoutParams {
        bh_theta: 0.0,
        ..p.clone()
    }
}

fn c7_layout() -> Outcome {
    // (a) zero net force
    let free = LayoutParams {
        gravity: 0.0,
        prevent_overlap: false,
        bh_theta: 0.0,
        ..LayoutParams::default()
    };
    let mut worst_net = 0.0f64;
    for seed in 0..100u64 {
        let n = 2 + (seed as usize * 7) % 60;
        let g = random_layout_graph(n, 0.08, seed);
        let st = init_layout(&g.nodes, seed).unwrap();
        let f = compute_forces(&g, &st, &free).map_err(|e| e.to_string())?;
        let sum = f.iter().fold([0.0, 0.0], |a, v| [a[0] + v[0], a[1] + v[1]]);
        let scale: f64 = f.iter().map(|v| norm(*v)).sum();
        let rel = norm(sum) / scale;
        worst_net = worst_net.max(rel);
        ensure(rel <= 1e-6, || {
            format!("(a) graph {seed}: net force {rel:e} relative")
        })?;
    }

    // (b) Barnes-Hut accuracy and its monotone improvement
    let paper = LayoutParams::default();
    let mut worst = [0.0f64; 3];
    for seed in 0..5u64 {
        let g = random_layout_graph(200, 0.01, 70 + seed);
        let st = init_layout(&g.nodes, seed).unwrap();
        let reference = compute_forces(&g, &st, &exact(&paper)).unwrap();
        let mut errs = [0.0f64; 3];
        for (k, theta) in [1.2, 0.8, 0.4].into_iter().enumerate() {
            let p = LayoutParams {
                bh_theta: theta,
                ..paper.clone()
            };
            errs[k] = max_relative_error(&compute_forces(&g, &st, &p).unwrap(), &reference);
            worst[k] = worst[k].max(errs[k]);
        }
        ensure(errs[0] <= 0.05, || {
            format!("(b) graph {seed}: theta 1.2 error {}", errs[0])
        })?;
        ensure(errs[0] > errs[1] && errs[1] > errs[2], || {
            format!("(b) graph {seed}: errors not shrinking {errs:?}")
        })?;
    }

    // (c) bit-identical repeats at theta 0
    let g = random_layout_graph(60, 0.05, 5);
    let p = LayoutParams {
        iterations: 200,
        seed: 11,
        ..exact(&paper)
    };
    let a = run_layout(&g, &p).map_err(|e| e.to_string())?;
    let b = run_layout(&g, &p).map_err(|e| e.to_string())?;
    let bits = |s: &LayoutState| {
        s.positions
            .iter()
            .flat_map(|v| [v[0].to_bits(), v[1].to_bits()])
            .collect::<Vec<_>>()
    };
    ensure(bits(&a.state) == bits(&b.state), || {
        "(c) repeat runs differ".into()
    })?;

    // (d) no NaN or infinity under the paper's settings
    let mut r = rng(77);
    for case in 0..100u64 {
        let n = r.gen_range(1..=80);
        let p_edge = r.gen_range(0.0..0.2);
        let mut g = random_layout_graph(n, p_edge, 500 + case);
        if case % 10 == 0 && n > 1 {
            // stars and heavy weights stress hub dissuasion and the speed cap
            g.edges = (1..n).map(|i| (0, i, 1.0 + i as f64)).collect();
        }
        let p = LayoutParams {
            iterations: 60,
            seed: case,
            ..paper.clone()
        };
        let run = run_layout(&g, &p).map_err(|e| format!("(d) case {case}: {e}"))?;
        ensure(
            run.state
                .positions
                .iter()
                .all(|v| v[0].is_finite() && v[1].is_finite()),
            || format!("(d) case {case}: non-finite position"),
        )?;
    }
    Ok(format!(
        "(a) worst net {worst_net:.1e}; (b) worst error {:.4}/{:.4}/{:.4} at theta 1.2/0.8/0.4; (c) identical; (d) 100 graphs finite",
        worst[0], worst[1], worst[2]
    ))
}

const CORPUS_WORDS: &[&str] = &[
    "Amo",
    "minha",
    "VIDA",
    "mãe",
    "MÃES",
    "casadas",
    "inibidores",
    "deputado",
    "Federal",
    "saúde",
    "médica",
    "pesquisadora",
    "kkk",
    "haha",
    "rsrs",
    "aff",
    "#fé",
    "@fulano",
    "http://x.co/abc",
    "www.site.com.br",
    "2017",
    "10x",
    "!!!",
    "😍",
    "ﬁm",
    "𝒥oão",
    "Ｆｕｌｌ",
    "são",
    "pães",
    "papéis",
    "a",
    "de",
    "dos",
    "e-mail",
    "co-fundador",
    "o'neil",
    "naïve",
    "ÇÃO",
];

fn c8_text() -> Outcome {
    let cfg = PipelineConfig::default();
    let worked = preprocess_bio("Amo minha VIDA! kkk #mãe @fulano http://x.co", &cfg);
    ensure(worked == ["amo", "vida"], || {
        format!("worked example gave {worked:?}")
    })?;
    let mut r = rng(8);
    let mut tokens = 0;
    for i in 0..1000 {
        let len = r.gen_range(0..15);
        let mut words: Vec<String> = (0..len)
            .map(|_| CORPUS_WORDS.choose(&mut r).unwrap().to_string())
            .collect();
        if i % 5 == 0 {
            words.push(
                (0..r.gen_range(1..10))
                    .map(|_| char::from_u32(r.gen_range(0x20..0x2FFF)).unwrap_or(' '))
                    .collect(),
            );
        }
        let bio = words.join(if i % 3 == 0 { "  " } else { " " });
        let once = preprocess_bio(&bio, &cfg);
        let twice = preprocess_bio(&once.join(" "), &cfg);
        ensure(once == twice, || {
            format!("bio {i} {bio:?}: {once:?} then {twice:?}")
        })?;
        for t in &once {
            let ok = t
                .chars()
                .all(|c| (c.is_alphabetic() || is_combining_mark(c)) && !c.is_uppercase())
                && t.chars().count() >= cfg.min_token_length
                && !cfg.stopwords.contains(t)
                && !t.contains("http")
                && !t.contains("www");
            ensure(ok, || format!("bio {i} {bio:?}: bad token {t:?}"))?;
        }
        tokens += once.len();
    }
    Ok(format!(
        "worked example ok; 1000 bios idempotent, {tokens} tokens valid"
    ))
}

fn random_similarity(n: usize, seed: u64) -> SimilarityMap {
    let mut r = rng(seed);
    let density = r.gen_range(0.2..1.0);
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if r.gen_bool(density) {
                pairs.push((i, j, r.gen_range(0.01..3.0)));
            }
        }
    }
    SimilarityMap::from_pairs(node_names(n), pairs)
}

fn c9_clustering() -> Outcome {
    let mut worst_ratio = f64::INFINITY;
    let mut cases = 0;
    for n in 1..=8usize {
        for k in 0..40u64 {
            let sim = random_similarity(n, n as u64 * 1000 + k);
            let dense: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| if i == j { 0.0 } else { sim.get(i, j) })
                        .collect()
                })
                .collect();
            let best = exhaustive_best_modularity(&dense, 1.0);
            let (m, _) = cluster_terms_traced(&sim, 1.0, k).map_err(|e| e.to_string())?;
            let q = dense_modularity(&dense, &m, 1.0);
            ensure(q >= best - 0.1 * best.abs() - 1e-12, || {
                format!("n={n} case {k}: {q} vs optimum {best}")
            })?;
            if best > 1e-12 {
                worst_ratio = worst_ratio.min(q / best);
            }
            let a = cluster_terms(&sim, 1.0, k).unwrap();
            ensure(a == cluster_terms(&sim, 1.0, k).unwrap(), || {
                format!("n={n} case {k}: not deterministic")
            })?;
            let keys: BTreeSet<&String> = a.keys().collect();
            ensure(keys == sim.terms.iter().collect(), || {
                format!("n={n} case {k}: not a partition")
            })?;
            let labels: BTreeSet<usize> = a.values().copied().collect();
            ensure(labels == (1..=labels.len()).collect(), || {
                format!("n={n} case {k}: labels {labels:?}")
            })?;
            cases += 1;
        }
    }
    Ok(format!(
        "{cases} graphs with <= 8 terms, worst greedy/optimum {worst_ratio:.4}"
    ))
}

fn c10_determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        ensure(cli("report", d.path()) == 0, || {
            "report exited non-zero".into()
        })?;
    }
    let read = |d: &Path, f: &str| fs::read(d.join(f)).unwrap();
    ensure(
        read(a.path(), "report.json") == read(b.path(), "report.json"),
        || "report.json differs".into(),
    )?;
    let ma: Manifest = serde_json::from_slice(&read(a.path(), "manifest.json")).unwrap();
    let mb: Manifest = serde_json::from_slice(&read(b.path(), "manifest.json")).unwrap();
    ensure(ma == mb, || "manifests differ".into())?;
    // every file but the manifest is listed with its true hash, and nothing else exists
    let mut on_disk: BTreeSet<String> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    on_disk.remove("manifest.json");
    let listed: BTreeSet<String> = ma.files.iter().map(|f| f.name.clone()).collect();
    ensure(on_disk == listed, || {
        format!("orphans or missing files: {on_disk:?} vs {listed:?}")
    })?;
    for f in &ma.files {
        ensure(sha256_hex(&read(a.path(), &f.name)) == f.sha256, || {
            format!("hash mismatch for {}", f.name)
        })?;
    }
    Ok(format!(
        "{} files, identical report.json and manifest",
        ma.files.len()
    ))
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 10] = [
        (
            "engagement reproduction",
            c1_engagement,
            Duration::from_secs(1),
        ),
        ("exposure", c2_exposure, Duration::from_secs(1)),
        ("graph reproduction", c3_graph, Duration::from_secs(5)),
        ("scatter property", c4_scatter, Duration::from_secs(1)),
        ("life span", c5_lifespan, Duration::from_secs(1)),
        (
            "diameter oracle",
            c6_diameter_oracle,
            Duration::from_secs(30),
        ),
        (
            "ForceAtlas2 properties",
            c7_layout,
            Duration::from_secs(120),
        ),
        ("text pipeline", c8_text, Duration::from_secs(5)),
        ("term clustering", c9_clustering, Duration::from_secs(60)),
        (
            "end-to-end determinism",
            c10_determinism,
            Duration::from_secs(30),
        ),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > budget => Err(format!("{detail}; over the {budget:?} budget")),
            other => other,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d.as_str()),
            Err(d) => ("FAIL", d.as_str()),
        };
        println!(
            "criterion {:>2} {tag} {:>9.3}s  {name}: {detail}",
            i + 1,
            took.as_secs_f64()
        );
        if outcome.is_err() {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
