mod common;

use canet_core::engagement::*;
use canet_core::fixture::*;
use canet_core::graph::{build_graph, NodeRole};
use canet_core::graph::{graph_stats, top_nodes};
use canet_core::model::{canonicalize_dataset, validate_dataset, Diagnostic};

#[test]
fn shipped_files_match_generator() {
    let shipped = load_fixture().expect("fixture parses");
    assert_eq!(shipped, generate_fixture());
}

#[test]
fn fixture_is_valid_and_canonical() {
    let ds = load_fixture().unwrap();
    let diags: Vec<Diagnostic> = validate_dataset(&ds);
    assert!(diags.is_empty(), "{diags:?}");
    assert_eq!(canonicalize_dataset(&ds), ds);
}

#[test]
fn fixture_degree_highlights() {
    let ds = load_fixture().unwrap();
    let g = build_graph(&ds);
    let stats = graph_stats(&g).unwrap();
    let (indeg, outdeg) = g.degrees();
    let deg = |id: &str| {
        let i = g.node_index(id).unwrap();
        (indeg[i], outdeg[i])
    };
    assert_eq!(deg(ACTIVIST_ID), (17, 68));
    assert_eq!(deg(MIXED_HUB_ID), (77, 5));
    assert_eq!(deg(MEDIA_HUB_ID), (77, 0));
    assert_eq!(deg(MEDIA_SECOND_ID), (45, 0));
    assert_eq!(deg(SOURCE_A_ID), (0, 12));
    assert_eq!(deg(SOURCE_B_ID), (0, 13));
    let t = &stats.degree_thresholds;
    assert_eq!(
        (t.indegree_at_least_2, t.indegree_at_least_2_with_outdegree),
        (54, 4)
    );
    assert_eq!(
        (t.outdegree_at_least_2, t.outdegree_at_least_2_with_indegree),
        (131, 12)
    );
    let (top_in, top_out) = top_nodes(&g, 3);
    assert_eq!(top_out[0].user_id, ACTIVIST_ID);
    assert!(top_in
        .iter()
        .take(2)
        .all(|r| r.user_id == MIXED_HUB_ID || r.user_id == MEDIA_HUB_ID));
    assert_eq!(stats.role_counts[&NodeRole::Mixed], 12);
}

#[test]
fn other_seeds_keep_the_aggregates() {
    for seed in [1, 7, 99] {
        let ds = generate_fixture_with_seed(seed);
        let s = summarize_engagement(&ds).unwrap();
        assert_eq!(
            (s.regular_count, s.mention_count, s.retweet_count),
            (31, 210, 495)
        );
        assert_eq!(compute_exposure(&ds), TOTAL_FOLLOWERS);
        let stats = graph_stats(&build_graph(&ds)).unwrap();
        assert_eq!(
            (stats.node_count, stats.edge_count, stats.isolated_count),
            (242, 571, 27)
        );
        assert_eq!(stats.diameter, 6);
    }
}

#[test]
fn fixture_bios_carry_cluster_vocabulary() {
    use canet_core::termmap::extract_terms;
    use canet_core::textprep::{tokenize_bio, PipelineConfig};
    let ds = load_fixture().unwrap();
    let cfg = PipelineConfig::default();
    let bios: Vec<_> = ds
        .profiles
        .values()
        .filter_map(|p| p.bio.as_deref().map(|b| tokenize_bio(&p.user_id, b, &cfg)))
        .collect();
    let terms = extract_terms(&bios, 2, 2).unwrap();
    for want in ["vida", "mãe", "deputado", "senador"] {
        assert!(terms.iter().any(|t| t.term == want), "missing {want}");
    }
}
