//! Consolidated analyses and the artifacts the CLI writes for them.
//!
//! Every analysis is computed in memory first and returned as a list of
//! named artifacts; [`write_artifacts`] then writes them together with a
//! manifest, so a failed run leaves nothing half-written behind.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Datelike, Duration, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engagement::{
    classify_user_type, default_user_type_rules, exposure_report, lifespan_report,
    summarize_engagement, timeline_bins, window_share, BinWidth, EngagementError,
    EngagementSummary, ExposureReport, LifespanReport, TimelineBin, UserType,
    DEFAULT_DORMANCY_DAYS,
};
use crate::graph::{
    assign_roles, build_graph, export_graph, graph_stats, scatter_data, top_nodes, DegreeRanking,
    ExportError, ExportFormat, GraphError, GraphStats, InteractionGraph, NodeRole,
};
use crate::layout::{positions_csv, run_layout, trace_csv, LayoutError, LayoutGraph, LayoutParams};
use crate::model::{format_timestamp, AttentionDataset};
use crate::termmap::{build_term_map, similarity_csv, term_map_csv, TermMapError, TermMapParams};
use crate::textprep::{tokenize_bio, PipelineConfig};

pub const TOOL_NAME: &str = "canet";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    Engagement(#[from] EngagementError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Export(#[from] ExportError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    TermMap(#[from] TermMapError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Analysis settings. Input paths and the output directory are not part of
/// it: they say where data lives, not how it is analysed, and leaving them
/// out keeps reports comparable across directories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub dormancy_threshold_days: u32,
    pub timeline_width: BinWidth,
    pub top_k: usize,
    pub scatter_log_base: f64,
    /// Any of `graphml`, `dot`, `edges_csv`.
    pub export_formats: Vec<String>,
    pub min_token_length: usize,
    pub terms: TermMapParams,
    pub layout: LayoutParams,
    /// Layout parameters for the term map; iterations default lower since
    /// term graphs are small.
    pub term_layout: LayoutParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            dormancy_threshold_days: DEFAULT_DORMANCY_DAYS,
            timeline_width: BinWidth::Month,
            top_k: 10,
            scatter_log_base: 10.0,
            export_formats: vec!["graphml".into(), "dot".into(), "edges_csv".into()],
            min_token_length: 3,
            terms: TermMapParams::default(),
            layout: LayoutParams::default(),
            term_layout: LayoutParams {
                iterations: 500,
                ..LayoutParams::default()
            },
        }
    }
}

impl RunConfig {
    /// The config actually used: the run seed is pushed into both layouts.
    pub fn effective(&self) -> RunConfig {
        let mut cfg = self.clone();
        cfg.layout.seed = self.seed;
        cfg.term_layout.seed = self.seed;
        cfg
    }

    pub fn validate(&self) -> Result<(), ReportError> {
        if self.dormancy_threshold_days == 0 {
            return Err(ReportError::Config(
                "dormancy_threshold_days must be positive".into(),
            ));
        }
        if !(self.scatter_log_base > 1.0 && self.scatter_log_base.is_finite()) {
            return Err(ReportError::Config(
                "scatter_log_base must be greater than 1".into(),
            ));
        }
        if self.min_token_length == 0 {
            return Err(ReportError::Config(
                "min_token_length must be positive".into(),
            ));
        }
        if self.terms.min_frequency == 0 {
            return Err(ReportError::Config(
                "terms.min_frequency must be positive".into(),
            ));
        }
        if !(1..=2).contains(&self.terms.ngram_max) {
            return Err(ReportError::Config("terms.ngram_max must be 1 or 2".into()));
        }
        if !(self.terms.resolution > 0.0 && self.terms.resolution.is_finite()) {
            return Err(ReportError::Config(
                "terms.resolution must be positive".into(),
            ));
        }
        self.export_format_list()?;
        self.layout
            .validate()
            .and_then(|_| self.term_layout.validate())
            .map_err(|e| ReportError::Config(e.to_string()))
    }

    fn export_format_list(&self) -> Result<Vec<ExportFormat>, ReportError> {
        self.export_formats
            .iter()
            .map(|s| {
                s.parse()
                    .map_err(|e: ExportError| ReportError::Config(e.to_string()))
            })
            .collect()
    }
}

/// One output file, held in memory until the whole run has succeeded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    fn new(name: impl Into<String>, bytes: impl Into<Vec<u8>>) -> Self {
        Self {
            name: name.into(),
            bytes: bytes.into(),
        }
    }

    fn json<T: Serialize>(name: &str, value: &T) -> Self {
        let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
        s.push('\n');
        Self::new(name, s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub files: Vec<ManifestEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn build_manifest(command: &str, seed: u64, artifacts: &[Artifact]) -> Manifest {
    let mut files: Vec<ManifestEntry> = artifacts
        .iter()
        .map(|a| ManifestEntry {
            name: a.name.clone(),
            sha256: sha256_hex(&a.bytes),
            bytes: a.bytes.len() as u64,
        })
        .collect();
    files.sort_by(|a, b| a.name.cmp(&b.name));
    Manifest {
        tool: TOOL_NAME.into(),
        version: TOOL_VERSION.into(),
        command: command.into(),
        seed,
        files,
    }
}

/// Writes all artifacts, then the manifest last. Returns the manifest.
pub fn write_artifacts(
    dir: &Path,
    command: &str,
    seed: u64,
    artifacts: &[Artifact],
) -> Result<Manifest, ReportError> {
    let werr = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ReportError::Write { path, source }
    };
    fs::create_dir_all(dir).map_err(werr(dir))?;
    for a in artifacts {
        let path = dir.join(&a.name);
        fs::write(&path, &a.bytes).map_err(werr(&path))?;
    }
    let manifest = build_manifest(command, seed, artifacts);
    let path = dir.join(MANIFEST_NAME);
    fs::write(&path, Artifact::json(MANIFEST_NAME, &manifest).bytes).map_err(werr(&path))?;
    Ok(manifest)
}

// ---------------------------------------------------------------------------
// Sections
// ---------------------------------------------------------------------------

/// Two-decimal percentage of a fraction.
fn pct2(fraction: f64) -> f64 {
    EngagementSummary::percent(fraction)
}

/// A percentage both at two decimals and at full precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Percent {
    pub rounded: f64,
    pub exact: f64,
}

impl Percent {
    pub fn of(fraction: f64) -> Self {
        Self {
            rounded: pct2(fraction),
            exact: fraction * 100.0,
        }
    }
}

/// The ISO week containing an awakening event and the waking user's share
/// of that week's events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Awakening {
    pub event_id: String,
    pub user_id: String,
    pub timestamp: DateTime<Utc>,
    pub week_start: DateTime<Utc>,
    pub week_end: DateTime<Utc>,
    pub user_week_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummarySection {
    pub engagement: EngagementSummary,
    pub sharing_degree_pct: Percent,
    pub recommendation_level_pct: Percent,
    pub spreading_degree_pct: Percent,
    pub exposure: ExposureReport,
    pub lifespan: LifespanReport,
    pub awakenings: Vec<Awakening>,
    pub user_types: BTreeMap<UserType, usize>,
    pub timeline: Vec<TimelineBin>,
}

fn iso_week_of(ts: DateTime<Utc>) -> (DateTime<Utc>, DateTime<Utc>) {
    let date = ts.date_naive();
    let monday = date - Duration::days(date.weekday().num_days_from_monday() as i64);
    let start = monday.and_hms_opt(0, 0, 0).expect("midnight").and_utc();
    (start, start + Duration::days(7))
}

pub fn summary_section(
    ds: &AttentionDataset,
    cfg: &RunConfig,
) -> Result<SummarySection, ReportError> {
    let engagement = summarize_engagement(ds)?;
    let lifespan = lifespan_report(ds, cfg.dormancy_threshold_days)?;
    let mut awakenings = Vec::new();
    for id in &lifespan.awakening_events {
        let ev = ds
            .events
            .iter()
            .find(|e| &e.event_id == id)
            .expect("awakening ids come from the dataset");
        let (week_start, week_end) = iso_week_of(ev.timestamp);
        awakenings.push(Awakening {
            event_id: id.clone(),
            user_id: ev.user_id.clone(),
            timestamp: ev.timestamp,
            week_start,
            week_end,
            user_week_share: window_share(ds, &ev.user_id, week_start, week_end)?,
        });
    }
    let rules = default_user_type_rules();
    let pipeline = pipeline_config(cfg);
    let mut user_types = BTreeMap::new();
    for u in ds.tweeters() {
        let t = ds
            .profile(u)
            .map(|p| classify_user_type(p, &rules, &pipeline))
            .unwrap_or(UserType::Unknown);
        *user_types.entry(t).or_insert(0) += 1;
    }
    Ok(SummarySection {
        sharing_degree_pct: Percent::of(engagement.sharing_degree),
        recommendation_level_pct: Percent::of(engagement.recommendation_level),
        spreading_degree_pct: Percent::of(engagement.spreading_degree),
        engagement,
        exposure: exposure_report(ds),
        lifespan,
        awakenings,
        user_types,
        timeline: timeline_bins(ds, cfg.timeline_width)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleRow {
    pub role: NodeRole,
    pub count: usize,
    pub percent: Percent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSection {
    /// `ok`, or `no conversational interactions` when there are no edges.
    pub status: String,
    pub stats: GraphStats,
    /// Density at the two-decimal rounding tables use.
    pub density_rounded: f64,
    pub mean_degree_rounded: f64,
    pub roles: Vec<RoleRow>,
    /// Nodes with exactly one of in-degree and out-degree equal to zero.
    pub one_directional_share: Percent,
    pub top_indegree: Vec<DegreeRanking>,
    pub top_outdegree: Vec<DegreeRanking>,
    pub files: BTreeMap<String, String>,
}

pub const NO_INTERACTIONS: &str = "no conversational interactions";

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn graph_files(cfg: &RunConfig) -> Result<BTreeMap<String, String>, ReportError> {
    let mut files = BTreeMap::new();
    files.insert("roles".into(), "roles.csv".into());
    files.insert("scatter".into(), "scatter.csv".into());
    for f in cfg.export_format_list()? {
        files.insert(
            format!("{f:?}").to_lowercase(),
            format!("graph.{}", f.extension()),
        );
    }
    Ok(files)
}

/// Graph statistics plus roles, scatter and exports. `positions` feed the
/// exported files when a layout has been run.
pub fn graph_section(
    ds: &AttentionDataset,
    cfg: &RunConfig,
    positions: Option<&BTreeMap<String, [f64; 2]>>,
) -> Result<(GraphSection, Vec<Artifact>), ReportError> {
    if ds.events.is_empty() {
        return Err(EngagementError::EmptyDataset.into());
    }
    let g = build_graph(ds);
    let stats = graph_stats(&g)?;
    let roles = assign_roles(&g);
    let n = stats.node_count as f64;
    let role_rows = NodeRole::ALL
        .iter()
        .map(|r| {
            let count = stats.role_counts.get(r).copied().unwrap_or(0);
            RoleRow {
                role: *r,
                count,
                percent: Percent::of(count as f64 / n),
            }
        })
        .collect();
    let one_directional = stats
        .role_counts
        .get(&NodeRole::SourceOnly)
        .copied()
        .unwrap_or(0)
        + stats
            .role_counts
            .get(&NodeRole::SinkOnly)
            .copied()
            .unwrap_or(0);
    let (top_in, top_out) = top_nodes(&g, cfg.top_k);

    let mut artifacts = vec![
        Artifact::new("roles.csv", roles_csv(&g, &roles)),
        Artifact::new("scatter.csv", scatter_csv(&g, cfg.scatter_log_base)?),
    ];
    for f in cfg.export_format_list()? {
        artifacts.push(Artifact::new(
            format!("graph.{}", f.extension()),
            export_graph(&g, &roles, positions, f)?,
        ));
    }
    let section = GraphSection {
        status: if stats.edge_count == 0 {
            NO_INTERACTIONS.into()
        } else {
            "ok".into()
        },
        density_rounded: round2(stats.density),
        mean_degree_rounded: round2(stats.mean_degree),
        roles: role_rows,
        one_directional_share: Percent::of(one_directional as f64 / n),
        top_indegree: top_in,
        top_outdegree: top_out,
        files: graph_files(cfg)?,
        stats,
    };
    Ok((section, artifacts))
}

fn roles_csv(g: &InteractionGraph, roles: &BTreeMap<String, NodeRole>) -> String {
    let (indeg, outdeg) = g.degrees();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["user_id", "role", "indegree", "outdegree"])
        .expect("in-memory");
    for (i, id) in g.nodes().iter().enumerate() {
        w.write_record([
            id.as_str(),
            roles[id].as_str(),
            &indeg[i].to_string(),
            &outdeg[i].to_string(),
        ])
        .expect("in-memory");
    }
    String::from_utf8(w.into_inner().expect("in-memory")).expect("utf-8")
}

fn scatter_csv(g: &InteractionGraph, base: f64) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["user_id", "indegree", "outdegree", "log1p_in", "log1p_out"])
        .expect("in-memory");
    for r in scatter_data(g, base)? {
        w.write_record([
            r.user_id,
            r.indegree.to_string(),
            r.outdegree.to_string(),
            r.log1p_in.to_string(),
            r.log1p_out.to_string(),
        ])
        .expect("in-memory");
    }
    Ok(String::from_utf8(w.into_inner().expect("in-memory")).expect("utf-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutSection {
    pub node_count: usize,
    pub steps: u64,
    pub final_global_speed: f64,
    pub final_mean_displacement: f64,
    pub cap_hits: u64,
    pub jitter_events: u64,
    pub files: BTreeMap<String, String>,
}

fn layout_summary(
    run: &crate::layout::LayoutRun,
    files: BTreeMap<String, String>,
) -> LayoutSection {
    LayoutSection {
        node_count: run.positions.len(),
        steps: run.state.step,
        final_global_speed: run.state.global_speed,
        final_mean_displacement: run.trace.last().map(|t| t.mean_displacement).unwrap_or(0.0),
        cap_hits: run.state.cap_hits,
        jitter_events: run.state.jitter_events,
        files,
    }
}

/// Node id to layout position.
pub type Positions = BTreeMap<String, [f64; 2]>;

/// ForceAtlas2 on the interaction graph, ignoring edge weights.
pub fn layout_section(
    ds: &AttentionDataset,
    cfg: &RunConfig,
) -> Result<(LayoutSection, Positions, Vec<Artifact>), ReportError> {
    if ds.events.is_empty() {
        return Err(EngagementError::EmptyDataset.into());
    }
    let cfg = cfg.effective();
    let g = build_graph(ds);
    let run = run_layout(&LayoutGraph::from_interaction(&g), &cfg.layout)?;
    let files = BTreeMap::from([
        ("positions".to_string(), "layout_positions.csv".to_string()),
        ("trace".to_string(), "layout_trace.csv".to_string()),
    ]);
    let artifacts = vec![
        Artifact::new("layout_positions.csv", positions_csv(&run.positions)),
        Artifact::new("layout_trace.csv", trace_csv(&run.trace)),
    ];
    let section = layout_summary(&run, files);
    Ok((section, run.positions, artifacts))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSection {
    pub bios: usize,
    pub term_count: usize,
    pub cluster_count: usize,
    pub modularity: f64,
    /// Cluster label to its terms, most frequent first.
    pub clusters: BTreeMap<usize, Vec<String>>,
    pub layout: Option<LayoutSection>,
    pub files: BTreeMap<String, String>,
}

fn pipeline_config(cfg: &RunConfig) -> PipelineConfig {
    PipelineConfig {
        min_token_length: cfg.min_token_length,
        ..PipelineConfig::default()
    }
}

/// Term map over the bios of every profiled user in the dataset, laid out
/// with similarity-weighted ForceAtlas2 when there are terms to place.
pub fn term_section(
    ds: &AttentionDataset,
    cfg: &RunConfig,
) -> Result<(TermSection, Vec<Artifact>), ReportError> {
    let cfg = cfg.effective();
    let pipeline = pipeline_config(&cfg);
    let bios: Vec<_> = ds
        .profiles
        .values()
        .filter_map(|p| {
            p.bio
                .as_deref()
                .map(|b| tokenize_bio(&p.user_id, b, &pipeline))
        })
        .collect();
    let map = build_term_map(&bios, &cfg.terms, cfg.seed)?;

    let mut files = BTreeMap::from([
        ("terms".to_string(), "terms.csv".to_string()),
        ("similarity".to_string(), "term_similarity.csv".to_string()),
    ]);
    let mut artifacts = Vec::new();
    let mut layout = None;
    let positions = if map.similarity.is_empty() {
        None
    } else {
        let run = run_layout(
            &LayoutGraph::from_similarity(&map.similarity),
            &cfg.term_layout,
        )?;
        files.insert("layout_trace".into(), "term_layout_trace.csv".into());
        artifacts.push(Artifact::new(
            "term_layout_trace.csv",
            trace_csv(&run.trace),
        ));
        layout = Some(layout_summary(
            &run,
            BTreeMap::from([("trace".to_string(), "term_layout_trace.csv".to_string())]),
        ));
        Some(run.positions)
    };
    artifacts.push(Artifact::new(
        "terms.csv",
        term_map_csv(&map, positions.as_ref()),
    ));
    artifacts.push(Artifact::new(
        "term_similarity.csv",
        similarity_csv(&map.similarity),
    ));

    let mut clusters: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    // map.terms is already sorted by frequency, then term
    for t in &map.terms {
        clusters
            .entry(map.clusters[&t.term])
            .or_default()
            .push(t.term.clone());
    }
    let section = TermSection {
        bios: bios.len(),
        term_count: map.terms.len(),
        cluster_count: clusters.len(),
        modularity: map.modularity,
        clusters,
        layout,
        files,
    };
    Ok((section, artifacts))
}

// ---------------------------------------------------------------------------
// Full report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperInfo {
    pub paper_id: String,
    pub title: String,
    pub publication_date: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config: RunConfig,
    pub paper: PaperInfo,
    pub summary: SummarySection,
    pub graph: GraphSection,
    pub layout: LayoutSection,
    pub terms: TermSection,
}

/// Runs every analysis. Returns the report with all its data files; the
/// JSON and text renderings are among the artifacts.
pub fn generate_report(
    ds: &AttentionDataset,
    cfg: &RunConfig,
) -> Result<(ReportDocument, Vec<Artifact>), ReportError> {
    cfg.validate()?;
    let cfg = cfg.effective();
    let summary = summary_section(ds, &cfg)?;
    let (layout, positions, mut artifacts) = layout_section(ds, &cfg)?;
    let (graph, graph_artifacts) = graph_section(ds, &cfg, Some(&positions))?;
    let (terms, term_artifacts) = term_section(ds, &cfg)?;
    artifacts.extend(graph_artifacts);
    artifacts.extend(term_artifacts);
    let doc = ReportDocument {
        tool: TOOL_NAME.into(),
        version: TOOL_VERSION.into(),
        seed: cfg.seed,
        paper: PaperInfo {
            paper_id: ds.paper.paper_id.clone(),
            title: ds.paper.title.clone(),
            publication_date: ds.paper.publication_date_string(),
        },
        config: cfg,
        summary,
        graph,
        layout,
        terms,
    };
    artifacts.push(Artifact::json("report.json", &doc));
    artifacts.push(Artifact::new("report.txt", render_text(&doc)));
    artifacts.sort_by(|a, b| a.name.cmp(&b.name));
    Ok((doc, artifacts))
}

fn ts(t: &DateTime<Utc>) -> String {
    format_timestamp(t)
}

fn pct_line(out: &mut String, label: &str, p: &Percent) {
    let _ = writeln!(out, "  {label:<24} {:>7.2}%  ({})", p.rounded, p.exact);
}

/// Plain-text rendering of the report.
pub fn render_text(doc: &ReportDocument) -> String {
    let mut o = String::new();
    let s = &doc.summary;
    let e = &s.engagement;
    let _ = writeln!(o, "{} {} report", doc.tool, doc.version);
    let _ = writeln!(
        o,
        "paper: {} ({}), published {}",
        doc.paper.title, doc.paper.paper_id, doc.paper.publication_date
    );
    let _ = writeln!(o, "seed: {}\n", doc.seed);

    let _ = writeln!(o, "ENGAGEMENT");
    let _ = writeln!(
        o,
        "  tweets {}  regular {}  mention {}  retweet {}",
        e.total_tweets, e.regular_count, e.mention_count, e.retweet_count
    );
    pct_line(&mut o, "sharing degree", &s.sharing_degree_pct);
    pct_line(&mut o, "recommendation level", &s.recommendation_level_pct);
    pct_line(&mut o, "spreading degree", &s.spreading_degree_pct);
    let _ = writeln!(o, "  CT index {:.3}  ({})", e.ct_index, e.ct_index);
    let _ = writeln!(o, "  IT index {:.3}  ({})", e.it_index, e.it_index);
    let _ = writeln!(
        o,
        "  distinct tweeters {}  conversational tweeters {}",
        e.distinct_tweeters, e.conversational_tweeters
    );
    let _ = writeln!(
        o,
        "  exposure {} ({} of {} tweeters have a profile)",
        s.exposure.exposure, s.exposure.tweeters_with_profile, s.exposure.tweeters
    );
    let types: Vec<String> = s
        .user_types
        .iter()
        .map(|(t, n)| format!("{t:?} {n}"))
        .collect();
    let _ = writeln!(o, "  user types: {}\n", types.join(", "));

    let l = &s.lifespan;
    let _ = writeln!(o, "LIFE SPAN");
    let _ = writeln!(
        o,
        "  first event {}  last event {}",
        ts(&l.first_event),
        ts(&l.last_event)
    );
    let _ = writeln!(
        o,
        "  response delay {} days  life span {} days",
        l.response_delay_days, l.lifespan_days
    );
    let _ = writeln!(
        o,
        "  dormancies (gap >= {} days):",
        l.dormancy_threshold_days
    );
    for d in &l.dormancy_intervals {
        let _ = writeln!(o, "    {} .. {}", ts(&d.start), ts(&d.end));
    }
    for a in &s.awakenings {
        let _ = writeln!(
            o,
            "  awakening {} by {} at {}: {:.2}% of the week {} .. {} ({})",
            a.event_id,
            a.user_id,
            ts(&a.timestamp),
            pct2(a.user_week_share),
            ts(&a.week_start),
            ts(&a.week_end),
            a.user_week_share
        );
    }
    let _ = writeln!(
        o,
        "\nTIMELINE ({} bins, {} non-empty)",
        s.timeline.len(),
        s.timeline.iter().filter(|b| b.count > 0).count()
    );
    for b in s.timeline.iter().filter(|b| b.count > 0) {
        let _ = writeln!(o, "  {}  {}", &ts(&b.bin_start)[..10], b.count);
    }

    let g = &doc.graph;
    let st = &g.stats;
    let _ = writeln!(o, "\nINTERACTION GRAPH");
    if g.status != "ok" {
        let _ = writeln!(o, "  {}", g.status);
    }
    let _ = writeln!(
        o,
        "  nodes {}  directed edges {}  undirected edges {}  isolated {}",
        st.node_count, st.edge_count, st.undirected_edge_count, st.isolated_count
    );
    let _ = writeln!(
        o,
        "  mean degree {:.2}  ({})",
        g.mean_degree_rounded, st.mean_degree
    );
    let _ = writeln!(
        o,
        "  density, undirected 2E/(N(N-1)) {:.2}  ({})",
        g.density_rounded, st.density
    );
    let _ = writeln!(
        o,
        "  density, directed E/(N(N-1)) {:.4}  ({})",
        st.density_directed, st.density_directed
    );
    let _ = writeln!(
        o,
        "  diameter {}  (largest weak component {} of {} components)",
        st.diameter, st.largest_component_size, st.component_count
    );
    let _ = writeln!(o, "  roles:");
    for r in &g.roles {
        let _ = writeln!(
            o,
            "    {:<16} {:>4} ({:.1}%)  ({}%)",
            r.role.as_str(),
            r.count,
            r.percent.exact,
            r.percent.exact
        );
    }
    pct_line(&mut o, "one-directional nodes", &g.one_directional_share);
    let t = &st.degree_thresholds;
    let _ = writeln!(
        o,
        "  indegree >= 2: {} ({} with outdegree)  outdegree >= 2: {} ({} with indegree)",
        t.indegree_at_least_2,
        t.indegree_at_least_2_with_outdegree,
        t.outdegree_at_least_2,
        t.outdegree_at_least_2_with_indegree
    );
    let _ = writeln!(o, "  top in-degree:");
    for r in &g.top_indegree {
        let _ = writeln!(
            o,
            "    {:<12} in {:>3}  out {:>3}",
            r.user_id, r.indegree, r.outdegree
        );
    }
    let _ = writeln!(o, "  top out-degree:");
    for r in &g.top_outdegree {
        let _ = writeln!(
            o,
            "    {:<12} in {:>3}  out {:>3}",
            r.user_id, r.indegree, r.outdegree
        );
    }
    let files: Vec<&str> = g.files.values().map(String::as_str).collect();
    let _ = writeln!(o, "  files: {}", files.join(", "));

    let ly = &doc.layout;
    let _ = writeln!(o, "\nLAYOUT");
    let _ = writeln!(
        o,
        "  {} nodes, {} steps, final speed {}, final mean displacement {}, cap hits {}, jitters {}",
        ly.node_count,
        ly.steps,
        ly.final_global_speed,
        ly.final_mean_displacement,
        ly.cap_hits,
        ly.jitter_events
    );
    let files: Vec<&str> = ly.files.values().map(String::as_str).collect();
    let _ = writeln!(o, "  files: {}", files.join(", "));

    let tm = &doc.terms;
    let _ = writeln!(o, "\nTERM MAP");
    let _ = writeln!(
        o,
        "  {} bios, {} terms, {} clusters, modularity {:.4} ({})",
        tm.bios, tm.term_count, tm.cluster_count, tm.modularity, tm.modularity
    );
    for (c, terms) in &tm.clusters {
        let head: Vec<&str> = terms.iter().take(8).map(String::as_str).collect();
        let more = if terms.len() > 8 {
            format!(" (+{})", terms.len() - 8)
        } else {
            String::new()
        };
        let _ = writeln!(o, "    {c:>3}: {}{more}", head.join(", "));
    }
    let files: Vec<&str> = tm.files.values().map(String::as_str).collect();
    let _ = writeln!(o, "  files: {}", files.join(", "));

    let _ = writeln!(o, "\nCONFIG");
    let cfg = toml::to_string(&doc.config).unwrap_or_default();
    for line in cfg.lines() {
        if line.is_empty() {
            o.push('\n');
        } else {
            let _ = writeln!(o, "  {line}");
        }
    }
    o
}
