//! Community-of-attention network analytics.
//!
//! Turns social-sharing events about one scholarly paper into engagement
//! indices, a weighted directed interaction graph with node roles and
//! statistics, bio-term clusters, and a ForceAtlas2 layout.

pub mod cli;
pub mod engagement;
pub mod fixture;
pub mod graph;
pub mod layout;
pub mod model;
pub mod report;
pub mod termmap;
pub mod textprep;

pub use engagement::{
    classify_tweet, compute_exposure, lifespan_report, select_conversational, summarize_engagement,
    timeline_bins, window_share, EngagementSummary, TweetKind,
};
pub use graph::{assign_roles, build_graph, graph_stats, InteractionGraph, NodeRole};
pub use layout::{run_layout, LayoutGraph, LayoutParams};
pub use model::{
    canonicalize_dataset, parse_dataset, validate_dataset, AttentionDataset, InputFormat,
    PaperRecord, TweetEvent, UserProfile,
};
pub use report::{generate_report, ReportDocument, RunConfig};
pub use termmap::{build_term_map, cluster_terms, TermMapParams, TermMapResult};
