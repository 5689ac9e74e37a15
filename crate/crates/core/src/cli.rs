//! `canet` command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::engagement::{BinWidth, EngagementError};
use crate::fixture::generate_fixture;
use crate::model::{
    canonicalize_dataset, events_to_csv, events_to_jsonl, paper_to_json, parse_dataset,
    profiles_to_csv, profiles_to_jsonl, validate_dataset, AttentionDataset, Diagnostic,
    IngestError, InputFormat,
};
use crate::report::{
    generate_report, graph_section, layout_section, summary_section, term_section, write_artifacts,
    Artifact, ReportError, RunConfig, TOOL_NAME, TOOL_VERSION,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const OUT_DIR_ENV: &str = "CANET_OUT_DIR";

const CONFIG_HELP: &str = "\
CONFIG FILE
  --config takes a TOML file. Every key is optional; flags override it and it
  overrides the built-in defaults. Top-level keys:
    seed, dormancy_threshold_days, timeline_width (day|week|month), top_k,
    scatter_log_base, export_formats ([\"graphml\", \"dot\", \"edges_csv\"]),
    min_token_length
  Tables:
    [terms]        min_frequency, ngram_max (1|2), resolution
    [layout]       gravity, bh_theta, bh_order, bh_near_field, scaling,
    [term_layout]  dissuade_hubs, prevent_overlap, linlog, iterations,
                   speed_constant, max_displacement, jitter_tolerance,
                   displacement_threshold
  The output directory can also be set with CANET_OUT_DIR.

EXIT STATUS
  0 success, 1 input or schema error, 2 usage or configuration error.";

#[derive(Debug, Parser)]
#[command(name = "canet", version, about = "Community-of-attention analytics for one paper's social-media events", after_help = CONFIG_HELP)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short = 'o', global = true, env = OUT_DIR_ENV, default_value = "canet-out")]
    out_dir: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Events file.
    #[arg(long, required_unless_present = "fixture")]
    events: Option<PathBuf>,
    /// Profiles file; without it no user has a profile.
    #[arg(long)]
    profiles: Option<PathBuf>,
    /// Paper record (JSON).
    #[arg(long, required_unless_present = "fixture")]
    paper: Option<PathBuf>,
    /// Format of the events and profiles files.
    #[arg(long, default_value = "jsonl")]
    format: InputFormat,
    /// Use the bundled synthetic fixture instead of input files.
    #[arg(long, conflicts_with_all = ["events", "profiles", "paper"])]
    fixture: bool,
}

#[derive(Debug, Args, Default)]
struct SummaryArgs {
    /// Minimum gap, in days, that counts as a dormancy.
    #[arg(long)]
    dormancy_days: Option<u32>,
    #[arg(long)]
    timeline_width: Option<BinWidth>,
}

#[derive(Debug, Args, Default)]
struct GraphArgs {
    #[arg(long)]
    top_k: Option<usize>,
    /// Comma-separated export formats: graphml, dot, edges_csv.
    #[arg(long, value_delimiter = ',')]
    export: Option<Vec<String>>,
}

#[derive(Debug, Args, Default)]
struct LayoutArgs {
    #[arg(long)]
    iterations: Option<usize>,
    /// Barnes-Hut threshold; 0 computes repulsion exactly.
    #[arg(long)]
    theta: Option<f64>,
}

#[derive(Debug, Args, Default)]
struct TermArgs {
    #[arg(long)]
    min_frequency: Option<u64>,
    #[arg(long)]
    resolution: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate and canonicalize a dataset.
    Ingest {
        #[command(flatten)]
        input: InputArgs,
        /// Format of the canonical output.
        #[arg(long, default_value = "jsonl")]
        output_format: InputFormat,
    },
    /// Engagement indices, exposure, life span and timeline.
    Summary {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        opts: SummaryArgs,
    },
    /// Interaction graph statistics, roles, scatter data and exports.
    Graph {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        opts: GraphArgs,
    },
    /// ForceAtlas2 layout of the interaction graph.
    Layout {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        opts: LayoutArgs,
    },
    /// Bio term map and its clusters.
    Terms {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        opts: TermArgs,
    },
    /// Everything above, consolidated into report.json and report.txt.
    Report {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        summary: SummaryArgs,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        layout: LayoutArgs,
        #[command(flatten)]
        terms: TermArgs,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("input has {} fatal diagnostic(s)", .0.len())]
    Invalid(Vec<Diagnostic>),
    #[error(transparent)]
    Report(#[from] ReportError),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Report(ReportError::Config(_)) => EXIT_USAGE,
            _ => EXIT_INPUT,
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let src = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&src).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

impl SummaryArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(d) = self.dormancy_days {
            cfg.dormancy_threshold_days = d;
        }
        if let Some(w) = self.timeline_width {
            cfg.timeline_width = w;
        }
    }
}

impl GraphArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(k) = self.top_k {
            cfg.top_k = k;
        }
        if let Some(e) = &self.export {
            cfg.export_formats = e.clone();
        }
    }
}

impl LayoutArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(i) = self.iterations {
            cfg.layout.iterations = i;
        }
        if let Some(t) = self.theta {
            cfg.layout.bh_theta = t;
        }
    }
}

impl TermArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(f) = self.min_frequency {
            cfg.terms.min_frequency = f;
        }
        if let Some(r) = self.resolution {
            cfg.terms.resolution = r;
        }
    }
}

/// Parses, validates and canonicalizes the input. Fixable diagnostics are
/// returned; fatal ones abort.
fn load_input(input: &InputArgs) -> Result<(AttentionDataset, Vec<Diagnostic>), CliError> {
    let ds = if input.fixture {
        generate_fixture()
    } else {
        let events = input.events.as_deref().expect("clap enforces --events");
        let paper = input.paper.as_deref().expect("clap enforces --paper");
        parse_dataset(events, input.profiles.as_deref(), paper, input.format)?
    };
    let diagnostics = validate_dataset(&ds);
    let fatal: Vec<Diagnostic> = diagnostics
        .iter()
        .filter(|d| d.is_fatal())
        .cloned()
        .collect();
    if !fatal.is_empty() {
        return Err(CliError::Invalid(fatal));
    }
    if ds.events.is_empty() {
        return Err(ReportError::Engagement(EngagementError::EmptyDataset).into());
    }
    Ok((canonicalize_dataset(&ds), diagnostics))
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'a str,
    version: &'a str,
    seed: u64,
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

fn envelope<T: Serialize>(name: &str, cfg: &RunConfig, body: T) -> Artifact {
    let doc = Envelope {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        seed: cfg.seed,
        config: cfg,
        body,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    Artifact {
        name: name.into(),
        bytes: s.into_bytes(),
    }
}

fn run(cli: Cli) -> Result<(String, usize), CliError> {
    let mut cfg = load_config(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let (name, input) = match &cli.command {
        Command::Ingest { input, .. } => ("ingest", input),
        Command::Summary { input, opts } => {
            opts.apply(&mut cfg);
            ("summary", input)
        }
        Command::Graph { input, opts } => {
            opts.apply(&mut cfg);
            ("graph", input)
        }
        Command::Layout { input, opts } => {
            opts.apply(&mut cfg);
            ("layout", input)
        }
        Command::Terms { input, opts } => {
            opts.apply(&mut cfg);
            ("terms", input)
        }
        Command::Report {
            input,
            summary,
            graph,
            layout,
            terms,
        } => {
            summary.apply(&mut cfg);
            graph.apply(&mut cfg);
            layout.apply(&mut cfg);
            terms.apply(&mut cfg);
            ("report", input)
        }
    };
    cfg.validate()?;
    let cfg = cfg.effective();
    let (ds, fixed) = load_input(input)?;

    let artifacts = match &cli.command {
        Command::Ingest { output_format, .. } => {
            let (ext, events, profiles) = match output_format {
                InputFormat::Jsonl => (
                    "jsonl",
                    events_to_jsonl(&ds.events),
                    profiles_to_jsonl(&ds.profiles),
                ),
                InputFormat::Csv => (
                    "csv",
                    events_to_csv(&ds.events),
                    profiles_to_csv(&ds.profiles),
                ),
            };
            #[derive(Serialize)]
            struct Ingested<'a> {
                events: usize,
                profiles: usize,
                repaired: &'a [Diagnostic],
            }
            vec![
                Artifact {
                    name: format!("dataset.{ext}"),
                    bytes: events.into_bytes(),
                },
                Artifact {
                    name: format!("dataset.profiles.{ext}"),
                    bytes: profiles.into_bytes(),
                },
                Artifact {
                    name: "dataset.paper.json".into(),
                    bytes: paper_to_json(&ds.paper).into_bytes(),
                },
                envelope(
                    "diagnostics.json",
                    &cfg,
                    Ingested {
                        events: ds.events.len(),
                        profiles: ds.profiles.len(),
                        repaired: &fixed,
                    },
                ),
            ]
        }
        Command::Summary { .. } => {
            #[derive(Serialize)]
            struct Body {
                summary: crate::report::SummarySection,
            }
            vec![envelope(
                "summary.json",
                &cfg,
                Body {
                    summary: summary_section(&ds, &cfg)?,
                },
            )]
        }
        Command::Graph { .. } => {
            #[derive(Serialize)]
            struct Body {
                graph: crate::report::GraphSection,
            }
            let (graph, mut files) = graph_section(&ds, &cfg, None)?;
            files.push(envelope("graph_stats.json", &cfg, Body { graph }));
            files
        }
        Command::Layout { .. } => {
            #[derive(Serialize)]
            struct Body {
                layout: crate::report::LayoutSection,
            }
            let (layout, _, mut files) = layout_section(&ds, &cfg)?;
            files.push(envelope("layout.json", &cfg, Body { layout }));
            files
        }
        Command::Terms { .. } => {
            #[derive(Serialize)]
            struct Body {
                terms: crate::report::TermSection,
            }
            let (terms, mut files) = term_section(&ds, &cfg)?;
            files.push(envelope("terms.json", &cfg, Body { terms }));
            files
        }
        Command::Report { .. } => generate_report(&ds, &cfg)?.1,
    };
    write_artifacts(&cli.out_dir, name, cfg.seed, &artifacts)?;
    Ok((cli.out_dir.display().to_string(), artifacts.len()))
}

/// Runs one invocation and returns its exit status. Diagnostics go to stderr.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok((dir, n)) => {
            eprintln!(
                "wrote {n} file(s) and {} to {dir}",
                crate::report::MANIFEST_NAME
            );
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Invalid(diags) = &e {
                for d in diags {
                    eprintln!("  {d}");
                }
            }
            e.exit_code()
        }
    }
}
