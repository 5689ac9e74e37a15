//! Attention dataset data model: parsing, validation and canonicalization.
//!
//! A dataset is three files: an events file (one sharing event per row), an
//! optional profiles file, and a paper record. Events and profiles come as
//! JSONL or CSV with identical column names; CSV list columns are
//! `|`-separated and empty cells stand for null.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, Datelike, NaiveDate, SecondsFormat, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Earliest instant accepted by default: the first public tweet.
pub const DEFAULT_EPOCH: &str = "2006-03-21T00:00:00Z";

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    FileUnreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: row {row}: field `{field}`: {reason}")]
    SchemaViolation {
        file: String,
        row: usize,
        field: String,
        reason: String,
    },
    #[error("duplicate event id `{0}`")]
    DuplicateEventId(String),
    #[error("duplicate profile for user `{0}`")]
    DuplicateUserId(String),
}

impl IngestError {
    fn schema(file: &str, row: usize, field: &str, reason: impl Into<String>) -> Self {
        IngestError::SchemaViolation {
            file: file.to_string(),
            row,
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    Jsonl,
    Csv,
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(InputFormat::Jsonl),
            "csv" => Ok(InputFormat::Csv),
            other => Err(format!(
                "unknown input format `{other}` (expected jsonl or csv)"
            )),
        }
    }
}

/// How much of a publication date was actually given in the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatePrecision {
    Year,
    Month,
    Day,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub paper_id: String,
    pub title: String,
    pub publication_date: NaiveDate,
    /// Year-only and year-month inputs are completed to the first day; this
    /// records what was given.
    pub date_precision: DatePrecision,
    pub doi: Option<String>,
}

impl PaperRecord {
    /// The publication date as it was given (`2002`, `2002-10` or `2002-10-01`).
    pub fn publication_date_string(&self) -> String {
        let d = self.publication_date;
        match self.date_precision {
            DatePrecision::Year => format!("{:04}", d.year()),
            DatePrecision::Month => format!("{:04}-{:02}", d.year(), d.month()),
            DatePrecision::Day => d.format("%Y-%m-%d").to_string(),
        }
    }
}

/// Parses `YYYY`, `YYYY-MM` or `YYYY-MM-DD`.
pub fn parse_partial_date(s: &str) -> Option<(NaiveDate, DatePrecision)> {
    let s = s.trim();
    let parts: Vec<&str> = s.split('-').collect();
    let num = |p: &str, len: usize| -> Option<u32> {
        if p.len() == len && p.bytes().all(|b| b.is_ascii_digit()) {
            p.parse().ok()
        } else {
            None
        }
    };
    match parts.as_slice() {
        [y] => NaiveDate::from_ymd_opt(num(y, 4)? as i32, 1, 1).map(|d| (d, DatePrecision::Year)),
        [y, m] => NaiveDate::from_ymd_opt(num(y, 4)? as i32, num(m, 2)?, 1)
            .map(|d| (d, DatePrecision::Month)),
        [y, m, d] => NaiveDate::from_ymd_opt(num(y, 4)? as i32, num(m, 2)?, num(d, 2)?)
            .map(|d| (d, DatePrecision::Day)),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetEvent {
    pub event_id: String,
    pub user_id: String,
    pub timestamp: DateTime<Utc>,
    pub text: String,
    pub mentioned_user_ids: Vec<String>,
    pub retweet_of_user_id: Option<String>,
    /// Explicit retweet marker from the export, when it carries one.
    pub is_retweet: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: String,
    pub handle: String,
    pub bio: Option<String>,
    /// Signed so that corrupt exports can be loaded and reported by validation.
    pub followers_count: i64,
    pub language_hint: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttentionDataset {
    pub paper: PaperRecord,
    pub events: Vec<TweetEvent>,
    pub profiles: BTreeMap<String, UserProfile>,
}

impl AttentionDataset {
    pub fn profile(&self, user_id: &str) -> Option<&UserProfile> {
        self.profiles.get(user_id)
    }

    /// Distinct authors of at least one event, sorted.
    pub fn tweeters(&self) -> Vec<&str> {
        let set: std::collections::BTreeSet<&str> =
            self.events.iter().map(|e| e.user_id.as_str()).collect();
        set.into_iter().collect()
    }
}

pub fn format_timestamp(ts: &DateTime<Utc>) -> String {
    ts.to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Parses an RFC 3339 instant and truncates it to whole seconds in UTC.
pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    let dt = DateTime::parse_from_rfc3339(s.trim()).ok()?;
    Utc.timestamp_opt(dt.timestamp(), 0).single()
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

fn read_file(path: &Path) -> Result<String, IngestError> {
    fs::read_to_string(path).map_err(|source| IngestError::FileUnreadable {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a dataset from disk. The paper record is always JSON; events and
/// profiles follow `format`. A missing profiles path yields no profiles.
pub fn parse_dataset(
    events_path: &Path,
    profiles_path: Option<&Path>,
    paper_path: &Path,
    format: InputFormat,
) -> Result<AttentionDataset, IngestError> {
    let paper = parse_paper(&read_file(paper_path)?)?;
    let events_src = read_file(events_path)?;
    let events = match format {
        InputFormat::Jsonl => parse_events_jsonl(&events_src)?,
        InputFormat::Csv => parse_events_csv(&events_src)?,
    };
    let profiles = match profiles_path {
        None => BTreeMap::new(),
        Some(p) => {
            let src = read_file(p)?;
            match format {
                InputFormat::Jsonl => parse_profiles_jsonl(&src)?,
                InputFormat::Csv => parse_profiles_csv(&src)?,
            }
        }
    };
    Ok(AttentionDataset {
        paper,
        events,
        profiles,
    })
}

/// A field accessor over one input row that turns type problems into
/// row-numbered schema violations. Both the JSONL and the CSV readers
/// normalize rows into a JSON object first.
struct Row<'a> {
    file: &'static str,
    row: usize,
    obj: &'a Map<String, Value>,
}

impl Row<'_> {
    fn err(&self, field: &str, reason: impl Into<String>) -> IngestError {
        IngestError::schema(self.file, self.row, field, reason)
    }

    fn opt_str(&self, field: &str) -> Result<Option<String>, IngestError> {
        match self.obj.get(field) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(other) => Err(self.err(field, format!("expected string, found {other}"))),
        }
    }

    fn req_str(&self, field: &str) -> Result<String, IngestError> {
        self.opt_str(field)?
            .ok_or_else(|| self.err(field, "missing required field"))
    }

    fn nonempty_str(&self, field: &str) -> Result<String, IngestError> {
        let s = self.req_str(field)?;
        if s.trim().is_empty() {
            return Err(self.err(field, "must not be empty"));
        }
        Ok(s)
    }

    fn opt_bool(&self, field: &str) -> Result<Option<bool>, IngestError> {
        match self.obj.get(field) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::Bool(b)) => Ok(Some(*b)),
            Some(Value::String(s)) => match s.trim().to_ascii_lowercase().as_str() {
                "" => Ok(None),
                "true" | "1" => Ok(Some(true)),
                "false" | "0" => Ok(Some(false)),
                _ => Err(self.err(field, format!("expected boolean, found `{s}`"))),
            },
            Some(other) => Err(self.err(field, format!("expected boolean, found {other}"))),
        }
    }

    fn int(&self, field: &str) -> Result<i64, IngestError> {
        match self.obj.get(field) {
            None | Some(Value::Null) => Err(self.err(field, "missing required field")),
            Some(Value::Number(n)) => n
                .as_i64()
                .ok_or_else(|| self.err(field, format!("expected integer, found {n}"))),
            Some(Value::String(s)) => s
                .trim()
                .parse()
                .map_err(|_| self.err(field, format!("expected integer, found `{s}`"))),
            Some(other) => Err(self.err(field, format!("expected integer, found {other}"))),
        }
    }

    fn str_list(&self, field: &str) -> Result<Vec<String>, IngestError> {
        match self.obj.get(field) {
            None | Some(Value::Null) => Ok(Vec::new()),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::String(s) => Ok(s.clone()),
                    other => Err(self.err(field, format!("expected string items, found {other}"))),
                })
                .collect(),
            Some(Value::String(s)) => Ok(split_list(s)),
            Some(other) => Err(self.err(field, format!("expected array, found {other}"))),
        }
    }

    fn timestamp(&self, field: &str) -> Result<DateTime<Utc>, IngestError> {
        let raw = self.req_str(field)?;
        parse_timestamp(&raw)
            .ok_or_else(|| self.err(field, format!("not an RFC 3339 instant: `{raw}`")))
    }
}

fn split_list(s: &str) -> Vec<String> {
    if s.is_empty() {
        Vec::new()
    } else {
        s.split('|').map(str::to_string).collect()
    }
}

fn event_from_row(row: &Row<'_>) -> Result<TweetEvent, IngestError> {
    Ok(TweetEvent {
        event_id: row.nonempty_str("event_id")?,
        user_id: row.nonempty_str("user_id")?,
        timestamp: row.timestamp("timestamp")?,
        text: row.opt_str("text")?.unwrap_or_default(),
        mentioned_user_ids: row.str_list("mentioned_user_ids")?,
        retweet_of_user_id: row.opt_str("retweet_of_user_id")?.filter(|s| !s.is_empty()),
        is_retweet: row.opt_bool("is_retweet")?,
    })
}

fn profile_from_row(row: &Row<'_>) -> Result<UserProfile, IngestError> {
    Ok(UserProfile {
        user_id: row.nonempty_str("user_id")?,
        handle: row.req_str("handle")?,
        bio: row.opt_str("bio")?,
        followers_count: row.int("followers_count")?,
        language_hint: row.opt_str("language_hint")?,
    })
}

fn jsonl_rows<T>(
    src: &str,
    file: &'static str,
    mut f: impl FnMut(&Row<'_>) -> Result<T, IngestError>,
) -> Result<Vec<T>, IngestError> {
    let mut out = Vec::new();
    for (idx, line) in src.lines().enumerate() {
        let row = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(line)
            .map_err(|e| IngestError::schema(file, row, "<row>", format!("invalid JSON: {e}")))?;
        let Value::Object(obj) = value else {
            return Err(IngestError::schema(
                file,
                row,
                "<row>",
                "expected a JSON object",
            ));
        };
        out.push(f(&Row {
            file,
            row,
            obj: &obj,
        })?);
    }
    Ok(out)
}

/// CSV cells are all strings; empty cells become null. Row numbers count the
/// header as row 1.
fn csv_rows<T>(
    src: &str,
    file: &'static str,
    mut f: impl FnMut(&Row<'_>) -> Result<T, IngestError>,
) -> Result<Vec<T>, IngestError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(src.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| IngestError::schema(file, 1, "<header>", e.to_string()))?
        .clone();
    let mut out = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 2;
        let record = record.map_err(|e| IngestError::schema(file, row, "<row>", e.to_string()))?;
        let mut obj = Map::new();
        for (name, cell) in headers.iter().zip(record.iter()) {
            let v = if cell.is_empty() {
                Value::Null
            } else {
                Value::String(cell.to_string())
            };
            obj.insert(name.to_string(), v);
        }
        out.push(f(&Row {
            file,
            row,
            obj: &obj,
        })?);
    }
    Ok(out)
}

fn check_unique_events(events: &[TweetEvent]) -> Result<(), IngestError> {
    let mut seen = HashSet::new();
    for e in events {
        if !seen.insert(e.event_id.as_str()) {
            return Err(IngestError::DuplicateEventId(e.event_id.clone()));
        }
    }
    Ok(())
}

fn collect_profiles(list: Vec<UserProfile>) -> Result<BTreeMap<String, UserProfile>, IngestError> {
    let mut map = BTreeMap::new();
    for p in list {
        if map.contains_key(&p.user_id) {
            return Err(IngestError::DuplicateUserId(p.user_id));
        }
        map.insert(p.user_id.clone(), p);
    }
    Ok(map)
}

pub fn parse_events_jsonl(src: &str) -> Result<Vec<TweetEvent>, IngestError> {
    let events = jsonl_rows(src, "events", event_from_row)?;
    check_unique_events(&events)?;
    Ok(events)
}

pub fn parse_events_csv(src: &str) -> Result<Vec<TweetEvent>, IngestError> {
    let events = csv_rows(src, "events", event_from_row)?;
    check_unique_events(&events)?;
    Ok(events)
}

pub fn parse_profiles_jsonl(src: &str) -> Result<BTreeMap<String, UserProfile>, IngestError> {
    collect_profiles(jsonl_rows(src, "profiles", profile_from_row)?)
}

pub fn parse_profiles_csv(src: &str) -> Result<BTreeMap<String, UserProfile>, IngestError> {
    collect_profiles(csv_rows(src, "profiles", profile_from_row)?)
}

pub fn parse_paper(src: &str) -> Result<PaperRecord, IngestError> {
    let value: Value = serde_json::from_str(src)
        .map_err(|e| IngestError::schema("paper", 1, "<row>", format!("invalid JSON: {e}")))?;
    let Value::Object(obj) = value else {
        return Err(IngestError::schema(
            "paper",
            1,
            "<row>",
            "expected a JSON object",
        ));
    };
    let row = Row {
        file: "paper",
        row: 1,
        obj: &obj,
    };
    let raw_date = row.req_str("publication_date")?;
    let (publication_date, date_precision) = parse_partial_date(&raw_date).ok_or_else(|| {
        row.err(
            "publication_date",
            format!("expected YYYY, YYYY-MM or YYYY-MM-DD, found `{raw_date}`"),
        )
    })?;
    Ok(PaperRecord {
        paper_id: row.nonempty_str("paper_id")?,
        title: row.opt_str("title")?.unwrap_or_default(),
        publication_date,
        date_precision,
        doi: row.opt_str("doi")?,
    })
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

const EVENT_COLUMNS: [&str; 7] = [
    "event_id",
    "user_id",
    "timestamp",
    "text",
    "mentioned_user_ids",
    "retweet_of_user_id",
    "is_retweet",
];
const PROFILE_COLUMNS: [&str; 5] = [
    "user_id",
    "handle",
    "bio",
    "followers_count",
    "language_hint",
];

fn event_json(e: &TweetEvent) -> Value {
    serde_json::json!({
        "event_id": e.event_id,
        "user_id": e.user_id,
        "timestamp": format_timestamp(&e.timestamp),
        "text": e.text,
        "mentioned_user_ids": e.mentioned_user_ids,
        "retweet_of_user_id": e.retweet_of_user_id,
        "is_retweet": e.is_retweet,
    })
}

fn profile_json(p: &UserProfile) -> Value {
    serde_json::json!({
        "user_id": p.user_id,
        "handle": p.handle,
        "bio": p.bio,
        "followers_count": p.followers_count,
        "language_hint": p.language_hint,
    })
}

fn to_jsonl<'a>(values: impl Iterator<Item = Value> + 'a) -> String {
    let mut out = String::new();
    for v in values {
        out.push_str(&v.to_string());
        out.push('\n');
    }
    out
}

pub fn events_to_jsonl(events: &[TweetEvent]) -> String {
    to_jsonl(events.iter().map(event_json))
}

pub fn profiles_to_jsonl(profiles: &BTreeMap<String, UserProfile>) -> String {
    to_jsonl(profiles.values().map(profile_json))
}

pub fn paper_to_json(paper: &PaperRecord) -> String {
    let v = serde_json::json!({
        "paper_id": paper.paper_id,
        "title": paper.title,
        "publication_date": paper.publication_date_string(),
        "doi": paper.doi,
    });
    serde_json::to_string_pretty(&v).expect("paper record serializes") + "\n"
}

fn csv_string(rows: Vec<Vec<String>>, header: &[&str]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv write");
    for r in rows {
        w.write_record(&r).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv output is utf-8")
}

pub fn events_to_csv(events: &[TweetEvent]) -> String {
    let rows = events
        .iter()
        .map(|e| {
            vec![
                e.event_id.clone(),
                e.user_id.clone(),
                format_timestamp(&e.timestamp),
                e.text.clone(),
                e.mentioned_user_ids.join("|"),
                e.retweet_of_user_id.clone().unwrap_or_default(),
                e.is_retweet.map(|b| b.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    csv_string(rows, &EVENT_COLUMNS)
}

pub fn profiles_to_csv(profiles: &BTreeMap<String, UserProfile>) -> String {
    let rows = profiles
        .values()
        .map(|p| {
            vec![
                p.user_id.clone(),
                p.handle.clone(),
                p.bio.clone().unwrap_or_default(),
                p.followers_count.to_string(),
                p.language_hint.clone().unwrap_or_default(),
            ]
        })
        .collect();
    csv_string(rows, &PROFILE_COLUMNS)
}

/// Writes `events`, `profiles` and `paper` files for `ds` into `dir` using
/// `stem` as the file-name prefix. Returns the three paths.
pub fn write_dataset(
    ds: &AttentionDataset,
    dir: &Path,
    stem: &str,
    format: InputFormat,
) -> std::io::Result<[PathBuf; 3]> {
    fs::create_dir_all(dir)?;
    let (ext, events, profiles) = match format {
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
    let events_path = dir.join(format!("{stem}.{ext}"));
    let profiles_path = dir.join(format!("{stem}.profiles.{ext}"));
    let paper_path = dir.join(format!("{stem}.paper.json"));
    fs::write(&events_path, events)?;
    fs::write(&profiles_path, profiles)?;
    fs::write(&paper_path, paper_to_json(&ds.paper))?;
    Ok([events_path, profiles_path, paper_path])
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    EmptyPaperId,
    DuplicateEventId {
        event_id: String,
    },
    EmptyField {
        event_id: String,
        field: String,
    },
    RetweetFlagConflict {
        event_id: String,
    },
    DuplicateMention {
        event_id: String,
        user_id: String,
    },
    EventBeforeEpoch {
        event_id: String,
    },
    EventsUnsorted {
        event_id: String,
    },
    NegativeFollowers {
        user_id: String,
        followers_count: i64,
    },
    ProfileKeyMismatch {
        key: String,
        user_id: String,
    },
}

impl Diagnostic {
    /// Fixable diagnostics are repaired by [`canonicalize_dataset`]; everything
    /// else must be corrected in the input.
    pub fn is_fatal(&self) -> bool {
        !matches!(
            self,
            Diagnostic::DuplicateMention { .. } | Diagnostic::EventsUnsorted { .. }
        )
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::EmptyPaperId => write!(f, "paper: paper_id is empty"),
            Diagnostic::DuplicateEventId { event_id } => {
                write!(f, "event {event_id}: event_id is not unique")
            }
            Diagnostic::EmptyField { event_id, field } => {
                write!(f, "event {event_id}: {field} is empty")
            }
            Diagnostic::RetweetFlagConflict { event_id } => write!(
                f,
                "event {event_id}: retweet_of_user_id is set but is_retweet is false"
            ),
            Diagnostic::DuplicateMention { event_id, user_id } => {
                write!(f, "event {event_id}: {user_id} is mentioned more than once")
            }
            Diagnostic::EventBeforeEpoch { event_id } => {
                write!(f, "event {event_id}: timestamp precedes the dataset epoch")
            }
            Diagnostic::EventsUnsorted { event_id } => {
                write!(f, "event {event_id}: out of (timestamp, event_id) order")
            }
            Diagnostic::NegativeFollowers {
                user_id,
                followers_count,
            } => write!(
                f,
                "profile {user_id}: followers_count {followers_count} is negative"
            ),
            Diagnostic::ProfileKeyMismatch { key, user_id } => {
                write!(f, "profile map key {key} holds profile {user_id}")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ValidationOptions {
    pub epoch: DateTime<Utc>,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            epoch: parse_timestamp(DEFAULT_EPOCH).expect("default epoch parses"),
        }
    }
}

pub fn validate_dataset(ds: &AttentionDataset) -> Vec<Diagnostic> {
    validate_dataset_with(ds, &ValidationOptions::default())
}

pub fn validate_dataset_with(ds: &AttentionDataset, opts: &ValidationOptions) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if ds.paper.paper_id.trim().is_empty() {
        out.push(Diagnostic::EmptyPaperId);
    }
    let mut seen = HashSet::new();
    for (i, e) in ds.events.iter().enumerate() {
        if !seen.insert(e.event_id.as_str()) {
            out.push(Diagnostic::DuplicateEventId {
                event_id: e.event_id.clone(),
            });
        }
        for (field, value) in [("event_id", &e.event_id), ("user_id", &e.user_id)] {
            if value.trim().is_empty() {
                out.push(Diagnostic::EmptyField {
                    event_id: e.event_id.clone(),
                    field: field.to_string(),
                });
            }
        }
        if e.retweet_of_user_id.is_some() && e.is_retweet == Some(false) {
            out.push(Diagnostic::RetweetFlagConflict {
                event_id: e.event_id.clone(),
            });
        }
        let mut mentioned = HashSet::new();
        for m in &e.mentioned_user_ids {
            if !mentioned.insert(m.as_str()) {
                out.push(Diagnostic::DuplicateMention {
                    event_id: e.event_id.clone(),
                    user_id: m.clone(),
                });
            }
        }
        if e.timestamp < opts.epoch {
            out.push(Diagnostic::EventBeforeEpoch {
                event_id: e.event_id.clone(),
            });
        }
        if i > 0 {
            let prev = &ds.events[i - 1];
            if (&prev.timestamp, &prev.event_id) > (&e.timestamp, &e.event_id) {
                out.push(Diagnostic::EventsUnsorted {
                    event_id: e.event_id.clone(),
                });
            }
        }
    }
    for (key, p) in &ds.profiles {
        if key != &p.user_id {
            out.push(Diagnostic::ProfileKeyMismatch {
                key: key.clone(),
                user_id: p.user_id.clone(),
            });
        }
        if p.followers_count < 0 {
            out.push(Diagnostic::NegativeFollowers {
                user_id: p.user_id.clone(),
                followers_count: p.followers_count,
            });
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Canonicalization
// ---------------------------------------------------------------------------

/// Sorts events by `(timestamp, event_id)`, deduplicates mention lists
/// (first occurrence wins) and drops self-mentions. Empty optional strings
/// are normalized to `None` so that JSONL and CSV encode the same dataset.
pub fn canonicalize_dataset(ds: &AttentionDataset) -> AttentionDataset {
    let mut events: Vec<TweetEvent> = ds
        .events
        .iter()
        .map(|e| {
            let mut seen = HashSet::new();
            let mentioned_user_ids = e
                .mentioned_user_ids
                .iter()
                .filter(|m| !m.is_empty() && **m != e.user_id && seen.insert(m.as_str()))
                .cloned()
                .collect();
            TweetEvent {
                mentioned_user_ids,
                retweet_of_user_id: e.retweet_of_user_id.clone().filter(|s| !s.is_empty()),
                ..e.clone()
            }
        })
        .collect();
    events.sort_by(|a, b| (a.timestamp, &a.event_id).cmp(&(b.timestamp, &b.event_id)));

    let profiles = ds
        .profiles
        .values()
        .map(|p| {
            let p = UserProfile {
                bio: p.bio.clone().filter(|s| !s.is_empty()),
                language_hint: p.language_hint.clone().filter(|s| !s.is_empty()),
                ..p.clone()
            };
            (p.user_id.clone(), p)
        })
        .collect();

    AttentionDataset {
        paper: PaperRecord {
            doi: ds.paper.doi.clone().filter(|s| !s.is_empty()),
            ..ds.paper.clone()
        },
        events,
        profiles,
    }
}
