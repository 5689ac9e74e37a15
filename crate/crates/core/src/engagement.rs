//! Tweet classification and engagement indices.
//!
//! Every event is exactly one of retweet, mention or regular tweet. The
//! shares of the three kinds are the spreading degree, the recommendation
//! level and the sharing degree; the conversational index (CT) is the share
//! of mentions plus retweets and the informative index (IT) the share of
//! regular tweets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use chrono::{DateTime, Datelike, Duration, NaiveDate, TimeZone, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::model::{AttentionDataset, DatePrecision, TweetEvent, UserProfile};
use crate::textprep::{preprocess_bio, PipelineConfig};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EngagementError {
    #[error("dataset has no events")]
    EmptyDataset,
    #[error("no events fall inside the window")]
    EmptyWindow,
    #[error("window start must precede window end")]
    InvalidWindow,
    #[error("dormancy threshold must be positive")]
    InvalidThreshold,
    #[error("invalid user-type rules: {0}")]
    InvalidRules(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TweetKind {
    Retweet,
    Mention,
    Regular,
}

fn retweet_prefix() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*RT @(\w+):").expect("static regex"))
}

fn mention_token() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?:^|[^\w@])@(\w+)").expect("static regex"))
}

/// The handle quoted in a leading `RT @handle:` marker.
pub fn retweet_handle(text: &str) -> Option<&str> {
    retweet_prefix()
        .captures(text)
        .and_then(|c| c.get(1))
        .map(|m| m.as_str())
}

pub fn text_has_mention(text: &str) -> bool {
    mention_token().is_match(text)
}

/// Retweet beats mention beats regular. A structured origin always marks a
/// retweet; otherwise an explicit `is_retweet` flag decides, and only in its
/// absence is the `RT @handle:` prefix consulted.
pub fn classify_tweet(ev: &TweetEvent) -> TweetKind {
    let retweet = if ev.retweet_of_user_id.is_some() {
        true
    } else if let Some(flag) = ev.is_retweet {
        flag
    } else {
        retweet_handle(&ev.text).is_some()
    };
    if retweet {
        TweetKind::Retweet
    } else if !ev.mentioned_user_ids.is_empty() || text_has_mention(&ev.text) {
        TweetKind::Mention
    } else {
        TweetKind::Regular
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngagementSummary {
    pub total_tweets: u64,
    pub regular_count: u64,
    pub mention_count: u64,
    pub retweet_count: u64,
    pub sharing_degree: f64,
    pub recommendation_level: f64,
    pub spreading_degree: f64,
    pub ct_index: f64,
    pub it_index: f64,
    pub distinct_tweeters: u64,
    /// Tweeters with at least one mention or retweet.
    pub conversational_tweeters: u64,
    pub exposure: u64,
}

impl EngagementSummary {
    /// Percentages as the paper tables print them: two decimals.
    pub fn percent(fraction: f64) -> f64 {
        (fraction * 10_000.0).round() / 100.0
    }
}

pub fn summarize_engagement(ds: &AttentionDataset) -> Result<EngagementSummary, EngagementError> {
    let total = ds.events.len() as u64;
    if total == 0 {
        return Err(EngagementError::EmptyDataset);
    }
    let (mut regular, mut mention, mut retweet) = (0u64, 0u64, 0u64);
    let mut conversational = BTreeSet::new();
    for ev in &ds.events {
        match classify_tweet(ev) {
            TweetKind::Regular => regular += 1,
            TweetKind::Mention => {
                mention += 1;
                conversational.insert(ev.user_id.as_str());
            }
            TweetKind::Retweet => {
                retweet += 1;
                conversational.insert(ev.user_id.as_str());
            }
        }
    }
    let t = total as f64;
    let exposure = exposure_report(ds);
    Ok(EngagementSummary {
        total_tweets: total,
        regular_count: regular,
        mention_count: mention,
        retweet_count: retweet,
        sharing_degree: regular as f64 / t,
        recommendation_level: mention as f64 / t,
        spreading_degree: retweet as f64 / t,
        ct_index: (mention + retweet) as f64 / t,
        it_index: regular as f64 / t,
        distinct_tweeters: exposure.tweeters,
        conversational_tweeters: conversational.len() as u64,
        exposure: exposure.exposure,
    })
}

/// Exposure together with how many tweeters it could actually be measured for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExposureReport {
    pub exposure: u64,
    pub tweeters: u64,
    pub tweeters_with_profile: u64,
    pub missing_profiles: Vec<String>,
}

pub fn exposure_report(ds: &AttentionDataset) -> ExposureReport {
    let tweeters = ds.tweeters();
    let mut exposure = 0u64;
    let mut missing = Vec::new();
    for u in &tweeters {
        match ds.profile(u) {
            Some(p) => exposure += p.followers_count.max(0) as u64,
            None => missing.push(u.to_string()),
        }
    }
    ExposureReport {
        exposure,
        tweeters: tweeters.len() as u64,
        tweeters_with_profile: (tweeters.len() - missing.len()) as u64,
        missing_profiles: missing,
    }
}

/// Summed followers of distinct tweeting users; tweeters without a profile
/// contribute nothing (see [`exposure_report`] for coverage).
pub fn compute_exposure(ds: &AttentionDataset) -> u64 {
    exposure_report(ds).exposure
}

// ---------------------------------------------------------------------------
// Life span and dormancy
// ---------------------------------------------------------------------------

pub const DEFAULT_DORMANCY_DAYS: u32 = 365;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DormancyInterval {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LifespanReport {
    pub first_event: DateTime<Utc>,
    pub last_event: DateTime<Utc>,
    /// Whole days from the publication date to the first event.
    pub response_delay_days: i64,
    pub publication_date_precision: DatePrecision,
    /// Days from first to last event, rounded up.
    pub lifespan_days: i64,
    pub dormancy_threshold_days: u32,
    pub dormancy_intervals: Vec<DormancyInterval>,
    pub awakening_events: Vec<String>,
}

fn ceil_days(d: Duration) -> i64 {
    let secs = d.num_seconds();
    (secs + 86_399).div_euclid(86_400)
}

/// Life span rounds up so that it is zero exactly when all events share one
/// timestamp. Dormancies are the gaps between consecutive events that last at
/// least `dormancy_threshold_days`.
pub fn lifespan_report(
    ds: &AttentionDataset,
    dormancy_threshold_days: u32,
) -> Result<LifespanReport, EngagementError> {
    if dormancy_threshold_days == 0 {
        return Err(EngagementError::InvalidThreshold);
    }
    let mut events: Vec<&TweetEvent> = ds.events.iter().collect();
    if events.is_empty() {
        return Err(EngagementError::EmptyDataset);
    }
    events.sort_by(|a, b| (a.timestamp, &a.event_id).cmp(&(b.timestamp, &b.event_id)));
    let first = events[0].timestamp;
    let last = events[events.len() - 1].timestamp;
    let threshold = Duration::days(dormancy_threshold_days as i64);

    let mut dormancy_intervals = Vec::new();
    let mut awakening_events = Vec::new();
    for pair in events.windows(2) {
        let gap = pair[1].timestamp - pair[0].timestamp;
        if gap >= threshold {
            dormancy_intervals.push(DormancyInterval {
                start: pair[0].timestamp,
                end: pair[1].timestamp,
            });
            awakening_events.push(pair[1].event_id.clone());
        }
    }
    let response_delay_days = (first.date_naive() - ds.paper.publication_date).num_days();

    Ok(LifespanReport {
        first_event: first,
        last_event: last,
        response_delay_days,
        publication_date_precision: ds.paper.date_precision,
        lifespan_days: ceil_days(last - first),
        dormancy_threshold_days,
        dormancy_intervals,
        awakening_events,
    })
}

// ---------------------------------------------------------------------------
// Timeline
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinWidth {
    Day,
    Week,
    Month,
}

impl FromStr for BinWidth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "day" => Ok(BinWidth::Day),
            "week" => Ok(BinWidth::Week),
            "month" => Ok(BinWidth::Month),
            other => Err(format!(
                "unknown bin width `{other}` (expected day, week or month)"
            )),
        }
    }
}

impl fmt::Display for BinWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BinWidth::Day => "day",
            BinWidth::Week => "week",
            BinWidth::Month => "month",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimelineBin {
    pub bin_start: DateTime<Utc>,
    pub bin_width: BinWidth,
    pub count: u64,
}

fn midnight(d: NaiveDate) -> DateTime<Utc> {
    Utc.from_utc_datetime(&d.and_hms_opt(0, 0, 0).expect("midnight exists"))
}

/// Start of the calendar bin containing `date`; weeks start on Monday.
fn bin_floor(date: NaiveDate, width: BinWidth) -> NaiveDate {
    match width {
        BinWidth::Day => date,
        BinWidth::Week => date - Duration::days(date.weekday().num_days_from_monday() as i64),
        BinWidth::Month => NaiveDate::from_ymd_opt(date.year(), date.month(), 1).expect("valid"),
    }
}

fn bin_next(start: NaiveDate, width: BinWidth) -> NaiveDate {
    match width {
        BinWidth::Day => start + Duration::days(1),
        BinWidth::Week => start + Duration::days(7),
        BinWidth::Month => {
            let (y, m) = if start.month() == 12 {
                (start.year() + 1, 1)
            } else {
                (start.year(), start.month() + 1)
            };
            NaiveDate::from_ymd_opt(y, m, 1).expect("valid")
        }
    }
}

/// Contiguous UTC calendar bins from the first to the last event, zero-count
/// bins included.
pub fn timeline_bins(
    ds: &AttentionDataset,
    width: BinWidth,
) -> Result<Vec<TimelineBin>, EngagementError> {
    let first = ds.events.iter().map(|e| e.timestamp).min();
    let last = ds.events.iter().map(|e| e.timestamp).max();
    let (Some(first), Some(last)) = (first, last) else {
        return Err(EngagementError::EmptyDataset);
    };
    let mut counts: BTreeMap<NaiveDate, u64> = BTreeMap::new();
    for e in &ds.events {
        *counts
            .entry(bin_floor(e.timestamp.date_naive(), width))
            .or_default() += 1;
    }
    let end = bin_floor(last.date_naive(), width);
    let mut cursor = bin_floor(first.date_naive(), width);
    let mut bins = Vec::new();
    while cursor <= end {
        bins.push(TimelineBin {
            bin_start: midnight(cursor),
            bin_width: width,
            count: counts.get(&cursor).copied().unwrap_or(0),
        });
        cursor = bin_next(cursor, width);
    }
    Ok(bins)
}

/// Share of the events in `[window_start, window_end)` that `user_id` posted.
pub fn window_share(
    ds: &AttentionDataset,
    user_id: &str,
    window_start: DateTime<Utc>,
    window_end: DateTime<Utc>,
) -> Result<f64, EngagementError> {
    if window_start >= window_end {
        return Err(EngagementError::InvalidWindow);
    }
    let in_window: Vec<&TweetEvent> = ds
        .events
        .iter()
        .filter(|e| e.timestamp >= window_start && e.timestamp < window_end)
        .collect();
    if in_window.is_empty() {
        return Err(EngagementError::EmptyWindow);
    }
    let by_user = in_window.iter().filter(|e| e.user_id == user_id).count();
    Ok(by_user as f64 / in_window.len() as f64)
}

/// `[Monday 00:00, next Monday 00:00)` of ISO week 1 of `year`.
pub fn first_iso_week(year: i32) -> (DateTime<Utc>, DateTime<Utc>) {
    let monday = NaiveDate::from_isoywd_opt(year, 1, chrono::Weekday::Mon).expect("iso week 1");
    (midnight(monday), midnight(monday + Duration::days(7)))
}

/// Ids whose conversational index strictly exceeds the informative one,
/// in input order.
pub fn select_conversational(summaries: &[(String, EngagementSummary)]) -> Vec<String> {
    summaries
        .iter()
        .filter(|(_, s)| s.ct_index > s.it_index)
        .map(|(id, _)| id.clone())
        .collect()
}

// ---------------------------------------------------------------------------
// User typing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UserType {
    Public,
    Practitioner,
    Scientist,
    Communicator,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserTypeRule {
    pub label: UserType,
    pub keywords: Vec<String>,
}

const DEFAULT_RULES: &str = include_str!("../data/user_types.json");

/// Parses a rules file (JSON array of `{label, keywords}`) and checks that
/// keywords are lowercase and not shared between labels.
pub fn parse_user_type_rules(src: &str) -> Result<Vec<UserTypeRule>, EngagementError> {
    let rules: Vec<UserTypeRule> =
        serde_json::from_str(src).map_err(|e| EngagementError::InvalidRules(e.to_string()))?;
    let mut owner: BTreeMap<&str, UserType> = BTreeMap::new();
    for r in &rules {
        for k in &r.keywords {
            if k.to_lowercase() != *k {
                return Err(EngagementError::InvalidRules(format!(
                    "keyword `{k}` is not lowercase"
                )));
            }
            if let Some(prev) = owner.insert(k, r.label) {
                if prev != r.label {
                    return Err(EngagementError::InvalidRules(format!(
                        "keyword `{k}` appears under {prev:?} and {:?}",
                        r.label
                    )));
                }
            }
        }
    }
    Ok(rules)
}

/// Scientist, practitioner, communicator, then public.
pub fn default_user_type_rules() -> Vec<UserTypeRule> {
    parse_user_type_rules(DEFAULT_RULES).expect("bundled rules are well-formed")
}

/// The first rule whose keywords meet the preprocessed bio wins. A bio that
/// is absent or has no tokens left after preprocessing is `Unknown`; any other
/// bio without a hit is `Public`.
pub fn classify_user_type(
    profile: &UserProfile,
    rules: &[UserTypeRule],
    cfg: &PipelineConfig,
) -> UserType {
    let Some(bio) = profile.bio.as_deref() else {
        return UserType::Unknown;
    };
    let tokens: BTreeSet<String> = preprocess_bio(bio, cfg).into_iter().collect();
    if tokens.is_empty() {
        return UserType::Unknown;
    }
    rules
        .iter()
        .find(|r| r.keywords.iter().any(|k| tokens.contains(k)))
        .map(|r| r.label)
        .unwrap_or(UserType::Public)
}
