//! Bio and tweet text normalization.
//!
//! The pipeline runs six ordered steps over a whitespace tokenization:
//! lowercasing, entity cleaning (URLs, mentions, hashtags, digits), plural
//! reduction, punctuation and emoji removal, stopword removal, and removal
//! of short or degenerate tokens such as laughter (`kkk`, `haha`).

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

const BUNDLED_STOPWORDS: &str = include_str!("../data/stopwords_pt.txt");

/// Parses a stopword file: one word per line, `#` starts a comment.
pub fn parse_stopwords(src: &str) -> BTreeSet<String> {
    src.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| l.nfkc().collect::<String>().to_lowercase())
        .collect()
}

pub fn bundled_stopwords() -> BTreeSet<String> {
    parse_stopwords(BUNDLED_STOPWORDS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineSteps {
    pub lowercase: bool,
    pub clean_entities: bool,
    pub singularize: bool,
    pub strip_punctuation: bool,
    pub remove_stopwords: bool,
    pub remove_short: bool,
}

impl Default for PipelineSteps {
    fn default() -> Self {
        Self {
            lowercase: true,
            clean_entities: true,
            singularize: true,
            strip_punctuation: true,
            remove_stopwords: true,
            remove_short: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub stopwords: BTreeSet<String>,
    pub min_token_length: usize,
    pub max_repeat_run: usize,
    pub steps: PipelineSteps,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            stopwords: bundled_stopwords(),
            min_token_length: 3,
            max_repeat_run: 2,
            steps: PipelineSteps::default(),
        }
    }
}

impl PipelineConfig {
    /// Adds the words of a user stopword file to the bundled list.
    pub fn with_stopword_file(mut self, path: &Path) -> std::io::Result<Self> {
        let extra = parse_stopwords(&std::fs::read_to_string(path)?);
        self.stopwords.extend(extra);
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedBio {
    pub user_id: String,
    pub tokens: Vec<String>,
}

fn is_url(tok: &str) -> bool {
    if tok.contains("://") || tok.starts_with("www.") {
        return true;
    }
    // bare `host.tld/path`
    match tok.split_once('/') {
        Some((host, _)) => {
            host.contains('.')
                && host
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '.' || c == '-')
        }
        None => false,
    }
}

fn is_entity(tok: &str) -> bool {
    tok.contains('@') || tok.contains('#') || is_url(tok)
}

/// Applies [`singularize`] to every run of letters in `tok`, leaving other
/// characters and stopword runs untouched.
fn singularize_runs(tok: &str, stopwords: &BTreeSet<String>) -> String {
    let mut out = String::with_capacity(tok.len());
    let mut run = String::new();
    let flush = |run: &mut String, out: &mut String| {
        if !run.is_empty() {
            if stopwords.contains(run.as_str()) {
                out.push_str(run);
            } else {
                out.push_str(&singularize(run));
            }
            run.clear();
        }
    };
    for c in tok.chars() {
        if c.is_alphabetic() {
            run.push(c);
        } else {
            flush(&mut run, &mut out);
            out.push(c);
        }
    }
    flush(&mut run, &mut out);
    out
}

fn longest_run(tok: &str) -> usize {
    let mut best = 0;
    let mut cur = 0;
    let mut prev = None;
    for c in tok.chars() {
        if Some(c) == prev {
            cur += 1;
        } else {
            cur = 1;
            prev = Some(c);
        }
        best = best.max(cur);
    }
    best
}

/// Laughter and interjection shapes: a character repeated past `max_run`
/// (`kkk`), a short unit repeated (`haha`, `rsrs`), or a three-letter token
/// built from two letters with a doubled one (`aff`, `hmm`).
pub fn is_degenerate(tok: &str, max_run: usize) -> bool {
    let chars: Vec<char> = tok.chars().collect();
    if longest_run(tok) > max_run {
        return true;
    }
    for unit in 1..=2 {
        if chars.len() >= 2 * unit
            && chars.len().is_multiple_of(unit)
            && chars.chunks(unit).all(|c| c == &chars[..unit])
        {
            return true;
        }
    }
    if chars.len() <= 3 {
        let distinct: BTreeSet<char> = chars.iter().copied().collect();
        if distinct.len() <= 2 && chars.windows(2).any(|w| w[0] == w[1]) {
            return true;
        }
    }
    false
}

pub fn preprocess_bio(text: &str, cfg: &PipelineConfig) -> Vec<String> {
    let steps = cfg.steps;
    // compatibility folding turns stylized and full-width letters into plain ones
    let text: String = text.nfkc().collect();
    let text = if steps.lowercase {
        text.to_lowercase()
    } else {
        text
    };

    let mut tokens: Vec<String> = text.split_whitespace().map(str::to_string).collect();

    if steps.clean_entities {
        tokens = tokens
            .into_iter()
            .filter(|t| !is_entity(t))
            .map(|t| t.chars().filter(|c| !c.is_numeric()).collect::<String>())
            .filter(|t| !t.is_empty())
            .collect();
    }

    if steps.singularize {
        tokens = tokens
            .iter()
            .map(|t| singularize_runs(t, &cfg.stopwords))
            .collect();
    }

    if steps.strip_punctuation {
        tokens = tokens
            .iter()
            .flat_map(|t| {
                t.split(|c: char| !c.is_alphabetic())
                    .filter(|p| !p.is_empty())
                    .map(str::to_string)
                    .collect::<Vec<_>>()
            })
            .collect();
    }

    if steps.remove_stopwords {
        tokens.retain(|t| !cfg.stopwords.contains(t.as_str()));
    }

    if steps.remove_short {
        tokens.retain(|t| {
            t.chars().count() >= cfg.min_token_length && !is_degenerate(t, cfg.max_repeat_run)
        });
    }

    tokens
}

pub fn tokenize_bio(user_id: &str, text: &str, cfg: &PipelineConfig) -> TokenizedBio {
    TokenizedBio {
        user_id: user_id.to_string(),
        tokens: preprocess_bio(text, cfg),
    }
}

fn singularize_once(token: &str) -> String {
    if token.chars().count() <= 3 || !token.ends_with('s') {
        return token.to_string();
    }
    const IRREGULAR: [(&str, &str); 5] = [
        ("ões", "ão"),
        ("ães", "ão"),
        ("ais", "al"),
        ("éis", "el"),
        ("óis", "ol"),
    ];
    for (suffix, repl) in IRREGULAR {
        if let Some(stem) = token.strip_suffix(suffix) {
            return format!("{stem}{repl}");
        }
    }
    for suffix in ["res", "zes", "ses"] {
        if token.ends_with(suffix) {
            return token[..token.len() - 2].to_string();
        }
    }
    token[..token.len() - 1].to_string()
}

/// Rule-based Portuguese plural reduction, iterated to a fixed point so that
/// the result is stable under reapplication. Tokens of three characters or
/// fewer are left alone.
pub fn singularize(token: &str) -> String {
    let mut cur = token.to_string();
    loop {
        let next = singularize_once(&cur);
        if next == cur {
            return cur;
        }
        cur = next;
    }
}
