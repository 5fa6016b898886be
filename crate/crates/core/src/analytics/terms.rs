use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Dataset;

pub const ENGLISH_STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "also", "among", "an", "and", "any", "are", "as", "at",
    "based", "be", "because", "been", "before", "being", "between", "both", "but", "by", "can", "could", "did", "do",
    "does", "doing", "during", "each", "few", "for", "from", "further", "had", "has", "have", "having", "how", "however",
    "i", "if", "in", "into", "is", "it", "its", "itself", "more", "most", "no", "nor", "not", "of", "off", "on", "once",
    "only", "or", "other", "our", "out", "over", "own", "paper", "same", "should", "so", "some", "such", "than", "that",
    "the", "their", "them", "then", "there", "these", "they", "this", "those", "through", "thus", "to", "too", "under",
    "until", "up", "upon", "use", "used", "using", "very", "was", "we", "were", "what", "when", "where", "whether",
    "which", "while", "who", "whom", "why", "will", "with", "within", "without", "would", "you", "your",
];

pub fn default_stopwords() -> Vec<String> {
    ENGLISH_STOPWORDS.iter().map(|s| s.to_string()).collect()
}

/// Lowercase alphanumeric tokens.
fn split_tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn normalize_term(text: &str) -> String {
    split_tokens(text).join(" ")
}

/// Surface form → code, case- and punctuation-insensitive.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, String>", into = "BTreeMap<String, String>")]
pub struct CodingMap {
    entries: BTreeMap<String, String>,
    #[serde(skip)]
    max_tokens: usize,
}

impl CodingMap {
    /// Fails if any code is also a surface form, since coding is single-pass.
    pub fn new(entries: BTreeMap<String, String>) -> Result<Self> {
        let mut normalized = BTreeMap::new();
        for (surface, code) in entries {
            let s = normalize_term(&surface);
            let c = normalize_term(&code);
            if s.is_empty() || c.is_empty() {
                return Err(Error::InvalidInput(format!("coding entry {surface:?} -> {code:?} is empty")));
            }
            if let Some(prev) = normalized.insert(s.clone(), c.clone()) {
                if prev != c {
                    return Err(Error::InvalidInput(format!("surface form {s:?} is coded twice")));
                }
            }
        }
        let chains: Vec<String> = normalized
            .iter()
            .filter(|(s, c)| *s != *c && normalized.contains_key(*c))
            .map(|(s, c)| format!("{s} -> {c} -> {}", normalized[c]))
            .collect();
        if !chains.is_empty() {
            return Err(Error::precondition_with("coding map contains chains", chains));
        }
        let max_tokens = normalized.keys().map(|k| k.split(' ').count()).max().unwrap_or(0);
        Ok(CodingMap {
            entries: normalized,
            max_tokens,
        })
    }

    pub fn code(&self, term: &str) -> Option<&str> {
        self.entries.get(&normalize_term(term)).map(String::as_str)
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    /// Reads `surface,code` lines (a header line `surface,code` is skipped).
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut entries = BTreeMap::new();
        for row in rdr.records() {
            let row = row?;
            if row.len() < 2 || (row[0].eq_ignore_ascii_case("surface") && row[1].eq_ignore_ascii_case("code")) {
                continue;
            }
            entries.insert(row[0].to_string(), row[1].to_string());
        }
        CodingMap::new(entries)
    }
}

impl TryFrom<BTreeMap<String, String>> for CodingMap {
    type Error = Error;
    fn try_from(m: BTreeMap<String, String>) -> Result<Self> {
        CodingMap::new(m)
    }
}

impl From<CodingMap> for BTreeMap<String, String> {
    fn from(c: CodingMap) -> Self {
        c.entries
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermScope {
    Keywords,
    Abstracts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermFrequency {
    pub scope: TermScope,
    pub counts: BTreeMap<String, usize>,
    pub stopwords_applied: bool,
}

impl TermFrequency {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    /// By count descending, then term.
    pub fn ranked(&self) -> Vec<(&str, usize)> {
        let mut v: Vec<(&str, usize)> = self.counts.iter().map(|(t, c)| (t.as_str(), *c)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        v
    }

    /// `term,count` rows for word-cloud tools.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["term", "count"]).expect("in-memory write");
        for (t, c) in self.ranked() {
            w.write_record([t, &c.to_string()]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// The counted terms, in dataset order; `term_frequency` counts exactly these.
pub fn terms(d: &Dataset, scope: TermScope, coding: Option<&CodingMap>, stopwords: &[String]) -> Vec<String> {
    let stop: HashSet<String> = stopwords.iter().map(|s| normalize_term(s)).collect();
    let mut out = Vec::new();
    for r in d.records() {
        match scope {
            TermScope::Keywords => {
                for k in &r.keywords {
                    let term = normalize_term(k);
                    if term.is_empty() {
                        continue;
                    }
                    match coding.and_then(|c| c.code(&term)) {
                        Some(code) => out.push(code.to_string()),
                        None if stop.contains(&term) => {}
                        None => out.push(term),
                    }
                }
            }
            TermScope::Abstracts => {
                let tokens = split_tokens(&r.abstract_text);
                let mut i = 0;
                'outer: while i < tokens.len() {
                    if let Some(c) = coding {
                        for len in (1..=c.max_tokens.min(tokens.len() - i)).rev() {
                            let phrase = tokens[i..i + len].join(" ");
                            if let Some(code) = c.entries.get(&phrase) {
                                out.push(code.clone());
                                i += len;
                                continue 'outer;
                            }
                        }
                    }
                    let t = &tokens[i];
                    if t.chars().count() >= 3 && !stop.contains(t) {
                        out.push(t.clone());
                    }
                    i += 1;
                }
            }
        }
    }
    out
}

pub fn term_frequency(d: &Dataset, scope: TermScope, coding: Option<&CodingMap>, stopwords: &[String]) -> TermFrequency {
    let mut counts = BTreeMap::new();
    for t in terms(d, scope, coding, stopwords) {
        *counts.entry(t).or_insert(0) += 1;
    }
    TermFrequency {
        scope,
        counts,
        stopwords_applied: !stopwords.is_empty(),
    }
}

/// Terms outside `expected`, most frequent first. Advisory only.
pub fn outlier_terms(tf: &TermFrequency, expected: &[String]) -> Vec<(String, usize)> {
    let expected: BTreeSet<String> = expected.iter().map(|e| normalize_term(e)).collect();
    tf.ranked()
        .into_iter()
        .filter(|(t, _)| !expected.contains(*t))
        .map(|(t, c)| (t.to_string(), c))
        .collect()
}
