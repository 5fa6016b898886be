use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::normalize_title;
use crate::error::{Error, Result};
use crate::model::{Dataset, Record, RecordId, Vehicle};

pub const DEFAULT_THRESHOLD: f64 = 0.92;
pub const DEFAULT_EXTENSION_MAX_GAP: i32 = 3;
const BLOCK_TOKENS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DuplicateKind {
    Exact,
    Fuzzy,
    ExtensionCandidate,
}

impl DuplicateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DuplicateKind::Exact => "exact",
            DuplicateKind::Fuzzy => "fuzzy",
            DuplicateKind::ExtensionCandidate => "extension_candidate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuplicatePair {
    pub a: RecordId,
    pub b: RecordId,
    pub kind: DuplicateKind,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DedupConfig {
    pub threshold: f64,
    /// Maximum years between a conference paper and its journal extension.
    pub extension_max_gap: i32,
}

impl Default for DedupConfig {
    fn default() -> Self {
        DedupConfig {
            threshold: DEFAULT_THRESHOLD,
            extension_max_gap: DEFAULT_EXTENSION_MAX_GAP,
        }
    }
}

impl DedupConfig {
    pub fn with_threshold(threshold: f64) -> Self {
        DedupConfig {
            threshold,
            ..Default::default()
        }
    }
}

/// Normalized edit-distance similarity of two already-normalized titles.
pub fn title_similarity(a: &str, b: &str) -> f64 {
    strsim::normalized_levenshtein(a, b)
}

fn block_key(normalized: &str) -> String {
    normalized
        .split(' ')
        .take(BLOCK_TOKENS)
        .collect::<Vec<_>>()
        .join(" ")
}

fn is_extension(a: &Record, b: &Record, max_gap: i32) -> bool {
    let (conf, journal) = match (a.vehicle, b.vehicle) {
        (x, Vehicle::Journal) if x.is_conference_like() => (a, b),
        (Vehicle::Journal, y) if y.is_conference_like() => (b, a),
        _ => return false,
    };
    match (conf.year, journal.year) {
        (Some(cy), Some(jy)) => jy >= cy && jy - cy <= max_gap,
        _ => false,
    }
}

/// Reports duplicate pairs without removing anything.
///
/// Comparison runs pairwise inside blocks that share the first four
/// normalized title tokens. Pairs are ordered by dataset position.
pub fn find_duplicates(d: &Dataset, config: &DedupConfig) -> Result<Vec<DuplicatePair>> {
    if !(config.threshold > 0.0 && config.threshold <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "similarity threshold must be in (0, 1], got {}",
            config.threshold
        )));
    }
    let normalized: Vec<String> = d.records().iter().map(|r| normalize_title(&r.title)).collect();
    let mut blocks: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, t) in normalized.iter().enumerate() {
        blocks.entry(block_key(t)).or_default().push(i);
    }

    let records = d.records();
    let mut found: Vec<(usize, usize, DuplicatePair)> = Vec::new();
    for members in blocks.values() {
        for (x, &i) in members.iter().enumerate() {
            for &j in &members[x + 1..] {
                let (ra, rb) = (&records[i], &records[j]);
                let score = title_similarity(&normalized[i], &normalized[j]);
                if score < config.threshold {
                    continue;
                }
                let kind = if is_extension(ra, rb, config.extension_max_gap) {
                    DuplicateKind::ExtensionCandidate
                } else if normalized[i] == normalized[j] && ra.year == rb.year {
                    DuplicateKind::Exact
                } else {
                    DuplicateKind::Fuzzy
                };
                let score = if kind == DuplicateKind::Exact { 1.0 } else { score };
                found.push((
                    i,
                    j,
                    DuplicatePair {
                        a: ra.id.clone(),
                        b: rb.id.clone(),
                        kind,
                        score,
                    },
                ));
            }
        }
    }
    found.sort_by_key(|(i, j, _)| (*i, *j));
    Ok(found.into_iter().map(|(_, _, p)| p).collect())
}
