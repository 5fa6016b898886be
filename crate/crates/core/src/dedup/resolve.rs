use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{DuplicateKind, DuplicatePair};
use crate::error::{Error, Result};
use crate::model::{
    count_by_database, Dataset, DatasetSize, MergeEvent, MergeOperation, MergeStage, Record, RecordId,
    ResolutionNote, Vehicle, DUPLICATE_CRITERION,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolutionRule {
    /// The copy whose full text can be downloaded wins.
    FullTextAvailable,
    /// Journal articles win over other vehicles, which win over conference/workshop papers.
    JournalOverConference,
    /// The copy from the database listed earlier in the source priority wins.
    SourcePriority,
    /// The lexicographically lower record id wins. Always decides.
    LowerId,
    /// An operator decision supplied with the policy.
    Manual,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManualResolution {
    pub keep: RecordId,
    pub remove: RecordId,
}

/// Ordered rule list plus switches. Loaded from a JSON policy file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionPolicy {
    #[serde(default = "default_rules")]
    pub rules: Vec<ResolutionRule>,
    #[serde(default)]
    pub auto_resolve_extensions: bool,
    #[serde(default)]
    pub source_priority: Vec<String>,
    #[serde(default)]
    pub manual: Vec<ManualResolution>,
}

fn default_rules() -> Vec<ResolutionRule> {
    vec![
        ResolutionRule::FullTextAvailable,
        ResolutionRule::JournalOverConference,
        ResolutionRule::SourcePriority,
        ResolutionRule::LowerId,
    ]
}

impl Default for ResolutionPolicy {
    fn default() -> Self {
        ResolutionPolicy {
            rules: default_rules(),
            auto_resolve_extensions: false,
            source_priority: Vec::new(),
            manual: Vec::new(),
        }
    }
}

impl ResolutionPolicy {
    fn effective_rules(&self) -> Vec<ResolutionRule> {
        let mut rules: Vec<ResolutionRule> = Vec::new();
        for r in &self.rules {
            if *r != ResolutionRule::Manual && !rules.contains(r) {
                rules.push(*r);
            }
        }
        if !rules.contains(&ResolutionRule::LowerId) {
            rules.push(ResolutionRule::LowerId);
        }
        rules
    }

    fn source_rank(&self, db: &str) -> usize {
        self.source_priority
            .iter()
            .position(|s| s.eq_ignore_ascii_case(db))
            .unwrap_or(self.source_priority.len())
    }

    /// `Greater` means `a` is preferred.
    fn compare(&self, rule: ResolutionRule, a: &Record, b: &Record) -> Ordering {
        match rule {
            ResolutionRule::FullTextAvailable => a.full_text_available.cmp(&b.full_text_available),
            ResolutionRule::JournalOverConference => vehicle_rank(a.vehicle).cmp(&vehicle_rank(b.vehicle)),
            ResolutionRule::SourcePriority => self
                .source_rank(&b.publisher_db)
                .cmp(&self.source_rank(&a.publisher_db)),
            ResolutionRule::LowerId => b.id.cmp(&a.id),
            ResolutionRule::Manual => Ordering::Equal,
        }
    }

    /// First rule that separates the two records, with the ordering it produced.
    fn decide(&self, a: &Record, b: &Record) -> (ResolutionRule, Ordering) {
        for rule in self.effective_rules() {
            let o = self.compare(rule, a, b);
            if o != Ordering::Equal {
                return (rule, o);
            }
        }
        // ids are unique, so LowerId always separates
        (ResolutionRule::LowerId, Ordering::Equal)
    }
}

fn vehicle_rank(v: Vehicle) -> u8 {
    match v {
        Vehicle::Journal => 2,
        Vehicle::Conference | Vehicle::Workshop => 0,
        _ => 1,
    }
}

/// Where a logged step ran and what it was applied to.
#[derive(Debug, Clone)]
pub struct StepInfo {
    pub stage: MergeStage,
    pub dataset_name: String,
    pub timestamp: DateTime<Utc>,
}

impl StepInfo {
    pub fn new(stage: MergeStage, dataset_name: impl Into<String>, timestamp: DateTime<Utc>) -> Self {
        StepInfo {
            stage,
            dataset_name: dataset_name.into(),
            timestamp,
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // lower index becomes root for a deterministic grouping
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Removes duplicates, keeping one record per connected group of pairs.
///
/// The kept record of a group is the one preferred by the first rule of the
/// policy that separates it from each other member. Extension candidates are
/// only merged when `auto_resolve_extensions` is set or a manual resolution
/// covers them; otherwise they are carried in the event as pending.
/// Pairs that name records already removed by an earlier logged step are
/// skipped, which makes a repeated run remove nothing.
pub fn resolve_duplicates(
    d: &Dataset,
    pairs: &[DuplicatePair],
    policy: &ResolutionPolicy,
    step: &StepInfo,
) -> Result<(Dataset, MergeEvent)> {
    let index: HashMap<&RecordId, usize> = d.records().iter().enumerate().map(|(i, r)| (&r.id, i)).collect();
    let already_removed = d.removed_ids();

    let mut missing = BTreeSet::new();
    let mut live_pair = |a: &RecordId, b: &RecordId| -> Option<(usize, usize)> {
        let mut ok = true;
        for id in [a, b] {
            if !index.contains_key(id) {
                ok = false;
                if !already_removed.contains(id) {
                    missing.insert(id.to_string());
                }
            }
        }
        ok.then(|| (index[a], index[b]))
    };

    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut pending: Vec<(usize, usize, &DuplicatePair)> = Vec::new();
    for p in pairs {
        if p.a == p.b {
            return Err(Error::InvalidInput(format!("duplicate pair refers to {} twice", p.a)));
        }
        let Some((i, j)) = live_pair(&p.a, &p.b) else { continue };
        if p.kind == DuplicateKind::ExtensionCandidate && !policy.auto_resolve_extensions {
            pending.push((i, j, p));
        } else {
            edges.push((i, j));
        }
    }
    let mut manual_keep = BTreeSet::new();
    let mut manual_remove = BTreeSet::new();
    for m in &policy.manual {
        let Some((k, r)) = live_pair(&m.keep, &m.remove) else { continue };
        manual_keep.insert(k);
        manual_remove.insert(r);
        edges.push((k, r));
    }
    if !missing.is_empty() {
        return Err(Error::precondition_with(
            "duplicate pairs reference records that do not exist",
            missing.into_iter().collect(),
        ));
    }
    let both: Vec<String> = manual_keep
        .intersection(&manual_remove)
        .map(|&i| d.records()[i].id.to_string())
        .collect();
    if !both.is_empty() {
        return Err(Error::precondition_with("records are both kept and removed", both));
    }

    let records = d.records();
    let mut uf = UnionFind::new(records.len());
    for &(i, j) in &edges {
        uf.union(i, j);
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(i, j) in &edges {
        for x in [i, j] {
            let root = uf.find(x);
            let g = groups.entry(root).or_default();
            if !g.contains(&x) {
                g.push(x);
            }
        }
    }

    let mut removed: BTreeMap<usize, ResolutionNote> = BTreeMap::new();
    for members in groups.values() {
        let keeps: Vec<usize> = members.iter().copied().filter(|m| manual_keep.contains(m)).collect();
        let winner = match keeps.as_slice() {
            [k] => *k,
            [] => {
                let candidates: Vec<usize> = members.iter().copied().filter(|m| !manual_remove.contains(m)).collect();
                let mut best = *candidates.first().ok_or_else(|| {
                    Error::precondition_with(
                        "every record of a duplicate group is marked for removal",
                        members.iter().map(|&m| records[m].id.to_string()).collect(),
                    )
                })?;
                for &c in &candidates[1..] {
                    if policy.decide(&records[c], &records[best]).1 == Ordering::Greater {
                        best = c;
                    }
                }
                best
            }
            _ => {
                return Err(Error::precondition_with(
                    "conflicting keeps within one duplicate group",
                    keeps.iter().map(|&k| records[k].id.to_string()).collect(),
                ))
            }
        };
        for &m in members {
            if m == winner {
                continue;
            }
            let rule = if manual_keep.contains(&winner) || manual_remove.contains(&m) {
                ResolutionRule::Manual
            } else {
                policy.decide(&records[winner], &records[m]).0
            };
            removed.insert(
                m,
                ResolutionNote {
                    kept: records[winner].id.clone(),
                    removed: records[m].id.clone(),
                    rule,
                },
            );
        }
    }

    let mut kept = Vec::with_capacity(records.len() - removed.len());
    let mut removed_records = Vec::with_capacity(removed.len());
    for (i, r) in records.iter().enumerate() {
        if removed.contains_key(&i) {
            let mut r = r.clone();
            if !r.exclusion_criteria.iter().any(|c| c == DUPLICATE_CRITERION) {
                r.exclusion_criteria.push(DUPLICATE_CRITERION.to_string());
            }
            removed_records.push(r);
        } else {
            kept.push(r.clone());
        }
    }
    let pending: Vec<DuplicatePair> = pending
        .into_iter()
        .filter(|(i, j, _)| !removed.contains_key(i) && !removed.contains_key(j))
        .map(|(_, _, p)| p.clone())
        .collect();

    let event = MergeEvent {
        stage: step.stage,
        operation: MergeOperation::Dedup,
        label: None,
        inputs: vec![DatasetSize {
            name: step.dataset_name.clone(),
            size: records.len(),
        }],
        output_size: kept.len(),
        duplicates_removed: removed.len(),
        resolution_notes: removed.into_values().collect(),
        removed_by_database: count_by_database(&removed_records),
        output_by_database: count_by_database(&kept),
        filtered_databases: Vec::new(),
        removed: removed_records,
        pending,
        timestamp: step.timestamp,
    };
    let next = d.next(kept, Some(event.clone()))?;
    Ok((next, event))
}
