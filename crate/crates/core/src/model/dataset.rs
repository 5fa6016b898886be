use std::collections::{BTreeMap, BTreeSet, HashSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::record::{CompletionFlag, Record, RecordId, Vehicle};
use crate::dedup::{DuplicatePair, ResolutionRule};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeStage {
    PerDatabase,
    CrossDatabase,
}

impl MergeStage {
    pub fn as_str(self) -> &'static str {
        match self {
            MergeStage::PerDatabase => "per_database",
            MergeStage::CrossDatabase => "cross_database",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeOperation {
    Integrate,
    Dedup,
    Filter,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSize {
    pub name: String,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionNote {
    pub kept: RecordId,
    pub removed: RecordId,
    pub rule: ResolutionRule,
}

/// One logged integration, deduplication or filter step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeEvent {
    pub stage: MergeStage,
    pub operation: MergeOperation,
    /// Filter name or other step label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub inputs: Vec<DatasetSize>,
    pub output_size: usize,
    pub duplicates_removed: usize,
    #[serde(default)]
    pub resolution_notes: Vec<ResolutionNote>,
    /// Removed records per `publisher_db`.
    #[serde(default)]
    pub removed_by_database: BTreeMap<String, usize>,
    /// Records per `publisher_db` after the step.
    #[serde(default)]
    pub output_by_database: BTreeMap<String, usize>,
    /// Databases a filter step applied to.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub filtered_databases: Vec<String>,
    /// Full copies of removed records, so every removal stays auditable.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub removed: Vec<Record>,
    /// Extension candidates left for a manual decision.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pending: Vec<DuplicatePair>,
    pub timestamp: DateTime<Utc>,
}

impl MergeEvent {
    pub fn removed_total(&self) -> usize {
        self.removed_by_database.values().sum()
    }
}

/// Counts records per `publisher_db`.
pub fn count_by_database<'a>(records: impl IntoIterator<Item = &'a Record>) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for r in records {
        *out.entry(r.publisher_db.clone()).or_insert(0) += 1;
    }
    out
}

/// Ordered, versioned collection of records with its merge history.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dataset {
    records: Vec<Record>,
    merge_log: Vec<MergeEvent>,
    revision: u64,
}

impl Dataset {
    pub fn new(records: Vec<Record>) -> Result<Self> {
        check_unique_ids(&records)?;
        Ok(Dataset {
            records,
            merge_log: Vec::new(),
            revision: 0,
        })
    }

    /// Rebuilds a dataset from persisted parts.
    pub fn restore(records: Vec<Record>, merge_log: Vec<MergeEvent>, revision: u64) -> Result<Self> {
        check_unique_ids(&records)?;
        Ok(Dataset {
            records,
            merge_log,
            revision,
        })
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn merge_log(&self) -> &[MergeEvent] {
        &self.merge_log
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &RecordId) -> Option<&Record> {
        self.records.iter().find(|r| &r.id == id)
    }

    pub fn contains(&self, id: &RecordId) -> bool {
        self.get(id).is_some()
    }

    pub fn ids(&self) -> BTreeSet<RecordId> {
        self.records.iter().map(|r| r.id.clone()).collect()
    }

    /// Produces the next revision with new content and an optional appended event.
    pub fn next(&self, records: Vec<Record>, event: Option<MergeEvent>) -> Result<Dataset> {
        check_unique_ids(&records)?;
        let mut merge_log = self.merge_log.clone();
        merge_log.extend(event);
        Ok(Dataset {
            records,
            merge_log,
            revision: self.revision + 1,
        })
    }

    /// Same content at a given revision; used when a slot is replaced.
    pub fn with_revision(mut self, revision: u64) -> Dataset {
        self.revision = revision;
        self
    }

    pub(crate) fn from_parts_unchecked(records: Vec<Record>, merge_log: Vec<MergeEvent>, revision: u64) -> Dataset {
        Dataset {
            records,
            merge_log,
            revision,
        }
    }

    /// Applies a completion patch to one record.
    pub fn patch(&self, id: &RecordId, patch: &RecordPatch) -> Result<Dataset> {
        let mut records = self.records.clone();
        let rec = records
            .iter_mut()
            .find(|r| &r.id == id)
            .ok_or_else(|| Error::precondition(format!("no record with id {id}")))?;
        patch.apply(rec);
        self.next(records, None)
    }

    /// Records that were removed by any logged step, with their ids.
    pub fn removed_ids(&self) -> HashSet<RecordId> {
        self.merge_log
            .iter()
            .flat_map(|e| e.removed.iter().map(|r| r.id.clone()))
            .collect()
    }
}

fn check_unique_ids(records: &[Record]) -> Result<()> {
    let mut seen = HashSet::new();
    let dups: Vec<String> = records
        .iter()
        .filter(|r| !seen.insert(&r.id))
        .map(|r| r.id.to_string())
        .collect();
    if dups.is_empty() {
        Ok(())
    } else {
        Err(Error::integrity("record ids must be unique within a dataset", dups))
    }
}

/// Field updates for the step-wise completion work.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecordPatch {
    #[serde(default, rename = "abstract")]
    pub abstract_text: Option<String>,
    #[serde(default)]
    pub keywords: Option<Vec<String>>,
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default)]
    pub venue: Option<String>,
    #[serde(default)]
    pub vehicle: Option<Vehicle>,
    #[serde(default)]
    pub full_text_available: Option<bool>,
    #[serde(default)]
    pub abstract_substitute: Option<bool>,
    #[serde(default)]
    pub comments: Option<String>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl RecordPatch {
    pub fn apply(&self, rec: &mut Record) {
        if let Some(a) = &self.abstract_text {
            rec.abstract_text = a.clone();
        }
        if let Some(k) = &self.keywords {
            rec.keywords = k.clone();
        }
        if let Some(y) = self.year {
            rec.year = Some(y);
        }
        if let Some(v) = &self.venue {
            rec.venue = v.clone();
        }
        if let Some(v) = self.vehicle {
            rec.vehicle = v;
        }
        if let Some(f) = self.full_text_available {
            rec.full_text_available = f;
        }
        if let Some(c) = &self.comments {
            rec.comments = c.clone();
        }
        for (k, v) in &self.metadata {
            rec.metadata.insert(k.clone(), v.clone());
        }
        match self.abstract_substitute {
            Some(true) => {
                rec.completion_flags.insert(CompletionFlag::AbstractSubstitute);
            }
            Some(false) => {
                rec.completion_flags.remove(&CompletionFlag::AbstractSubstitute);
            }
            None => {}
        }
        rec.refresh_completion_flags();
    }
}
