use std::collections::HashSet;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{count_by_database, Dataset, DatasetSize, MergeEvent, MergeOperation, MergeStage};

/// Concatenates named parts into one dataset and renumbers `no` from 1.
///
/// Nothing is deduplicated here. The result carries the parts' merge logs
/// followed by one integration event.
pub fn integrate(parts: &[(&str, &Dataset)], stage: MergeStage, timestamp: DateTime<Utc>) -> Result<(Dataset, MergeEvent)> {
    if parts.is_empty() {
        return Err(Error::precondition("integration needs at least one input dataset"));
    }
    let mut seen = HashSet::new();
    let mut collisions = Vec::new();
    let mut records = Vec::new();
    let mut log = Vec::new();
    for (_, part) in parts {
        for r in part.records() {
            if !seen.insert(r.id.clone()) {
                collisions.push(r.id.to_string());
            }
            records.push(r.clone());
        }
        log.extend(part.merge_log().iter().cloned());
    }
    if !collisions.is_empty() {
        return Err(Error::integrity(
            "record ids collide across integration inputs; re-namespace them first",
            collisions,
        ));
    }
    for (i, r) in records.iter_mut().enumerate() {
        r.no = (i + 1) as u32;
    }
    let event = MergeEvent {
        stage,
        operation: MergeOperation::Integrate,
        label: None,
        inputs: parts
            .iter()
            .map(|(name, d)| DatasetSize {
                name: name.to_string(),
                size: d.len(),
            })
            .collect(),
        output_size: records.len(),
        duplicates_removed: 0,
        resolution_notes: Vec::new(),
        removed_by_database: Default::default(),
        output_by_database: count_by_database(&records),
        filtered_databases: Vec::new(),
        removed: Vec::new(),
        pending: Vec::new(),
        timestamp,
    };
    log.push(event.clone());
    Ok((Dataset::from_parts_unchecked(records, log, 1), event))
}

/// A study-specific filter: records of the listed databases are kept only if
/// one of the terms occurs in their title, abstract or keywords.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedFilter {
    pub name: String,
    pub databases: Vec<String>,
    pub require_any: Vec<String>,
    /// Exclusion criterion recorded on filtered-out records.
    pub criterion: String,
}

impl NamedFilter {
    fn applies_to(&self, db: &str) -> bool {
        self.databases.iter().any(|d| d.eq_ignore_ascii_case(db))
    }

    fn matches(&self, r: &crate::model::Record) -> bool {
        let haystack = format!("{} {} {}", r.title, r.abstract_text, r.keywords.join(" ")).to_lowercase();
        self.require_any.iter().any(|t| haystack.contains(&t.to_lowercase()))
    }
}

/// Runs a named filter and logs it.
pub fn apply_filter(
    d: &Dataset,
    filter: &NamedFilter,
    dataset_name: &str,
    timestamp: DateTime<Utc>,
) -> Result<(Dataset, MergeEvent)> {
    if filter.require_any.is_empty() {
        return Err(Error::InvalidInput(format!("filter {} has no terms", filter.name)));
    }
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    for r in d.records() {
        if filter.applies_to(&r.publisher_db) && !filter.matches(r) {
            let mut r = r.clone();
            if !r.exclusion_criteria.contains(&filter.criterion) {
                r.exclusion_criteria.push(filter.criterion.clone());
            }
            removed.push(r);
        } else {
            kept.push(r.clone());
        }
    }
    let event = MergeEvent {
        stage: MergeStage::CrossDatabase,
        operation: MergeOperation::Filter,
        label: Some(filter.name.clone()),
        inputs: vec![DatasetSize {
            name: dataset_name.to_string(),
            size: d.len(),
        }],
        output_size: kept.len(),
        duplicates_removed: 0,
        resolution_notes: Vec::new(),
        removed_by_database: count_by_database(&removed),
        output_by_database: count_by_database(&kept),
        filtered_databases: filter.databases.clone(),
        removed,
        pending: Vec::new(),
        timestamp,
    };
    let next = d.next(kept, Some(event.clone()))?;
    Ok((next, event))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Record;
    use chrono::TimeZone;

    fn ts() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2016, 1, 1, 0, 0, 0).unwrap()
    }

    fn ds(prefix: &str, n: usize) -> Dataset {
        Dataset::new(
            (0..n)
                .map(|i| {
                    let mut r = Record::new(format!("{prefix}-{:04}", i + 1), format!("{prefix} paper {i}"));
                    r.publisher_db = prefix.into();
                    r.db_no = format!("{}", i + 1);
                    r
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_input() {
        let a = ds("A", 3);
        let (out, ev) = integrate(&[("A", &a)], MergeStage::PerDatabase, ts()).unwrap();
        assert_eq!(out.len(), 3);
        assert_eq!(ev.inputs, vec![DatasetSize { name: "A".into(), size: 3 }]);
    }

    #[test]
    fn counts_preserved_and_renumbered() {
        let (a, b) = (ds("A", 3), ds("B", 2));
        let (out, ev) = integrate(&[("A", &a), ("B", &b)], MergeStage::CrossDatabase, ts()).unwrap();
        assert_eq!(out.len(), 5);
        assert_eq!(ev.inputs.iter().map(|s| s.size).collect::<Vec<_>>(), vec![3, 2]);
        let nos: Vec<u32> = out.records().iter().map(|r| r.no).collect();
        assert_eq!(nos, vec![1, 2, 3, 4, 5]);
        assert_eq!(out.records()[3].db_no, "1");
        assert_eq!(out.merge_log().len(), 1);
    }

    #[test]
    fn colliding_ids_rejected() {
        let a = ds("A", 2);
        assert!(integrate(&[("A", &a), ("again", &a)], MergeStage::PerDatabase, ts()).is_err());
        assert!(integrate(&[], MergeStage::PerDatabase, ts()).is_err());
    }

    #[test]
    fn filter_only_touches_listed_databases() {
        let (a, b) = (ds("A", 3), ds("B", 2));
        let (all, _) = integrate(&[("A", &a), ("B", &b)], MergeStage::CrossDatabase, ts()).unwrap();
        let f = NamedFilter {
            name: "F1".into(),
            databases: vec!["A".into()],
            require_any: vec!["paper 1".into()],
            criterion: "E4".into(),
        };
        let (out, ev) = apply_filter(&all, &f, "integrated", ts()).unwrap();
        // A keeps only "A paper 1"; B untouched
        assert_eq!(out.len(), 3);
        assert_eq!(ev.removed_by_database.get("A"), Some(&2));
        assert!(ev.removed.iter().all(|r| r.exclusion_criteria == vec!["E4".to_string()]));
    }
}
