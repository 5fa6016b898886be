use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dedup::normalize_title;
use crate::model::{CompletionFlag, Dataset, RecordId};

/// Records per completion flag, ids sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionAudit {
    pub counts: BTreeMap<CompletionFlag, usize>,
    pub records: BTreeMap<CompletionFlag, Vec<RecordId>>,
}

impl CompletionAudit {
    pub fn count(&self, flag: CompletionFlag) -> usize {
        self.counts.get(&flag).copied().unwrap_or(0)
    }
}

pub fn audit_completion(d: &Dataset) -> CompletionAudit {
    let mut records: BTreeMap<CompletionFlag, Vec<RecordId>> =
        CompletionFlag::ALL.iter().map(|f| (*f, Vec::new())).collect();
    for r in d.records() {
        for f in &r.completion_flags {
            records.entry(*f).or_default().push(r.id.clone());
        }
    }
    for ids in records.values_mut() {
        ids.sort();
    }
    let counts = records.iter().map(|(f, ids)| (*f, ids.len())).collect();
    CompletionAudit { counts, records }
}

/// An expected reference publication.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceDescriptor {
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceMatch {
    pub reference: ReferenceDescriptor,
    pub record: RecordId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceReport {
    pub found: Vec<ReferenceMatch>,
    pub missing: Vec<ReferenceDescriptor>,
}

impl ReferenceReport {
    pub fn all_found(&self) -> bool {
        self.missing.is_empty()
    }
}

/// A reference is found when a record has the same normalized title and,
/// if the reference gives one, the same year.
pub fn check_reference_set(d: &Dataset, refs: &[ReferenceDescriptor]) -> ReferenceReport {
    let index: Vec<(String, &crate::model::Record)> =
        d.records().iter().map(|r| (normalize_title(&r.title), r)).collect();
    let mut found = Vec::new();
    let mut missing = Vec::new();
    for reference in refs {
        let key = normalize_title(&reference.title);
        let hit = index
            .iter()
            .find(|(t, r)| *t == key && reference.year.is_none_or(|y| r.year == Some(y)));
        match hit {
            Some((_, r)) => found.push(ReferenceMatch {
                reference: reference.clone(),
                record: r.id.clone(),
            }),
            None => missing.push(reference.clone()),
        }
    }
    ReferenceReport { found, missing }
}

/// Reads one descriptor per nonempty line, `title` or `title<TAB>year`.
pub fn parse_reference_list(text: &str) -> Vec<ReferenceDescriptor> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| match l.rsplit_once('\t') {
            Some((t, y)) if y.trim().parse::<i32>().is_ok() => ReferenceDescriptor {
                title: t.trim().to_string(),
                year: y.trim().parse().ok(),
            },
            _ => ReferenceDescriptor {
                title: l.to_string(),
                year: None,
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Record, RecordPatch};

    fn dataset() -> Dataset {
        let mut recs = Vec::new();
        for (i, (title, kw, abs)) in [("A", "", "x"), ("B", "", ""), ("C", "k", "y")].iter().enumerate() {
            let mut r = Record::new(format!("T-{:04}", 3 - i), *title);
            if !kw.is_empty() {
                r.keywords.push(kw.to_string());
            }
            r.abstract_text = abs.to_string();
            r.year = Some(2015);
            r.venue = "V".into();
            r.refresh_completion_flags();
            recs.push(r);
        }
        Dataset::new(recs).unwrap()
    }

    #[test]
    fn counts_match_lists_and_sorted() {
        let a = audit_completion(&dataset());
        assert_eq!(a.count(CompletionFlag::MissingKeywords), 2);
        assert_eq!(
            a.records[&CompletionFlag::MissingKeywords],
            vec![RecordId::from("T-0002"), RecordId::from("T-0003")]
        );
        for (f, ids) in &a.records {
            assert_eq!(a.counts[f], ids.len());
        }
    }

    #[test]
    fn patch_reduces_count_by_one() {
        let d = dataset();
        let before = audit_completion(&d).count(CompletionFlag::MissingAbstract);
        let patch = RecordPatch {
            abstract_text: Some("now present".into()),
            ..Default::default()
        };
        let d2 = d.patch(&RecordId::from("T-0002"), &patch).unwrap();
        assert_eq!(audit_completion(&d2).count(CompletionFlag::MissingAbstract), before - 1);
    }

    #[test]
    fn reference_check() {
        let d = dataset();
        assert!(check_reference_set(&d, &[]).all_found());
        let refs = parse_reference_list("  b  \nc\t2014\nZ\n");
        let rep = check_reference_set(&d, &refs);
        assert_eq!(rep.found.len(), 1);
        assert_eq!(rep.found[0].record, RecordId::from("T-0002"));
        assert_eq!(rep.missing.len(), 2);
    }
}
