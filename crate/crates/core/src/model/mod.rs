//! Shared domain types: records, datasets, criteria and metadata classes.

mod criteria;
mod dataset;
mod record;

pub use criteria::{
    standard_research_questions, Criterion, CriterionKind, CriterionSet, MetadataClass, MetadataDimension,
    DUPLICATE_CRITERION,
};
pub use dataset::{
    count_by_database, Dataset, DatasetSize, MergeEvent, MergeOperation, MergeStage, RecordPatch, ResolutionNote,
};
pub use record::{AuthorName, CompletionFlag, Record, RecordId, Vehicle};

use serde::{Deserialize, Serialize};

/// A broken record invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    EmptyId,
    EmptyTitle,
    InvalidYear { year: i32 },
    UnknownMetadataClass { class: String },
    DisallowedMetadataValue { class: String, value: String },
    UnflaggedMissingField { flag: CompletionFlag },
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::EmptyId => "empty_id",
            Violation::EmptyTitle => "empty_title",
            Violation::InvalidYear { .. } => "invalid_year",
            Violation::UnknownMetadataClass { .. } => "unknown_metadata_class",
            Violation::DisallowedMetadataValue { .. } => "disallowed_metadata_value",
            Violation::UnflaggedMissingField { .. } => "unflagged_missing_field",
        }
    }
}

/// Checks one record against its invariants and the project's declared
/// metadata classes. Returns an empty list iff the record is valid.
pub fn validate_record(r: &Record, classes: &[MetadataClass]) -> Vec<Violation> {
    let mut out = Vec::new();
    if r.id.as_str().trim().is_empty() {
        out.push(Violation::EmptyId);
    }
    if r.title.trim().is_empty() {
        out.push(Violation::EmptyTitle);
    }
    if let Some(y) = r.year {
        if !(1000..=9999).contains(&y) {
            out.push(Violation::InvalidYear { year: y });
        }
    }
    for (class, value) in &r.metadata {
        match classes.iter().find(|c| &c.name == class) {
            None => out.push(Violation::UnknownMetadataClass { class: class.clone() }),
            Some(c) if !c.allows(value) => out.push(Violation::DisallowedMetadataValue {
                class: class.clone(),
                value: value.clone(),
            }),
            Some(_) => {}
        }
    }
    let missing = [
        (CompletionFlag::MissingAbstract, r.abstract_text.trim().is_empty()),
        (CompletionFlag::MissingKeywords, r.keywords.is_empty()),
        (CompletionFlag::MissingYear, r.year.is_none()),
        (CompletionFlag::MissingVenue, r.venue.trim().is_empty()),
    ];
    for (flag, absent) in missing {
        if absent && !r.has_flag(flag) {
            out.push(Violation::UnflaggedMissingField { flag });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete() -> Record {
        let mut r = Record::new("IEEE-0001", "A title");
        r.abstract_text = "abs".into();
        r.keywords = vec!["spi".into()];
        r.year = Some(2015);
        r.venue = "ICSE".into();
        r.refresh_completion_flags();
        r
    }

    #[test]
    fn two_digit_year_is_invalid() {
        let mut r = complete();
        r.year = Some(15);
        assert_eq!(validate_record(&r, &[]), vec![Violation::InvalidYear { year: 15 }]);
    }

    #[test]
    fn flagged_absence_is_legal() {
        let mut r = complete();
        r.abstract_text.clear();
        r.refresh_completion_flags();
        assert!(validate_record(&r, &[]).is_empty());
        r.completion_flags.clear();
        assert_eq!(
            validate_record(&r, &[]),
            vec![Violation::UnflaggedMissingField {
                flag: CompletionFlag::MissingAbstract
            }]
        );
    }

    #[test]
    fn undeclared_metadata_class() {
        let mut r = complete();
        r.metadata.insert("foo".into(), "bar".into());
        let v = validate_record(&r, &[MetadataClass::new("study")]);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].code(), "unknown_metadata_class");
    }

    #[test]
    fn controlled_vocabulary() {
        let mut r = complete();
        r.metadata.insert("study".into(), "weird".into());
        let class = MetadataClass {
            name: "study".into(),
            allowed_values: Some(vec!["primary".into(), "secondary".into()]),
            dimension: Some(MetadataDimension::Study),
        };
        assert_eq!(validate_record(&r, &[class])[0].code(), "disallowed_metadata_value");
    }
}
