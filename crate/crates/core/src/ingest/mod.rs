//! Parsing database exports (BibTeX, CSV) into records, plus completeness
//! audits and the reference-publication check.

mod audit;
mod bibtex;
mod csv;
pub mod latex;
mod profile;

pub use audit::{
    audit_completion, check_reference_set, parse_reference_list, CompletionAudit, ReferenceDescriptor, ReferenceMatch,
    ReferenceReport,
};
pub use bibtex::{parse_bibtex, parse_entries, RawEntry};
pub use csv::parse_csv;
pub use profile::{id_prefix_for, CsvDialect, RecordField, SourceFormat, SourceProfile};

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningKind {
    DuplicateKey,
    UnknownEntryType,
    UnknownMacro,
    UnparseableAuthor,
    InvalidYear,
    RejectedEntry,
}

/// One line of the JSON-lines warning channel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestWarning {
    pub kind: WarningKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    /// Citation key or row number.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry: Option<String>,
    pub message: String,
}

impl IngestWarning {
    pub fn new(kind: WarningKind, line: Option<usize>, entry: Option<String>, message: String) -> Self {
        IngestWarning {
            kind,
            line,
            entry,
            message,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOutput {
    pub records: Vec<crate::model::Record>,
    pub warnings: Vec<IngestWarning>,
    /// Entries or data rows seen in the input.
    pub input_units: usize,
}

impl IngestOutput {
    pub fn rejected(&self) -> usize {
        self.warnings.iter().filter(|w| w.kind == WarningKind::RejectedEntry).count()
    }
}

/// Parses a file according to the profile's format.
pub fn parse_source(input: &str, profile: &SourceProfile) -> Result<IngestOutput> {
    match profile.format {
        SourceFormat::Bibtex => parse_bibtex(input, profile),
        SourceFormat::Csv => parse_csv(input, profile),
    }
}

pub fn warnings_to_jsonl(warnings: &[IngestWarning]) -> String {
    warnings
        .iter()
        .map(|w| serde_json::to_string(w).expect("warning serializes") + "\n")
        .collect()
}
