use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Stable record identity, e.g. `IEEE-0042`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RecordId(pub String);

impl RecordId {
    pub fn new(id: impl Into<String>) -> Self {
        RecordId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RecordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for RecordId {
    fn from(s: &str) -> Self {
        RecordId(s.to_string())
    }
}

/// Publication vehicle. `Misc` is the catch-all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Vehicle {
    Journal,
    Magazine,
    Conference,
    Workshop,
    Book,
    Chapter,
    Thesis,
    #[default]
    Misc,
}

impl Vehicle {
    pub const ALL: [Vehicle; 8] = [
        Vehicle::Journal,
        Vehicle::Magazine,
        Vehicle::Conference,
        Vehicle::Workshop,
        Vehicle::Book,
        Vehicle::Chapter,
        Vehicle::Thesis,
        Vehicle::Misc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Vehicle::Journal => "journal",
            Vehicle::Magazine => "magazine",
            Vehicle::Conference => "conference",
            Vehicle::Workshop => "workshop",
            Vehicle::Book => "book",
            Vehicle::Chapter => "chapter",
            Vehicle::Thesis => "thesis",
            Vehicle::Misc => "misc",
        }
    }

    /// Column header used for the one-hot vehicle columns of the dataset CSV.
    pub fn column_name(self) -> &'static str {
        match self {
            Vehicle::Journal => "Journal",
            Vehicle::Magazine => "Magazine",
            Vehicle::Conference => "Conference",
            Vehicle::Workshop => "Workshop",
            Vehicle::Book => "Book",
            Vehicle::Chapter => "Chapter",
            Vehicle::Thesis => "Thesis",
            Vehicle::Misc => "Misc",
        }
    }

    pub fn parse(s: &str) -> Option<Vehicle> {
        let s = s.trim().to_ascii_lowercase();
        Vehicle::ALL.into_iter().find(|v| v.as_str() == s)
    }

    pub fn is_conference_like(self) -> bool {
        matches!(self, Vehicle::Conference | Vehicle::Workshop)
    }
}

impl fmt::Display for Vehicle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompletionFlag {
    MissingAbstract,
    MissingKeywords,
    MissingYear,
    MissingVenue,
    AbstractSubstitute,
}

impl CompletionFlag {
    pub const ALL: [CompletionFlag; 5] = [
        CompletionFlag::MissingAbstract,
        CompletionFlag::MissingKeywords,
        CompletionFlag::MissingYear,
        CompletionFlag::MissingVenue,
        CompletionFlag::AbstractSubstitute,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CompletionFlag::MissingAbstract => "missing_abstract",
            CompletionFlag::MissingKeywords => "missing_keywords",
            CompletionFlag::MissingYear => "missing_year",
            CompletionFlag::MissingVenue => "missing_venue",
            CompletionFlag::AbstractSubstitute => "abstract_substitute",
        }
    }

    pub fn parse(s: &str) -> Option<CompletionFlag> {
        CompletionFlag::ALL.into_iter().find(|f| f.as_str() == s.trim())
    }
}

/// An author as imported plus its canonical split.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AuthorName {
    pub given: String,
    pub family: String,
    /// The name exactly as it appeared in the source.
    pub raw: String,
}

impl AuthorName {
    /// Canonical "given family" rendering.
    pub fn canonical(&self) -> String {
        match (self.given.is_empty(), self.family.is_empty()) {
            (true, _) => self.family.clone(),
            (false, true) => self.given.clone(),
            (false, false) => format!("{} {}", self.given, self.family),
        }
    }

    /// Case-insensitive identity key used for author matching.
    pub fn key(&self) -> String {
        self.canonical().to_lowercase()
    }
}

/// One publication row of the minimal data structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub id: RecordId,
    /// Position in the integrated dataset ("No."). Reassigned on integration.
    pub no: u32,
    /// Source-database-local identifier ("DB-No.").
    pub db_no: String,
    pub title: String,
    pub authors: Vec<AuthorName>,
    pub keywords: Vec<String>,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub year: Option<i32>,
    pub publisher_db: String,
    pub venue: String,
    pub vehicle: Vehicle,
    pub full_text_available: bool,
    pub comments: String,
    pub metadata: BTreeMap<String, String>,
    pub completion_flags: BTreeSet<CompletionFlag>,
    /// Exclusion criteria recorded against this record (e.g. `E7` for removed duplicates).
    #[serde(default)]
    pub exclusion_criteria: Vec<String>,
}

impl Record {
    pub fn new(id: impl Into<String>, title: impl Into<String>) -> Self {
        let mut r = Record {
            id: RecordId(id.into()),
            no: 0,
            db_no: String::new(),
            title: title.into(),
            authors: Vec::new(),
            keywords: Vec::new(),
            abstract_text: String::new(),
            year: None,
            publisher_db: String::new(),
            venue: String::new(),
            vehicle: Vehicle::Misc,
            full_text_available: false,
            comments: String::new(),
            metadata: BTreeMap::new(),
            completion_flags: BTreeSet::new(),
            exclusion_criteria: Vec::new(),
        };
        r.refresh_completion_flags();
        r
    }

    /// Recomputes the content-derived completion flags. `AbstractSubstitute`
    /// is an operator flag and is left untouched.
    pub fn refresh_completion_flags(&mut self) {
        let derived = [
            (CompletionFlag::MissingAbstract, self.abstract_text.trim().is_empty()),
            (CompletionFlag::MissingKeywords, self.keywords.is_empty()),
            (CompletionFlag::MissingYear, self.year.is_none()),
            (CompletionFlag::MissingVenue, self.venue.trim().is_empty()),
        ];
        for (flag, missing) in derived {
            if missing {
                self.completion_flags.insert(flag);
            } else {
                self.completion_flags.remove(&flag);
            }
        }
    }

    pub fn has_flag(&self, flag: CompletionFlag) -> bool {
        self.completion_flags.contains(&flag)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn completion_flags_track_content() {
        let mut r = Record::new("X-0001", "T");
        assert!(r.has_flag(CompletionFlag::MissingAbstract));
        assert!(r.has_flag(CompletionFlag::MissingYear));
        r.abstract_text = "Some abstract".into();
        r.completion_flags.insert(CompletionFlag::AbstractSubstitute);
        r.refresh_completion_flags();
        assert!(!r.has_flag(CompletionFlag::MissingAbstract));
        assert!(r.has_flag(CompletionFlag::AbstractSubstitute));
    }

    #[test]
    fn canonical_author_rendering() {
        let a = AuthorName {
            given: "J. J.".into(),
            family: "Abrams".into(),
            raw: "Abrams, J. J.".into(),
        };
        assert_eq!(a.canonical(), "J. J. Abrams");
        assert_eq!(a.key(), "j. j. abrams");
    }
}
