use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Vehicle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceFormat {
    Bibtex,
    Csv,
}

/// Target of a mapped source column or BibTeX field.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RecordField {
    DbNo,
    Title,
    Authors,
    Keywords,
    Abstract,
    Year,
    PublisherDb,
    Venue,
    Vehicle,
    FullTextAvailable,
    Comments,
    Metadata(String),
}

impl fmt::Display for RecordField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RecordField::DbNo => "db_no",
            RecordField::Title => "title",
            RecordField::Authors => "authors",
            RecordField::Keywords => "keywords",
            RecordField::Abstract => "abstract",
            RecordField::Year => "year",
            RecordField::PublisherDb => "publisher_db",
            RecordField::Venue => "venue",
            RecordField::Vehicle => "vehicle",
            RecordField::FullTextAvailable => "full_text_available",
            RecordField::Comments => "comments",
            RecordField::Metadata(name) => return write!(f, "metadata:{name}"),
        };
        f.write_str(s)
    }
}

impl TryFrom<String> for RecordField {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        let field = match s.trim() {
            "db_no" => RecordField::DbNo,
            "title" => RecordField::Title,
            "authors" => RecordField::Authors,
            "keywords" => RecordField::Keywords,
            "abstract" => RecordField::Abstract,
            "year" => RecordField::Year,
            "publisher_db" => RecordField::PublisherDb,
            "venue" => RecordField::Venue,
            "vehicle" => RecordField::Vehicle,
            "full_text_available" => RecordField::FullTextAvailable,
            "comments" => RecordField::Comments,
            other => match other.strip_prefix("metadata:") {
                Some(name) if !name.is_empty() => RecordField::Metadata(name.to_string()),
                _ => return Err(format!("unknown record field {other:?}")),
            },
        };
        Ok(field)
    }
}

impl From<RecordField> for String {
    fn from(f: RecordField) -> String {
        f.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvDialect {
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    #[serde(default = "default_quote")]
    pub quote: char,
    #[serde(default = "default_true")]
    pub has_header: bool,
}

fn default_delimiter() -> char {
    ','
}
fn default_quote() -> char {
    '"'
}
fn default_true() -> bool {
    true
}

impl Default for CsvDialect {
    fn default() -> Self {
        CsvDialect {
            delimiter: ',',
            quote: '"',
            has_header: true,
        }
    }
}

/// How one database's export maps onto records.
///
/// For CSV without a header row, `column_map` keys are zero-based column
/// indices. For BibTeX the keys are field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceProfile {
    pub database_name: String,
    pub format: SourceFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id_prefix: Option<String>,
    pub column_map: BTreeMap<String, RecordField>,
    #[serde(default)]
    pub csv_dialect: CsvDialect,
    /// Source vehicle labels (case-insensitive) mapped to vehicles.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub vehicle_map: BTreeMap<String, Vehicle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_vehicle: Option<Vehicle>,
}

impl SourceProfile {
    /// Standard BibTeX field mapping for a database.
    pub fn bibtex(database_name: impl Into<String>) -> Self {
        let column_map = [
            ("title", RecordField::Title),
            ("author", RecordField::Authors),
            ("keywords", RecordField::Keywords),
            ("keyword", RecordField::Keywords),
            ("abstract", RecordField::Abstract),
            ("year", RecordField::Year),
            ("journal", RecordField::Venue),
            ("booktitle", RecordField::Venue),
            ("school", RecordField::Venue),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        SourceProfile {
            database_name: database_name.into(),
            format: SourceFormat::Bibtex,
            id_prefix: None,
            column_map,
            csv_dialect: CsvDialect::default(),
            vehicle_map: BTreeMap::new(),
            default_vehicle: None,
        }
    }

    /// CSV profile whose headers are the lowercase record field names.
    pub fn csv_plain(database_name: impl Into<String>) -> Self {
        let column_map = [
            RecordField::DbNo,
            RecordField::Title,
            RecordField::Authors,
            RecordField::Keywords,
            RecordField::Abstract,
            RecordField::Year,
            RecordField::Venue,
            RecordField::Vehicle,
            RecordField::FullTextAvailable,
            RecordField::Comments,
        ]
        .into_iter()
        .map(|f| (f.to_string(), f))
        .collect();
        SourceProfile {
            database_name: database_name.into(),
            format: SourceFormat::Csv,
            id_prefix: None,
            column_map,
            csv_dialect: CsvDialect::default(),
            vehicle_map: BTreeMap::new(),
            default_vehicle: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let profile: SourceProfile =
            serde_json::from_str(&text).map_err(|e| Error::Profile(format!("{}: {e}", path.display())))?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<()> {
        if self.database_name.trim().is_empty() {
            return Err(Error::Profile("database_name is empty".into()));
        }
        if !self.column_map.values().any(|f| *f == RecordField::Title) {
            return Err(Error::Profile(format!(
                "profile for {} does not map any column to title",
                self.database_name
            )));
        }
        Ok(())
    }

    /// Prefix used for record ids, e.g. `IEEE` for "IEEE Xplore" unless set.
    pub fn prefix(&self) -> String {
        self.id_prefix.clone().unwrap_or_else(|| id_prefix_for(&self.database_name))
    }

    pub(crate) fn map_vehicle(&self, label: &str) -> Option<Vehicle> {
        let lower = label.trim().to_lowercase();
        if lower.is_empty() {
            return None;
        }
        if let Some((_, v)) = self.vehicle_map.iter().find(|(k, _)| k.to_lowercase() == lower) {
            return Some(*v);
        }
        if let Some(v) = Vehicle::parse(&lower) {
            return Some(v);
        }
        let keyword_table = [
            ("workshop", Vehicle::Workshop),
            ("magazine", Vehicle::Magazine),
            ("journal", Vehicle::Journal),
            ("transactions", Vehicle::Journal),
            ("conference", Vehicle::Conference),
            ("proceedings", Vehicle::Conference),
            ("chapter", Vehicle::Chapter),
            ("book", Vehicle::Book),
            ("thesis", Vehicle::Thesis),
        ];
        keyword_table.into_iter().find(|(k, _)| lower.contains(k)).map(|(_, v)| v)
    }
}

/// Uppercase alphanumeric form of the first word of a database name.
pub fn id_prefix_for(database_name: &str) -> String {
    let first = database_name.split_whitespace().next().unwrap_or("DB");
    let p: String = first.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_uppercase();
    if p.is_empty() {
        "DB".into()
    } else {
        p
    }
}

/// Truthiness of a full-text cell: anything nonempty except explicit negatives.
pub(crate) fn parse_flag(value: &str) -> bool {
    let v = value.trim().to_lowercase();
    !matches!(v.as_str(), "" | "0" | "false" | "no" | "n" | "-")
}

/// Splits a keyword cell on `;`, or on `,` when no semicolon is present.
pub(crate) fn split_keywords(cell: &str) -> Vec<String> {
    let sep = if cell.contains(';') { ';' } else { ',' };
    cell.split(sep)
        .map(|k| k.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|k| !k.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_field_round_trip() {
        let json = r#"{"Class":"metadata:study","Title":"title"}"#;
        let m: BTreeMap<String, RecordField> = serde_json::from_str(json).unwrap();
        assert_eq!(m["Class"], RecordField::Metadata("study".into()));
        assert_eq!(serde_json::to_string(&m).unwrap(), json);
        assert!(serde_json::from_str::<RecordField>("\"nope\"").is_err());
    }

    #[test]
    fn profile_must_map_title() {
        let mut p = SourceProfile::csv_plain("ACM");
        p.column_map.remove("title");
        assert!(matches!(p.validate(), Err(Error::Profile(_))));
    }

    #[test]
    fn prefixes_and_vehicle_labels() {
        assert_eq!(id_prefix_for("IEEE Xplore"), "IEEE");
        assert_eq!(id_prefix_for("ACM Digital Library"), "ACM");
        let p = SourceProfile::csv_plain("IEEE");
        assert_eq!(p.map_vehicle("Conference Publications"), Some(Vehicle::Conference));
        assert_eq!(p.map_vehicle("IEEE Transactions"), Some(Vehicle::Journal));
        assert_eq!(p.map_vehicle("Journal"), Some(Vehicle::Journal));
        assert_eq!(p.map_vehicle("Early Access"), None);
    }

    #[test]
    fn keyword_splitting() {
        assert_eq!(split_keywords("spi; agile ;  small  companies"), ["spi", "agile", "small companies"]);
        assert_eq!(split_keywords("a, b"), ["a", "b"]);
        assert!(split_keywords("  ").is_empty());
    }
}
