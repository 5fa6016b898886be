use std::collections::BTreeMap;

use super::bibtex::{assign_text, parse_year};
use super::profile::{split_keywords, RecordField, SourceFormat, SourceProfile};
use super::{IngestOutput, IngestWarning, WarningKind};
use crate::dedup::{normalize_author, split_author_list};
use crate::error::{Error, Result};
use crate::model::Record;

fn single_byte(c: char, what: &str) -> Result<u8> {
    if c.is_ascii() {
        Ok(c as u8)
    } else {
        Err(Error::Profile(format!("{what} {c:?} must be a single ASCII character")))
    }
}

/// One record per data row, routed via the profile's column map.
///
/// Several columns may map to `authors` or `keywords`; their values are
/// appended in column order.
pub fn parse_csv(input: &str, profile: &SourceProfile) -> Result<IngestOutput> {
    profile.validate()?;
    if profile.format != SourceFormat::Csv {
        return Err(Error::Profile(format!("profile for {} is not a CSV profile", profile.database_name)));
    }
    let input = input.strip_prefix('\u{feff}').unwrap_or(input);
    let dialect = &profile.csv_dialect;
    let mut reader = ::csv::ReaderBuilder::new()
        .delimiter(single_byte(dialect.delimiter, "delimiter")?)
        .quote(single_byte(dialect.quote, "quote")?)
        .has_headers(dialect.has_header)
        .flexible(true)
        .from_reader(input.as_bytes());

    let header: Vec<String> = if dialect.has_header {
        reader
            .headers()
            .map_err(|e| csv_error(&e))?
            .iter()
            .map(|h| h.trim().to_string())
            .collect()
    } else {
        Vec::new()
    };

    // column index -> target field
    let mut routes: BTreeMap<usize, &RecordField> = BTreeMap::new();
    for (col, field) in &profile.column_map {
        let idx = if dialect.has_header {
            header.iter().position(|h| h.eq_ignore_ascii_case(col))
        } else {
            col.parse::<usize>().ok()
        };
        match idx {
            Some(i) => {
                routes.insert(i, field);
            }
            None if *field == RecordField::Title || dialect.has_header => {
                return Err(Error::Profile(format!(
                    "column {col:?} mapped to {field} is not present in the {} export",
                    profile.database_name
                )));
            }
            None => return Err(Error::Profile(format!("column key {col:?} is not a column index"))),
        }
    }

    let prefix = profile.prefix();
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let mut rows = 0usize;
    for (row_idx, row) in reader.records().enumerate() {
        let row = row.map_err(|e| csv_error(&e))?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(row_idx + 1);
        rows += 1;
        let row_no = row_idx + 1;
        let mut rec = Record::new(format!("{prefix}-{:04}", records.len() + 1), "");
        rec.db_no = row_no.to_string();
        rec.publisher_db = profile.database_name.clone();
        if let Some(v) = profile.default_vehicle {
            rec.vehicle = v;
        }
        let mut extra = Vec::new();
        for (i, cell) in row.iter().enumerate() {
            let cell = cell.trim();
            let Some(field) = routes.get(&i) else {
                if !cell.is_empty() {
                    let name = header.get(i).cloned().unwrap_or_else(|| format!("column {i}"));
                    extra.push(format!("{name}: {cell}"));
                }
                continue;
            };
            match field {
                RecordField::Authors => {
                    for raw in split_author_list(cell) {
                        let (name, warn) = normalize_author(&raw);
                        if let Some(w) = warn {
                            warnings.push(IngestWarning::new(
                                WarningKind::UnparseableAuthor,
                                Some(line),
                                Some(row_no.to_string()),
                                w,
                            ));
                        }
                        rec.authors.push(name);
                    }
                }
                RecordField::Keywords => rec.keywords.extend(split_keywords(cell)),
                RecordField::Year => {
                    rec.year = parse_year(cell);
                    if rec.year.is_none() && !cell.is_empty() {
                        warnings.push(IngestWarning::new(
                            WarningKind::InvalidYear,
                            Some(line),
                            Some(row_no.to_string()),
                            format!("year {cell:?} is not numeric"),
                        ));
                    }
                }
                other => assign_text(&mut rec, other, cell.to_string(), profile),
            }
        }
        if !extra.is_empty() {
            let joined = extra.join("; ");
            rec.comments = if rec.comments.is_empty() {
                joined
            } else {
                format!("{}; {joined}", rec.comments)
            };
        }
        if rec.title.is_empty() {
            warnings.push(IngestWarning::new(
                WarningKind::RejectedEntry,
                Some(line),
                Some(row_no.to_string()),
                "row has an empty title and was not imported".to_string(),
            ));
            continue;
        }
        rec.refresh_completion_flags();
        records.push(rec);
    }
    Ok(IngestOutput {
        records,
        warnings,
        input_units: rows,
    })
}

fn csv_error(e: &::csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CompletionFlag, Vehicle};

    #[test]
    fn header_only() {
        let out = parse_csv("db_no,title,abstract\n", &SourceProfile::csv_plain("ACM").tap_minimal()).unwrap();
        assert!(out.records.is_empty() && out.warnings.is_empty());
    }

    trait Minimal {
        fn tap_minimal(self) -> Self;
    }
    impl Minimal for SourceProfile {
        fn tap_minimal(mut self) -> Self {
            self.column_map.retain(|k, _| ["db_no", "title", "abstract"].contains(&k.as_str()));
            self
        }
    }

    #[test]
    fn missing_abstract_is_flagged() {
        let p = SourceProfile::csv_plain("ACM").tap_minimal();
        let out = parse_csv("db_no,title,abstract\nA1,Some title,\n", &p).unwrap();
        assert_eq!(out.records.len(), 1);
        let r = &out.records[0];
        assert_eq!(r.db_no, "A1");
        assert!(r.has_flag(CompletionFlag::MissingAbstract));
    }

    #[test]
    fn semicolon_dialect() {
        let mut p = SourceProfile::csv_plain("Springer").tap_minimal();
        p.csv_dialect.delimiter = ';';
        let input = "db_no;title;abstract\n1;One;a\n2;\"Two; quoted\";b\n3;Three;c\n";
        let out = parse_csv(input, &p).unwrap();
        assert_eq!(out.records.len(), 3);
        assert_eq!(out.records[1].title, "Two; quoted");
    }

    #[test]
    fn absent_column_names_it() {
        let p = SourceProfile::csv_plain("ACM");
        let err = parse_csv("title\nx\n", &p).unwrap_err();
        match err {
            Error::Profile(m) => assert!(m.contains("\"abstract\""), "{m}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bom_authors_and_unmapped_columns() {
        let mut p = SourceProfile::csv_plain("ACM").tap_minimal();
        p.column_map.insert("Author 1".into(), RecordField::Authors);
        p.column_map.insert("Author 2".into(), RecordField::Authors);
        p.column_map.insert("Type".into(), RecordField::Vehicle);
        let input = "\u{feff}db_no,title,abstract,Author 1,Author 2,Type,DOI\n7,T,x,\"Abrams, J. J.\",Jane Roe,Workshop Paper,10.1/x\n";
        let out = parse_csv(input, &p).unwrap();
        let r = &out.records[0];
        assert_eq!(r.authors.len(), 2);
        assert_eq!(r.authors[1].family, "Roe");
        assert_eq!(r.vehicle, Vehicle::Workshop);
        assert_eq!(r.comments, "DOI: 10.1/x");
    }

    #[test]
    fn empty_titles_rejected_with_accounting() {
        let p = SourceProfile::csv_plain("ACM").tap_minimal();
        let out = parse_csv("db_no,title,abstract\n1,,x\n2,B,y\n", &p).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.rejected(), 1);
        assert_eq!(out.input_units, 2);
        assert_eq!(out.warnings[0].line, Some(2));
    }

    #[test]
    fn headerless_uses_indices() {
        let mut p = SourceProfile::csv_plain("X");
        p.csv_dialect.has_header = false;
        p.column_map = [("1".to_string(), RecordField::Title), ("0".to_string(), RecordField::Year)]
            .into_iter()
            .collect();
        let out = parse_csv("2014,First\n2015,Second\n", &p).unwrap();
        assert_eq!(out.records[1].year, Some(2015));
        assert_eq!(out.records[1].db_no, "2");
    }
}
