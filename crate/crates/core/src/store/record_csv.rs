//! Dataset rows in the minimal-data-structure column order.
//!
//! Columns: No., DB-No., Title, Authors, Keywords, Abstract, Year,
//! Publisher/Database, Source/Venue, one column per publication vehicle,
//! General Comments, one column per metadata class, then Full Text,
//! Completion Flags, Exclusion Criteria, ID and Author Names. The last holds
//! structured author names only when they cannot be recovered from Authors.

use std::collections::{BTreeMap, BTreeSet};

use crate::dedup::normalize_author;
use crate::error::{Error, Result};
use crate::model::{AuthorName, CompletionFlag, MetadataClass, Record, RecordId, Vehicle};

const LEAD: [&str; 9] = [
    "No.",
    "DB-No.",
    "Title",
    "Authors",
    "Keywords",
    "Abstract",
    "Year",
    "Publisher/Database",
    "Source/Venue",
];
const COMMENTS: &str = "General Comments";
const TRAIL: [&str; 5] = ["Full Text", "Completion Flags", "Exclusion Criteria", "ID", "Author Names"];
const LIST_SEP: &str = "; ";

/// Metadata columns: declared classes first, then undeclared keys in use.
fn metadata_columns<'a>(records: impl IntoIterator<Item = &'a Record>, classes: &[MetadataClass]) -> Vec<String> {
    let mut cols: Vec<String> = classes.iter().map(|c| c.name.clone()).collect();
    let extra: BTreeSet<&String> = records
        .into_iter()
        .flat_map(|r| r.metadata.keys())
        .filter(|k| !cols.contains(k))
        .collect();
    cols.extend(extra.into_iter().cloned());
    cols
}

pub fn header(metadata: &[String]) -> Vec<String> {
    let mut h: Vec<String> = LEAD.iter().map(|s| s.to_string()).collect();
    h.extend(Vehicle::ALL.iter().map(|v| v.column_name().to_string()));
    h.push(COMMENTS.to_string());
    h.extend(metadata.iter().cloned());
    h.extend(TRAIL.iter().map(|s| s.to_string()));
    h
}

fn authors_recoverable(authors: &[AuthorName]) -> bool {
    authors
        .iter()
        .all(|a| !a.raw.contains(';') && a.raw.trim() == a.raw && !a.raw.is_empty() && normalize_author(&a.raw).0 == *a)
}

fn row(r: &Record, metadata: &[String]) -> Result<Vec<String>> {
    let mut cells = vec![
        r.no.to_string(),
        r.db_no.clone(),
        r.title.clone(),
        r.authors.iter().map(|a| a.raw.as_str()).collect::<Vec<_>>().join(LIST_SEP),
        r.keywords.join(LIST_SEP),
        r.abstract_text.clone(),
        r.year.map(|y| y.to_string()).unwrap_or_default(),
        r.publisher_db.clone(),
        r.venue.clone(),
    ];
    cells.extend(Vehicle::ALL.iter().map(|v| if *v == r.vehicle { "x".into() } else { String::new() }));
    cells.push(r.comments.clone());
    cells.extend(metadata.iter().map(|m| r.metadata.get(m).cloned().unwrap_or_default()));
    cells.push(if r.full_text_available { "yes".into() } else { String::new() });
    cells.push(r.completion_flags.iter().map(|f| f.as_str()).collect::<Vec<_>>().join(LIST_SEP));
    cells.push(r.exclusion_criteria.join(LIST_SEP));
    cells.push(r.id.to_string());
    cells.push(if authors_recoverable(&r.authors) {
        String::new()
    } else {
        serde_json::to_string(&r.authors)?
    });
    Ok(cells)
}

pub fn records_to_csv(records: &[Record], classes: &[MetadataClass]) -> Result<String> {
    let metadata = metadata_columns(records, classes);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header(&metadata))?;
    for r in records {
        w.write_record(row(r, &metadata)?)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn split_list(s: &str) -> Vec<String> {
    if s.is_empty() {
        Vec::new()
    } else {
        s.split(LIST_SEP).map(str::to_string).collect()
    }
}

pub fn records_from_csv(text: &str) -> Result<Vec<Record>> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let head: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let idx: BTreeMap<&str, usize> = head.iter().enumerate().map(|(i, h)| (h.as_str(), i)).collect();
    for required in ["Title", "ID"] {
        if !idx.contains_key(required) {
            return Err(Error::Parse {
                line: 1,
                message: format!("dataset CSV lacks the {required} column"),
            });
        }
    }
    let fixed: BTreeSet<&str> = LEAD
        .iter()
        .chain(TRAIL.iter())
        .copied()
        .chain(std::iter::once(COMMENTS))
        .chain(Vehicle::ALL.iter().map(|v| v.column_name()))
        .collect();
    let metadata_cols: Vec<(usize, &String)> = head.iter().enumerate().filter(|(_, h)| !fixed.contains(h.as_str())).collect();

    let mut out = Vec::new();
    for (n, row) in rdr.records().enumerate() {
        let row = row?;
        let line = n + 2;
        let get = |name: &str| idx.get(name).and_then(|i| row.get(*i)).unwrap_or("");
        let bad = |what: &str, v: &str| Error::Parse {
            line,
            message: format!("{what} {v:?} is not valid"),
        };
        let mut r = Record::new(get("ID"), get("Title"));
        let no = get("No.");
        r.no = if no.is_empty() { 0 } else { no.parse().map_err(|_| bad("No.", no))? };
        r.db_no = get("DB-No.").to_string();
        let details = get("Author Names");
        r.authors = if details.is_empty() {
            split_list(get("Authors")).iter().map(|a| normalize_author(a).0).collect()
        } else {
            serde_json::from_str(details).map_err(|_| bad("Author Names", details))?
        };
        r.keywords = split_list(get("Keywords"));
        r.abstract_text = get("Abstract").to_string();
        let year = get("Year");
        r.year = if year.is_empty() { None } else { Some(year.parse().map_err(|_| bad("Year", year))?) };
        r.publisher_db = get("Publisher/Database").to_string();
        r.venue = get("Source/Venue").to_string();
        r.vehicle = Vehicle::ALL
            .iter()
            .copied()
            .find(|v| !get(v.column_name()).trim().is_empty())
            .unwrap_or_default();
        r.comments = get(COMMENTS).to_string();
        for (i, name) in &metadata_cols {
            let v = row.get(*i).unwrap_or("");
            if !v.is_empty() {
                r.metadata.insert((*name).clone(), v.to_string());
            }
        }
        r.full_text_available = !get("Full Text").trim().is_empty();
        r.completion_flags.clear();
        for f in split_list(get("Completion Flags")) {
            r.completion_flags.insert(CompletionFlag::parse(&f).ok_or_else(|| bad("completion flag", &f))?);
        }
        r.exclusion_criteria = split_list(get("Exclusion Criteria"));
        if r.id.as_str().is_empty() {
            r.id = RecordId::new(format!("ROW-{:04}", n + 1));
        }
        out.push(r);
    }
    Ok(out)
}
