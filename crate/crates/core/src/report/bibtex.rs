use crate::model::{Record, Vehicle};

fn entry_type(v: Vehicle) -> &'static str {
    match v {
        Vehicle::Journal | Vehicle::Magazine => "article",
        Vehicle::Conference | Vehicle::Workshop => "inproceedings",
        Vehicle::Book => "book",
        Vehicle::Chapter => "incollection",
        Vehicle::Thesis => "phdthesis",
        Vehicle::Misc => "misc",
    }
}

fn venue_field(v: Vehicle) -> &'static str {
    match v {
        Vehicle::Journal | Vehicle::Magazine => "journal",
        Vehicle::Conference | Vehicle::Workshop | Vehicle::Chapter => "booktitle",
        Vehicle::Thesis => "school",
        Vehicle::Book | Vehicle::Misc => "howpublished",
    }
}

/// Brace-delimited value. Unmatched braces cannot be expressed in BibTeX and are dropped.
fn braced(s: &str) -> String {
    let chars: Vec<char> = s.chars().collect();
    let mut keep = vec![true; chars.len()];
    let mut open = Vec::new();
    for (i, c) in chars.iter().enumerate() {
        match c {
            '{' => open.push(i),
            '}' if open.pop().is_none() => keep[i] = false,
            _ => {}
        }
    }
    for i in open {
        keep[i] = false;
    }
    let body: String = chars.iter().zip(&keep).filter(|(_, k)| **k).map(|(c, _)| *c).collect();
    format!("{{{}}}", body.replace('\n', " "))
}

fn author_field(r: &Record) -> String {
    r.authors
        .iter()
        .map(|a| {
            if a.given.is_empty() {
                format!("{{{}}}", a.family)
            } else {
                format!("{}, {}", a.family, a.given)
            }
        })
        .collect::<Vec<_>>()
        .join(" and ")
}

/// Citation keys are the record ids, which are unique within a dataset.
pub fn records_to_bibtex(records: &[Record]) -> String {
    let mut out = String::new();
    for r in records {
        let mut fields: Vec<(&str, String)> = vec![("title", r.title.clone())];
        if !r.authors.is_empty() {
            fields.push(("author", author_field(r)));
        }
        if let Some(y) = r.year {
            fields.push(("year", y.to_string()));
        }
        if !r.venue.is_empty() {
            fields.push((venue_field(r.vehicle), r.venue.clone()));
        }
        if !r.keywords.is_empty() {
            fields.push(("keywords", r.keywords.join(", ")));
        }
        if !r.abstract_text.is_empty() {
            fields.push(("abstract", r.abstract_text.clone()));
        }
        if !r.publisher_db.is_empty() {
            fields.push(("note", format!("Source database: {}", r.publisher_db)));
        }
        out.push_str(&format!("@{}{{{},\n", entry_type(r.vehicle), r.id));
        for (i, (k, v)) in fields.iter().enumerate() {
            let value = if *k == "author" { format!("{{{v}}}") } else { braced(v) };
            let sep = if i + 1 == fields.len() { "" } else { "," };
            out.push_str(&format!("  {k} = {value}{sep}\n"));
        }
        out.push_str("}\n\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dedup::normalize_author;
    use crate::ingest::{parse_bibtex, SourceProfile};

    #[test]
    fn reparses() {
        let mut r = Record::new("ACM-0002", "Process improvement in small firms");
        r.authors = vec![normalize_author("Doe, Jane").0, normalize_author("Roe, R.").0];
        r.year = Some(2014);
        r.venue = "Proc. ICSSP".into();
        r.vehicle = Vehicle::Conference;
        r.keywords = vec!["spi".into(), "sme".into()];
        let mut odd = Record::new("ACM-0003", "Unbalanced } brace");
        odd.vehicle = Vehicle::Journal;
        let text = records_to_bibtex(&[r.clone(), odd]);
        let back = parse_bibtex(&text, &SourceProfile::bibtex("ACM")).unwrap();
        assert_eq!(back.records.len(), 2);
        let b = &back.records[0];
        assert_eq!(b.db_no, "ACM-0002");
        assert_eq!(b.title, r.title);
        assert_eq!(b.authors, r.authors);
        assert_eq!((b.year, b.vehicle, &b.venue, &b.keywords), (r.year, r.vehicle, &r.venue, &r.keywords));
        assert!(back.records[1].title.starts_with("Unbalanced") && !back.records[1].title.contains('}'));
    }
}
