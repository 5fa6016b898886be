use std::collections::{HashMap, HashSet};

use super::latex;
use super::profile::{parse_flag, split_keywords, RecordField, SourceProfile};
use super::{IngestOutput, IngestWarning, WarningKind};
use crate::dedup::normalize_author;
use crate::error::{Error, Result};
use crate::model::{AuthorName, Record, Vehicle};

/// A raw entry with its fields in source order.
#[derive(Debug, Clone, PartialEq)]
pub struct RawEntry {
    pub entry_type: String,
    pub key: String,
    pub fields: Vec<(String, String)>,
    pub line: usize,
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    macros: HashMap<String, String>,
    warnings: &'a mut Vec<IngestWarning>,
}

const MONTHS: [&str; 12] = [
    "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec",
];

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    fn truncated(&self, start_line: usize) -> Error {
        Error::Parse {
            line: start_line,
            message: "truncated entry: input ended before the entry was closed".into(),
        }
    }

    fn unexpected(&self, what: &str) -> Error {
        let found = match self.peek() {
            Some(c) => format!("{c:?}"),
            None => "end of input".into(),
        };
        Error::Parse {
            line: self.line,
            message: format!("expected {what}, found {found}"),
        }
    }

    fn ident(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || "_-:.+/'!?*".contains(c) {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    /// Reads a balanced `{...}` group after the opening brace; returns the inner text.
    fn braced(&mut self, start_line: usize) -> Result<String> {
        let mut depth = 1usize;
        let mut s = String::new();
        loop {
            let c = self.bump().ok_or_else(|| Error::Parse {
                line: start_line,
                message: "unbalanced braces: missing closing '}'".into(),
            })?;
            match c {
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(s);
                    }
                }
                _ => {}
            }
            s.push(c);
        }
    }

    fn quoted(&mut self, start_line: usize) -> Result<String> {
        let mut depth = 0usize;
        let mut s = String::new();
        loop {
            let c = self.bump().ok_or_else(|| Error::Parse {
                line: start_line,
                message: "unterminated quoted value".into(),
            })?;
            match c {
                '"' if depth == 0 => return Ok(s),
                '{' => depth += 1,
                '}' => {
                    if depth == 0 {
                        return Err(Error::Parse {
                            line: self.line,
                            message: "unbalanced braces: '}' without opening brace".into(),
                        });
                    }
                    depth -= 1;
                }
                _ => {}
            }
            s.push(c);
        }
    }

    /// value := piece ('#' piece)*
    fn value(&mut self, entry_line: usize, entry_key: &str) -> Result<String> {
        let mut out = String::new();
        loop {
            self.skip_ws();
            let line = self.line;
            match self.peek() {
                Some('{') => {
                    self.bump();
                    out.push_str(&self.braced(line)?);
                }
                Some('"') => {
                    self.bump();
                    out.push_str(&self.quoted(line)?);
                }
                Some(c) if c.is_ascii_digit() => {
                    while matches!(self.peek(), Some(d) if d.is_ascii_digit()) {
                        out.push(self.bump().unwrap_or_default());
                    }
                }
                Some(c) if c.is_alphabetic() => {
                    let name = self.ident();
                    let lower = name.to_lowercase();
                    if let Some(v) = self.macros.get(&lower) {
                        out.push_str(v);
                    } else if let Some(m) = MONTHS.iter().position(|m| *m == lower) {
                        out.push_str(&(m + 1).to_string());
                    } else {
                        self.warnings.push(IngestWarning::new(
                            WarningKind::UnknownMacro,
                            Some(line),
                            Some(entry_key.to_string()),
                            format!("undefined string macro {name:?} kept verbatim"),
                        ));
                        out.push_str(&name);
                    }
                }
                None => return Err(self.truncated(entry_line)),
                _ => return Err(self.unexpected("a field value")),
            }
            self.skip_ws();
            if self.peek() == Some('#') {
                self.bump();
            } else {
                return Ok(out);
            }
        }
    }
}

/// Splits the raw author field on top-level ` and `.
fn split_authors(raw: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut current = String::new();
    let words: Vec<&str> = raw.split_inclusive(char::is_whitespace).collect();
    for w in words {
        if depth == 0 && w.trim().eq_ignore_ascii_case("and") && !current.trim().is_empty() {
            out.push(current.trim().to_string());
            current.clear();
            continue;
        }
        for c in w.chars() {
            match c {
                '{' => depth += 1,
                '}' => depth -= 1,
                _ => {}
            }
        }
        current.push_str(w);
    }
    if !current.trim().is_empty() {
        out.push(current.trim().to_string());
    }
    out
}

/// Tokenizes BibTeX into raw entries. `@string` macros are expanded,
/// `@comment` and `@preamble` are skipped, text between entries is ignored.
pub fn parse_entries(input: &str, warnings: &mut Vec<IngestWarning>) -> Result<Vec<RawEntry>> {
    let mut lx = Lexer {
        chars: input.trim_start_matches('\u{feff}').chars().collect(),
        pos: 0,
        line: 1,
        macros: HashMap::new(),
        warnings,
    };
    let mut entries = Vec::new();
    loop {
        while let Some(c) = lx.peek() {
            if c == '@' {
                break;
            }
            lx.bump();
        }
        if lx.bump().is_none() {
            break;
        }
        let entry_line = lx.line;
        lx.skip_ws();
        let entry_type = lx.ident().to_lowercase();
        if entry_type.is_empty() {
            return Err(lx.unexpected("an entry type after '@'"));
        }
        lx.skip_ws();
        let close = match lx.bump() {
            Some('{') => '}',
            Some('(') => ')',
            Some(_) => {
                return Err(Error::Parse {
                    line: lx.line,
                    message: format!("expected '{{' or '(' after @{entry_type}"),
                })
            }
            None => return Err(lx.truncated(entry_line)),
        };
        match entry_type.as_str() {
            "comment" => {
                if close == '}' {
                    lx.braced(entry_line)?;
                } else {
                    while let Some(c) = lx.bump() {
                        if c == ')' {
                            break;
                        }
                    }
                }
                continue;
            }
            "preamble" => {
                lx.value(entry_line, "@preamble")?;
                lx.skip_ws();
                expect_close(&mut lx, close, entry_line)?;
                continue;
            }
            "string" => {
                lx.skip_ws();
                let name = lx.ident().to_lowercase();
                lx.skip_ws();
                if lx.bump() != Some('=') {
                    return Err(Error::Parse {
                        line: lx.line,
                        message: "expected '=' in @string".into(),
                    });
                }
                let v = lx.value(entry_line, "@string")?;
                lx.macros.insert(name, v);
                lx.skip_ws();
                expect_close(&mut lx, close, entry_line)?;
                continue;
            }
            _ => {}
        }

        lx.skip_ws();
        let mut key = String::new();
        while let Some(c) = lx.peek() {
            if c == ',' || c == close || c.is_whitespace() {
                break;
            }
            key.push(c);
            lx.bump();
        }
        lx.skip_ws();
        let mut fields = Vec::new();
        match lx.peek() {
            Some(',') => {
                lx.bump();
            }
            Some(c) if c == close => {}
            None => return Err(lx.truncated(entry_line)),
            _ => return Err(lx.unexpected("',' after the citation key")),
        }
        loop {
            lx.skip_ws();
            match lx.peek() {
                None => return Err(lx.truncated(entry_line)),
                Some(c) if c == close => {
                    lx.bump();
                    break;
                }
                _ => {}
            }
            let name = lx.ident().to_lowercase();
            if name.is_empty() {
                return Err(lx.unexpected("a field name"));
            }
            lx.skip_ws();
            match lx.bump() {
                Some('=') => {}
                None => return Err(lx.truncated(entry_line)),
                Some(_) => {
                    return Err(Error::Parse {
                        line: lx.line,
                        message: format!("expected '=' after field {name}"),
                    })
                }
            }
            let value = lx.value(entry_line, &key)?;
            fields.push((name, value));
            lx.skip_ws();
            match lx.peek() {
                Some(',') => {
                    lx.bump();
                }
                Some(c) if c == close => {}
                None => return Err(lx.truncated(entry_line)),
                _ => return Err(lx.unexpected("',' or the end of the entry")),
            }
        }
        entries.push(RawEntry {
            entry_type,
            key,
            fields,
            line: entry_line,
        });
    }
    Ok(entries)
}

fn expect_close(lx: &mut Lexer<'_>, close: char, entry_line: usize) -> Result<()> {
    match lx.bump() {
        Some(c) if c == close => Ok(()),
        None => Err(lx.truncated(entry_line)),
        Some(_) => Err(Error::Parse {
            line: lx.line,
            message: format!("expected '{close}'"),
        }),
    }
}

fn entry_vehicle(entry_type: &str) -> Option<Vehicle> {
    Some(match entry_type {
        "article" => Vehicle::Journal,
        "inproceedings" | "conference" | "proceedings" => Vehicle::Conference,
        "incollection" | "inbook" => Vehicle::Chapter,
        "book" | "booklet" => Vehicle::Book,
        "phdthesis" | "mastersthesis" | "thesis" => Vehicle::Thesis,
        "misc" | "techreport" | "manual" | "unpublished" | "online" => Vehicle::Misc,
        _ => return None,
    })
}

pub(crate) fn parse_year(value: &str) -> Option<i32> {
    let digits: String = value
        .trim()
        .chars()
        .skip_while(|c| !c.is_ascii_digit())
        .take_while(|c| c.is_ascii_digit())
        .collect();
    digits.parse().ok()
}

/// One record per entry, routed through the profile's field map.
pub fn parse_bibtex(input: &str, profile: &SourceProfile) -> Result<IngestOutput> {
    profile.validate()?;
    let mut warnings = Vec::new();
    let entries = parse_entries(input, &mut warnings)?;
    let prefix = profile.prefix();
    let mut seen_keys = HashSet::new();
    let mut records = Vec::new();

    for entry in &entries {
        let key_lower = entry.key.to_lowercase();
        if !seen_keys.insert(key_lower) {
            warnings.push(IngestWarning::new(
                WarningKind::DuplicateKey,
                Some(entry.line),
                Some(entry.key.clone()),
                format!("citation key {:?} occurs more than once", entry.key),
            ));
        }
        let vehicle = match entry_vehicle(&entry.entry_type) {
            Some(v) => v,
            None => {
                warnings.push(IngestWarning::new(
                    WarningKind::UnknownEntryType,
                    Some(entry.line),
                    Some(entry.key.clone()),
                    format!("unknown entry type @{}; vehicle set to misc", entry.entry_type),
                ));
                Vehicle::Misc
            }
        };
        let mut rec = Record::new(format!("{prefix}-{:04}", records.len() + 1), "");
        rec.db_no = entry.key.clone();
        rec.publisher_db = profile.database_name.clone();
        rec.vehicle = profile.default_vehicle.unwrap_or(vehicle);
        let mut extra: Vec<String> = Vec::new();

        for (name, raw_value) in &entry.fields {
            let decode = |s: &str, warnings: &mut Vec<IngestWarning>| {
                let (text, unknown) = latex::decode(s);
                for m in unknown {
                    warnings.push(IngestWarning::new(
                        WarningKind::UnknownMacro,
                        Some(entry.line),
                        Some(entry.key.clone()),
                        format!("unknown LaTeX macro \\{m} in field {name} kept verbatim"),
                    ));
                }
                text
            };
            let Some(target) = profile.column_map.get(name) else {
                let v = decode(raw_value, &mut warnings);
                if !v.is_empty() {
                    extra.push(format!("{name}: {v}"));
                }
                continue;
            };
            match target {
                RecordField::Authors => {
                    for part in split_authors(raw_value) {
                        let corporate = part.starts_with('{') && part.ends_with('}');
                        let text = decode(&part, &mut warnings);
                        if text.is_empty() {
                            continue;
                        }
                        if corporate {
                            rec.authors.push(AuthorName {
                                given: String::new(),
                                family: text.clone(),
                                raw: text,
                            });
                            continue;
                        }
                        let (name_parts, warn) = normalize_author(&text);
                        if let Some(w) = warn {
                            warnings.push(IngestWarning::new(
                                WarningKind::UnparseableAuthor,
                                Some(entry.line),
                                Some(entry.key.clone()),
                                w,
                            ));
                        }
                        rec.authors.push(name_parts);
                    }
                }
                RecordField::Keywords => rec.keywords.extend(split_keywords(&decode(raw_value, &mut warnings))),
                RecordField::Year => {
                    let v = decode(raw_value, &mut warnings);
                    rec.year = parse_year(&v);
                    if rec.year.is_none() && !v.is_empty() {
                        warnings.push(IngestWarning::new(
                            WarningKind::InvalidYear,
                            Some(entry.line),
                            Some(entry.key.clone()),
                            format!("year {v:?} is not numeric"),
                        ));
                    }
                }
                other => {
                    let v = decode(raw_value, &mut warnings);
                    assign_text(&mut rec, other, v, profile);
                }
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
        if rec.title.trim().is_empty() {
            warnings.push(IngestWarning::new(
                WarningKind::RejectedEntry,
                Some(entry.line),
                Some(entry.key.clone()),
                "entry has no title and was not imported".to_string(),
            ));
            continue;
        }
        rec.refresh_completion_flags();
        records.push(rec);
    }
    Ok(IngestOutput {
        records,
        warnings,
        input_units: entries.len(),
    })
}

/// Routes a decoded scalar value into the record.
pub(crate) fn assign_text(rec: &mut Record, field: &RecordField, v: String, profile: &SourceProfile) {
    match field {
        RecordField::DbNo => rec.db_no = v,
        RecordField::Title => rec.title = v,
        RecordField::Abstract => rec.abstract_text = v,
        RecordField::PublisherDb => {
            if !v.is_empty() {
                rec.publisher_db = v
            }
        }
        RecordField::Venue => {
            if rec.venue.is_empty() {
                rec.venue = v
            }
        }
        RecordField::Vehicle => {
            if let Some(veh) = profile.map_vehicle(&v) {
                rec.vehicle = veh;
            }
        }
        RecordField::FullTextAvailable => rec.full_text_available = parse_flag(&v),
        RecordField::Comments => {
            if !v.is_empty() {
                rec.comments = if rec.comments.is_empty() {
                    v
                } else {
                    format!("{}; {v}", rec.comments)
                };
            }
        }
        RecordField::Metadata(class) => {
            if !v.is_empty() {
                rec.metadata.insert(class.clone(), v);
            }
        }
        RecordField::Authors | RecordField::Keywords | RecordField::Year => {
            unreachable!("list fields are handled by the caller")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CompletionFlag;

    fn parse(s: &str) -> Result<IngestOutput> {
        parse_bibtex(s, &SourceProfile::bibtex("IEEE"))
    }

    #[test]
    fn empty_input() {
        let out = parse("").unwrap();
        assert!(out.records.is_empty() && out.warnings.is_empty());
    }

    #[test]
    fn single_article() {
        let out = parse("@article{k, title={T}, author={Abrams, J. J.}, year={2015}}").unwrap();
        assert_eq!(out.records.len(), 1);
        assert!(out.warnings.is_empty());
        let r = &out.records[0];
        assert_eq!(r.title, "T");
        assert_eq!(r.vehicle, Vehicle::Journal);
        assert_eq!(r.authors[0].raw, "Abrams, J. J.");
        assert_eq!(r.authors[0].family, "Abrams");
        assert_eq!(r.year, Some(2015));
        assert_eq!(r.db_no, "k");
        assert_eq!(r.publisher_db, "IEEE");
        assert!(r.has_flag(CompletionFlag::MissingAbstract));
        assert!(r.has_flag(CompletionFlag::MissingKeywords));
    }

    #[test]
    fn duplicate_keys_warn() {
        let out = parse("@article{k, title={A}}\n@inproceedings{k, title={B}}").unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.warnings.len(), 1);
        assert_eq!(out.warnings[0].kind, WarningKind::DuplicateKey);
        assert_eq!(out.warnings[0].line, Some(2));
        assert_eq!(out.records[1].vehicle, Vehicle::Conference);
    }

    #[test]
    fn unbalanced_braces_report_line() {
        let err = parse("@article{a, title={ok}}\n\n@article{b,\n title={never closed}\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let err = parse("@article{b, title={open {inner}}\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn strings_concatenation_and_quotes() {
        let src = r#"
            @string{tse = "IEEE Trans. Softw. Eng."}
            @comment{ ignored {nested} }
            Free text between entries is ignored.
            @article{x,
              title = "Quoted {Title}",
              journal = tse # ", special issue",
              month = mar,
              year = 2016,
              keywords = {spi; agile},
              doi = {10.1/abc},
            }"#;
        let out = parse(src).unwrap();
        let r = &out.records[0];
        assert_eq!(r.title, "Quoted Title");
        assert_eq!(r.venue, "IEEE Trans. Softw. Eng., special issue");
        assert_eq!(r.year, Some(2016));
        assert_eq!(r.keywords, vec!["spi", "agile"]);
        assert!(r.comments.contains("doi: 10.1/abc"));
        assert!(r.comments.contains("month: 3"));
    }

    #[test]
    fn authors_split_on_top_level_and() {
        let out = parse(r#"@book{b, title={T}, author={J. J. Abrams and {Barnes and Noble} and M{\"u}ller, K.}}"#).unwrap();
        let names: Vec<String> = out.records[0].authors.iter().map(|a| a.canonical()).collect();
        assert_eq!(names, vec!["J. J. Abrams", "Barnes and Noble", "K. Müller"]);
    }

    #[test]
    fn unknown_types_and_macros_warn() {
        let out = parse(r"@patent{p, title={An \emph{idea}}}").unwrap();
        assert_eq!(out.records[0].vehicle, Vehicle::Misc);
        let kinds: Vec<_> = out.warnings.iter().map(|w| w.kind).collect();
        assert!(kinds.contains(&WarningKind::UnknownEntryType));
        assert!(kinds.contains(&WarningKind::UnknownMacro));
        assert_eq!(out.records[0].title, r"An \emph{idea}");
    }

    #[test]
    fn untitled_entries_are_rejected_and_counted() {
        let out = parse("@misc{a, note={x}}\n@misc{b, title={B}}").unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.input_units, 2);
        assert_eq!(out.rejected(), 1);
    }
}
