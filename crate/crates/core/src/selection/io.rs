//! CSV exchange formats for votes, assignments and decisions.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::rating::Relevance;
use super::workflow::{Decision, SelectionState, Vote};
use crate::clock;
use crate::error::{Error, Result};
use crate::model::RecordId;

#[derive(Debug, Serialize, Deserialize)]
struct VoteRow {
    reviewer: String,
    paper: String,
    round: u32,
    value: i64,
    #[serde(default)]
    timestamp: String,
}

fn parse_ts(s: &str, line: usize) -> Result<DateTime<Utc>> {
    if s.trim().is_empty() {
        return Ok(clock::now());
    }
    DateTime::parse_from_rfc3339(s.trim())
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| Error::Parse {
            line,
            message: format!("timestamp {s:?}: {e}"),
        })
}

fn rows<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<(usize, T)>> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for r in rdr.deserialize() {
        let row: T = r.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        out.push((out.len() + 2, row));
    }
    Ok(out)
}

/// Columns: reviewer,paper,round,value,timestamp. An empty timestamp means now.
pub fn parse_votes_csv(text: &str) -> Result<Vec<Vote>> {
    rows::<VoteRow>(text)?
        .into_iter()
        .map(|(line, r)| {
            Ok(Vote {
                reviewer: r.reviewer,
                paper: RecordId::from(r.paper.as_str()),
                round: r.round,
                value: r.value,
                timestamp: parse_ts(&r.timestamp, line)?,
            })
        })
        .collect()
}

fn write_rows<T: Serialize>(header: &[&str], items: impl IntoIterator<Item = T>) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for it in items {
        w.serialize(it).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

pub fn votes_to_csv<'a>(votes: impl IntoIterator<Item = &'a Vote>) -> String {
    write_rows(
        &["reviewer", "paper", "round", "value", "timestamp"],
        votes.into_iter().map(|v| VoteRow {
            reviewer: v.reviewer.clone(),
            paper: v.paper.to_string(),
            round: v.round,
            value: v.value,
            timestamp: clock::format(&v.timestamp),
        }),
    )
}

/// Columns: reviewer,round,paper, one row per work item.
pub fn assignment_to_csv(state: &SelectionState) -> String {
    let mut items = Vec::new();
    for spec in state.setup().rounds() {
        for r in &spec.reviewers {
            for p in state.worklist(r, spec.round) {
                items.push((r.clone(), spec.round, p.to_string()));
            }
        }
    }
    write_rows(&["reviewer", "round", "paper"], items)
}

/// Columns: paper,state,decided_by,rating,criteria (criteria joined with `;`).
pub fn decisions_to_csv(decisions: &[Decision]) -> String {
    write_rows(
        &["paper", "state", "decided_by", "rating", "criteria"],
        decisions.iter().map(|d| {
            (
                d.paper.to_string(),
                d.state.as_str(),
                d.decided_by.as_str(),
                d.rating.map(format_rating).unwrap_or_default(),
                d.criteria_applied.join(";"),
            )
        }),
    )
}

pub fn format_rating(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

/// A decision to record, as read from a decisions file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionInput {
    pub paper: RecordId,
    pub state: Relevance,
    pub criteria: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct DecisionRow {
    paper: String,
    state: String,
    #[serde(default)]
    criteria: String,
}

/// Columns: paper,state,criteria; extra columns are ignored.
pub fn parse_decisions_csv(text: &str) -> Result<Vec<DecisionInput>> {
    rows::<DecisionRow>(text)?
        .into_iter()
        .map(|(line, r)| {
            let state = Relevance::parse(&r.state).ok_or_else(|| Error::Parse {
                line,
                message: format!("unknown decision state {:?}", r.state),
            })?;
            Ok(DecisionInput {
                paper: RecordId::from(r.paper.as_str()),
                state,
                criteria: r
                    .criteria
                    .split([';', ','])
                    .map(str::trim)
                    .filter(|c| !c.is_empty())
                    .map(str::to_string)
                    .collect(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    #[test]
    fn votes_round_trip() {
        let v = Vote {
            reviewer: "a".into(),
            paper: "IEEE-0001".into(),
            round: 1,
            value: 1,
            timestamp: Utc.with_ymd_and_hms(2016, 2, 1, 9, 30, 0).unwrap(),
        };
        let csv = votes_to_csv([&v]);
        assert_eq!(csv, "reviewer,paper,round,value,timestamp\na,IEEE-0001,1,1,2016-02-01T09:30:00Z\n");
        assert_eq!(parse_votes_csv(&csv).unwrap(), vec![v]);
    }

    #[test]
    fn decisions_parsing() {
        let d = parse_decisions_csv("paper,state,criteria\nA-1,irrelevant,E3;E5\nA-2,relevant,\n").unwrap();
        assert_eq!(d[0].criteria, vec!["E3", "E5"]);
        assert_eq!(d[1].state, Relevance::Relevant);
        assert!(parse_decisions_csv("paper,state\nA,maybe\n").is_err());
    }

    #[test]
    fn rating_format() {
        assert_eq!(format_rating(2.0), "2");
        assert_eq!(format_rating(4.388_888), "4.3889");
        assert_eq!(format_rating(0.5), "0.5");
    }
}
