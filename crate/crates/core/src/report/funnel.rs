//! The search-and-selection funnel, reconstructed from import and merge logs.


use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::clock;
use crate::error::{Error, Result};
use crate::model::{MergeEvent, MergeOperation, MergeStage};
use crate::project::{ImportEvent, Project, Query, INTEGRATED};
use crate::selection::Baseline;

pub const STEP_SEARCH: &str = "Step 1: Search";
pub const STEP_DUPLICATES: &str = "Step 2: Removing Duplicates";
pub const STEP_FILTERING: &str = "Step 3: In-depth Filtering";
pub const STEP_VOTING: &str = "Step 4: Voting";

pub const ROW_PER_DATABASE: &str = "Duplicates per database";
pub const ROW_ACROSS: &str = "Duplicates across all databases";
pub const ROW_UNFILTERED: &str = "Unfiltered";
pub const ROW_RESULT: &str = "Result set (search process)";
pub const ROW_FINAL: &str = "Final result set";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunnelRow {
    pub label: String,
    /// One cell per database; `None` where the row does not apply.
    pub cells: Vec<Option<u64>>,
    pub total: Option<u64>,
}

impl FunnelRow {
    fn new(label: impl Into<String>, cells: Vec<Option<u64>>) -> Self {
        let total = if !cells.is_empty() && cells.iter().all(Option::is_none) {
            None
        } else {
            Some(cells.iter().flatten().sum())
        };
        FunnelRow {
            label: label.into(),
            cells,
            total,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunnelStep {
    pub title: String,
    pub rows: Vec<FunnelRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunnelReport {
    pub databases: Vec<String>,
    pub steps: Vec<FunnelStep>,
    /// Earliest and latest import timestamps.
    pub searched: Option<(DateTime<Utc>, DateTime<Utc>)>,
    pub finalized: Option<DateTime<Utc>>,
}

/// Everything the funnel is computed from.
#[derive(Debug, Clone, Default)]
pub struct FunnelLog<'a> {
    pub databases: Vec<String>,
    pub queries: Vec<Query>,
    pub imports: &'a [ImportEvent],
    pub merges: Vec<MergeEvent>,
    pub baseline: Option<&'a Baseline>,
}

fn filter_label(names: &[String]) -> String {
    match names {
        [] => String::new(),
        [one] => format!("Applying filter {one}"),
        [init @ .., last] => format!("Applying filters {} and {last}", init.join(", ")),
    }
}

fn removed_by(events: &[&MergeEvent], db: &str) -> u64 {
    events.iter().map(|e| e.removed_by_database.get(db).copied().unwrap_or(0) as u64).sum()
}

fn subtract(dbs: &[String], before: &[u64], events: &[&MergeEvent], step: &str) -> Result<Vec<u64>> {
    dbs.iter()
        .zip(before)
        .map(|(d, n)| {
            n.checked_sub(removed_by(events, d)).ok_or_else(|| {
                Error::integrity(format!("the {step} log removes more {d} records than were present"), vec![d.clone()])
            })
        })
        .collect()
}

/// Checks that every logged step balances: inputs minus removals equal the output.
fn check_conservation(merges: &[MergeEvent]) -> Result<()> {
    for e in merges {
        let input: usize = e.inputs.iter().map(|i| i.size).sum();
        if input != e.output_size + e.removed_total() {
            return Err(Error::integrity(
                format!(
                    "{} {:?} step does not balance: {input} in, {} out, {} removed",
                    e.stage.as_str(),
                    e.operation,
                    e.output_size,
                    e.removed_total()
                ),
                e.inputs.iter().map(|i| i.name.clone()).collect(),
            ));
        }
    }
    Ok(())
}

pub fn build_funnel_from(log: &FunnelLog) -> Result<FunnelReport> {
    check_conservation(&log.merges)?;
    let dbs = &log.databases;
    let of = |stage: MergeStage, op: MergeOperation| -> Vec<&MergeEvent> {
        log.merges.iter().filter(|e| e.stage == stage && e.operation == op).collect()
    };
    let per_db_integrations = of(MergeStage::PerDatabase, MergeOperation::Integrate);
    let per_db_dedups = of(MergeStage::PerDatabase, MergeOperation::Dedup);
    let cross_integrations = of(MergeStage::CrossDatabase, MergeOperation::Integrate);
    let cross_dedups = of(MergeStage::CrossDatabase, MergeOperation::Dedup);
    let filters = of(MergeStage::CrossDatabase, MergeOperation::Filter);

    if !cross_integrations.is_empty() || !cross_dedups.is_empty() || !filters.is_empty() {
        let merged: Vec<&String> =
            per_db_integrations.iter().flat_map(|e| e.output_by_database.keys()).collect();
        let missing: Vec<String> = dbs
            .iter()
            .filter(|d| log.imports.iter().any(|i| &i.database == *d) && !merged.contains(d))
            .cloned()
            .collect();
        if !missing.is_empty() {
            return Err(Error::precondition_with("the funnel lacks the per_database merge log for", missing));
        }
    }
    if (!cross_dedups.is_empty() || !filters.is_empty()) && cross_integrations.is_empty() {
        return Err(Error::precondition("the funnel lacks the cross_database merge log"));
    }
    if log.baseline.is_some() && cross_integrations.is_empty() {
        return Err(Error::precondition("the funnel lacks the cross_database merge log needed by the voting step"));
    }

    let raw: Vec<u64> = dbs
        .iter()
        .map(|d| log.imports.iter().filter(|i| &i.database == d).map(|i| i.records as u64).sum())
        .collect();
    for e in &per_db_integrations {
        for (db, n) in &e.output_by_database {
            if let Some(i) = dbs.iter().position(|d| d == db) {
                if *n as u64 != raw[i] {
                    return Err(Error::integrity(
                        format!("per_database merge of {db} holds {n} records but {} were imported", raw[i]),
                        vec![db.clone()],
                    ));
                }
            }
        }
    }

    let mut search_rows: Vec<FunnelRow> = log
        .queries
        .iter()
        .map(|q| {
            let cells = dbs
                .iter()
                .map(|d| {
                    let runs: Vec<&ImportEvent> =
                        log.imports.iter().filter(|i| &i.database == d && i.query == q.label).collect();
                    if runs.is_empty() {
                        None
                    } else {
                        Some(runs.iter().map(|i| i.records as u64).sum())
                    }
                })
                .collect();
            FunnelRow::new(if q.text.is_empty() { q.label.clone() } else { q.text.clone() }, cells)
        })
        .collect();
    if search_rows.is_empty() {
        search_rows.push(FunnelRow::new("No searches imported", vec![Some(0); dbs.len()]));
    }

    let per_db = subtract(dbs, &raw, &per_db_dedups, "per_database dedup")?;
    let across = subtract(dbs, &per_db, &cross_dedups, "cross_database dedup")?;
    let result = subtract(dbs, &across, &filters, "filter")?;

    let some = |v: &[u64]| v.iter().map(|n| Some(*n)).collect::<Vec<_>>();
    let mut filtering = Vec::new();
    if !filters.is_empty() {
        let filtered: Vec<bool> = dbs
            .iter()
            .map(|d| filters.iter().any(|f| f.filtered_databases.iter().any(|x| x.eq_ignore_ascii_case(d))))
            .collect();
        let names: Vec<String> =
            filters.iter().enumerate().map(|(i, f)| f.label.clone().unwrap_or_else(|| format!("F{}", i + 1))).collect();
        filtering.push(FunnelRow::new(
            filter_label(&names),
            filtered.iter().zip(&result).map(|(f, n)| f.then_some(*n)).collect(),
        ));
        filtering.push(FunnelRow::new(
            ROW_UNFILTERED,
            filtered.iter().zip(&result).map(|(f, n)| (!f).then_some(*n)).collect(),
        ));
    }
    filtering.push(FunnelRow::new(ROW_RESULT, some(&result)));

    let final_cells: Vec<Option<u64>> = match log.baseline {
        Some(b) => dbs.iter().map(|d| Some(b.relevant_by_database.get(d).copied().unwrap_or(0) as u64)).collect(),
        None if dbs.is_empty() => Vec::new(),
        None => vec![None; dbs.len()],
    };

    let searched = log
        .imports
        .iter()
        .map(|i| i.timestamp)
        .min()
        .zip(log.imports.iter().map(|i| i.timestamp).max());
    Ok(FunnelReport {
        databases: dbs.clone(),
        steps: vec![
            FunnelStep {
                title: STEP_SEARCH.into(),
                rows: search_rows,
            },
            FunnelStep {
                title: STEP_DUPLICATES.into(),
                rows: vec![FunnelRow::new(ROW_PER_DATABASE, some(&per_db)), FunnelRow::new(ROW_ACROSS, some(&across))],
            },
            FunnelStep {
                title: STEP_FILTERING.into(),
                rows: filtering,
            },
            FunnelStep {
                title: STEP_VOTING.into(),
                rows: vec![FunnelRow::new(ROW_FINAL, final_cells)],
            },
        ],
        searched,
        finalized: log.baseline.map(|b| b.timestamp),
    })
}

/// Merge history of the furthest-advanced slots.
fn merge_history(p: &Project) -> Vec<MergeEvent> {
    if let Some(d) = p.dataset(INTEGRATED) {
        return d.merge_log().to_vec();
    }
    p.manifest
        .sources
        .iter()
        .filter_map(|db| p.dataset(&crate::project::db_slot(&crate::project::slot_component(db))))
        .flat_map(|d| d.merge_log().iter().cloned())
        .collect()
}

pub fn build_funnel(p: &Project) -> Result<FunnelReport> {
    build_funnel_from(&FunnelLog {
        databases: p.manifest.sources.clone(),
        queries: p.manifest.queries.clone(),
        imports: &p.manifest.imports,
        merges: merge_history(p),
        baseline: p.manifest.baseline.as_ref(),
    })
}

/// Digits grouped by thousands with commas.
pub fn thousands(n: u64) -> String {
    let s = n.to_string();
    let mut out = String::new();
    for (i, c) in s.chars().enumerate() {
        if i > 0 && (s.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

fn cell_text(c: Option<u64>) -> String {
    c.map(thousands).unwrap_or_else(|| "--".into())
}

impl FunnelReport {
    pub fn row(&self, label: &str) -> Option<&FunnelRow> {
        self.steps.iter().flat_map(|s| &s.rows).find(|r| r.label == label)
    }

    /// Plain-text table in the step layout of a selection report.
    pub fn render_text(&self) -> String {
        let mut header = vec!["Step".to_string()];
        header.extend(self.databases.iter().cloned());
        header.push("Total".into());
        let body: Vec<Vec<String>> = self
            .steps
            .iter()
            .flat_map(|s| &s.rows)
            .map(|r| {
                let mut v = vec![r.label.clone()];
                v.extend(r.cells.iter().map(|c| cell_text(*c)));
                v.push(cell_text(r.total));
                v
            })
            .collect();
        let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
        for row in &body {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        for s in &self.steps {
            widths[0] = widths[0].max(s.title.chars().count());
        }
        let line = |cells: &[String]| -> String {
            let mut s = String::new();
            for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
                if i == 0 {
                    s.push_str(&format!("{c:<w$}"));
                } else {
                    s.push_str(&format!("  {c:>w$}"));
                }
            }
            s.trim_end().to_string() + "\n"
        };
        let rule = "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)) + "\n";
        let mut out = line(&header);
        out.push_str(&rule);
        let mut rows = body.iter();
        for s in &self.steps {
            out.push_str(&s.title);
            out.push('\n');
            for _ in &s.rows {
                out.push_str(&line(rows.next().expect("one body line per row")));
            }
            out.push_str(&rule);
        }
        if let Some((first, last)) = &self.searched {
            out.push_str(&format!("Searches run: {} to {}\n", clock::format(first), clock::format(last)));
        }
        if let Some(t) = &self.finalized {
            out.push_str(&format!("Selection finalized: {}\n", clock::format(t)));
        }
        out
    }

    /// One line per row: step, row, database counts, Total. Empty cells are not applicable.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["step".to_string(), "row".to_string()];
        header.extend(self.databases.iter().cloned());
        header.push("Total".into());
        w.write_record(&header).expect("in-memory write");
        for s in &self.steps {
            for r in &s.rows {
                let mut rec = vec![s.title.clone(), r.label.clone()];
                rec.extend(r.cells.iter().map(|c| c.map(|n| n.to_string()).unwrap_or_default()));
                rec.push(r.total.map(|n| n.to_string()).unwrap_or_default());
                w.write_record(&rec).expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("funnel serializes") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grouping() {
        assert_eq!(thousands(0), "0");
        assert_eq!(thousands(635), "635");
        assert_eq!(thousands(3185), "3,185");
        assert_eq!(thousands(1234567), "1,234,567");
    }

    #[test]
    fn filter_labels() {
        assert_eq!(filter_label(&["F1".into()]), "Applying filter F1");
        assert_eq!(filter_label(&["F1".into(), "F2".into()]), "Applying filters F1 and F2");
        assert_eq!(filter_label(&["A".into(), "B".into(), "C".into()]), "Applying filters A, B and C");
    }

    #[test]
    fn empty_project_has_zero_totals() {
        let f = build_funnel_from(&FunnelLog::default()).unwrap();
        assert_eq!(f.steps.len(), 4);
        for r in f.steps.iter().flat_map(|s| &s.rows) {
            assert_eq!(r.total, Some(0), "{}", r.label);
        }
        let text = f.render_text();
        assert!(text.starts_with("Step"));
        assert!(text.lines().all(|l| l == l.trim_end()));
    }
}
