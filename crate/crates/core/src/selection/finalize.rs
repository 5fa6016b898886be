use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::rating::Relevance;
use super::workflow::{Decision, SelectionState};
use crate::error::{Error, Result};
use crate::model::{count_by_database, Dataset, RecordId};

/// What finalize fixed: the revisions it read and the resulting counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Baseline {
    pub integrated_revision: u64,
    pub selection_revision: u64,
    pub relevant: usize,
    pub irrelevant: usize,
    pub relevant_by_database: BTreeMap<String, usize>,
    pub timestamp: DateTime<Utc>,
}

/// Keeps the relevant records of `integrated`, in order.
pub fn finalize(
    state: &SelectionState,
    integrated: &Dataset,
    timestamp: DateTime<Utc>,
) -> Result<(Dataset, Vec<Decision>, Baseline)> {
    let undecided = state.undecided();
    if !undecided.is_empty() {
        return Err(Error::precondition_with(
            format!("{} paper(s) are still undecided", undecided.len()),
            undecided.iter().map(|p| p.to_string()).collect(),
        ));
    }
    let papers: BTreeSet<&RecordId> = state.setup().papers.iter().collect();
    let integrated_ids = integrated.ids();
    let unknown: Vec<String> = papers.iter().filter(|p| !integrated_ids.contains(p)).map(|p| p.to_string()).collect();
    let unvoted: Vec<String> = integrated_ids.iter().filter(|p| !papers.contains(p)).map(|p| p.to_string()).collect();
    if !unknown.is_empty() || !unvoted.is_empty() {
        let mut details = unknown.iter().map(|p| format!("not in integrated set: {p}")).collect::<Vec<_>>();
        details.extend(unvoted.iter().map(|p| format!("not in selection: {p}")));
        return Err(Error::integrity(
            "the selection and the integrated dataset cover different records",
            details,
        ));
    }
    let decisions: Vec<Decision> = state.decisions().into_iter().filter_map(|(_, d)| d).collect();
    let uncited: Vec<String> = decisions
        .iter()
        .filter(|d| d.state == Relevance::Irrelevant && !d.criteria_applied.iter().any(|c| state.criteria().is_exclusion(c)))
        .map(|d| d.paper.to_string())
        .collect();
    if !uncited.is_empty() {
        return Err(Error::precondition_with(
            format!("{} irrelevant paper(s) cite no exclusion criterion", uncited.len()),
            uncited,
        ));
    }
    let relevant: BTreeSet<&RecordId> =
        decisions.iter().filter(|d| d.state == Relevance::Relevant).map(|d| &d.paper).collect();
    let records: Vec<_> = integrated.records().iter().filter(|r| relevant.contains(&r.id)).cloned().collect();
    let baseline = Baseline {
        integrated_revision: integrated.revision(),
        selection_revision: state.revision(),
        relevant: records.len(),
        irrelevant: decisions.len() - records.len(),
        relevant_by_database: count_by_database(&records),
        timestamp,
    };
    let decided = Dataset::from_parts_unchecked(records, Vec::new(), 1);
    Ok((decided, decisions, baseline))
}
