use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::assign::{assign_overlapping_subsets, Assignment};
use super::policy::{Scale, SelectionPolicy, Workflow};
use super::rating::{aggregate, classify, Aggregate, Relevance};
use crate::error::{Error, Result};
use crate::model::{CriterionSet, RecordId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vote {
    pub reviewer: String,
    pub paper: RecordId,
    pub round: u32,
    pub value: i64,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecidedBy {
    Aggregate,
    ThirdReviewer,
    Workshop,
    Moderator,
}

impl DecidedBy {
    pub fn as_str(self) -> &'static str {
        match self {
            DecidedBy::Aggregate => "aggregate",
            DecidedBy::ThirdReviewer => "third_reviewer",
            DecidedBy::Workshop => "workshop",
            DecidedBy::Moderator => "moderator",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub paper: RecordId,
    pub state: Relevance,
    pub decided_by: DecidedBy,
    pub criteria_applied: Vec<String>,
    /// Aggregate of the primary votes; absent for an indeterminate mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rating: Option<f64>,
}

/// Entries of the append-only selection log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SelectionEvent {
    Vote(Vote),
    RoundClosed {
        round: u32,
        timestamp: DateTime<Utc>,
    },
    /// A joint or moderator decision; with an unchanged state it only adds criteria.
    Decision {
        paper: RecordId,
        state: Relevance,
        criteria: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        by: Option<String>,
        timestamp: DateTime<Utc>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundSpec {
    pub round: u32,
    pub reviewers: Vec<String>,
    /// Rounds that must be closed before this one opens.
    pub after: Vec<u32>,
}

/// Everything fixed when voting starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionSetup {
    pub policy: SelectionPolicy,
    /// Ordered: A, B (and C) for the two- and three-reviewer models.
    pub reviewers: Vec<String>,
    pub papers: Vec<RecordId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<Assignment>,
}

impl SelectionSetup {
    pub fn new(
        policy: SelectionPolicy,
        reviewers: Vec<String>,
        papers: Vec<RecordId>,
        coverage: Option<usize>,
        seed: Option<u64>,
    ) -> Result<Self> {
        let distinct: BTreeSet<&String> = reviewers.iter().collect();
        if distinct.len() != reviewers.len() || reviewers.is_empty() {
            return Err(Error::InvalidInput("reviewers must be a nonempty list of distinct ids".into()));
        }
        let workflow = policy.workflow;
        if let Some(n) = workflow.required_reviewers() {
            if reviewers.len() != n {
                return Err(Error::precondition(format!(
                    "the {} workflow needs exactly {n} reviewers, got {}",
                    workflow.as_str(),
                    reviewers.len()
                )));
            }
        }
        if workflow == Workflow::TwoPlusOne && policy.scale != Scale::Binary {
            return Err(Error::InvalidInput("the two_plus_one workflow uses binary votes".into()));
        }
        let assignment = if workflow == Workflow::OverlappingSubsets {
            let c = coverage.ok_or_else(|| Error::InvalidInput("overlapping subsets need a coverage".into()))?;
            let s = seed.ok_or_else(|| Error::InvalidInput("overlapping subsets need an explicit seed".into()))?;
            Some(assign_overlapping_subsets(&papers, &reviewers, c, s)?)
        } else {
            None
        };
        let setup = SelectionSetup {
            policy,
            reviewers,
            papers,
            coverage,
            seed,
            assignment,
        };
        let voter_sets: Vec<Vec<String>> = match workflow {
            Workflow::OverlappingSubsets => setup
                .papers
                .iter()
                .map(|p| setup.primary_voters(p).into_iter().map(|(_, r)| r).collect())
                .collect(),
            _ => setup
                .papers
                .first()
                .map(|p| vec![setup.primary_voters(p).into_iter().map(|(_, r)| r).collect()])
                .unwrap_or_default(),
        };
        setup.policy.validate(&voter_sets)?;
        Ok(setup)
    }

    pub fn rounds(&self) -> Vec<RoundSpec> {
        let r = &self.reviewers;
        let single = |round, reviewers: Vec<String>, after| RoundSpec {
            round,
            reviewers,
            after,
        };
        match self.policy.workflow {
            Workflow::TwoPlusOne => vec![
                single(1, vec![r[0].clone()], vec![]),
                single(2, vec![r[1].clone()], vec![]),
                single(3, vec![r[2].clone()], vec![1, 2]),
            ],
            Workflow::TwoReviewerWorkshop => vec![
                single(1, vec![r[0].clone()], vec![]),
                single(2, vec![r[1].clone()], vec![]),
            ],
            Workflow::OverlappingSubsets | Workflow::Custom => vec![single(1, r.clone(), vec![])],
        }
    }

    fn round(&self, round: u32) -> Option<RoundSpec> {
        self.rounds().into_iter().find(|s| s.round == round)
    }

    /// (round, reviewer) pairs whose votes make up a paper's aggregate.
    pub fn primary_voters(&self, paper: &RecordId) -> Vec<(u32, String)> {
        match self.policy.workflow {
            Workflow::TwoPlusOne | Workflow::TwoReviewerWorkshop => {
                vec![(1, self.reviewers[0].clone()), (2, self.reviewers[1].clone())]
            }
            Workflow::Custom => self.reviewers.iter().map(|r| (1, r.clone())).collect(),
            Workflow::OverlappingSubsets => self
                .assignment
                .iter()
                .flat_map(|a| a.iter())
                .filter(|(_, ps)| ps.contains(paper))
                .map(|(r, _)| (1, r.clone()))
                .collect(),
        }
    }

    /// Rounds whose votes feed the aggregate.
    pub fn primary_rounds(&self) -> Vec<u32> {
        match self.policy.workflow {
            Workflow::TwoPlusOne | Workflow::TwoReviewerWorkshop => vec![1, 2],
            _ => vec![1],
        }
    }

    pub fn is_reviewer(&self, id: &str) -> bool {
        self.reviewers.iter().any(|r| r == id)
    }
}

/// Current state, always the fold of its event log.
#[derive(Debug, Clone)]
pub struct SelectionState {
    setup: SelectionSetup,
    criteria: CriterionSet,
    events: Vec<SelectionEvent>,
    votes: BTreeMap<(u32, String, RecordId), i64>,
    closed: BTreeSet<u32>,
    overrides: BTreeMap<RecordId, (Relevance, DecidedBy)>,
    attached: BTreeMap<RecordId, Vec<String>>,
    paper_set: BTreeSet<RecordId>,
}

impl SelectionState {
    pub fn new(setup: SelectionSetup, criteria: CriterionSet) -> Self {
        let paper_set = setup.papers.iter().cloned().collect();
        SelectionState {
            setup,
            criteria,
            events: Vec::new(),
            votes: BTreeMap::new(),
            closed: BTreeSet::new(),
            overrides: BTreeMap::new(),
            attached: BTreeMap::new(),
            paper_set,
        }
    }

    pub fn replay(setup: SelectionSetup, criteria: CriterionSet, events: &[SelectionEvent]) -> Result<Self> {
        let mut s = SelectionState::new(setup, criteria);
        for (i, e) in events.iter().enumerate() {
            s.apply(e.clone()).map_err(|err| {
                Error::integrity(format!("selection log entry {} does not replay: {err}", i + 1), vec![])
            })?;
        }
        Ok(s)
    }

    pub fn setup(&self) -> &SelectionSetup {
        &self.setup
    }

    pub fn criteria(&self) -> &CriterionSet {
        &self.criteria
    }

    pub fn events(&self) -> &[SelectionEvent] {
        &self.events
    }

    /// Number of applied events.
    pub fn revision(&self) -> u64 {
        self.events.len() as u64
    }

    pub fn votes(&self) -> impl Iterator<Item = &Vote> {
        self.events.iter().filter_map(|e| match e {
            SelectionEvent::Vote(v) => Some(v),
            _ => None,
        })
    }

    pub fn is_closed(&self, round: u32) -> bool {
        self.closed.contains(&round)
    }

    pub fn is_open(&self, round: u32) -> bool {
        match self.setup.round(round) {
            Some(spec) => !self.closed.contains(&round) && spec.after.iter().all(|r| self.closed.contains(r)),
            None => false,
        }
    }

    pub fn vote_value(&self, round: u32, reviewer: &str, paper: &RecordId) -> Option<i64> {
        self.votes.get(&(round, reviewer.to_string(), paper.clone())).copied()
    }

    fn primary_votes(&self, paper: &RecordId) -> Option<Vec<(String, i64)>> {
        self.setup
            .primary_voters(paper)
            .into_iter()
            .map(|(round, r)| self.vote_value(round, &r, paper).map(|v| (r, v)))
            .collect()
    }

    /// The aggregate outcome before tie-breaks and moderator decisions.
    fn base(&self, paper: &RecordId) -> Option<(Relevance, Option<f64>)> {
        let votes = self.primary_votes(paper)?;
        if votes.is_empty() {
            return None;
        }
        let pairs: Vec<(&str, i64)> = votes.iter().map(|(r, v)| (r.as_str(), *v)).collect();
        let agg = aggregate(&self.setup.policy, &pairs).ok()?;
        let rating = match agg {
            Aggregate::Value(x) => Some(x),
            Aggregate::Indeterminate => None,
        };
        Some((classify(&self.setup.policy, agg), rating))
    }

    /// The round-based rating of a paper (sum, mean, ...) if all primary votes are in.
    pub fn rating(&self, paper: &RecordId) -> Option<f64> {
        self.base(paper).and_then(|(_, r)| r)
    }

    /// Current decision, or `None` while primary votes are missing.
    pub fn decision(&self, paper: &RecordId) -> Option<Decision> {
        let (mut state, rating) = self.base(paper)?;
        let mut decided_by = DecidedBy::Aggregate;
        if state == Relevance::ToDecide && self.setup.policy.workflow == Workflow::TwoPlusOne {
            if let Some(v) = self.vote_value(3, &self.setup.reviewers[2], paper) {
                state = if v >= 1 { Relevance::Relevant } else { Relevance::Irrelevant };
                decided_by = DecidedBy::ThirdReviewer;
            }
        }
        if state == Relevance::ToDecide {
            if let Some((s, by)) = self.overrides.get(paper) {
                state = *s;
                decided_by = *by;
            }
        }
        let mut criteria_applied = self.attached.get(paper).cloned().unwrap_or_default();
        if state == Relevance::Irrelevant && !criteria_applied.iter().any(|c| self.criteria.is_exclusion(c)) {
            if let Some(d) = &self.setup.policy.default_exclusion {
                criteria_applied.push(d.clone());
            }
        }
        Some(Decision {
            paper: paper.clone(),
            state,
            decided_by,
            criteria_applied,
            rating,
        })
    }

    pub fn decisions(&self) -> Vec<(RecordId, Option<Decision>)> {
        self.setup.papers.iter().map(|p| (p.clone(), self.decision(p))).collect()
    }

    /// Papers without a final state (missing votes or at the threshold).
    pub fn undecided(&self) -> Vec<RecordId> {
        self.setup
            .papers
            .iter()
            .filter(|p| !matches!(self.decision(p), Some(d) if d.state != Relevance::ToDecide))
            .cloned()
            .collect()
    }

    pub fn to_decide(&self) -> Vec<RecordId> {
        self.setup
            .papers
            .iter()
            .filter(|p| matches!(self.decision(p), Some(d) if d.state == Relevance::ToDecide))
            .cloned()
            .collect()
    }

    /// Papers a reviewer has to rate in a round. Empty for rounds that are
    /// not open yet or that the reviewer does not take part in.
    pub fn worklist(&self, reviewer: &str, round: u32) -> Vec<RecordId> {
        let Some(spec) = self.setup.round(round) else {
            return Vec::new();
        };
        if !spec.reviewers.iter().any(|r| r == reviewer) || !spec.after.iter().all(|r| self.closed.contains(r)) {
            return Vec::new();
        }
        match (self.setup.policy.workflow, round) {
            (Workflow::TwoPlusOne, 3) => self
                .setup
                .papers
                .iter()
                .filter(|p| matches!(self.base(p), Some((Relevance::ToDecide, _))))
                .cloned()
                .collect(),
            (Workflow::OverlappingSubsets, _) => self
                .setup
                .assignment
                .as_ref()
                .and_then(|a| a.get(reviewer))
                .cloned()
                .unwrap_or_default(),
            _ => self.setup.papers.clone(),
        }
    }

    /// Open (round, paper) items the reviewer has not voted on yet.
    pub fn pending_work(&self, reviewer: &str) -> Vec<(u32, RecordId)> {
        let mut out = Vec::new();
        for spec in self.setup.rounds() {
            if !self.is_open(spec.round) {
                continue;
            }
            for p in self.worklist(reviewer, spec.round) {
                if self.vote_value(spec.round, reviewer, &p).is_none() {
                    out.push((spec.round, p));
                }
            }
        }
        out
    }

    /// Votes still missing before `round` can close, as `reviewer:paper`.
    pub fn missing_votes(&self, round: u32) -> Vec<String> {
        let Some(spec) = self.setup.round(round) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for r in &spec.reviewers {
            for p in self.worklist(r, round) {
                if self.vote_value(round, r, &p).is_none() {
                    out.push(format!("{r}:{p}"));
                }
            }
        }
        out
    }

    fn check_paper(&self, paper: &RecordId) -> Result<()> {
        if self.paper_set.contains(paper) {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("paper {paper} is not part of this selection")))
        }
    }

    fn check_vote(&self, v: &Vote) -> Result<()> {
        if !self.setup.is_reviewer(&v.reviewer) {
            return Err(Error::UnknownReviewer(v.reviewer.clone()));
        }
        self.check_paper(&v.paper)?;
        let spec = self
            .setup
            .round(v.round)
            .ok_or_else(|| Error::rejected("unknown_round", format!("round {} does not exist", v.round)))?;
        if !spec.reviewers.contains(&v.reviewer) {
            return Err(Error::rejected(
                "not_assigned",
                format!("reviewer {} does not vote in round {}", v.reviewer, v.round),
            ));
        }
        if self.closed.contains(&v.round) {
            return Err(Error::rejected("round_closed", format!("round {} is closed", v.round)));
        }
        if !self.is_open(v.round) {
            let waiting: Vec<String> = spec.after.iter().map(|r| r.to_string()).collect();
            return Err(Error::rejected(
                "round_not_open",
                format!("round {} opens once round(s) {} are closed", v.round, waiting.join(", ")),
            ));
        }
        self.setup.policy.scale.check(v.value)?;
        if self.vote_value(v.round, &v.reviewer, &v.paper).is_some() {
            return Err(Error::rejected(
                "duplicate_vote",
                format!("{} already voted on {} in round {}", v.reviewer, v.paper, v.round),
            ));
        }
        if self.setup.policy.workflow == Workflow::TwoPlusOne && v.round == 3 {
            if let Some(d) = self.decision(&v.paper) {
                if d.state != Relevance::ToDecide {
                    return Err(Error::rejected(
                        "already_decided",
                        format!("paper {} is already decided as {}", v.paper, d.state.as_str()),
                    ));
                }
            }
        }
        if !self.worklist(&v.reviewer, v.round).contains(&v.paper) {
            return Err(Error::rejected(
                "not_assigned",
                format!("paper {} is not on {}'s round {} worklist", v.paper, v.reviewer, v.round),
            ));
        }
        Ok(())
    }

    fn check_decision(&self, paper: &RecordId, state: Relevance, criteria: &[String]) -> Result<()> {
        self.check_paper(paper)?;
        if state == Relevance::ToDecide {
            return Err(Error::InvalidInput("a decision must be relevant or irrelevant".into()));
        }
        if let Some(c) = criteria.iter().find(|c| self.criteria.get(c).is_none()) {
            return Err(Error::InvalidInput(format!("criterion {c} is not defined")));
        }
        if state == Relevance::Irrelevant && !criteria.iter().any(|c| self.criteria.is_exclusion(c)) {
            let current = self.decision(paper);
            let has_one = current
                .as_ref()
                .map(|d| d.state == Relevance::Irrelevant && d.criteria_applied.iter().any(|c| self.criteria.is_exclusion(c)))
                .unwrap_or(false);
            if !has_one {
                return Err(Error::rejected(
                    "criterion_required",
                    format!("excluding {paper} requires at least one exclusion criterion"),
                ));
            }
        }
        let Some(current) = self.decision(paper) else {
            return Err(Error::precondition(format!("paper {paper} has not received all votes yet")));
        };
        if current.state == Relevance::ToDecide {
            let primary_closed = self.setup.primary_rounds().iter().all(|r| self.closed.contains(r));
            if !primary_closed {
                return Err(Error::precondition(format!(
                    "paper {paper} can be decided jointly once the voting rounds are closed"
                )));
            }
            return Ok(());
        }
        if current.state != state {
            return Err(Error::rejected(
                "already_decided",
                format!("paper {paper} is already decided as {}", current.state.as_str()),
            ));
        }
        Ok(())
    }

    /// Validates and appends one event.
    pub fn apply(&mut self, event: SelectionEvent) -> Result<()> {
        match &event {
            SelectionEvent::Vote(v) => {
                self.check_vote(v)?;
                self.votes.insert((v.round, v.reviewer.clone(), v.paper.clone()), v.value);
            }
            SelectionEvent::RoundClosed { round, .. } => {
                if self.setup.round(*round).is_none() {
                    return Err(Error::InvalidInput(format!("round {round} does not exist")));
                }
                if self.closed.contains(round) {
                    return Err(Error::precondition(format!("round {round} is already closed")));
                }
                if !self.is_open(*round) {
                    return Err(Error::precondition(format!("round {round} has not opened yet")));
                }
                let missing = self.missing_votes(*round);
                if !missing.is_empty() {
                    return Err(Error::precondition_with(
                        format!("round {round} cannot close: {} vote(s) missing", missing.len()),
                        missing,
                    ));
                }
                self.closed.insert(*round);
            }
            SelectionEvent::Decision {
                paper, state, criteria, ..
            } => {
                self.check_decision(paper, *state, criteria)?;
                let current = self.decision(paper).expect("checked");
                if current.state == Relevance::ToDecide {
                    let by = if self.setup.policy.workflow == Workflow::TwoReviewerWorkshop {
                        DecidedBy::Workshop
                    } else {
                        DecidedBy::Moderator
                    };
                    self.overrides.insert(paper.clone(), (*state, by));
                }
                let list = self.attached.entry(paper.clone()).or_default();
                for c in criteria {
                    if !list.contains(c) {
                        list.push(c.clone());
                    }
                }
            }
        }
        self.events.push(event);
        Ok(())
    }

    pub fn vote(&mut self, reviewer: &str, paper: &RecordId, round: u32, value: i64, timestamp: DateTime<Utc>) -> Result<()> {
        self.apply(SelectionEvent::Vote(Vote {
            reviewer: reviewer.to_string(),
            paper: paper.clone(),
            round,
            value,
            timestamp,
        }))
    }

    pub fn close_round(&mut self, round: u32, timestamp: DateTime<Utc>) -> Result<()> {
        self.apply(SelectionEvent::RoundClosed { round, timestamp })
    }

    pub fn decide(
        &mut self,
        paper: &RecordId,
        state: Relevance,
        criteria: Vec<String>,
        by: Option<String>,
        timestamp: DateTime<Utc>,
    ) -> Result<Decision> {
        self.apply(SelectionEvent::Decision {
            paper: paper.clone(),
            state,
            criteria,
            by,
            timestamp,
        })?;
        Ok(self.decision(paper).expect("decided"))
    }

    /// Reviewer × paper votes from the given rounds.
    pub fn matrix(&self, rounds: &[u32]) -> VotingMatrix {
        let mut cells = BTreeMap::new();
        let mut reviewers: Vec<String> = Vec::new();
        for spec in self.setup.rounds() {
            if rounds.contains(&spec.round) {
                for r in spec.reviewers {
                    if !reviewers.contains(&r) {
                        reviewers.push(r);
                    }
                }
            }
        }
        for ((round, r, p), v) in &self.votes {
            if rounds.contains(round) {
                cells.insert((r.clone(), p.clone()), *v);
            }
        }
        VotingMatrix {
            reviewers,
            papers: self.setup.papers.clone(),
            cells,
            scale: self.setup.policy.scale,
        }
    }

    /// The matrix the aggregate is computed from.
    pub fn primary_matrix(&self) -> VotingMatrix {
        self.matrix(&self.setup.primary_rounds())
    }
}

/// n×m reviewer-by-paper votes; `cells` is sparse.
#[derive(Debug, Clone, PartialEq)]
pub struct VotingMatrix {
    pub reviewers: Vec<String>,
    pub papers: Vec<RecordId>,
    pub cells: BTreeMap<(String, RecordId), i64>,
    pub scale: Scale,
}

impl VotingMatrix {
    pub fn get(&self, reviewer: &str, paper: &RecordId) -> Option<i64> {
        self.cells.get(&(reviewer.to_string(), paper.clone())).copied()
    }

    /// Values of one paper in reviewer order, skipping empty cells.
    pub fn column(&self, paper: &RecordId) -> Vec<(String, i64)> {
        self.reviewers
            .iter()
            .filter_map(|r| self.get(r, paper).map(|v| (r.clone(), v)))
            .collect()
    }

    pub fn row(&self, reviewer: &str) -> BTreeMap<RecordId, i64> {
        self.cells
            .iter()
            .filter(|((r, _), _)| r == reviewer)
            .map(|((_, p), v)| (p.clone(), *v))
            .collect()
    }
}
