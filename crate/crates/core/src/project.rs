//! A study project: configuration, named dataset slots, the selection log,
//! and the pipeline operations that move data between slots.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dedup::{
    apply_filter, find_duplicates, integrate, resolve_duplicates, DedupConfig, DuplicatePair, NamedFilter,
    ResolutionPolicy, StepInfo,
};
use crate::error::{Error, Result};
use crate::ingest::{audit_completion, parse_source, CompletionAudit, IngestWarning, SourceProfile};
use crate::model::{
    standard_research_questions, validate_record, CriterionSet, Dataset, MergeEvent, MergeStage, MetadataClass,
    RecordId, RecordPatch, Violation,
};
use crate::selection::{
    finalize, Baseline, Decision, SelectionEvent, SelectionPolicy, SelectionSetup, SelectionState, Workflow,
};

pub const INTEGRATED: &str = "integrated";
pub const DECIDED: &str = "decided";

pub fn raw_slot(database: &str, run: &str) -> String {
    format!("raw/{database}/{run}")
}

pub fn db_slot(database: &str) -> String {
    format!("db/{database}")
}

/// Slot names become file paths, so keep them to a portable alphabet.
pub fn slot_component(s: &str) -> String {
    let out: String = s
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect();
    if out.is_empty() {
        "_".into()
    } else {
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Template {
    Blank,
    Standard,
}

impl Template {
    pub fn parse(s: &str) -> Option<Template> {
        match s {
            "blank" => Some(Template::Blank),
            "standard" => Some(Template::Standard),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    #[default]
    Reviewer,
    Moderator,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reviewer {
    pub id: String,
    pub token: String,
    #[serde(default)]
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub label: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub text: String,
}

/// One imported export file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportEvent {
    pub database: String,
    pub query: String,
    pub file: String,
    /// SHA-256 of the imported bytes.
    pub checksum: String,
    pub input_entries: usize,
    pub records: usize,
    pub rejected: usize,
    pub warnings: usize,
    pub slot: String,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotInfo {
    pub revision: u64,
    pub records: usize,
    pub file: String,
}

/// Everything in `project.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub template: Template,
    pub created: DateTime<Utc>,
    pub research_questions: Vec<String>,
    pub criteria: CriterionSet,
    pub sources: Vec<String>,
    pub queries: Vec<Query>,
    #[serde(default)]
    pub metadata_classes: Vec<MetadataClass>,
    pub selection_policy: SelectionPolicy,
    #[serde(default)]
    pub reviewers: Vec<Reviewer>,
    #[serde(default)]
    pub imports: Vec<ImportEvent>,
    #[serde(default)]
    pub filters: Vec<NamedFilter>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<SelectionSetup>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<Baseline>,
    /// Last id number handed out per database prefix.
    #[serde(default)]
    pub id_counters: BTreeMap<String, u32>,
    #[serde(default)]
    pub datasets: BTreeMap<String, SlotInfo>,
}

#[derive(Debug, Clone)]
pub struct Project {
    pub manifest: Manifest,
    datasets: BTreeMap<String, Dataset>,
    selection: Option<SelectionState>,
    warnings: Vec<IngestWarning>,
}

/// Result of a dedup run; `event` is absent for dry runs.
#[derive(Debug, Clone, Serialize)]
pub struct DedupOutcome {
    pub slot: String,
    pub pairs: Vec<DuplicatePair>,
    pub event: Option<MergeEvent>,
}

impl Project {
    pub fn new(name: &str, template: Template, created: DateTime<Utc>) -> Result<Project> {
        if name.trim().is_empty() {
            return Err(Error::InvalidInput("project name must not be empty".into()));
        }
        let (research_questions, criteria) = match template {
            Template::Standard => (standard_research_questions(), CriterionSet::standard()),
            Template::Blank => (Vec::new(), CriterionSet::default()),
        };
        let manifest = Manifest {
            name: name.trim().to_string(),
            template,
            created,
            research_questions,
            criteria,
            sources: Vec::new(),
            queries: Vec::new(),
            metadata_classes: Vec::new(),
            selection_policy: SelectionPolicy::majority(Workflow::TwoPlusOne),
            reviewers: Vec::new(),
            imports: Vec::new(),
            filters: Vec::new(),
            selection: None,
            baseline: None,
            id_counters: BTreeMap::new(),
            datasets: BTreeMap::new(),
        };
        Ok(Project {
            manifest,
            datasets: BTreeMap::new(),
            selection: None,
            warnings: Vec::new(),
        })
    }

    /// Reassembles a project from stored parts, replaying the selection log.
    pub fn from_parts(
        manifest: Manifest,
        datasets: BTreeMap<String, Dataset>,
        events: Vec<SelectionEvent>,
        warnings: Vec<IngestWarning>,
    ) -> Result<Project> {
        let selection = match &manifest.selection {
            Some(setup) => Some(SelectionState::replay(setup.clone(), manifest.criteria.clone(), &events)?),
            None if !events.is_empty() => {
                return Err(Error::integrity("selection log present but no selection was set up", vec![]))
            }
            None => None,
        };
        let p = Project {
            manifest,
            datasets,
            selection,
            warnings,
        };
        p.check_decided_subset()?;
        Ok(p)
    }

    fn check_decided_subset(&self) -> Result<()> {
        if let (Some(decided), Some(integrated)) = (self.datasets.get(DECIDED), self.datasets.get(INTEGRATED)) {
            let ids = integrated.ids();
            let stray: Vec<String> =
                decided.records().iter().filter(|r| !ids.contains(&r.id)).map(|r| r.id.to_string()).collect();
            if !stray.is_empty() {
                return Err(Error::integrity("decided records missing from the integrated dataset", stray));
            }
        }
        Ok(())
    }

    pub fn datasets(&self) -> &BTreeMap<String, Dataset> {
        &self.datasets
    }

    pub fn dataset(&self, slot: &str) -> Option<&Dataset> {
        self.datasets.get(slot)
    }

    pub fn require(&self, slot: &str) -> Result<&Dataset> {
        self.datasets
            .get(slot)
            .ok_or_else(|| Error::precondition(format!("dataset slot {slot} does not exist yet")))
    }

    pub fn warnings(&self) -> &[IngestWarning] {
        &self.warnings
    }

    pub fn selection(&self) -> Option<&SelectionState> {
        self.selection.as_ref()
    }

    pub fn require_selection(&self) -> Result<&SelectionState> {
        self.selection
            .as_ref()
            .ok_or_else(|| Error::precondition("no selection has been set up; run assign first"))
    }

    pub fn selection_events(&self) -> &[SelectionEvent] {
        self.selection.as_ref().map(|s| s.events()).unwrap_or(&[])
    }

    fn put(&mut self, slot: String, d: Dataset) {
        self.manifest.datasets.insert(
            slot.clone(),
            SlotInfo {
                revision: d.revision(),
                records: d.len(),
                file: format!("datasets/{slot}.csv"),
            },
        );
        self.datasets.insert(slot, d);
    }

    fn add_source(&mut self, db: &str) {
        if !self.manifest.sources.iter().any(|s| s == db) {
            self.manifest.sources.push(db.to_string());
        }
    }

    /// Parses an export into a new raw slot `raw/<database>/<query>`.
    ///
    /// Record ids continue the database's sequence across imports.
    pub fn import(
        &mut self,
        input: &str,
        file: &str,
        profile: &SourceProfile,
        query: &Query,
        timestamp: DateTime<Utc>,
    ) -> Result<ImportEvent> {
        if query.label.trim().is_empty() {
            return Err(Error::InvalidInput("query label must not be empty".into()));
        }
        let db = profile.database_name.trim().to_string();
        let slot = raw_slot(&slot_component(&db), &slot_component(&query.label));
        if self.datasets.contains_key(&slot) {
            return Err(Error::precondition(format!(
                "{slot} already holds an import; raw result sets are immutable"
            )));
        }
        if self.datasets.contains_key(&db_slot(&slot_component(&db))) {
            return Err(Error::precondition(format!("{db} was already merged; imports must precede the merge")));
        }
        let output = parse_source(input, profile)?;
        let prefix = profile.prefix();
        let counter = self.manifest.id_counters.entry(prefix.clone()).or_insert(0);
        let mut records = output.records;
        for (i, r) in records.iter_mut().enumerate() {
            *counter += 1;
            r.id = RecordId::new(format!("{prefix}-{:04}", *counter));
            r.no = (i + 1) as u32;
        }
        let event = ImportEvent {
            database: db.clone(),
            query: query.label.clone(),
            file: file.to_string(),
            checksum: hex::encode(Sha256::digest(input.as_bytes())),
            input_entries: output.input_units,
            records: records.len(),
            rejected: output.warnings.iter().filter(|w| w.kind == crate::ingest::WarningKind::RejectedEntry).count(),
            warnings: output.warnings.len(),
            slot: slot.clone(),
            timestamp,
        };
        self.add_source(&db);
        match self.manifest.queries.iter_mut().find(|q| q.label == query.label) {
            Some(q) if q.text.is_empty() => q.text = query.text.clone(),
            Some(_) => {}
            None => self.manifest.queries.push(query.clone()),
        }
        self.warnings.extend(output.warnings);
        self.put(slot, Dataset::new(records)?.with_revision(1));
        self.manifest.imports.push(event.clone());
        Ok(event)
    }

    fn raw_slots_of(&self, db: &str) -> Vec<String> {
        let mut seen = Vec::new();
        for i in &self.manifest.imports {
            if i.database == db && !seen.contains(&i.slot) {
                seen.push(i.slot.clone());
            }
        }
        seen
    }

    /// Joins each database's query runs into `db/<database>`.
    pub fn merge_per_database(&mut self, only: Option<&str>, timestamp: DateTime<Utc>) -> Result<Vec<MergeEvent>> {
        let dbs: Vec<String> = match only {
            Some(db) => {
                if !self.manifest.sources.iter().any(|s| s == db) {
                    return Err(Error::precondition(format!("nothing was imported for {db}")));
                }
                vec![db.to_string()]
            }
            None => self.manifest.sources.clone(),
        };
        if dbs.is_empty() {
            return Err(Error::precondition("nothing has been imported yet"));
        }
        let mut events = Vec::new();
        for db in dbs {
            let target = db_slot(&slot_component(&db));
            if self.datasets.contains_key(&target) {
                if only.is_some() {
                    return Err(Error::precondition(format!("{target} already exists")));
                }
                continue;
            }
            let slots = self.raw_slots_of(&db);
            let parts: Vec<(&str, &Dataset)> = slots
                .iter()
                .map(|s| Ok((s.as_str(), self.require(s)?)))
                .collect::<Result<_>>()?;
            let (d, ev) = integrate(&parts, MergeStage::PerDatabase, timestamp)?;
            self.put(target, d);
            events.push(ev);
        }
        Ok(events)
    }

    /// Joins all `db/*` slots into `integrated`.
    pub fn merge_cross_database(&mut self, timestamp: DateTime<Utc>) -> Result<MergeEvent> {
        if self.datasets.contains_key(INTEGRATED) {
            return Err(Error::precondition("the integrated dataset already exists"));
        }
        if self.manifest.sources.is_empty() {
            return Err(Error::precondition("nothing has been imported yet"));
        }
        let missing: Vec<String> = self
            .manifest
            .sources
            .iter()
            .filter(|db| !self.datasets.contains_key(&db_slot(&slot_component(db))))
            .cloned()
            .collect();
        if !missing.is_empty() {
            return Err(Error::precondition_with("run the per_database merge first for", missing));
        }
        let slots: Vec<String> = self.manifest.sources.iter().map(|db| db_slot(&slot_component(db))).collect();
        let parts: Vec<(&str, &Dataset)> = slots.iter().map(|s| (s.as_str(), &self.datasets[s])).collect();
        let (d, ev) = integrate(&parts, MergeStage::CrossDatabase, timestamp)?;
        self.put(INTEGRATED.to_string(), d);
        Ok(ev)
    }

    fn stage_slots(&self, stage: MergeStage) -> Result<Vec<String>> {
        match stage {
            MergeStage::PerDatabase => {
                let slots: Vec<String> = self
                    .manifest
                    .sources
                    .iter()
                    .map(|db| db_slot(&slot_component(db)))
                    .filter(|s| self.datasets.contains_key(s))
                    .collect();
                if slots.is_empty() {
                    return Err(Error::precondition("no per-database datasets; run merge --stage per-database"));
                }
                if self.datasets.contains_key(INTEGRATED) {
                    return Err(Error::precondition(
                        "the databases were already integrated; per-database cleaning is closed",
                    ));
                }
                Ok(slots)
            }
            MergeStage::CrossDatabase => {
                self.require(INTEGRATED)?;
                Ok(vec![INTEGRATED.to_string()])
            }
        }
    }

    fn check_not_voting(&self) -> Result<()> {
        if self.manifest.selection.is_some() {
            return Err(Error::precondition("the selection has started; the integrated set is frozen"));
        }
        Ok(())
    }

    /// Finds and (unless `dry_run`) resolves duplicates in every slot of the stage.
    pub fn dedupe(
        &mut self,
        stage: MergeStage,
        config: &DedupConfig,
        policy: &ResolutionPolicy,
        dry_run: bool,
        timestamp: DateTime<Utc>,
    ) -> Result<Vec<DedupOutcome>> {
        let slots = self.stage_slots(stage)?;
        if !dry_run && stage == MergeStage::CrossDatabase {
            self.check_not_voting()?;
        }
        let mut out = Vec::new();
        for slot in slots {
            let d = &self.datasets[&slot];
            let pairs = find_duplicates(d, config)?;
            if dry_run {
                out.push(DedupOutcome {
                    slot,
                    pairs,
                    event: None,
                });
                continue;
            }
            let (next, event) = resolve_duplicates(d, &pairs, policy, &StepInfo::new(stage, slot.clone(), timestamp))?;
            self.put(slot.clone(), next);
            out.push(DedupOutcome {
                slot,
                pairs,
                event: Some(event),
            });
        }
        Ok(out)
    }

    /// Runs a named filter over the integrated set.
    pub fn filter(&mut self, filter: NamedFilter, timestamp: DateTime<Utc>) -> Result<MergeEvent> {
        self.check_not_voting()?;
        if filter.criterion.is_empty() || !self.manifest.criteria.is_exclusion(&filter.criterion) {
            return Err(Error::InvalidInput(format!(
                "filter criterion {:?} is not a defined exclusion criterion",
                filter.criterion
            )));
        }
        let d = self.require(INTEGRATED)?;
        let (next, event) = apply_filter(d, &filter, INTEGRATED, timestamp)?;
        self.put(INTEGRATED.to_string(), next);
        self.manifest.filters.push(filter);
        Ok(event)
    }

    /// Applies a completion patch to one record of a slot.
    pub fn patch(&mut self, slot: &str, id: &RecordId, patch: &RecordPatch) -> Result<u64> {
        if slot.starts_with("raw/") {
            return Err(Error::precondition("raw result sets are immutable; patch a merged slot"));
        }
        if slot == DECIDED {
            return Err(Error::precondition("the decided set is a baseline and cannot be patched"));
        }
        let next = self.require(slot)?.patch(id, patch)?;
        let rev = next.revision();
        self.put(slot.to_string(), next);
        Ok(rev)
    }

    pub fn audit(&self, slot: &str) -> Result<CompletionAudit> {
        Ok(audit_completion(self.require(slot)?))
    }

    pub fn validate(&self, slot: &str) -> Result<Vec<(RecordId, Vec<Violation>)>> {
        Ok(self
            .require(slot)?
            .records()
            .iter()
            .map(|r| (r.id.clone(), validate_record(r, &self.manifest.metadata_classes)))
            .filter(|(_, v)| !v.is_empty())
            .collect())
    }

    /// Derives a stable reviewer token from the project and reviewer id.
    fn token_for(&self, id: &str) -> String {
        let h = Sha256::digest(format!("{}\u{0}{}\u{0}{}", self.manifest.name, self.manifest.created, id).as_bytes());
        hex::encode(&h[..12])
    }

    pub fn ensure_reviewer(&mut self, id: &str, role: Role) -> Result<&Reviewer> {
        if id.trim().is_empty() || id.contains([',', ':', ' ']) {
            return Err(Error::InvalidInput(format!("reviewer id {id:?} is not valid")));
        }
        if let Some(i) = self.manifest.reviewers.iter().position(|r| r.id == id) {
            if role == Role::Moderator {
                self.manifest.reviewers[i].role = Role::Moderator;
            }
            return Ok(&self.manifest.reviewers[i]);
        }
        let token = self.token_for(id);
        self.manifest.reviewers.push(Reviewer {
            id: id.to_string(),
            token,
            role,
        });
        Ok(self.manifest.reviewers.last().expect("pushed"))
    }

    pub fn reviewer_by_token(&self, token: &str) -> Option<&Reviewer> {
        self.manifest.reviewers.iter().find(|r| r.token == token)
    }

    /// Fixes the selection setup over the integrated set.
    pub fn assign(
        &mut self,
        policy: SelectionPolicy,
        reviewers: Vec<String>,
        coverage: Option<usize>,
        seed: Option<u64>,
    ) -> Result<&SelectionSetup> {
        if self.selection.as_ref().is_some_and(|s| !s.events().is_empty()) {
            return Err(Error::precondition("voting has started; the assignment can no longer change"));
        }
        let papers: Vec<RecordId> = self.require(INTEGRATED)?.records().iter().map(|r| r.id.clone()).collect();
        if let Some(d) = &policy.default_exclusion {
            if !self.manifest.criteria.is_exclusion(d) {
                return Err(Error::InvalidInput(format!("default exclusion {d} is not an exclusion criterion")));
            }
        }
        let setup = SelectionSetup::new(policy.clone(), reviewers.clone(), papers, coverage, seed)?;
        for r in &reviewers {
            self.ensure_reviewer(r, Role::Reviewer)?;
        }
        self.manifest.selection_policy = policy;
        self.selection = Some(SelectionState::new(setup.clone(), self.manifest.criteria.clone()));
        self.manifest.selection = Some(setup);
        Ok(self.manifest.selection.as_ref().expect("set"))
    }

    fn selection_mut(&mut self) -> Result<&mut SelectionState> {
        if self.manifest.baseline.is_some() {
            return Err(Error::precondition("the selection was finalized"));
        }
        self.selection
            .as_mut()
            .ok_or_else(|| Error::precondition("no selection has been set up; run assign first"))
    }

    /// Appends one validated event to the selection log.
    pub fn apply_selection(&mut self, event: SelectionEvent) -> Result<()> {
        self.selection_mut()?.apply(event)
    }

    /// Applies events in order, keeping none if any fails.
    pub fn apply_selection_batch(&mut self, events: Vec<SelectionEvent>) -> Result<usize> {
        let mut scratch = self.selection_mut()?.clone();
        let n = events.len();
        for (i, e) in events.into_iter().enumerate() {
            scratch.apply(e).map_err(|err| match err {
                Error::Rejected { reason, message } => Error::Rejected {
                    reason,
                    message: format!("entry {}: {message}", i + 1),
                },
                other => other,
            })?;
        }
        self.selection = Some(scratch);
        Ok(n)
    }

    /// Draws the baseline and writes the `decided` slot.
    pub fn finalize(&mut self, timestamp: DateTime<Utc>) -> Result<(Baseline, Vec<Decision>)> {
        if self.manifest.baseline.is_some() {
            return Err(Error::precondition("the selection was already finalized"));
        }
        let state = self.require_selection()?;
        let (decided, decisions, baseline) = finalize(state, self.require(INTEGRATED)?, timestamp)?;
        self.put(DECIDED.to_string(), decided);
        self.manifest.baseline = Some(baseline.clone());
        Ok((baseline, decisions))
    }

    /// Current decisions for every paper under selection.
    pub fn decisions(&self) -> Vec<Decision> {
        self.selection
            .as_ref()
            .map(|s| s.decisions().into_iter().filter_map(|(_, d)| d).collect())
            .unwrap_or_default()
    }
}
