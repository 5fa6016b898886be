//! The handover bundle: every deliverable of the search and selection
//! stages, written to a directory with a checksummed manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::bibtex::records_to_bibtex;
use super::funnel::build_funnel;
use crate::agreement::{agreement_report, AgreementMethod, Weighting};
use crate::error::{Error, Result};
use crate::ingest::audit_completion;
use crate::model::Dataset;
use crate::project::{Project, DECIDED, INTEGRATED};
use crate::selection::{assignment_to_csv, decisions_to_csv, format_rating, votes_to_csv, Scale};
use crate::store::{records_to_csv, to_jsonl, write_atomic};

pub const MANIFEST: &str = "MANIFEST.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleFile {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// One deliverable group; an absent group carries the reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleGroup {
    pub id: String,
    pub title: String,
    pub present: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandoverBundle {
    pub project: String,
    pub integrated_revision: u64,
    pub selection_revision: u64,
    pub finalized: String,
    pub groups: Vec<BundleGroup>,
    pub files: Vec<BundleFile>,
}

pub const GROUPS: [(&str, &str); 6] = [
    ("01_search", "Search terms and queries"),
    ("02_criteria", "Inclusion and exclusion criteria"),
    ("03_databases", "Queried databases and raw result sets"),
    ("04_integrated", "Cleaned and integrated data sets"),
    ("05_selection_approach", "Study selection approach"),
    ("06_decided", "Decided data set and selection statistics"),
];

fn pretty(v: &impl Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// File contents keyed by bundle-relative path.
type Files = BTreeMap<String, Vec<u8>>;

fn put(files: &mut Files, path: impl Into<String>, contents: impl Into<Vec<u8>>) {
    files.insert(path.into(), contents.into());
}

fn dataset_files(files: &mut Files, base: &str, d: &Dataset, p: &Project) -> Result<()> {
    put(files, format!("{base}.csv"), records_to_csv(d.records(), &p.manifest.metadata_classes)?);
    if !d.merge_log().is_empty() {
        put(files, format!("{base}.merge.jsonl"), to_jsonl(d.merge_log())?);
    }
    Ok(())
}

fn agreement_statistics(p: &Project) -> Result<Value> {
    let state = p.require_selection()?;
    let scale = state.setup().policy.scale;
    let mut methods = vec![AgreementMethod::Percent, AgreementMethod::CohenKappa, AgreementMethod::FleissKappa];
    if scale != Scale::Binary {
        methods.push(AgreementMethod::WeightedCohenKappa);
    }
    let mut out = serde_json::Map::new();
    for m in methods {
        let v = match agreement_report(state, m, Weighting::Linear) {
            Ok(mut r) => {
                r.per_item_status.clear();
                serde_json::to_value(r)?
            }
            Err(e) => json!({ "unavailable": e.to_string() }),
        };
        out.insert(m.as_str().to_string(), v);
    }
    Ok(Value::Object(out))
}

fn statistics_text(p: &Project, agreement: &Value) -> String {
    let b = p.manifest.baseline.as_ref().expect("finalized");
    let mut s = format!(
        "Relevant: {}\nIrrelevant: {}\nSelection events: {}\n",
        b.relevant, b.irrelevant, b.selection_revision
    );
    s.push_str("Relevant per database:\n");
    for (db, n) in &b.relevant_by_database {
        s.push_str(&format!("  {db}: {n}\n"));
    }
    s.push_str("Agreement:\n");
    if let Some(map) = agreement.as_object() {
        for (m, v) in map {
            let shown = match (v.get("value").and_then(Value::as_f64), v.get("unavailable")) {
                (Some(x), _) => format_rating(x),
                (None, Some(Value::String(why))) => format!("unavailable ({why})"),
                (None, _) => "per stratum, see statistics.json".to_string(),
            };
            s.push_str(&format!("  {m}: {shown}\n"));
        }
    }
    s
}

/// Assembles all deliverables in memory.
fn assemble(p: &Project) -> Result<(Files, Vec<BundleGroup>)> {
    let m = &p.manifest;
    let mut files = Files::new();
    let mut groups = Vec::new();
    let group = |id: &str, present: bool, reason: Option<&str>| BundleGroup {
        id: id.to_string(),
        title: GROUPS.iter().find(|(g, _)| *g == id).map(|(_, t)| t.to_string()).unwrap_or_default(),
        present,
        reason: reason.map(str::to_string),
    };

    let mut queries = String::new();
    for q in &m.queries {
        queries.push_str(&format!("{}\t{}\n", q.label, q.text));
    }
    put(&mut files, "01_search/queries.tsv", queries);
    let runs: Vec<Value> = m
        .imports
        .iter()
        .map(|i| {
            json!({
                "database": i.database, "query": i.query, "file": i.file, "sha256": i.checksum,
                "records": i.records, "rejected": i.rejected, "timestamp": crate::clock::format(&i.timestamp),
            })
        })
        .collect();
    put(&mut files, "01_search/search_runs.json", pretty(&runs)?);
    groups.push(group("01_search", !m.queries.is_empty(), m.queries.is_empty().then_some("no queries recorded")));

    put(
        &mut files,
        "02_criteria/criteria.json",
        pretty(&json!({ "research_questions": m.research_questions, "criteria": m.criteria }))?,
    );
    groups.push(group("02_criteria", !m.criteria.is_empty(), m.criteria.is_empty().then_some("no criteria defined")));

    put(&mut files, "03_databases/databases.json", pretty(&m.sources)?);
    for i in &m.imports {
        if let Some(d) = p.dataset(&i.slot) {
            put(&mut files, format!("03_databases/{}.csv", i.slot), records_to_csv(d.records(), &m.metadata_classes)?);
        }
    }
    if !p.warnings().is_empty() {
        put(&mut files, "03_databases/ingest_warnings.jsonl", to_jsonl(p.warnings())?);
    }
    groups.push(group("03_databases", !m.imports.is_empty(), m.imports.is_empty().then_some("nothing imported")));

    let integrated = p.require(INTEGRATED)?;
    for (slot, d) in p.datasets() {
        if slot.starts_with("db/") {
            dataset_files(&mut files, &format!("04_integrated/{slot}"), d, p)?;
        }
    }
    dataset_files(&mut files, "04_integrated/integrated", integrated, p)?;
    put(&mut files, "04_integrated/completion_audit.json", pretty(&audit_completion(integrated))?);
    if !m.filters.is_empty() {
        put(&mut files, "04_integrated/filters.json", pretty(&m.filters)?);
    }
    groups.push(group("04_integrated", true, None));

    let state = p.require_selection()?;
    let reviewers: Vec<Value> =
        m.reviewers.iter().map(|r| json!({ "id": r.id, "role": r.role })).collect();
    put(
        &mut files,
        "05_selection_approach/approach.json",
        pretty(&json!({ "setup": state.setup(), "reviewers": reviewers }))?,
    );
    put(&mut files, "05_selection_approach/assignment.csv", assignment_to_csv(state));
    put(&mut files, "05_selection_approach/votes.csv", votes_to_csv(state.votes()));
    put(&mut files, "05_selection_approach/selection.jsonl", to_jsonl(state.events())?);
    groups.push(group("05_selection_approach", true, None));

    let decided = p.require(DECIDED)?;
    put(&mut files, "06_decided/decided.csv", records_to_csv(decided.records(), &m.metadata_classes)?);
    put(&mut files, "06_decided/decided.bib", records_to_bibtex(decided.records()));
    put(&mut files, "06_decided/decisions.csv", decisions_to_csv(&p.decisions()));
    let agreement = agreement_statistics(p)?;
    put(
        &mut files,
        "06_decided/statistics.json",
        pretty(&json!({ "baseline": m.baseline, "agreement": agreement }))?,
    );
    put(&mut files, "06_decided/statistics.txt", statistics_text(p, &agreement));
    let funnel = build_funnel(p)?;
    put(&mut files, "06_decided/funnel.txt", funnel.render_text());
    put(&mut files, "06_decided/funnel.csv", funnel.to_csv());
    put(&mut files, "06_decided/funnel.json", funnel.to_json());
    groups.push(group("06_decided", true, None));
    Ok((files, groups))
}

fn describe(files: &Files) -> Vec<BundleFile> {
    files
        .iter()
        .map(|(path, bytes)| BundleFile {
            path: path.clone(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len() as u64,
        })
        .collect()
}

/// Builds the bundle manifest without writing anything.
pub fn plan_bundle(p: &Project) -> Result<HandoverBundle> {
    bundle_of(p, &assemble(p)?)
}

fn bundle_of(p: &Project, (files, groups): &(Files, Vec<BundleGroup>)) -> Result<HandoverBundle> {
    let b = p
        .manifest
        .baseline
        .as_ref()
        .ok_or_else(|| Error::precondition("the selection is not finalized; run finalize first"))?;
    Ok(HandoverBundle {
        project: p.manifest.name.clone(),
        integrated_revision: b.integrated_revision,
        selection_revision: b.selection_revision,
        finalized: crate::clock::format(&b.timestamp),
        groups: groups.clone(),
        files: describe(files),
    })
}

/// Writes the bundle into `dir`, which must be absent or empty.
pub fn export_bundle(p: &Project, dir: &Path) -> Result<HandoverBundle> {
    if p.manifest.baseline.is_none() {
        return Err(Error::precondition("the selection is not finalized; run finalize first"));
    }
    if dir.exists() {
        let mut entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        if entries.next().is_some() {
            return Err(Error::precondition(format!("{} is not empty", dir.display())));
        }
    }
    let assembled = assemble(p)?;
    let bundle = bundle_of(p, &assembled)?;
    for (path, bytes) in &assembled.0 {
        write_atomic(&dir.join(path), bytes)?;
    }
    write_atomic(&dir.join(MANIFEST), pretty(&bundle)?.as_bytes())?;
    Ok(bundle)
}

/// Re-hashes every listed file; returns the paths that are missing or differ.
pub fn verify_bundle(dir: &Path) -> Result<Vec<String>> {
    let mpath = dir.join(MANIFEST);
    let bundle: HandoverBundle =
        serde_json::from_str(&fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?)?;
    let mut bad = Vec::new();
    for f in &bundle.files {
        let path: PathBuf = dir.join(&f.path);
        match fs::read(&path) {
            Ok(bytes) if hex::encode(Sha256::digest(&bytes)) == f.sha256 && bytes.len() as u64 == f.bytes => {}
            _ => bad.push(f.path.clone()),
        }
    }
    Ok(bad)
}
