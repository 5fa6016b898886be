mod common;

use std::fs;
use std::path::Path;

use chrono::{DateTime, Utc};
use common::{e2e, ok, s, slr, FINAL_TIME, IMPORT_TIMES, WORK_TIME};
use serde_json::Value;
use slr_core::dedup::{DedupConfig, ResolutionPolicy};
use slr_core::ingest::SourceProfile;
use slr_core::model::MergeStage;
use slr_core::project::{Project, Query, Role, Template, DECIDED};
use slr_core::report::{build_funnel, plan_bundle};
use slr_core::selection::{parse_decisions_csv, parse_votes_csv, votes_to_csv, SelectionEvent, SelectionPolicy, Workflow};
use slr_core::store::{self, records_to_csv};

fn at(t: &str) -> DateTime<Utc> {
    DateTime::parse_from_rfc3339(t).unwrap().with_timezone(&Utc)
}

fn json(project: &Path, args: &[&str]) -> Value {
    let mut all = vec!["--format", "json"];
    all.extend_from_slice(args);
    serde_json::from_str(&ok(project, WORK_TIME, &all)).expect("json output")
}

fn code(project: &Path, args: &[&str]) -> Option<i32> {
    slr(project, WORK_TIME, args).status.code()
}

/// The scripted pipeline through library calls only.
fn library_pipeline() -> Project {
    let read = |name: &str| fs::read_to_string(e2e(name)).unwrap();
    let mut p = Project::new("e2e", Template::Standard, at(WORK_TIME)).unwrap();
    let q = |label: &str, text: &str| Query {
        label: label.into(),
        text: text.into(),
    };
    p.import(&read("ieee_s1.bib"), "ieee_s1.bib", &SourceProfile::bibtex("IEEE"), &q("S1", "agile AND improvement"), at(IMPORT_TIMES[0]))
        .unwrap();
    p.import(&read("ieee_s2.bib"), "ieee_s2.bib", &SourceProfile::bibtex("IEEE"), &q("S2", "tailoring AND process"), at(IMPORT_TIMES[1]))
        .unwrap();
    let acm = SourceProfile::load(&e2e("acm_profile.json")).unwrap();
    p.import(&read("acm_s1.csv"), "acm_s1.csv", &acm, &q("S1", ""), at(IMPORT_TIMES[2])).unwrap();
    let t = at(WORK_TIME);
    p.merge_per_database(None, t).unwrap();
    p.dedupe(MergeStage::PerDatabase, &DedupConfig::default(), &ResolutionPolicy::default(), false, t).unwrap();
    p.merge_cross_database(t).unwrap();
    let extensions = ResolutionPolicy {
        auto_resolve_extensions: true,
        ..Default::default()
    };
    p.dedupe(MergeStage::CrossDatabase, &DedupConfig::default(), &extensions, false, t).unwrap();
    p.ensure_reviewer("mod", Role::Moderator).unwrap();
    let mut policy = SelectionPolicy::majority(Workflow::TwoReviewerWorkshop);
    policy.default_exclusion = Some("E4".into());
    p.assign(policy, vec!["ann".into(), "bob".into()], None, None).unwrap();
    let votes = parse_votes_csv(&read("votes.csv")).unwrap();
    p.apply_selection_batch(votes.into_iter().map(SelectionEvent::Vote).collect()).unwrap();
    for round in [1, 2] {
        p.apply_selection(SelectionEvent::RoundClosed { round, timestamp: t }).unwrap();
    }
    let decided_at = at("2015-06-10T14:00:00Z");
    let decisions = parse_decisions_csv(&read("decisions.csv")).unwrap();
    p.apply_selection_batch(
        decisions
            .into_iter()
            .map(|d| SelectionEvent::Decision {
                paper: d.paper,
                state: d.state,
                criteria: d.criteria,
                by: Some("mod".into()),
                timestamp: decided_at,
            })
            .collect(),
    )
    .unwrap();
    p.finalize(at(FINAL_TIME)).unwrap();
    p
}

#[test]
fn library_pipeline_matches_the_cli_goldens() {
    let p = library_pipeline();
    let decided = records_to_csv(p.require(DECIDED).unwrap().records(), &p.manifest.metadata_classes).unwrap();
    assert_eq!(decided, fs::read_to_string(e2e("golden_decided.csv")).unwrap());
    assert_eq!(build_funnel(&p).unwrap().render_text(), fs::read_to_string(e2e("golden_funnel.txt")).unwrap());
    let manifest = serde_json::to_string_pretty(&plan_bundle(&p).unwrap()).unwrap() + "\n";
    assert_eq!(manifest, fs::read_to_string(e2e("golden_manifest.json")).unwrap());
}

#[test]
fn cli_state_equals_library_state() {
    let tmp = tempfile::tempdir().unwrap();
    let (project, bundle) = (tmp.path().join("p"), tmp.path().join("b"));
    fs::create_dir(&project).unwrap();
    common::full_pipeline(&project, &bundle);
    let cli = store::load(&project).unwrap();
    let lib = library_pipeline();
    assert_eq!(cli.manifest.imports, lib.manifest.imports);
    assert_eq!(cli.decisions(), lib.decisions());
    assert_eq!(cli.datasets(), lib.datasets());
    let exported = fs::read_to_string(bundle.join("05_selection_approach/votes.csv")).unwrap();
    assert_eq!(exported, votes_to_csv(lib.require_selection().unwrap().votes()));
    assert_eq!(ok(&project, WORK_TIME, &["votes", "export"]), exported);
}

#[test]
fn fresh_project_reports_an_empty_funnel() {
    let tmp = tempfile::tempdir().unwrap();
    ok(tmp.path(), WORK_TIME, &["init", "--template", "standard", "--name", "empty"]);
    let text = ok(tmp.path(), WORK_TIME, &["report"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0].split_whitespace().collect::<Vec<_>>(), ["Step", "Total"]);
    for label in ["No searches imported", "Duplicates per database", "Result set (search process)", "Final result set"] {
        let line = lines.iter().find(|l| l.starts_with(label)).unwrap();
        assert!(line.ends_with(" 0"), "{line}");
    }
    let f = json(tmp.path(), &["report"]);
    assert_eq!(f["steps"].as_array().unwrap().len(), 4);
    let criteria = json(tmp.path(), &["status"]);
    assert_eq!(criteria["project"], "empty");
}

#[test]
fn dry_run_lists_pairs_without_touching_the_project() {
    let tmp = tempfile::tempdir().unwrap();
    let project = tmp.path();
    ok(project, WORK_TIME, &["init", "--name", "dry"]);
    ok(project, IMPORT_TIMES[0], &["import", s(&e2e("ieee_s1.bib")), "--database", "IEEE", "--query", "S1"]);
    ok(project, IMPORT_TIMES[1], &["import", s(&e2e("ieee_s2.bib")), "--database", "IEEE", "--query", "S2"]);
    ok(project, WORK_TIME, &["merge", "--stage", "per-database"]);
    let before = fs::read(project.join("project.json")).unwrap();
    let status = json(project, &["status"]);
    let out = json(project, &["dedupe", "--stage", "per-database", "--dry-run"]);
    let listed = &out["outcomes"][0]["pairs"];
    let pairs: Vec<(&str, &str)> = listed
        .as_array()
        .unwrap()
        .iter()
        .map(|p| (p["a"].as_str().unwrap(), p["b"].as_str().unwrap()))
        .collect();
    assert_eq!(pairs, [("IEEE-0003", "IEEE-0011"), ("IEEE-0007", "IEEE-0014")]);
    assert_eq!(fs::read(project.join("project.json")).unwrap(), before);
    assert_eq!(json(project, &["status"]), status);

    let mut lib = store::load(project).unwrap();
    let dry = lib.dedupe(MergeStage::PerDatabase, &DedupConfig::default(), &ResolutionPolicy::default(), true, at(WORK_TIME));
    assert_eq!(&serde_json::to_value(&dry.unwrap()[0].pairs).unwrap(), listed);
}

#[test]
fn exit_codes_follow_the_error_class() {
    let tmp = tempfile::tempdir().unwrap();
    let project = tmp.path();
    assert_eq!(code(project, &["no-such-command"]), Some(1));
    assert_eq!(code(project, &["--help"]), Some(0));
    assert_eq!(code(project, &["status"]), Some(1), "no project here yet");
    ok(project, WORK_TIME, &["init", "--name", "codes"]);
    assert_eq!(code(project, &["init"]), Some(1), "a project exists already");
    assert_eq!(code(project, &["finalize"]), Some(1));
    assert_eq!(
        code(project, &["import", "/nonexistent/x.bib", "--database", "IEEE", "--query", "S1"]),
        Some(2)
    );

    let out = slr(project, WORK_TIME, &["--format", "json", "merge", "--stage", "cross-database"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["code"], "precondition");
    let plain = String::from_utf8(slr(project, WORK_TIME, &["finalize"]).stderr).unwrap();
    assert!(plain.starts_with("error[precondition]: "), "{plain}");
}

#[test]
fn tampered_bundle_fails_verification() {
    let tmp = tempfile::tempdir().unwrap();
    let (project, bundle) = (tmp.path().join("p"), tmp.path().join("b"));
    fs::create_dir(&project).unwrap();
    common::full_pipeline(&project, &bundle);
    assert_eq!(code(&project, &["export", s(&bundle)]), Some(1), "bundle directory is not empty");
    ok(&project, WORK_TIME, &["verify-bundle", s(&bundle)]);
    let target = bundle.join("06_decided/decided.csv");
    let mut text = fs::read_to_string(&target).unwrap();
    text.push_str("extra\n");
    fs::write(&target, text).unwrap();
    let out = slr(&project, WORK_TIME, &["verify-bundle", s(&bundle)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("06_decided/decided.csv"));
}

#[test]
fn reference_check_is_strict_only_on_request() {
    let tmp = tempfile::tempdir().unwrap();
    let project = tmp.path().join("p");
    fs::create_dir(&project).unwrap();
    common::search_steps(&project);
    let text = ok(&project, WORK_TIME, &["check-refs", s(&e2e("references.tsv")), "--strict"]);
    assert!(text.starts_with("2 of 2 reference(s) found in integrated"), "{text}");
    let missing = tmp.path().join("missing.tsv");
    fs::write(&missing, "A Study Nobody Wrote\t2014\n").unwrap();
    assert_eq!(code(&project, &["check-refs", s(&missing)]), Some(0));
    assert_eq!(code(&project, &["check-refs", s(&missing), "--strict"]), Some(1));
}

#[test]
fn analytics_commands_read_the_decided_set() {
    let tmp = tempfile::tempdir().unwrap();
    let (project, bundle) = (tmp.path().join("p"), tmp.path().join("b"));
    fs::create_dir(&project).unwrap();
    common::full_pipeline(&project, &bundle);
    let terms = json(&project, &["wordfreq"]);
    assert_eq!(terms["frequencies"][0], serde_json::json!(["agile", 3]));
    let graph = json(&project, &["network"]);
    let nodes = graph["nodes"].as_array().unwrap();
    let kuhrmann = nodes.iter().find(|n| n["name"] == "Marco Kuhrmann").unwrap();
    assert_eq!(kuhrmann["papers"], 2);
    let dem = json(&project, &["demographics"]);
    assert_eq!(dem["per_database"]["IEEE"], 6);
    assert_eq!(dem["per_database"]["ACM"], 5);
    let kappa = ok(&project, WORK_TIME, &["kappa"]);
    assert!(kappa.starts_with("cohen_kappa: 0.6753 over 25 item(s), 2 rater(s)"), "{kappa}");
}
