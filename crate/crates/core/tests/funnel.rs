use std::collections::BTreeMap;

use chrono::{DateTime, TimeZone, Utc};
use proptest::prelude::*;
use slr_core::dedup::{DedupConfig, ResolutionPolicy};
use slr_core::ingest::SourceProfile;
use slr_core::model::{DatasetSize, MergeEvent, MergeOperation, MergeStage};
use slr_core::project::{ImportEvent, Project, Query, Template};
use slr_core::report::{
    build_funnel, build_funnel_from, FunnelLog, ROW_ACROSS, ROW_FINAL, ROW_PER_DATABASE, ROW_RESULT, ROW_UNFILTERED,
};
use slr_core::ErrorClass;

fn ts() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2015, 6, 1, 0, 0, 0).unwrap()
}

fn import(db: &str, query: &str, records: usize) -> ImportEvent {
    ImportEvent {
        database: db.into(),
        query: query.into(),
        file: format!("{db}.bib"),
        checksum: String::new(),
        input_entries: records,
        records,
        rejected: 0,
        warnings: 0,
        slot: format!("raw/{db}/{query}"),
        timestamp: ts(),
    }
}

fn event(stage: MergeStage, op: MergeOperation, before: &BTreeMap<String, usize>, removed: &BTreeMap<String, usize>) -> MergeEvent {
    let input: usize = before.values().sum();
    let out: BTreeMap<String, usize> = before.iter().map(|(d, n)| (d.clone(), n - removed.get(d).unwrap_or(&0))).collect();
    MergeEvent {
        stage,
        operation: op,
        label: None,
        inputs: vec![DatasetSize { name: "in".into(), size: input }],
        output_size: out.values().sum(),
        duplicates_removed: if op == MergeOperation::Dedup { removed.values().sum() } else { 0 },
        resolution_notes: Vec::new(),
        removed_by_database: removed.iter().filter(|(_, n)| **n > 0).map(|(d, n)| (d.clone(), *n)).collect(),
        output_by_database: out,
        filtered_databases: Vec::new(),
        removed: Vec::new(),
        pending: Vec::new(),
        timestamp: ts(),
    }
}

#[test]
fn single_database_without_duplicates_keeps_its_count() {
    let mut p = Project::new("one", Template::Standard, ts()).unwrap();
    let q = Query { label: "S1".into(), text: String::new() };
    let bib = "@article{a, title={Alpha}}\n@article{b, title={Beta study}}\n@article{c, title={Gamma review}}";
    p.import(bib, "a.bib", &SourceProfile::bibtex("IEEE"), &q, ts()).unwrap();
    p.merge_per_database(None, ts()).unwrap();
    p.dedupe(MergeStage::PerDatabase, &DedupConfig::default(), &ResolutionPolicy::default(), false, ts()).unwrap();
    p.merge_cross_database(ts()).unwrap();
    p.dedupe(MergeStage::CrossDatabase, &DedupConfig::default(), &ResolutionPolicy::default(), false, ts()).unwrap();
    let f = build_funnel(&p).unwrap();
    for label in [ROW_PER_DATABASE, ROW_ACROSS, ROW_RESULT] {
        assert_eq!(f.row(label).unwrap().total, Some(3), "{label}");
    }
    assert_eq!(f.steps[0].rows[0].total, Some(3));
    assert_eq!(f.row(ROW_FINAL).unwrap().total, None);
    assert!(f.row(ROW_UNFILTERED).is_none());
}

#[test]
fn missing_stages_are_named() {
    let imports = [import("IEEE", "S1", 5), import("ACM", "S1", 4)];
    let before = BTreeMap::from([("IEEE".to_string(), 5)]);
    let cross = event(MergeStage::CrossDatabase, MergeOperation::Integrate, &before, &BTreeMap::new());
    let per_db = event(MergeStage::PerDatabase, MergeOperation::Integrate, &before, &BTreeMap::new());
    let log = FunnelLog {
        databases: vec!["IEEE".into(), "ACM".into()],
        queries: vec![Query { label: "S1".into(), text: String::new() }],
        imports: &imports,
        merges: vec![per_db.clone(), cross],
        baseline: None,
    };
    let err = build_funnel_from(&log).unwrap_err();
    assert_eq!(err.class(), ErrorClass::Precondition);
    assert!(err.to_string().contains("per_database"), "{err}");
    assert_eq!(err.details(), ["ACM"]);

    let dedup = event(MergeStage::CrossDatabase, MergeOperation::Dedup, &before, &BTreeMap::new());
    let imports = [import("IEEE", "S1", 5)];
    let log = FunnelLog {
        databases: vec!["IEEE".into()],
        queries: Vec::new(),
        imports: &imports,
        merges: vec![per_db, dedup],
        baseline: None,
    };
    let err = build_funnel_from(&log).unwrap_err();
    assert!(err.to_string().contains("cross_database"), "{err}");
}

#[test]
fn unbalanced_step_is_an_integrity_error() {
    let imports = [import("IEEE", "S1", 5)];
    let before = BTreeMap::from([("IEEE".to_string(), 5)]);
    let mut e = event(MergeStage::PerDatabase, MergeOperation::Dedup, &before, &BTreeMap::from([("IEEE".into(), 2)]));
    e.output_size += 1;
    let log = FunnelLog {
        databases: vec!["IEEE".into()],
        imports: &imports,
        merges: vec![e],
        ..Default::default()
    };
    assert_eq!(build_funnel_from(&log).unwrap_err().class(), ErrorClass::Integrity);
}

/// Per database: query run sizes, per-db removals, cross removals, filter removals.
type Plan = Vec<(Vec<usize>, usize, usize, usize)>;

fn plan() -> impl Strategy<Value = (Plan, bool)> {
    (
        prop::collection::vec((prop::collection::vec(0usize..400, 1..4), 0usize..1000, 0usize..1000, 0usize..1000), 1..5),
        any::<bool>(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn totals_equal_row_sums((plan, filtered) in plan()) {
        let dbs: Vec<String> = (0..plan.len()).map(|i| format!("DB{i}")).collect();
        let queries: Vec<Query> = (0..3).map(|i| Query { label: format!("S{i}"), text: String::new() }).collect();
        let mut imports = Vec::new();
        let mut merges = Vec::new();
        let mut level: BTreeMap<String, (usize, usize, usize)> = BTreeMap::new();
        let mut expected = BTreeMap::new();
        for (d, (runs, r1, r2, r3)) in dbs.iter().zip(&plan) {
            for (q, n) in runs.iter().enumerate() {
                imports.push(import(d, &format!("S{q}"), *n));
            }
            let raw: usize = runs.iter().sum();
            let a = r1 % (raw + 1);
            let b = r2 % (raw - a + 1);
            let c = r3 % (raw - a - b + 1);
            expected.insert(d.clone(), (raw, raw - a, raw - a - b, raw - a - b - c));
            let one = BTreeMap::from([(d.clone(), raw)]);
            merges.push(event(MergeStage::PerDatabase, MergeOperation::Integrate, &one, &BTreeMap::new()));
            merges.push(event(MergeStage::PerDatabase, MergeOperation::Dedup, &one, &BTreeMap::from([(d.clone(), a)])));
            level.insert(d.clone(), (a, b, c));
        }
        let after_db: BTreeMap<String, usize> = expected.iter().map(|(d, v)| (d.clone(), v.1)).collect();
        merges.push(event(MergeStage::CrossDatabase, MergeOperation::Integrate, &after_db, &BTreeMap::new()));
        let cross_removed: BTreeMap<String, usize> = level.iter().map(|(d, v)| (d.clone(), v.1)).collect();
        merges.push(event(MergeStage::CrossDatabase, MergeOperation::Dedup, &after_db, &cross_removed));
        if filtered {
            let after_cross: BTreeMap<String, usize> = expected.iter().map(|(d, v)| (d.clone(), v.2)).collect();
            let removed: BTreeMap<String, usize> = level.iter().map(|(d, v)| (d.clone(), v.2)).collect();
            let mut f = event(MergeStage::CrossDatabase, MergeOperation::Filter, &after_cross, &removed);
            f.filtered_databases = dbs.clone();
            merges.push(f);
        }
        let log = FunnelLog { databases: dbs.clone(), queries, imports: &imports, merges, baseline: None };
        let f = build_funnel_from(&log).unwrap();
        for r in f.steps.iter().flat_map(|s| &s.rows).filter(|r| r.cells.iter().any(Option::is_some)) {
            prop_assert_eq!(r.total, Some(r.cells.iter().flatten().sum::<u64>()), "{}", r.label);
        }
        let col = |label: &str, i: usize| f.row(label).unwrap().cells[i].unwrap() as usize;
        for (i, d) in dbs.iter().enumerate() {
            let (raw, per_db, across, after_filter) = expected[d];
            let searched: u64 = f.steps[0].rows.iter().filter_map(|r| r.cells[i]).sum();
            prop_assert_eq!(searched as usize, raw);
            prop_assert_eq!(col(ROW_PER_DATABASE, i), per_db);
            prop_assert_eq!(col(ROW_ACROSS, i), across);
            prop_assert_eq!(col(ROW_RESULT, i), if filtered { after_filter } else { across });
        }
        prop_assert_eq!(f.to_csv().lines().count(), 1 + f.steps.iter().map(|s| s.rows.len()).sum::<usize>());
    }
}
