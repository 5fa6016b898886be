use chrono::{TimeZone, Utc};
use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slr_core::dedup::{
    find_duplicates, resolve_duplicates, DedupConfig, NamedFilter, ResolutionPolicy, ResolutionRule, StepInfo,
};
use slr_core::ingest::SourceProfile;
use slr_core::model::{Dataset, MergeOperation, MergeStage, Record, Vehicle};
use slr_core::project::{Project, Query, Template, INTEGRATED};
use slr_core::report::{build_funnel, ROW_ACROSS, ROW_PER_DATABASE, ROW_RESULT};

const DBS: [&str; 3] = ["IEEE", "ACM", "Springer"];
const WORDS: [&str; 24] = [
    "agile", "process", "improvement", "small", "companies", "maturity", "assessment", "model", "hybrid",
    "development", "practices", "survey", "teams", "quality", "metrics", "global", "software", "tailoring",
    "requirements", "testing", "evolution", "framework", "adoption", "industrial",
];

fn ts() -> chrono::DateTime<Utc> {
    Utc.with_ymd_and_hms(2015, 6, 1, 0, 0, 0).unwrap()
}

fn title_pool(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            let words: Vec<&str> = (0..6).map(|_| *WORDS.choose(rng).unwrap()).collect();
            format!("{} study {i}", words.join(" "))
        })
        .collect()
}

fn bib(titles: &[&String], rng: &mut ChaCha8Rng) -> String {
    let mut s = String::new();
    for (i, t) in titles.iter().enumerate() {
        let kind = if rng.random_bool(0.5) { "article" } else { "inproceedings" };
        s.push_str(&format!("@{kind}{{k{i}, title={{{t}}}, year={{{}}}}}\n", 2010 + rng.random_range(0..6)));
    }
    s
}

/// Three databases with three query runs each, drawing titles from a shared
/// pool so that duplicates occur within and across databases.
fn synthetic_project(seed: u64, filter: bool) -> Project {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = rng.random_range(20..120);
    let pool = title_pool(&mut rng, size);
    let mut p = Project::new("synthetic", Template::Standard, ts()).unwrap();
    for db in DBS {
        for q in ["S1", "S2", "S3"] {
            let n = rng.random_range(0..=50);
            let titles: Vec<&String> = (0..n).map(|_| pool.choose(&mut rng).unwrap()).collect();
            let query = Query {
                label: q.into(),
                text: String::new(),
            };
            p.import(&bib(&titles, &mut rng), "gen.bib", &SourceProfile::bibtex(db), &query, ts()).unwrap();
        }
    }
    let policy = ResolutionPolicy {
        auto_resolve_extensions: true,
        ..Default::default()
    };
    p.merge_per_database(None, ts()).unwrap();
    p.dedupe(MergeStage::PerDatabase, &DedupConfig::default(), &policy, false, ts()).unwrap();
    p.merge_cross_database(ts()).unwrap();
    p.dedupe(MergeStage::CrossDatabase, &DedupConfig::default(), &policy, false, ts()).unwrap();
    if filter {
        p.filter(
            NamedFilter {
                name: "F1".into(),
                databases: vec!["Springer".into()],
                require_any: vec!["agile".into()],
                criterion: "E3".into(),
            },
            ts(),
        )
        .unwrap();
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(25))]

    #[test]
    fn funnel_balances_at_every_step(seed in any::<u64>(), filter in any::<bool>()) {
        let p = synthetic_project(seed, filter);
        let integrated = p.dataset(INTEGRATED).unwrap();
        for e in integrated.merge_log() {
            let input: usize = e.inputs.iter().map(|i| i.size).sum();
            prop_assert_eq!(input, e.output_size + e.removed_total());
        }
        let f = build_funnel(&p).unwrap();
        for r in f.steps.iter().flat_map(|s| &s.rows).filter(|r| r.cells.iter().any(Option::is_some)) {
            prop_assert_eq!(r.total, Some(r.cells.iter().flatten().sum::<u64>()));
        }
        let raw: u64 = p.manifest.imports.iter().map(|i| i.records as u64).sum();
        let search: u64 = f.steps[0].rows.iter().filter_map(|r| r.total).sum();
        prop_assert_eq!(raw, search);
        let db_len: u64 = DBS.iter().map(|d| p.dataset(&format!("db/{d}")).unwrap().len() as u64).sum();
        let per_db = f.row(ROW_PER_DATABASE).unwrap().total.unwrap();
        prop_assert_eq!(per_db, db_len);
        let across = f.row(ROW_ACROSS).unwrap().total.unwrap();
        let cross_removed: u64 = integrated
            .merge_log()
            .iter()
            .filter(|e| e.stage == MergeStage::CrossDatabase && e.operation == MergeOperation::Dedup)
            .map(|e| e.removed_total() as u64)
            .sum();
        prop_assert_eq!(across, per_db - cross_removed);
        let result = f.row(ROW_RESULT).unwrap().total.unwrap();
        prop_assert_eq!(result, integrated.len() as u64);
        prop_assert!(raw >= per_db && per_db >= across && across >= result);
    }

    #[test]
    fn second_dedup_removes_nothing(seed in any::<u64>()) {
        let mut p = synthetic_project(seed, false);
        let policy = ResolutionPolicy { auto_resolve_extensions: true, ..Default::default() };
        let before = p.dataset(INTEGRATED).unwrap().len();
        let out = p.dedupe(MergeStage::CrossDatabase, &DedupConfig::default(), &policy, false, ts()).unwrap();
        prop_assert_eq!(out[0].event.as_ref().unwrap().removed_total(), 0);
        prop_assert_eq!(p.dataset(INTEGRATED).unwrap().len(), before);
    }
}

fn rec(id: &str, title: &str, vehicle: Vehicle, year: i32) -> Record {
    let mut r = Record::new(id, title);
    r.vehicle = vehicle;
    r.year = Some(year);
    r.publisher_db = "IEEE".into();
    r
}

fn resolve_once(d: &Dataset, policy: &ResolutionPolicy) -> Dataset {
    let pairs = find_duplicates(d, &DedupConfig::default()).unwrap();
    resolve_duplicates(d, &pairs, policy, &StepInfo::new(MergeStage::CrossDatabase, "t", ts())).unwrap().0
}

#[test]
fn journal_extension_wins_over_conference_paper() {
    let d = Dataset::new(vec![
        rec("IEEE-0001", "Tailoring hybrid development approaches", Vehicle::Conference, 2014),
        rec("IEEE-0002", "Tailoring hybrid development approaches", Vehicle::Journal, 2016),
    ])
    .unwrap();
    let policy = ResolutionPolicy {
        auto_resolve_extensions: true,
        rules: vec![ResolutionRule::JournalOverConference, ResolutionRule::LowerId],
        ..Default::default()
    };
    let out = resolve_once(&d, &policy);
    assert_eq!(out.records().iter().map(|r| r.id.as_str()).collect::<Vec<_>>(), ["IEEE-0002"]);
    let manual = resolve_once(&d, &ResolutionPolicy::default());
    assert_eq!(manual.len(), 2, "extension pairs wait for a decision unless auto-resolved");
}

#[test]
fn full_text_copy_wins() {
    let mut b = rec("IEEE-0002", "Software process improvement in small companies", Vehicle::Conference, 2015);
    b.full_text_available = true;
    let d = Dataset::new(vec![
        rec("IEEE-0001", "Software process improvement in small companies", Vehicle::Conference, 2015),
        b,
    ])
    .unwrap();
    let out = resolve_once(&d, &ResolutionPolicy::default());
    assert_eq!(out.records().iter().map(|r| r.id.as_str()).collect::<Vec<_>>(), ["IEEE-0002"]);
    let again = resolve_once(&out, &ResolutionPolicy::default());
    assert_eq!(again.len(), 1);
    assert_eq!(out.merge_log()[0].removed[0].exclusion_criteria, ["E7"]);
}
