use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use slr_core::analytics::{coauthor_graph, demographics, term_frequency, CodingMap, TermScope, UNKNOWN};
use slr_core::dedup::normalize_author;
use slr_core::model::{Dataset, MetadataClass, Record};

const NAMES: [&str; 8] = ["Ann Adams", "Bob Baker", "Cy Cole", "Di Dunn", "Ed Eve", "Flo Fox", "Gus Gray", "Hal Hill"];
const KEYWORDS: [&str; 7] = ["SPI", "spi", "agile", "Small and Medium Enterprises", "sme", "the", "Process"];

fn dataset(papers: &[(Vec<usize>, Vec<usize>, String, Option<i32>)]) -> Dataset {
    Dataset::new(
        papers
            .iter()
            .enumerate()
            .map(|(i, (authors, keywords, abs, year))| {
                let mut r = Record::new(format!("A-{i:04}"), format!("paper {i}"));
                r.authors = authors.iter().map(|a| normalize_author(NAMES[*a]).0).collect();
                r.keywords = keywords.iter().map(|k| KEYWORDS[*k].to_string()).collect();
                r.abstract_text = abs.clone();
                r.year = *year;
                r
            })
            .collect(),
    )
    .unwrap()
}

fn papers() -> impl Strategy<Value = Vec<(Vec<usize>, Vec<usize>, String, Option<i32>)>> {
    prop::collection::vec(
        (
            prop::collection::vec(0usize..NAMES.len(), 0..5),
            prop::collection::vec(0usize..KEYWORDS.len(), 0..5),
            "[a-z ,.]{0,60}",
            prop::option::of(2010i32..2017),
        ),
        0..=20,
    )
}

fn reversed(d: &Dataset) -> Dataset {
    let mut recs = d.records().to_vec();
    recs.reverse();
    Dataset::new(recs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn edge_weights_match_pairwise_counts(ps in papers()) {
        let d = dataset(&ps);
        let g = coauthor_graph(&d);
        for a in 0..NAMES.len() {
            for b in (a + 1)..NAMES.len() {
                let shared = ps.iter().filter(|(au, ..)| au.contains(&a) && au.contains(&b)).count();
                prop_assert_eq!(g.weight(NAMES[a], NAMES[b]), shared, "{} / {}", NAMES[a], NAMES[b]);
            }
            let papers_of = ps.iter().filter(|(au, ..)| au.contains(&a)).count();
            let node = g.nodes.iter().find(|n| n.name == NAMES[a]).map(|n| n.papers).unwrap_or(0);
            prop_assert_eq!(node, papers_of);
        }
        prop_assert_eq!(coauthor_graph(&reversed(&d)), g);
    }

    #[test]
    fn term_counts_are_conserved(ps in papers()) {
        let d = dataset(&ps);
        let stop = vec!["the".to_string()];
        let coding = CodingMap::new(BTreeMap::from([("small and medium enterprises".into(), "sme".into())])).unwrap();
        let tf = term_frequency(&d, TermScope::Keywords, Some(&coding), &stop);
        let expected: usize = ps.iter().flat_map(|(_, k, ..)| k).filter(|k| KEYWORDS[**k] != "the").count();
        prop_assert_eq!(tf.total(), expected);
        prop_assert_eq!(tf.counts.get("sme").copied().unwrap_or(0),
            ps.iter().flat_map(|(_, k, ..)| k).filter(|k| **k == 3 || **k == 4).count());
        prop_assert_eq!(term_frequency(&reversed(&d), TermScope::Keywords, Some(&coding), &stop), tf);

        let abs_tf = term_frequency(&d, TermScope::Abstracts, None, &stop);
        let tokens: usize = ps
            .iter()
            .flat_map(|(_, _, a, _)| a.split(|c: char| !c.is_alphanumeric()))
            .filter(|t| t.chars().count() >= 3 && *t != "the")
            .count();
        prop_assert_eq!(abs_tf.total(), tokens);
        prop_assert_eq!(term_frequency(&reversed(&d), TermScope::Abstracts, None, &stop), abs_tf);
    }

    #[test]
    fn demographics_partition_the_dataset(ps in papers()) {
        let d = dataset(&ps);
        let dem = demographics(&d, &[MetadataClass::new("method")]);
        prop_assert_eq!(dem.per_year.values().sum::<usize>(), d.len());
        prop_assert_eq!(dem.per_vehicle.values().sum::<usize>(), d.len());
        prop_assert_eq!(dem.per_database.values().sum::<usize>(), d.len());
        prop_assert_eq!(dem.per_metadata["method"].values().sum::<usize>(), d.len());
        let missing = ps.iter().filter(|p| p.3.is_none()).count();
        prop_assert_eq!(dem.per_year.get(UNKNOWN).copied().unwrap_or(0), missing);
        prop_assert_eq!(demographics(&reversed(&d), &[MetadataClass::new("method")]), dem);
    }
}

#[test]
fn keyword_examples() {
    let d = dataset(&[(vec![], vec![0, 2, 1], String::new(), None)]);
    let tf = term_frequency(&d, TermScope::Keywords, None, &[]);
    assert_eq!(tf.counts, BTreeMap::from([("spi".to_string(), 2), ("agile".to_string(), 1)]));
    assert!(term_frequency(&dataset(&[]), TermScope::Keywords, None, &[]).counts.is_empty());
    let g = coauthor_graph(&dataset(&[(vec![0, 1], vec![], String::new(), None)]));
    let names: BTreeSet<&str> = g.nodes.iter().map(|n| n.name.as_str()).collect();
    assert_eq!(names, BTreeSet::from(["Ann Adams", "Bob Baker"]));
    assert_eq!(g.weight("Ann Adams", "Bob Baker"), 1);
}
