use proptest::prelude::*;
use slr_core::agreement::{cohen_kappa_pairs, fleiss_kappa, weighted_cohen_kappa_pairs, Weighting};
use slr_core::selection::Scale;

/// Cohen's κ from agreement counts over items and per-rater marginals.
fn cohen_oracle(pairs: &[(i64, i64)], cats: &[i64]) -> f64 {
    let n = pairs.len() as f64;
    let p_o = pairs.iter().filter(|(a, b)| a == b).count() as f64 / n;
    let p_e: f64 = cats
        .iter()
        .map(|c| {
            let a = pairs.iter().filter(|(x, _)| x == c).count() as f64 / n;
            let b = pairs.iter().filter(|(_, y)| y == c).count() as f64 / n;
            a * b
        })
        .sum();
    if (1.0 - p_e).abs() < 1e-12 {
        if (1.0 - p_o).abs() < 1e-12 { 1.0 } else { 0.0 }
    } else {
        (p_o - p_e) / (1.0 - p_e)
    }
}

/// Weighted κ as one minus observed over chance disagreement, where chance
/// disagreement averages every cross pairing of the two raters' values.
fn weighted_oracle(pairs: &[(i64, i64)], lo: i64, hi: i64, quadratic: bool) -> Option<f64> {
    let d = |a: i64, b: i64| {
        let x = (a - b).abs() as f64 / (hi - lo) as f64;
        if quadratic { x * x } else { x }
    };
    let n = pairs.len() as f64;
    let observed: f64 = pairs.iter().map(|(a, b)| d(*a, *b)).sum::<f64>() / n;
    let mut chance = 0.0;
    for (a, _) in pairs {
        for (_, b) in pairs {
            chance += d(*a, *b);
        }
    }
    chance /= n * n;
    (chance > 1e-12).then(|| 1.0 - observed / chance)
}

/// Fleiss' κ from explicit per-rater labels, counting agreeing rater pairs.
fn fleiss_oracle(labels: &[Vec<usize>], k: usize) -> f64 {
    let n = labels[0].len();
    let items = labels.len() as f64;
    let mut p_bar = 0.0;
    for item in labels {
        let mut agree = 0usize;
        for i in 0..n {
            for j in 0..n {
                if i != j && item[i] == item[j] {
                    agree += 1;
                }
            }
        }
        p_bar += agree as f64 / (n * (n - 1)) as f64;
    }
    p_bar /= items;
    let p_e: f64 = (0..k)
        .map(|c| {
            let p = labels.iter().flatten().filter(|x| **x == c).count() as f64 / (items * n as f64);
            p * p
        })
        .sum();
    if (1.0 - p_e).abs() < 1e-12 {
        if (1.0 - p_bar).abs() < 1e-12 { 1.0 } else { 0.0 }
    } else {
        (p_bar - p_e) / (1.0 - p_e)
    }
}

fn counts_of(labels: &[Vec<usize>], k: usize) -> Vec<Vec<usize>> {
    labels
        .iter()
        .map(|item| (0..k).map(|c| item.iter().filter(|x| **x == c).count()).collect())
        .collect()
}

fn hand_fixture() -> Vec<(i64, i64)> {
    let mut v = vec![(1, 1); 10];
    v.extend([(0, 0); 5]);
    v.extend([(1, 0); 3]);
    v.extend([(0, 1); 2]);
    v
}

#[test]
fn hand_contingency_table() {
    let k = cohen_kappa_pairs(&hand_fixture(), &[0, 1]).unwrap();
    assert!((k.observed - 0.75).abs() < 1e-12);
    assert!((k.expected - 0.53).abs() < 1e-12);
    assert!((k.value - 0.468).abs() < 1e-3);
    assert!((k.value - cohen_oracle(&hand_fixture(), &[0, 1])).abs() < 1e-12);
}

#[test]
fn fleiss_hand_fixture() {
    let counts: Vec<Vec<usize>> = [2usize, 1, 3, 0].iter().map(|inc| vec![3 - inc, *inc]).collect();
    let k = fleiss_kappa(&counts, 3).unwrap();
    assert!((k.observed - 2.0 / 3.0).abs() < 1e-12);
    assert!((k.expected - 0.5).abs() < 1e-12);
    assert!((k.value - 1.0 / 3.0).abs() < 1e-9);
}

#[test]
fn perfect_agreement_is_one() {
    let pairs = [(1, 1), (0, 0), (1, 1), (0, 0)];
    assert_eq!(cohen_kappa_pairs(&pairs, &[0, 1]).unwrap().value, 1.0);
    let counts = vec![vec![0, 3], vec![3, 0], vec![0, 3]];
    assert_eq!(fleiss_kappa(&counts, 3).unwrap().value, 1.0);
    let single = [(1, 1), (1, 1)];
    let k = cohen_kappa_pairs(&single, &[0, 1]).unwrap();
    assert!(k.degenerate && k.value == 1.0);
}

#[test]
fn near_misses_score_higher_than_far_misses() {
    let mut base: Vec<(i64, i64)> = (1..=5).map(|v| (v, v)).collect();
    base.extend([(2, 2), (4, 4)]);
    let mut near = base.clone();
    near.push((1, 2));
    let mut far = base;
    far.push((1, 5));
    for w in [Weighting::Linear, Weighting::Quadratic] {
        let a = weighted_cohen_kappa_pairs(&near, Scale::Likert5, w).unwrap().value;
        let b = weighted_cohen_kappa_pairs(&far, Scale::Likert5, w).unwrap().value;
        assert!(a > b, "{w:?}: {a} vs {b}");
    }
    assert!(weighted_cohen_kappa_pairs(&near, Scale::Binary, Weighting::Linear).is_err());
}

fn binary_pairs() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((0i64..=1, 0i64..=1), 1..60)
}

fn likert_pairs() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((1i64..=5, 1i64..=5), 1..60)
}

fn rater_labels() -> impl Strategy<Value = (Vec<Vec<usize>>, usize)> {
    (2usize..=4, 2usize..=6, 1usize..=30)
        .prop_flat_map(|(k, n, m)| (prop::collection::vec(prop::collection::vec(0..k, n), m), Just(k)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn cohen_matches_oracle(pairs in binary_pairs()) {
        let k = cohen_kappa_pairs(&pairs, &[0, 1]).unwrap();
        prop_assert!((k.value - cohen_oracle(&pairs, &[0, 1])).abs() < 1e-9);
        prop_assert!(k.value <= 1.0 + 1e-12);
    }

    #[test]
    fn weighted_matches_oracle(pairs in likert_pairs(), quadratic in any::<bool>()) {
        let w = if quadratic { Weighting::Quadratic } else { Weighting::Linear };
        let k = weighted_cohen_kappa_pairs(&pairs, Scale::Likert5, w).unwrap();
        match weighted_oracle(&pairs, 1, 5, quadratic) {
            Some(v) => prop_assert!((k.value - v).abs() < 1e-9, "{} vs {}", k.value, v),
            None => prop_assert!(k.degenerate),
        }
    }

    #[test]
    fn fleiss_matches_oracle((labels, k) in rater_labels()) {
        let n = labels[0].len();
        let got = fleiss_kappa(&counts_of(&labels, k), n).unwrap();
        prop_assert!((got.value - fleiss_oracle(&labels, k)).abs() < 1e-9);
    }

    #[test]
    fn kappas_ignore_item_order(pairs in likert_pairs(), seed in any::<u64>()) {
        let mut shuffled = pairs.clone();
        let len = shuffled.len();
        let mut s = seed;
        for i in (1..len).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        let cats = Scale::Likert5.values();
        let a = cohen_kappa_pairs(&pairs, &cats).unwrap().value;
        let b = cohen_kappa_pairs(&shuffled, &cats).unwrap().value;
        prop_assert!((a - b).abs() < 1e-12);
        let a = weighted_cohen_kappa_pairs(&pairs, Scale::Likert5, Weighting::Quadratic).unwrap().value;
        let b = weighted_cohen_kappa_pairs(&shuffled, Scale::Likert5, Weighting::Quadratic).unwrap().value;
        prop_assert!((a - b).abs() < 1e-12);
        let counts: Vec<Vec<usize>> =
            pairs.iter().map(|(x, y)| cats.iter().map(|c| (x == c) as usize + (y == c) as usize).collect()).collect();
        let mut rev = counts.clone();
        rev.reverse();
        prop_assert!((fleiss_kappa(&counts, 2).unwrap().value - fleiss_kappa(&rev, 2).unwrap().value).abs() < 1e-12);
    }
}
