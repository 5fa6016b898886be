//! Inter-rater agreement: percent agreement, Cohen's κ (plain and weighted),
//! Fleiss' κ, and the per-item status grid.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::RecordId;
use crate::selection::{Scale, SelectionState};

/// A κ value with its ingredients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    pub value: f64,
    pub observed: f64,
    pub expected: f64,
    /// Expected agreement was 1, so the value follows the single-category convention.
    pub degenerate: bool,
}

fn degenerate_or(p_o: f64, p_e: f64) -> Kappa {
    if (1.0 - p_e).abs() < 1e-12 {
        Kappa {
            value: if (1.0 - p_o).abs() < 1e-12 { 1.0 } else { 0.0 },
            observed: p_o,
            expected: p_e,
            degenerate: true,
        }
    } else {
        Kappa {
            value: (p_o - p_e) / (1.0 - p_e),
            observed: p_o,
            expected: p_e,
            degenerate: false,
        }
    }
}

fn category_index(categories: &[i64], v: i64) -> Result<usize> {
    categories
        .iter()
        .position(|c| *c == v)
        .ok_or_else(|| Error::InvalidInput(format!("value {v} is not one of the categories {categories:?}")))
}

/// Cohen's κ over paired ratings.
pub fn cohen_kappa_pairs(pairs: &[(i64, i64)], categories: &[i64]) -> Result<Kappa> {
    if pairs.is_empty() {
        return Err(Error::InvalidInput("Cohen's kappa needs at least one item".into()));
    }
    let k = categories.len();
    let n = pairs.len() as f64;
    let mut table = vec![vec![0f64; k]; k];
    for (a, b) in pairs {
        table[category_index(categories, *a)?][category_index(categories, *b)?] += 1.0;
    }
    let p_o = (0..k).map(|i| table[i][i]).sum::<f64>() / n;
    let p_e = (0..k)
        .map(|i| {
            let row: f64 = table[i].iter().sum();
            let col: f64 = table.iter().map(|r| r[i]).sum();
            (row / n) * (col / n)
        })
        .sum::<f64>();
    Ok(degenerate_or(p_o, p_e))
}

/// Aligns two raters' votes by item; both must cover the same items.
pub fn align<K: Ord + Clone + std::fmt::Display>(a: &BTreeMap<K, i64>, b: &BTreeMap<K, i64>) -> Result<Vec<(i64, i64)>> {
    let only_a: Vec<String> = a.keys().filter(|k| !b.contains_key(k)).map(|k| format!("only first: {k}")).collect();
    let only_b: Vec<String> = b.keys().filter(|k| !a.contains_key(k)).map(|k| format!("only second: {k}")).collect();
    if !only_a.is_empty() || !only_b.is_empty() {
        let mut details = only_a;
        details.extend(only_b);
        return Err(Error::precondition_with("the two raters voted on different items", details));
    }
    Ok(a.iter().map(|(k, v)| (*v, b[k])).collect())
}

pub fn cohen_kappa<K: Ord + Clone + std::fmt::Display>(
    a: &BTreeMap<K, i64>,
    b: &BTreeMap<K, i64>,
    categories: &[i64],
) -> Result<Kappa> {
    cohen_kappa_pairs(&align(a, b)?, categories)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Linear,
    Quadratic,
}

/// Weighted κ with disagreement weights |i−j|/(k−1), squared for quadratic.
pub fn weighted_cohen_kappa_pairs(pairs: &[(i64, i64)], scale: Scale, weighting: Weighting) -> Result<Kappa> {
    if scale == Scale::Binary {
        return Err(Error::InvalidInput(
            "weighted kappa needs an ordinal scale; use plain Cohen's kappa for binary votes".into(),
        ));
    }
    if pairs.is_empty() {
        return Err(Error::InvalidInput("weighted kappa needs at least one item".into()));
    }
    let cats = scale.values();
    let k = cats.len();
    let n = pairs.len() as f64;
    let mut obs = vec![vec![0f64; k]; k];
    for (a, b) in pairs {
        obs[category_index(&cats, *a)?][category_index(&cats, *b)?] += 1.0;
    }
    let rows: Vec<f64> = obs.iter().map(|r| r.iter().sum::<f64>() / n).collect();
    let cols: Vec<f64> = (0..k).map(|j| obs.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let w = |i: usize, j: usize| {
        let d = (i as f64 - j as f64).abs() / (k as f64 - 1.0);
        match weighting {
            Weighting::Linear => d,
            Weighting::Quadratic => d * d,
        }
    };
    let mut wo = 0.0;
    let mut we = 0.0;
    for i in 0..k {
        for j in 0..k {
            wo += w(i, j) * obs[i][j] / n;
            we += w(i, j) * rows[i] * cols[j];
        }
    }
    if we.abs() < 1e-12 {
        return Ok(Kappa {
            value: if wo.abs() < 1e-12 { 1.0 } else { 0.0 },
            observed: 1.0 - wo,
            expected: 1.0,
            degenerate: true,
        });
    }
    Ok(Kappa {
        value: 1.0 - wo / we,
        observed: 1.0 - wo,
        expected: 1.0 - we,
        degenerate: false,
    })
}

/// Fleiss' κ over an item × category count matrix with `n` ratings per item.
pub fn fleiss_kappa(counts: &[Vec<usize>], n: usize) -> Result<Kappa> {
    if counts.is_empty() {
        return Err(Error::InvalidInput("Fleiss' kappa needs at least one item".into()));
    }
    if n < 2 {
        return Err(Error::InvalidInput("Fleiss' kappa needs at least two ratings per item".into()));
    }
    let bad: Vec<String> = counts
        .iter()
        .enumerate()
        .filter(|(_, row)| row.iter().sum::<usize>() != n)
        .map(|(i, row)| format!("item {} has {} ratings", i + 1, row.iter().sum::<usize>()))
        .collect();
    if !bad.is_empty() {
        return Err(Error::precondition_with(format!("every item needs exactly {n} ratings"), bad));
    }
    let items = counts.len() as f64;
    let nf = n as f64;
    let k = counts[0].len();
    let p_bar = counts
        .iter()
        .map(|row| (row.iter().map(|c| (c * c) as f64).sum::<f64>() - nf) / (nf * (nf - 1.0)))
        .sum::<f64>()
        / items;
    let p_e = (0..k)
        .map(|j| {
            let p = counts.iter().map(|row| row[j] as f64).sum::<f64>() / (items * nf);
            p * p
        })
        .sum::<f64>();
    Ok(degenerate_or(p_bar, p_e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemStatus {
    AgreeInclude,
    AgreeExclude,
    Disagree,
}

/// Binary: all 1 / all 0 / mixed. Likert: all above / all below the
/// neutral value, otherwise disagree.
pub fn item_status(values: &[i64], scale: Scale) -> ItemStatus {
    let (include, exclude): (Box<dyn Fn(i64) -> bool>, Box<dyn Fn(i64) -> bool>) = match scale.neutral() {
        None => (Box::new(|v| v == 1), Box::new(|v| v == 0)),
        Some(n) => (Box::new(move |v| v > n), Box::new(move |v| v < n)),
    };
    if !values.is_empty() && values.iter().all(|v| include(*v)) {
        ItemStatus::AgreeInclude
    } else if !values.is_empty() && values.iter().all(|v| exclude(*v)) {
        ItemStatus::AgreeExclude
    } else {
        ItemStatus::Disagree
    }
}

pub fn agreement_grid<K: Ord + Clone>(columns: &BTreeMap<K, Vec<i64>>, scale: Scale) -> BTreeMap<K, ItemStatus> {
    columns.iter().map(|(k, vs)| (k.clone(), item_status(vs, scale))).collect()
}

/// Fraction of agree_* items.
pub fn percent_agreement<K>(grid: &BTreeMap<K, ItemStatus>) -> f64 {
    if grid.is_empty() {
        return 0.0;
    }
    grid.values().filter(|s| **s != ItemStatus::Disagree).count() as f64 / grid.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgreementMethod {
    Percent,
    CohenKappa,
    WeightedCohenKappa,
    FleissKappa,
}

impl AgreementMethod {
    pub fn parse(s: &str) -> Option<AgreementMethod> {
        Some(match s.trim().to_lowercase().replace('-', "_").as_str() {
            "percent" => AgreementMethod::Percent,
            "cohen" | "cohen_kappa" => AgreementMethod::CohenKappa,
            "weighted" | "weighted_cohen" | "weighted_cohen_kappa" => AgreementMethod::WeightedCohenKappa,
            "fleiss" | "fleiss_kappa" => AgreementMethod::FleissKappa,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AgreementMethod::Percent => "percent",
            AgreementMethod::CohenKappa => "cohen_kappa",
            AgreementMethod::WeightedCohenKappa => "weighted_cohen_kappa",
            AgreementMethod::FleissKappa => "fleiss_kappa",
        }
    }
}

/// Fleiss' κ for the items rated by one fixed set of raters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub raters: Vec<String>,
    pub n_items: usize,
    pub value: Option<f64>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub method: AgreementMethod,
    /// Absent when raters differ between items; see `strata`.
    pub value: Option<f64>,
    pub n_items: usize,
    pub n_raters: usize,
    pub degenerate: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub strata: Vec<Stratum>,
    pub per_item_status: BTreeMap<RecordId, ItemStatus>,
}

/// Items whose primary raters have all voted, with (rater, value) columns.
fn complete_columns(state: &SelectionState) -> BTreeMap<RecordId, Vec<(String, i64)>> {
    let setup = state.setup();
    let mut out = BTreeMap::new();
    for p in &setup.papers {
        let voters = setup.primary_voters(p);
        if voters.is_empty() {
            continue;
        }
        let col: Option<Vec<(String, i64)>> = voters
            .into_iter()
            .map(|(round, r)| state.vote_value(round, &r, p).map(|v| (r, v)))
            .collect();
        if let Some(col) = col {
            out.insert(p.clone(), col);
        }
    }
    out
}

/// Agreement over the votes that feed the aggregate.
pub fn agreement_report(state: &SelectionState, method: AgreementMethod, weighting: Weighting) -> Result<AgreementReport> {
    let scale = state.setup().policy.scale;
    let columns = complete_columns(state);
    let values: BTreeMap<RecordId, Vec<i64>> =
        columns.iter().map(|(p, c)| (p.clone(), c.iter().map(|(_, v)| *v).collect())).collect();
    let grid = agreement_grid(&values, scale);
    let raters: BTreeSet<&String> = columns.values().flat_map(|c| c.iter().map(|(r, _)| r)).collect();
    let mut report = AgreementReport {
        method,
        value: None,
        n_items: columns.len(),
        n_raters: raters.len(),
        degenerate: false,
        strata: Vec::new(),
        per_item_status: grid.clone(),
    };
    if columns.is_empty() {
        return Ok(report);
    }
    match method {
        AgreementMethod::Percent => report.value = Some(percent_agreement(&grid)),
        AgreementMethod::CohenKappa | AgreementMethod::WeightedCohenKappa => {
            if raters.len() != 2 || columns.values().any(|c| c.len() != 2) {
                return Err(Error::precondition(
                    "Cohen's kappa compares exactly two raters on the same items; use fleiss_kappa",
                ));
            }
            let order: Vec<&String> = raters.into_iter().collect();
            let pairs: Vec<(i64, i64)> = columns
                .values()
                .map(|c| {
                    let get = |r: &String| c.iter().find(|(x, _)| x == r).map(|(_, v)| *v).expect("two raters");
                    (get(order[0]), get(order[1]))
                })
                .collect();
            let k = if method == AgreementMethod::CohenKappa {
                cohen_kappa_pairs(&pairs, &scale.values())?
            } else {
                weighted_cohen_kappa_pairs(&pairs, scale, weighting)?
            };
            report.value = Some(k.value);
            report.degenerate = k.degenerate;
        }
        AgreementMethod::FleissKappa => {
            let cats = scale.values();
            let mut strata: BTreeMap<Vec<String>, Vec<Vec<usize>>> = BTreeMap::new();
            for col in columns.values() {
                let mut rs: Vec<String> = col.iter().map(|(r, _)| r.clone()).collect();
                rs.sort();
                let mut counts = vec![0usize; cats.len()];
                for (_, v) in col {
                    counts[category_index(&cats, *v)?] += 1;
                }
                strata.entry(rs).or_default().push(counts);
            }
            for (rs, rows) in strata {
                let k = if rs.len() >= 2 { Some(fleiss_kappa(&rows, rs.len())?) } else { None };
                report.strata.push(Stratum {
                    n_items: rows.len(),
                    value: k.map(|k| k.value),
                    degenerate: k.map(|k| k.degenerate).unwrap_or(false),
                    raters: rs,
                });
            }
            if report.strata.len() == 1 {
                report.value = report.strata[0].value;
                report.degenerate = report.strata[0].degenerate;
            }
        }
    }
    Ok(report)
}
