use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::policy::{Aggregator, Scale, SelectionPolicy};
use crate::error::{Error, Result};

pub const EQ_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relevance {
    Relevant,
    Irrelevant,
    ToDecide,
}

impl Relevance {
    pub fn as_str(self) -> &'static str {
        match self {
            Relevance::Relevant => "relevant",
            Relevance::Irrelevant => "irrelevant",
            Relevance::ToDecide => "to_decide",
        }
    }

    pub fn parse(s: &str) -> Option<Relevance> {
        match s.trim().to_lowercase().replace('-', "_").as_str() {
            "relevant" | "1" | "include" => Some(Relevance::Relevant),
            "irrelevant" | "0" | "exclude" => Some(Relevance::Irrelevant),
            "to_decide" => Some(Relevance::ToDecide),
            _ => None,
        }
    }
}

/// Weighted headcount: Σ w·v over (reviewer, value) votes.
pub fn rating(votes: &[(&str, i64)], weights: &BTreeMap<String, f64>, scale: Scale) -> Result<f64> {
    if votes.is_empty() {
        return Err(Error::InvalidInput("a rating needs at least one vote".into()));
    }
    let mut sum = 0.0;
    for (reviewer, v) in votes {
        scale.check(*v)?;
        sum += weights.get(*reviewer).copied().unwrap_or(1.0) * *v as f64;
    }
    Ok(sum)
}

/// |(min + 4·mean + max) / 6|
pub fn weighted_3point_rating(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidInput("the 3-point rating needs at least one vote".into()));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok(((min + 4.0 * mean + max) / 6.0).abs())
}

/// 1 above, 0 below, to-decide at the threshold.
pub fn relevance(rating: f64, threshold: f64) -> Relevance {
    if (rating - threshold).abs() <= EQ_TOLERANCE {
        Relevance::ToDecide
    } else if rating > threshold {
        Relevance::Relevant
    } else {
        Relevance::Irrelevant
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelativeMethod {
    Mean,
    Mode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    Value(f64),
    /// Several values share the highest frequency.
    Indeterminate,
}

pub fn aggregate_relative(values: &[i64], method: RelativeMethod) -> Result<Aggregate> {
    if values.is_empty() {
        return Err(Error::InvalidInput("no votes to aggregate".into()));
    }
    Ok(match method {
        RelativeMethod::Mean => Aggregate::Value(values.iter().sum::<i64>() as f64 / values.len() as f64),
        RelativeMethod::Mode => {
            let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
            for v in values {
                *counts.entry(*v).or_default() += 1;
            }
            let top = counts.values().copied().max().unwrap_or(0);
            let modes: Vec<i64> = counts.iter().filter(|(_, c)| **c == top).map(|(v, _)| *v).collect();
            if modes.len() == 1 {
                Aggregate::Value(modes[0] as f64)
            } else {
                Aggregate::Indeterminate
            }
        }
    })
}

fn round_half_up(x: f64) -> f64 {
    (x + 0.5).floor()
}

/// The policy's aggregate over one paper's votes.
pub fn aggregate(policy: &SelectionPolicy, votes: &[(&str, i64)]) -> Result<Aggregate> {
    for (_, v) in votes {
        policy.scale.check(*v)?;
    }
    let values: Vec<i64> = votes.iter().map(|(_, v)| *v).collect();
    let agg = match policy.aggregator {
        Aggregator::HeadcountSum => Aggregate::Value(rating(votes, &policy.reviewer_weights, policy.scale)?),
        Aggregator::Mean => aggregate_relative(&values, RelativeMethod::Mean)?,
        Aggregator::Mode => aggregate_relative(&values, RelativeMethod::Mode)?,
        Aggregator::Weighted3Point => {
            let f: Vec<f64> = values.iter().map(|v| *v as f64).collect();
            Aggregate::Value(weighted_3point_rating(&f)?)
        }
    };
    Ok(match agg {
        Aggregate::Value(x)
            if policy.round_half_up && matches!(policy.aggregator, Aggregator::Mean | Aggregator::Weighted3Point) =>
        {
            Aggregate::Value(round_half_up(x))
        }
        other => other,
    })
}

/// Relevance of an aggregate under the policy. Indeterminate modes and
/// relative aggregates at the scale's neutral value stay undecided.
pub fn classify(policy: &SelectionPolicy, agg: Aggregate) -> Relevance {
    match agg {
        Aggregate::Indeterminate => Relevance::ToDecide,
        Aggregate::Value(x) => {
            let relative = policy.aggregator != Aggregator::HeadcountSum;
            if let (true, Some(n)) = (relative, policy.scale.neutral()) {
                if (x - n as f64).abs() <= EQ_TOLERANCE {
                    return Relevance::ToDecide;
                }
            }
            relevance(x, policy.threshold)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selection::Workflow;

    #[test]
    fn headcount() {
        let w = BTreeMap::new();
        assert_eq!(rating(&[("a", 1), ("b", 0), ("c", 1)], &w, Scale::Binary).unwrap(), 2.0);
        assert!(rating(&[], &w, Scale::Binary).is_err());
        assert!(rating(&[("a", 2)], &w, Scale::Binary).is_err());
        let w: BTreeMap<String, f64> = [("senior".to_string(), 2.0), ("junior".to_string(), 1.0)].into();
        assert_eq!(rating(&[("senior", 1), ("junior", 1)], &w, Scale::Binary).unwrap(), 3.0);
    }

    #[test]
    fn three_point() {
        assert_eq!(weighted_3point_rating(&[3.0, 3.0, 3.0]).unwrap(), 3.0);
        assert_eq!(weighted_3point_rating(&[1.0, 3.0, 5.0]).unwrap(), 3.0);
        assert!((weighted_3point_rating(&[5.0, 4.0, 4.0]).unwrap() - 4.3889).abs() < 1e-4);
        assert!(weighted_3point_rating(&[]).is_err());
    }

    #[test]
    fn trichotomy() {
        assert_eq!(relevance(2.0, 1.0), Relevance::Relevant);
        assert_eq!(relevance(0.0, 1.0), Relevance::Irrelevant);
        assert_eq!(relevance(1.0, 1.0), Relevance::ToDecide);
        assert_eq!(relevance(0.1 + 0.2, 0.3), Relevance::ToDecide);
    }

    #[test]
    fn relative() {
        assert_eq!(aggregate_relative(&[5, 5, 4], RelativeMethod::Mode).unwrap(), Aggregate::Value(5.0));
        assert_eq!(aggregate_relative(&[0, 0, 1, 1], RelativeMethod::Mode).unwrap(), Aggregate::Indeterminate);
        assert_eq!(aggregate_relative(&[1, 3, 5], RelativeMethod::Mean).unwrap(), Aggregate::Value(3.0));
    }

    #[test]
    fn neutral_and_rounding() {
        let mut p = SelectionPolicy::majority(Workflow::Custom);
        p.scale = Scale::Likert5;
        p.aggregator = Aggregator::Mean;
        p.threshold = 3.5;
        assert_eq!(classify(&p, aggregate(&p, &[("a", 3), ("b", 3)]).unwrap()), Relevance::ToDecide);
        assert_eq!(classify(&p, aggregate(&p, &[("a", 4), ("b", 5)]).unwrap()), Relevance::Relevant);
        p.threshold = 4.0;
        p.round_half_up = true;
        assert_eq!(aggregate(&p, &[("a", 4), ("b", 5)]).unwrap(), Aggregate::Value(5.0));
        assert_eq!(classify(&p, aggregate(&p, &[("a", 4), ("b", 4)]).unwrap()), Relevance::ToDecide);
    }
}
