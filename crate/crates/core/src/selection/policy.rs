use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// {0, 1}
    Binary,
    /// {1..5}, neutral 3
    Likert5,
}

impl Scale {
    pub fn lo(self) -> i64 {
        match self {
            Scale::Binary => 0,
            Scale::Likert5 => 1,
        }
    }

    pub fn hi(self) -> i64 {
        match self {
            Scale::Binary => 1,
            Scale::Likert5 => 5,
        }
    }

    pub fn neutral(self) -> Option<i64> {
        match self {
            Scale::Binary => None,
            Scale::Likert5 => Some(3),
        }
    }

    pub fn contains(self, v: i64) -> bool {
        (self.lo()..=self.hi()).contains(&v)
    }

    pub fn values(self) -> Vec<i64> {
        (self.lo()..=self.hi()).collect()
    }

    pub fn check(self, v: i64) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::rejected(
                "off_scale",
                format!(
                    "vote value {v} is off-scale; {} votes must lie in [{}, {}]",
                    self.as_str(),
                    self.lo(),
                    self.hi()
                ),
            ))
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scale::Binary => "binary",
            Scale::Likert5 => "likert5",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregator {
    HeadcountSum,
    Mean,
    Mode,
    #[serde(rename = "weighted_3point")]
    Weighted3Point,
}

impl Aggregator {
    pub fn as_str(self) -> &'static str {
        match self {
            Aggregator::HeadcountSum => "headcount_sum",
            Aggregator::Mean => "mean",
            Aggregator::Mode => "mode",
            Aggregator::Weighted3Point => "weighted_3point",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Workflow {
    TwoReviewerWorkshop,
    TwoPlusOne,
    OverlappingSubsets,
    Custom,
}

impl Workflow {
    pub fn as_str(self) -> &'static str {
        match self {
            Workflow::TwoReviewerWorkshop => "two_reviewer_workshop",
            Workflow::TwoPlusOne => "two_plus_one",
            Workflow::OverlappingSubsets => "overlapping_subsets",
            Workflow::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Option<Workflow> {
        serde_json::from_value(serde_json::Value::String(s.replace('-', "_"))).ok()
    }

    /// Reviewers the workflow needs, if fixed.
    pub fn required_reviewers(self) -> Option<usize> {
        match self {
            Workflow::TwoReviewerWorkshop => Some(2),
            Workflow::TwoPlusOne => Some(3),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionPolicy {
    pub scale: Scale,
    /// Compared against the aggregate; real-valued.
    pub threshold: f64,
    pub aggregator: Aggregator,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub reviewer_weights: BTreeMap<String, f64>,
    pub workflow: Workflow,
    /// Rounds mean and 3-point aggregates half-up before comparing.
    #[serde(default)]
    pub round_half_up: bool,
    /// Exclusion criterion recorded on irrelevant decisions that cite none.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_exclusion: Option<String>,
}

impl SelectionPolicy {
    /// Binary headcount with threshold 1.
    pub fn majority(workflow: Workflow) -> Self {
        SelectionPolicy {
            scale: Scale::Binary,
            threshold: 1.0,
            aggregator: Aggregator::HeadcountSum,
            reviewer_weights: BTreeMap::new(),
            workflow,
            round_half_up: false,
            default_exclusion: None,
        }
    }

    pub fn weight(&self, reviewer: &str) -> f64 {
        self.reviewer_weights.get(reviewer).copied().unwrap_or(1.0)
    }

    /// Checks weights and that `threshold` is reachable by `voters` weight sums.
    pub fn validate(&self, voter_sets: &[Vec<String>]) -> Result<()> {
        if let Some((r, w)) = self.reviewer_weights.iter().find(|(_, w)| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidInput(format!("weight {w} of reviewer {r} must be strictly positive")));
        }
        if !self.threshold.is_finite() {
            return Err(Error::InvalidInput("threshold must be finite".into()));
        }
        let (lo, hi) = (self.scale.lo() as f64, self.scale.hi() as f64);
        let (min, max) = match self.aggregator {
            Aggregator::HeadcountSum => {
                let sums: Vec<f64> = voter_sets
                    .iter()
                    .map(|set| set.iter().map(|r| self.weight(r)).sum())
                    .collect();
                let min_sum = sums.iter().copied().fold(f64::INFINITY, f64::min);
                let max_sum = sums.iter().copied().fold(0.0, f64::max);
                if sums.is_empty() {
                    (lo, hi)
                } else {
                    (lo * min_sum, hi * max_sum)
                }
            }
            _ => (lo, hi),
        };
        if self.threshold < min - 1e-9 || self.threshold > max + 1e-9 {
            return Err(Error::InvalidInput(format!(
                "threshold {} is outside the achievable rating range [{min}, {max}]",
                self.threshold
            )));
        }
        Ok(())
    }
}
