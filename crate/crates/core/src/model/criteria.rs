use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionKind {
    Inclusion,
    Exclusion,
}

impl CriterionKind {
    fn prefix(self) -> char {
        match self {
            CriterionKind::Inclusion => 'I',
            CriterionKind::Exclusion => 'E',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Criterion {
    /// Short code such as `I1` or `E7`.
    pub id: String,
    pub kind: CriterionKind,
    pub text: String,
}

/// Id of the exclusion criterion recorded on records removed as duplicates.
pub const DUPLICATE_CRITERION: &str = "E7";

/// Inclusion/exclusion criteria with unique ids whose prefix matches the kind.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CriterionSet {
    criteria: Vec<Criterion>,
}

impl CriterionSet {
    pub fn new(criteria: Vec<Criterion>) -> Result<Self> {
        let mut set = CriterionSet::default();
        for c in criteria {
            set.push(c)?;
        }
        Ok(set)
    }

    pub fn push(&mut self, c: Criterion) -> Result<()> {
        let prefix_ok = c
            .id
            .chars()
            .next()
            .map(|p| p.to_ascii_uppercase() == c.kind.prefix())
            .unwrap_or(false);
        if !prefix_ok {
            return Err(Error::InvalidInput(format!(
                "criterion id {} does not match its kind ({:?})",
                c.id, c.kind
            )));
        }
        if self.get(&c.id).is_some() {
            return Err(Error::InvalidInput(format!("duplicate criterion id {}", c.id)));
        }
        self.criteria.push(c);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.id.eq_ignore_ascii_case(id))
    }

    pub fn is_exclusion(&self, id: &str) -> bool {
        self.get(id).map(|c| c.kind == CriterionKind::Exclusion).unwrap_or(false)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Criterion> {
        self.criteria.iter()
    }

    pub fn len(&self) -> usize {
        self.criteria.len()
    }

    pub fn is_empty(&self) -> bool {
        self.criteria.is_empty()
    }

    pub fn count(&self, kind: CriterionKind) -> usize {
        self.criteria.iter().filter(|c| c.kind == kind).count()
    }

    /// The eight general-purpose criteria: two inclusion, six exclusion.
    pub fn standard() -> Self {
        let rows: [(&str, CriterionKind, &str); 8] = [
            ("I1", CriterionKind::Inclusion, "Title, keywords and abstract explicitly relate the paper to [topic]."),
            ("I2", CriterionKind::Inclusion, "The paper contributes to [topic], e.g. [topic list]."),
            ("E3", CriterionKind::Exclusion, "The paper is not written in English [or another accepted language]."),
            ("E4", CriterionKind::Exclusion, "The paper is outside the domain [domain name(s)]."),
            ("E5", CriterionKind::Exclusion, "The paper is only a tutorial, workshop or poster summary."),
            ("E6", CriterionKind::Exclusion, "The paper mentions [topic] in its related work only."),
            ("E7", CriterionKind::Exclusion, "The paper is a duplicate within the result set."),
            ("E8", CriterionKind::Exclusion, "The full text of the paper cannot be obtained."),
        ];
        let criteria = rows
            .into_iter()
            .map(|(id, kind, text)| Criterion {
                id: id.to_string(),
                kind,
                text: text.to_string(),
            })
            .collect();
        CriterionSet { criteria }
    }
}

/// Generic research questions prefilled by the standard project template.
pub fn standard_research_questions() -> Vec<String> {
    [
        "RQ1: Which and how many publications on [topic] exist?",
        "RQ2: Which and how many publications on [topic] appeared per year?",
        "RQ3: How scientifically mature is the publication set?",
        "RQ4: What kinds of contribution does the publication set make?",
        "RQ5: Which mainstreams can be observed in the publication set?",
        "RQ6: Which new approaches for [topic] are available?",
    ]
    .into_iter()
    .map(String::from)
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetadataDimension {
    Study,
    Context,
    Other,
}

/// A user-declared metadata column, optionally with a controlled vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataClass {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowed_values: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<MetadataDimension>,
}

impl MetadataClass {
    pub fn new(name: impl Into<String>) -> Self {
        MetadataClass {
            name: name.into(),
            allowed_values: None,
            dimension: None,
        }
    }

    pub fn allows(&self, value: &str) -> bool {
        match &self.allowed_values {
            None => true,
            Some(vals) => vals.iter().any(|v| v == value),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_set_shape() {
        let s = CriterionSet::standard();
        let ids: Vec<_> = s.iter().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, ["I1", "I2", "E3", "E4", "E5", "E6", "E7", "E8"]);
        assert_eq!(s.count(CriterionKind::Exclusion), 6);
        assert_eq!(s.count(CriterionKind::Inclusion), 2);
    }

    #[test]
    fn rejects_prefix_mismatch_and_duplicates() {
        let bad = Criterion {
            id: "I9".into(),
            kind: CriterionKind::Exclusion,
            text: String::new(),
        };
        assert!(CriterionSet::new(vec![bad]).is_err());
        let mut s = CriterionSet::standard();
        let dup = Criterion {
            id: "E7".into(),
            kind: CriterionKind::Exclusion,
            text: "again".into(),
        };
        assert!(s.push(dup).is_err());
    }
}
