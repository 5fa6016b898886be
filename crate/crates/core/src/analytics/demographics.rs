use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{Dataset, MetadataClass};

pub const UNKNOWN: &str = "unknown";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demographics {
    pub total: usize,
    pub per_year: BTreeMap<String, usize>,
    pub per_vehicle: BTreeMap<String, usize>,
    pub per_database: BTreeMap<String, usize>,
    /// Class → value → count; records without a value land in `unknown`.
    pub per_metadata: BTreeMap<String, BTreeMap<String, usize>>,
}

pub fn demographics(d: &Dataset, classes: &[MetadataClass]) -> Demographics {
    let mut out = Demographics {
        total: d.len(),
        per_year: BTreeMap::new(),
        per_vehicle: BTreeMap::new(),
        per_database: BTreeMap::new(),
        per_metadata: classes.iter().map(|c| (c.name.clone(), BTreeMap::new())).collect(),
    };
    for r in d.records() {
        let year = r.year.map(|y| y.to_string()).unwrap_or_else(|| UNKNOWN.into());
        *out.per_year.entry(year).or_default() += 1;
        *out.per_vehicle.entry(r.vehicle.as_str().to_string()).or_default() += 1;
        *out.per_database.entry(r.publisher_db.clone()).or_default() += 1;
        for c in classes {
            let v = r.metadata.get(&c.name).filter(|v| !v.is_empty()).cloned().unwrap_or_else(|| UNKNOWN.into());
            *out.per_metadata.get_mut(&c.name).expect("declared").entry(v).or_default() += 1;
        }
    }
    out
}
