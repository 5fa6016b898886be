use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::RecordId;

/// Reviewer indices per paper index, for `m` papers, `k` reviewers and
/// coverage `c`.
///
/// Papers and reviewers are shuffled with the seed, then paper `i` takes the
/// `c` consecutive reviewer slots starting at `i·c` (mod `k`). Slots wrap
/// around evenly, so every paper gets `c` distinct reviewers and loads differ
/// by at most one.
pub fn overlapping_subsets(m: usize, k: usize, c: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k == 0 {
        return Err(Error::InvalidInput("at least one reviewer is required".into()));
    }
    if c == 0 || c > k {
        return Err(Error::InvalidInput(format!(
            "coverage {c} must lie between 1 and the number of reviewers ({k})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut papers: Vec<usize> = (0..m).collect();
    papers.shuffle(&mut rng);
    let mut reviewers: Vec<usize> = (0..k).collect();
    reviewers.shuffle(&mut rng);
    let mut out = vec![Vec::with_capacity(c); m];
    for (i, p) in papers.into_iter().enumerate() {
        let mut rs: Vec<usize> = (0..c).map(|j| reviewers[(i * c + j) % k]).collect();
        rs.sort_unstable();
        out[p] = rs;
    }
    Ok(out)
}

/// Reviewer → assigned papers (in input order).
pub type Assignment = BTreeMap<String, Vec<RecordId>>;

pub fn assign_overlapping_subsets(
    papers: &[RecordId],
    reviewers: &[String],
    coverage: usize,
    seed: u64,
) -> Result<Assignment> {
    let per_paper = overlapping_subsets(papers.len(), reviewers.len(), coverage, seed)?;
    let mut out: Assignment = reviewers.iter().map(|r| (r.clone(), Vec::new())).collect();
    for (p, rs) in papers.iter().zip(per_paper) {
        for r in rs {
            out.get_mut(&reviewers[r]).expect("reviewer present").push(p.clone());
        }
    }
    Ok(out)
}
