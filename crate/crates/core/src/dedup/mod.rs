//! Two-stage integration of result sets with logged duplicate handling.
//!
//! Query runs of one database are integrated and cleaned first
//! ([`MergeStage::PerDatabase`](crate::model::MergeStage)), then all
//! databases are integrated and cleaned again. Every step appends a
//! [`MergeEvent`](crate::model::MergeEvent) to the dataset's log.

mod duplicates;
mod integrate;
mod normalize;
mod resolve;

pub use duplicates::{
    find_duplicates, title_similarity, DedupConfig, DuplicateKind, DuplicatePair, DEFAULT_EXTENSION_MAX_GAP,
    DEFAULT_THRESHOLD,
};
pub use integrate::{apply_filter, integrate, NamedFilter};
pub use normalize::{normalize_author, normalize_title, split_author_list};
pub use resolve::{resolve_duplicates, ManualResolution, ResolutionPolicy, ResolutionRule, StepInfo};
