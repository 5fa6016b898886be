//! Selection reports: the search-and-selection funnel, BibTeX export and the
//! handover bundle.

mod bibtex;
mod bundle;
mod funnel;

pub use bibtex::records_to_bibtex;
pub use bundle::{export_bundle, plan_bundle, verify_bundle, BundleFile, BundleGroup, HandoverBundle, GROUPS, MANIFEST};
pub use funnel::{
    build_funnel, build_funnel_from, thousands, FunnelLog, FunnelReport, FunnelRow, FunnelStep, ROW_ACROSS,
    ROW_FINAL, ROW_PER_DATABASE, ROW_RESULT, ROW_UNFILTERED, STEP_DUPLICATES, STEP_FILTERING, STEP_SEARCH,
    STEP_VOTING,
};
