//! Tooling for the early stages of systematic literature studies: ingesting
//! database exports, integrating and deduplicating them, running reviewer
//! voting with agreement statistics, and producing selection reports and
//! handover bundles.

pub mod agreement;
pub mod analytics;
pub mod clock;
pub mod dedup;
pub mod error;
pub mod ingest;
pub mod model;
pub mod project;
pub mod report;
pub mod selection;
pub mod store;

pub use error::{Error, ErrorClass, Result};
