//! Wall-clock access with a reproducibility override.
//!
//! Setting `SLR_FIXED_TIME` to an RFC 3339 timestamp pins every timestamp the
//! toolkit records, which makes scripted runs byte-reproducible.

use chrono::{DateTime, SecondsFormat, Utc};

pub const FIXED_TIME_ENV: &str = "SLR_FIXED_TIME";

pub fn now() -> DateTime<Utc> {
    std::env::var(FIXED_TIME_ENV)
        .ok()
        .and_then(|v| DateTime::parse_from_rfc3339(v.trim()).ok())
        .map(|t| t.with_timezone(&Utc))
        .unwrap_or_else(Utc::now)
}

pub fn format(ts: &DateTime<Utc>) -> String {
    ts.to_rfc3339_opts(SecondsFormat::Secs, true)
}
