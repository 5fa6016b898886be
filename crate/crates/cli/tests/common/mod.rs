#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn e2e(name: &str) -> PathBuf {
    fixture("e2e").join(name)
}

/// Runs `slr` against a project directory with a pinned clock.
pub fn slr(project: &Path, time: &str, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slr"))
        .args(args)
        .env("SLRKIT_PROJECT", project)
        .env("SLR_FIXED_TIME", time)
        .env_remove("RUST_LOG")
        .output()
        .expect("slr runs")
}

pub fn ok(project: &Path, time: &str, args: &[&str]) -> String {
    let out = slr(project, time, args);
    assert!(
        out.status.success(),
        "slr {args:?} failed with {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

pub const IMPORT_TIMES: [&str; 3] = ["2015-03-02T10:00:00Z", "2015-03-05T10:00:00Z", "2015-03-09T10:00:00Z"];
pub const WORK_TIME: &str = "2015-04-01T08:00:00Z";
pub const FINAL_TIME: &str = "2015-06-30T12:00:00Z";

pub fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Import, merge and deduplicate the 30-record fixture.
pub fn search_steps(project: &Path) {
    ok(project, WORK_TIME, &["init", "--template", "standard", "--name", "e2e"]);
    let (s1, s2, acm, profile) = (e2e("ieee_s1.bib"), e2e("ieee_s2.bib"), e2e("acm_s1.csv"), e2e("acm_profile.json"));
    ok(
        project,
        IMPORT_TIMES[0],
        &["import", s(&s1), "--database", "IEEE", "--query", "S1", "--query-text", "agile AND improvement"],
    );
    ok(
        project,
        IMPORT_TIMES[1],
        &["import", s(&s2), "--database", "IEEE", "--query", "S2", "--query-text", "tailoring AND process"],
    );
    ok(project, IMPORT_TIMES[2], &["import", s(&acm), "--profile", s(&profile), "--query", "S1"]);
    ok(project, WORK_TIME, &["merge", "--stage", "per-database"]);
    ok(project, WORK_TIME, &["dedupe", "--stage", "per-database"]);
    ok(project, WORK_TIME, &["merge", "--stage", "cross-database"]);
    ok(project, WORK_TIME, &["dedupe", "--stage", "cross-database", "--auto-extensions"]);
}

/// The whole scripted pipeline, ending with the bundle in `bundle`.
pub fn full_pipeline(project: &Path, bundle: &Path) {
    search_steps(project);
    ok(project, WORK_TIME, &["reviewer", "add", "mod", "--moderator"]);
    ok(
        project,
        WORK_TIME,
        &["assign", "--workflow", "two-reviewer-workshop", "--reviewers", "ann,bob", "--default-exclusion", "E4"],
    );
    ok(project, WORK_TIME, &["votes", "import", s(&e2e("votes.csv"))]);
    ok(project, WORK_TIME, &["rounds", "close", "1", "2"]);
    ok(project, "2015-06-10T14:00:00Z", &["decide", s(&e2e("decisions.csv")), "--by", "mod"]);
    ok(project, FINAL_TIME, &["finalize"]);
    ok(project, FINAL_TIME, &["export", s(bundle)]);
}
