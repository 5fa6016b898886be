use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde_json::{json, Value};
use slr_core::agreement::{agreement_report, AgreementMethod, Weighting};
use slr_core::analytics::{
    coauthor_graph, default_stopwords, demographics, outlier_terms, term_frequency, CodingMap, TermScope,
};
use slr_core::dedup::{DedupConfig, NamedFilter, ResolutionPolicy};
use slr_core::ingest::{check_reference_set, parse_reference_list, SourceProfile};
use slr_core::model::{CompletionFlag, Criterion, CriterionKind, MergeEvent, MergeStage, RecordId, RecordPatch, Vehicle};
use slr_core::project::{Project, Query, Role, Template, DECIDED, INTEGRATED};
use slr_core::report::{build_funnel, export_bundle, verify_bundle};
use slr_core::selection::{
    format_rating, parse_decisions_csv, parse_votes_csv, votes_to_csv, Aggregator, Scale, SelectionEvent,
    SelectionPolicy, Workflow,
};
use slr_core::store::{self, ProjectStore};
use slr_core::{clock, Error, Result};

use crate::args::*;
use crate::output::{table, Output};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn stage(s: StageArg) -> MergeStage {
    match s {
        StageArg::PerDatabase => MergeStage::PerDatabase,
        StageArg::CrossDatabase => MergeStage::CrossDatabase,
    }
}

/// Runs `f` against the project under the writer lock and saves the result.
fn mutate(root: &Path, f: impl FnOnce(&mut Project) -> Result<Output>) -> Result<Output> {
    let store = ProjectStore::open(root)?;
    let mut p = store.load()?;
    let out = f(&mut p)?;
    store.save(&p)?;
    Ok(out)
}

fn analysis_slot(p: &Project, slot: Option<String>) -> Result<String> {
    if let Some(s) = slot {
        p.require(&s)?;
        return Ok(s);
    }
    [DECIDED, INTEGRATED]
        .into_iter()
        .find(|s| p.dataset(s).is_some())
        .map(String::from)
        .ok_or_else(|| Error::precondition("no integrated dataset yet; run merge --stage cross-database"))
}

fn working_slot(p: &Project, slot: Option<String>) -> Result<String> {
    match slot {
        Some(s) => Ok(s),
        None if p.dataset(INTEGRATED).is_some() => Ok(INTEGRATED.to_string()),
        None => Err(Error::precondition("no integrated dataset yet; pass --slot")),
    }
}

fn counts_text(m: &BTreeMap<String, usize>) -> String {
    m.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(", ")
}

fn merge_summary(e: &MergeEvent) -> Vec<String> {
    vec![
        e.stage.as_str().to_string(),
        format!("{:?}", e.operation).to_lowercase(),
        e.inputs.iter().map(|i| i.size).sum::<usize>().to_string(),
        e.removed_total().to_string(),
        e.output_size.to_string(),
    ]
}

const MERGE_HEADERS: [&str; 5] = ["stage", "step", "in", "removed", "out"];

pub fn run(cli: Cli) -> Result<Output> {
    let root = cli.project.clone();
    let root = root.as_path();
    let now = clock::now();
    match cli.command {
        Command::Init { template, name } => {
            let name = match name {
                Some(n) => n,
                None => fs::canonicalize(root)
                    .ok()
                    .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
                    .unwrap_or_else(|| "study".to_string()),
            };
            let template = match template {
                TemplateArg::Standard => Template::Standard,
                TemplateArg::Blank => Template::Blank,
            };
            let p = Project::new(&name, template, now)?;
            ProjectStore::create(root, &p)?;
            Ok(Output::new(
                json!({ "project": p.manifest.name, "template": template, "criteria": p.manifest.criteria.len() }),
                format!("created project {:?} in {}", p.manifest.name, root.display()),
            ))
        }

        Command::Status => {
            let p = store::load(root)?;
            let slots: Vec<Value> = p
                .manifest
                .datasets
                .iter()
                .map(|(s, i)| json!({ "slot": s, "records": i.records, "revision": i.revision }))
                .collect();
            let rows: Vec<Vec<String>> = p
                .manifest
                .datasets
                .iter()
                .map(|(s, i)| vec![s.clone(), i.records.to_string(), i.revision.to_string()])
                .collect();
            let mut text = format!("project {}\n\n{}", p.manifest.name, table(&["slot", "records", "revision"], &rows));
            let selection = p.selection().map(|s| {
                let mut by_state: BTreeMap<String, usize> = BTreeMap::new();
                for (_, d) in s.decisions() {
                    let k = d.map(|d| d.state.as_str()).unwrap_or("pending");
                    *by_state.entry(k.to_string()).or_insert(0) += 1;
                }
                text.push_str(&format!(
                    "\nselection: {} over {} papers, revision {}, {}\n",
                    s.setup().policy.workflow.as_str(),
                    s.setup().papers.len(),
                    s.revision(),
                    counts_text(&by_state)
                ));
                json!({
                    "workflow": s.setup().policy.workflow,
                    "papers": s.setup().papers.len(),
                    "revision": s.revision(),
                    "states": by_state,
                })
            });
            if let Some(b) = &p.manifest.baseline {
                text.push_str(&format!("finalized {}: {} relevant\n", clock::format(&b.timestamp), b.relevant));
            }
            Ok(Output::new(
                json!({
                    "project": p.manifest.name,
                    "datasets": slots,
                    "imports": p.manifest.imports.len(),
                    "selection": selection,
                    "baseline": p.manifest.baseline,
                }),
                text,
            ))
        }

        Command::Criterion { id, kind, text } => mutate(root, |p| {
            let kind: CriterionKind = serde_json::from_value(json!(kind))?;
            let c = Criterion { id, kind, text };
            p.manifest.criteria.push(c.clone())?;
            Ok(Output::new(json!(c), format!("added {} criterion {}", kind_str(kind), c.id)))
        }),

        Command::Import(a) => mutate(root, |p| {
            let input = read(&a.file)?;
            let mut profile = match &a.profile {
                Some(path) => SourceProfile::load(path)?,
                None => {
                    let db = a
                        .database
                        .clone()
                        .ok_or_else(|| Error::InvalidInput("--database is required without --profile".into()))?;
                    let ext = a.file.extension().map(|e| e.to_string_lossy().to_lowercase()).unwrap_or_default();
                    match ext.as_str() {
                        "bib" | "bibtex" => SourceProfile::bibtex(db),
                        "csv" => SourceProfile::csv_plain(db),
                        _ => {
                            return Err(Error::InvalidInput(format!(
                                "cannot tell the format of {}; pass --profile",
                                a.file.display()
                            )))
                        }
                    }
                }
            };
            if let Some(db) = &a.database {
                profile.database_name = db.clone();
            }
            let query = Query {
                label: a.query.clone(),
                text: a.query_text.clone().unwrap_or_default(),
            };
            let file = a.file.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let e = p.import(&input, &file, &profile, &query, now)?;
            Ok(Output::new(
                json!(e),
                format!(
                    "imported {} record(s) from {} into {} ({} rejected, {} warning(s))",
                    e.records, e.file, e.slot, e.rejected, e.warnings
                ),
            ))
        }),

        Command::Merge { stage: s, database } => mutate(root, |p| {
            let events = match s {
                StageArg::PerDatabase => p.merge_per_database(database.as_deref(), now)?,
                StageArg::CrossDatabase => {
                    if database.is_some() {
                        return Err(Error::InvalidInput("--database applies to per-database merges only".into()));
                    }
                    vec![p.merge_cross_database(now)?]
                }
            };
            let rows: Vec<Vec<String>> = events.iter().map(merge_summary).collect();
            Ok(Output::new(json!(events), table(&MERGE_HEADERS, &rows)))
        }),

        Command::Dedupe(a) => {
            let run_dedupe = |p: &mut Project| -> Result<Output> {
                let mut config = DedupConfig::default();
                if let Some(t) = a.threshold {
                    config.threshold = t;
                }
                let mut policy = match &a.policy {
                    Some(path) => serde_json::from_str::<ResolutionPolicy>(&read(path)?)?,
                    None => ResolutionPolicy::default(),
                };
                policy.auto_resolve_extensions |= a.auto_extensions;
                let outcomes = p.dedupe(stage(a.stage), &config, &policy, a.dry_run, now)?;
                let rows: Vec<Vec<String>> = outcomes
                    .iter()
                    .flat_map(|o| {
                        o.pairs.iter().map(|pair| {
                            vec![
                                o.slot.clone(),
                                pair.a.to_string(),
                                pair.b.to_string(),
                                pair.kind.as_str().to_string(),
                                format!("{:.3}", pair.score),
                            ]
                        })
                    })
                    .collect();
                let mut text = table(&["slot", "a", "b", "kind", "score"], &rows);
                for o in &outcomes {
                    match &o.event {
                        Some(e) => text.push_str(&format!(
                            "{}: removed {}, kept {}, {} pair(s) pending\n",
                            o.slot,
                            e.removed_total(),
                            e.output_size,
                            e.pending.len()
                        )),
                        None => text.push_str(&format!("{}: dry run, {} candidate pair(s)\n", o.slot, o.pairs.len())),
                    }
                }
                Ok(Output::new(json!({ "dry_run": a.dry_run, "outcomes": outcomes }), text))
            };
            if a.dry_run {
                run_dedupe(&mut store::load(root)?)
            } else {
                mutate(root, run_dedupe)
            }
        }

        Command::Audit { slot } => {
            let p = store::load(root)?;
            let slot = working_slot(&p, slot)?;
            let audit = p.audit(&slot)?;
            let violations = p.validate(&slot)?;
            let rows: Vec<Vec<String>> = CompletionFlag::ALL
                .iter()
                .map(|f| {
                    let ids = audit.records.get(f).cloned().unwrap_or_default();
                    let shown: Vec<String> = ids.iter().take(8).map(|i| i.to_string()).collect();
                    let more = if ids.len() > 8 { format!(" +{}", ids.len() - 8) } else { String::new() };
                    vec![f.as_str().to_string(), audit.count(*f).to_string(), shown.join(" ") + &more]
                })
                .collect();
            let mut text = format!("{slot}\n{}", table(&["flag", "records", "ids"], &rows));
            for (id, vs) in &violations {
                let codes: Vec<&str> = vs.iter().map(|v| v.code()).collect();
                text.push_str(&format!("{id}: {}\n", codes.join(", ")));
            }
            let violations: BTreeMap<String, Vec<&str>> =
                violations.iter().map(|(id, vs)| (id.to_string(), vs.iter().map(|v| v.code()).collect())).collect();
            Ok(Output::new(json!({ "slot": slot, "audit": audit, "violations": violations }), text))
        }

        Command::CheckRefs { file, slot, strict } => {
            let p = store::load(root)?;
            let slot = working_slot(&p, slot)?;
            let refs = parse_reference_list(&read(&file)?);
            let report = check_reference_set(p.require(&slot)?, &refs);
            let mut text = format!("{} of {} reference(s) found in {slot}\n", report.found.len(), refs.len());
            for m in &report.found {
                text.push_str(&format!("  found    {}  {}\n", m.record, m.reference.title));
            }
            for m in &report.missing {
                text.push_str(&format!("  missing  {}\n", m.title));
            }
            let mut out = Output::new(json!(report), text);
            if strict && !report.all_found() {
                out.status = 1;
            }
            Ok(out)
        }

        Command::Filter {
            name,
            databases,
            require_any,
            criterion,
        } => mutate(root, |p| {
            let e = p.filter(
                NamedFilter {
                    name,
                    databases,
                    require_any,
                    criterion,
                },
                now,
            )?;
            let text = format!("removed {} ({}), kept {}", e.removed_total(), counts_text(&e.removed_by_database), e.output_size);
            Ok(Output::new(json!(e), text))
        }),

        Command::Patch(a) => mutate(root, |p| {
            let mut patch = match &a.json {
                Some(path) => serde_json::from_str::<RecordPatch>(&read(path)?)?,
                None => RecordPatch::default(),
            };
            patch.abstract_text = a.abstract_text.clone().or(patch.abstract_text);
            patch.keywords = a.keywords.clone().or(patch.keywords);
            patch.year = a.year.or(patch.year);
            patch.venue = a.venue.clone().or(patch.venue);
            if let Some(v) = &a.vehicle {
                patch.vehicle = Some(Vehicle::parse(v).ok_or_else(|| Error::InvalidInput(format!("unknown vehicle {v:?}")))?);
            }
            patch.full_text_available = a.full_text.or(patch.full_text_available);
            patch.abstract_substitute = a.abstract_substitute.or(patch.abstract_substitute);
            if patch == RecordPatch::default() {
                return Err(Error::InvalidInput("the patch changes nothing".into()));
            }
            let id = RecordId::new(a.id.clone());
            let revision = p.patch(&a.slot, &id, &patch)?;
            Ok(Output::new(
                json!({ "slot": a.slot, "id": id, "revision": revision }),
                format!("patched {id} in {}, revision {revision}", a.slot),
            ))
        }),

        Command::Assign(a) => mutate(root, |p| {
            let workflow = Workflow::parse(&a.workflow).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "unknown workflow {:?}; use two-reviewer-workshop, two-plus-one, overlapping-subsets or custom",
                    a.workflow
                ))
            })?;
            let mut policy = match &a.policy {
                Some(path) => serde_json::from_str::<SelectionPolicy>(&read(path)?)?,
                None => SelectionPolicy::majority(workflow),
            };
            policy.workflow = workflow;
            if let Some(s) = &a.scale {
                policy.scale = if s == "likert5" { Scale::Likert5 } else { Scale::Binary };
            }
            if let Some(g) = &a.aggregator {
                policy.aggregator = serde_json::from_value::<Aggregator>(json!(g))?;
            }
            if let Some(t) = a.threshold {
                policy.threshold = t;
            }
            if let Some(d) = &a.default_exclusion {
                policy.default_exclusion = Some(d.clone());
            }
            let setup = p.assign(policy, a.reviewers.clone(), a.coverage, a.seed)?.clone();
            let state = p.require_selection()?;
            let mut rows = Vec::new();
            let mut load = Vec::new();
            for spec in setup.rounds() {
                for r in &spec.reviewers {
                    let n = state.worklist(r, spec.round).len();
                    let after: Vec<String> = spec.after.iter().map(|x| x.to_string()).collect();
                    rows.push(vec![spec.round.to_string(), r.clone(), n.to_string(), after.join(",")]);
                    load.push(json!({ "round": spec.round, "reviewer": r, "papers": n, "after": spec.after }));
                }
            }
            let text = format!(
                "{} over {} papers\n{}",
                workflow.as_str(),
                setup.papers.len(),
                table(&["round", "reviewer", "papers", "opens after"], &rows)
            );
            Ok(Output::new(json!({ "setup": setup, "worklists": load }), text))
        }),

        Command::Reviewer { action } => match action {
            ReviewerAction::Add { id, moderator } => mutate(root, |p| {
                let role = if moderator { Role::Moderator } else { Role::Reviewer };
                let r = p.ensure_reviewer(&id, role)?.clone();
                Ok(Output::new(json!(r), format!("{} {:?} token {}", r.id, r.role, r.token).to_lowercase()))
            }),
            ReviewerAction::List => {
                let p = store::load(root)?;
                let rows: Vec<Vec<String>> = p
                    .manifest
                    .reviewers
                    .iter()
                    .map(|r| vec![r.id.clone(), format!("{:?}", r.role).to_lowercase(), r.token.clone()])
                    .collect();
                Ok(Output::new(json!(p.manifest.reviewers), table(&["reviewer", "role", "token"], &rows)))
            }
        },

        Command::Votes { action } => match action {
            VotesAction::Import { file } => mutate(root, |p| {
                let votes = parse_votes_csv(&read(&file)?)?;
                let n = p.apply_selection_batch(votes.into_iter().map(SelectionEvent::Vote).collect())?;
                let revision = p.require_selection()?.revision();
                Ok(Output::new(
                    json!({ "imported": n, "revision": revision }),
                    format!("imported {n} vote(s), revision {revision}"),
                ))
            }),
            VotesAction::Export { out } => {
                let p = store::load(root)?;
                let state = p.require_selection()?;
                let csv = votes_to_csv(state.votes());
                let votes: Vec<_> = state.votes().collect();
                match out {
                    Some(path) => {
                        write(&path, &csv)?;
                        Ok(Output::new(
                            json!({ "exported": votes.len(), "file": path }),
                            format!("wrote {} vote(s) to {}", votes.len(), path.display()),
                        ))
                    }
                    None => Ok(Output::new(json!(votes), csv)),
                }
            }
        },

        Command::Rounds {
            action: RoundsAction::Close { rounds },
        } => mutate(root, |p| {
            if rounds.is_empty() {
                return Err(Error::InvalidInput("name at least one round".into()));
            }
            let events = rounds.iter().map(|r| SelectionEvent::RoundClosed { round: *r, timestamp: now }).collect();
            p.apply_selection_batch(events)?;
            let state = p.require_selection()?;
            let to_decide = state.to_decide();
            Ok(Output::new(
                json!({ "closed": rounds, "revision": state.revision(), "to_decide": to_decide }),
                format!("closed round(s) {:?}; {} paper(s) to decide jointly", rounds, to_decide.len()),
            ))
        }),

        Command::Decide { file, by } => mutate(root, |p| {
            let inputs = parse_decisions_csv(&read(&file)?)?;
            let events: Vec<SelectionEvent> = inputs
                .into_iter()
                .map(|d| SelectionEvent::Decision {
                    paper: d.paper,
                    state: d.state,
                    criteria: d.criteria,
                    by: by.clone(),
                    timestamp: now,
                })
                .collect();
            let n = p.apply_selection_batch(events)?;
            let state = p.require_selection()?;
            let left = state.undecided().len() + state.to_decide().len();
            Ok(Output::new(
                json!({ "recorded": n, "revision": state.revision(), "open": left }),
                format!("recorded {n} decision(s); {left} paper(s) still open"),
            ))
        }),

        Command::Finalize => mutate(root, |p| {
            let (baseline, decisions) = p.finalize(now)?;
            let text = format!(
                "decided set: {} relevant, {} irrelevant ({})",
                baseline.relevant,
                baseline.irrelevant,
                counts_text(&baseline.relevant_by_database)
            );
            Ok(Output::new(json!({ "baseline": baseline, "decisions": decisions }), text))
        }),

        Command::Kappa { method, weighting } => {
            let p = store::load(root)?;
            let m = AgreementMethod::parse(&method).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "unknown method {method:?}; use percent, cohen_kappa, weighted_cohen_kappa or fleiss_kappa"
                ))
            })?;
            let w = if weighting == "quadratic" { Weighting::Quadratic } else { Weighting::Linear };
            let report = agreement_report(p.require_selection()?, m, w)?;
            let value = report.value.map(format_rating).unwrap_or_else(|| "--".to_string());
            let mut text = format!(
                "{}: {value} over {} item(s), {} rater(s){}\n",
                m.as_str(),
                report.n_items,
                report.n_raters,
                if report.degenerate { " (degenerate: one category only)" } else { "" }
            );
            for s in &report.strata {
                let v = s.value.map(format_rating).unwrap_or_else(|| "--".to_string());
                text.push_str(&format!("  {}: {v} over {} item(s)\n", s.raters.join("+"), s.n_items));
            }
            Ok(Output::new(json!(report), text))
        }

        Command::Report { csv, out } => {
            let p = store::load(root)?;
            let f = build_funnel(&p)?;
            if let Some(path) = csv {
                write(&path, &f.to_csv())?;
            }
            let text = f.render_text();
            match out {
                Some(path) => {
                    write(&path, &text)?;
                    Ok(Output::new(serde_json::to_value(&f)?, format!("wrote {}", path.display())))
                }
                None => Ok(Output::new(serde_json::to_value(&f)?, text)),
            }
        }

        Command::Export { dir } => {
            let p = store::load(root)?;
            let b = export_bundle(&p, &dir)?;
            let rows: Vec<Vec<String>> = b
                .groups
                .iter()
                .map(|g| {
                    let files = b.files.iter().filter(|f| f.path.starts_with(&format!("{}/", g.id))).count();
                    let state = if g.present { files.to_string() } else { format!("absent: {}", g.reason.clone().unwrap_or_default()) };
                    vec![g.id.clone(), g.title.clone(), state]
                })
                .collect();
            Ok(Output::new(json!(b), table(&["group", "deliverable", "files"], &rows)))
        }

        Command::VerifyBundle { dir } => {
            let bad = verify_bundle(&dir)?;
            if !bad.is_empty() {
                return Err(Error::integrity(format!("{} file(s) do not match the bundle manifest", bad.len()), bad));
            }
            Ok(Output::new(json!({ "ok": true }), "bundle verified"))
        }

        Command::Serve { addr } => {
            let state = Arc::new(slr_service::AppState::open(root)?);
            let rt = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()
                .map_err(|e| Error::io(root, e))?;
            eprintln!("serving {} on http://{addr}", root.display());
            rt.block_on(slr_service::serve(state, addr)).map_err(|e| Error::io(root, e))?;
            Ok(Output::new(json!({ "stopped": true }), ""))
        }

        Command::Wordfreq(a) => {
            let p = store::load(root)?;
            let slot = analysis_slot(&p, a.slot)?;
            let scope = if a.scope == "abstracts" { TermScope::Abstracts } else { TermScope::Keywords };
            let mut stop = if a.no_stopwords { Vec::new() } else { default_stopwords() };
            if let Some(path) = &a.stopwords {
                stop.extend(read(path)?.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_lowercase));
            }
            let coding = a.coding.as_deref().map(|c| read(c).and_then(|t| CodingMap::from_csv(&t))).transpose()?;
            let tf = term_frequency(p.require(&slot)?, scope, coding.as_ref(), &stop);
            let csv = tf.to_csv();
            let outliers = match &a.expected {
                Some(path) => {
                    let expected: Vec<String> =
                        read(path)?.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_lowercase).collect();
                    Some(outlier_terms(&tf, &expected))
                }
                None => None,
            };
            let mut text = match &a.out {
                Some(path) => {
                    write(path, &csv)?;
                    format!("wrote {} term(s) from {slot} to {}\n", tf.counts.len(), path.display())
                }
                None => csv,
            };
            if let Some(o) = &outliers {
                text.push_str("\noutliers (advisory):\n");
                for (t, n) in o {
                    text.push_str(&format!("  {t}  {n}\n"));
                }
            }
            Ok(Output::new(json!({ "slot": slot, "frequencies": tf.ranked(), "total": tf.total(), "outliers": outliers }), text))
        }

        Command::Network { slot, nodes, edges, dot } => {
            let p = store::load(root)?;
            let slot = analysis_slot(&p, slot)?;
            let g = coauthor_graph(p.require(&slot)?);
            let mut text = format!("{slot}: {} author(s), {} co-author edge(s)\n", g.nodes.len(), g.edges.len());
            let mut wrote = false;
            for (path, contents) in [(&nodes, g.nodes_csv()), (&edges, g.edges_csv()), (&dot, g.to_dot())] {
                if let Some(path) = path {
                    write(path, &contents)?;
                    text.push_str(&format!("wrote {}\n", path.display()));
                    wrote = true;
                }
            }
            if !wrote {
                text.push('\n');
                text.push_str(&g.edges_csv());
            }
            Ok(Output::new(json!(g), text))
        }

        Command::Demographics { slot } => {
            let p = store::load(root)?;
            let slot = analysis_slot(&p, slot)?;
            let d = demographics(p.require(&slot)?, &p.manifest.metadata_classes);
            let mut text = format!("{slot}: {} record(s)\n", d.total);
            let mut section = |title: &str, m: &BTreeMap<String, usize>| {
                let rows: Vec<Vec<String>> = m.iter().map(|(k, v)| vec![k.clone(), v.to_string()]).collect();
                text.push('\n');
                text.push_str(&table(&[title, "records"], &rows));
            };
            section("year", &d.per_year);
            section("vehicle", &d.per_vehicle);
            section("database", &d.per_database);
            for (class, m) in &d.per_metadata {
                section(class, m);
            }
            Ok(Output::new(json!(d), text))
        }
    }
}

fn kind_str(k: CriterionKind) -> &'static str {
    match k {
        CriterionKind::Inclusion => "inclusion",
        CriterionKind::Exclusion => "exclusion",
    }
}
