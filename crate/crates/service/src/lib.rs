//! Local HTTP/JSON API over one project directory.
//!
//! Reviewers authenticate with `Authorization: Bearer <token>`, using the
//! static token stored for them in the project manifest. Writes carry the
//! selection revision they were based on and are refused with 409 when it
//! is no longer current.

mod error;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, PathRejection};
use axum::extract::{FromRequestParts, Path as UrlPath, Query, State};
use axum::http::request::Parts;
use axum::http::{header, StatusCode};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use slr_core::agreement::{agreement_report, AgreementMethod, Weighting};
use slr_core::model::{Criterion, Record, RecordId, Vehicle};
use slr_core::project::{Project, Role, INTEGRATED};
use slr_core::report::build_funnel;
use slr_core::selection::{Decision, Relevance, SelectionEvent, SelectionState, Vote};
use slr_core::store::ProjectStore;
use slr_core::{clock, Error};
use tokio::sync::RwLock;

pub use error::{ApiError, ApiResult, ErrorBody};

const DEFAULT_PAGE_SIZE: usize = 50;
const MAX_PAGE_SIZE: usize = 500;

struct Shared {
    project: Project,
    store: Option<ProjectStore>,
}

/// Project state shared by all requests. Reads run concurrently; writes
/// are serialized by the lock and persisted before they are acknowledged.
pub struct AppState {
    inner: RwLock<Shared>,
}

impl AppState {
    /// Opens a project directory and holds its writer lock until dropped.
    pub fn open(root: &Path) -> slr_core::Result<AppState> {
        let store = ProjectStore::open(root)?;
        let project = store.load()?;
        Ok(AppState {
            inner: RwLock::new(Shared {
                project,
                store: Some(store),
            }),
        })
    }

    /// A state that is never written to disk.
    pub fn in_memory(project: Project) -> AppState {
        AppState {
            inner: RwLock::new(Shared { project, store: None }),
        }
    }

    pub async fn project(&self) -> Project {
        self.inner.read().await.project.clone()
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/session", get(session))
        .route("/api/records", get(list_records))
        .route("/api/records/{id}", get(record_detail))
        .route("/api/votes", post(submit_vote))
        .route("/api/worklist", get(worklist))
        .route("/api/agreement", get(agreement))
        .route("/api/decisions", post(post_decision))
        .route("/api/rounds/{round}/close", post(close_round))
        .route("/api/funnel", get(funnel))
        .fallback(|| async { ApiError::not_found("no such endpoint") })
        .with_state(state)
}

pub async fn serve(state: Arc<AppState>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}

/// The reviewer behind the bearer token.
pub struct Reviewer {
    pub id: String,
    pub role: Role,
}

impl FromRequestParts<Arc<AppState>> for Reviewer {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &Arc<AppState>) -> Result<Self, Self::Rejection> {
        let token = parts
            .headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(str::trim)
            .ok_or_else(|| ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", "a bearer token is required"))?;
        let shared = state.inner.read().await;
        let r = shared
            .project
            .reviewer_by_token(token)
            .ok_or_else(|| ApiError::new(StatusCode::UNAUTHORIZED, "unknown_reviewer", "the token matches no reviewer"))?;
        Ok(Reviewer {
            id: r.id.clone(),
            role: r.role,
        })
    }
}

fn require_moderator(who: &Reviewer, action: &str) -> ApiResult<()> {
    if who.role == Role::Moderator {
        Ok(())
    } else {
        Err(ApiError::new(StatusCode::FORBIDDEN, "forbidden", format!("only a moderator can {action}")))
    }
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> ApiResult<T> {
    payload.map(|Json(v)| v).map_err(|e| ApiError::bad_request(e.body_text()))
}

fn selection_revision(p: &Project) -> u64 {
    p.selection().map(SelectionState::revision).unwrap_or(0)
}

fn check_revision(p: &Project, expected: u64) -> ApiResult<()> {
    let current = selection_revision(p);
    if expected != current {
        return Err(Error::StaleRevision { expected, current }.into());
    }
    Ok(())
}

/// Applies one selection event and persists the log. A failed write
/// reloads the last saved state so memory never runs ahead of disk.
fn commit(shared: &mut Shared, event: SelectionEvent) -> ApiResult<()> {
    shared.project.apply_selection(event)?;
    if let Some(store) = &shared.store {
        if let Err(e) = store.save_selection(&shared.project) {
            if let Ok(p) = store.load() {
                shared.project = p;
            }
            return Err(e.into());
        }
    }
    Ok(())
}

/// Records under selection, or the whole integrated set before assignment.
fn screened_records(p: &Project) -> Vec<&Record> {
    let Some(d) = p.dataset(INTEGRATED) else {
        return Vec::new();
    };
    match p.selection() {
        Some(s) => {
            let ids: std::collections::BTreeSet<&RecordId> = s.setup().papers.iter().collect();
            d.records().iter().filter(|r| ids.contains(&r.id)).collect()
        }
        None => d.records().iter().collect(),
    }
}

/// `pending` until a paper has all its primary votes.
fn state_of(p: &Project, id: &RecordId) -> (&'static str, Option<Decision>) {
    let d = p.selection().and_then(|s| s.decision(id));
    match &d {
        Some(d) => (d.state.as_str(), Some(d.clone())),
        None => ("pending", None),
    }
}

async fn session(State(st): State<Arc<AppState>>, who: Reviewer) -> ApiResult<Json<Value>> {
    let shared = st.inner.read().await;
    let p = &shared.project;
    let m = &p.manifest;
    let setup = p.selection().map(|s| s.setup());
    Ok(Json(json!({
        "project": m.name,
        "reviewer": who.id,
        "role": who.role,
        "revision": selection_revision(p),
        "workflow": setup.map(|s| s.policy.workflow.as_str()),
        "scale": setup.map(|s| s.policy.scale.as_str()),
        "finalized": m.baseline.is_some(),
        "criteria": m.criteria.iter().collect::<Vec<&Criterion>>(),
    })))
}

#[derive(Serialize)]
struct RecordSummary<'a> {
    id: &'a RecordId,
    title: &'a str,
    year: Option<i32>,
    publisher_db: &'a str,
    vehicle: Vehicle,
    state: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    rating: Option<f64>,
}

async fn list_records(
    State(st): State<Arc<AppState>>,
    _who: Reviewer,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Json<Value>> {
    let num = |key: &str, default: usize| -> ApiResult<usize> {
        q.get(key).map_or(Ok(default), |v| {
            v.parse().map_err(|_| ApiError::bad_request(format!("{key} must be a positive integer")))
        })
    };
    let page = num("page", 1)?.max(1);
    let per_page = num("per_page", DEFAULT_PAGE_SIZE)?.clamp(1, MAX_PAGE_SIZE);
    let wanted = q.get("state").map(|s| s.trim().to_lowercase());
    if let Some(w) = &wanted {
        if Relevance::parse(w).is_none() && w != "pending" {
            return Err(ApiError::bad_request(format!(
                "unknown state {w:?}; use relevant, irrelevant, to_decide or pending"
            )));
        }
    }
    let shared = st.inner.read().await;
    let p = &shared.project;
    let matching: Vec<RecordSummary> = screened_records(p)
        .into_iter()
        .map(|r| {
            let (state, d) = state_of(p, &r.id);
            RecordSummary {
                id: &r.id,
                title: &r.title,
                year: r.year,
                publisher_db: &r.publisher_db,
                vehicle: r.vehicle,
                state,
                rating: d.and_then(|d| d.rating),
            }
        })
        .filter(|s| wanted.as_deref().is_none_or(|w| Relevance::parse(w).map_or(w, |r| r.as_str()) == s.state))
        .collect();
    let total = matching.len();
    let items: Vec<&RecordSummary> = matching.iter().skip((page - 1) * per_page).take(per_page).collect();
    Ok(Json(json!({
        "revision": selection_revision(p),
        "total": total,
        "page": page,
        "per_page": per_page,
        "items": items,
    })))
}

async fn record_detail(
    State(st): State<Arc<AppState>>,
    who: Reviewer,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Json<Value>> {
    let shared = st.inner.read().await;
    let p = &shared.project;
    let id = RecordId::new(id);
    let record = screened_records(p)
        .into_iter()
        .find(|r| r.id == id)
        .ok_or_else(|| ApiError::not_found(format!("record {id} is not under review")))?;
    let (state, decision) = state_of(p, &id);
    let own: Vec<&Vote> = p
        .selection()
        .map(|s| s.votes().filter(|v| v.paper == id && v.reviewer == who.id).collect())
        .unwrap_or_default();
    Ok(Json(json!({
        "revision": selection_revision(p),
        "record": record,
        "state": state,
        "decision": decision,
        "my_votes": own,
        "criteria": p.manifest.criteria.iter().collect::<Vec<&Criterion>>(),
    })))
}

#[derive(Deserialize)]
struct VoteRequest {
    paper: RecordId,
    /// Defaults to the reviewer's open round for this paper.
    round: Option<u32>,
    value: i64,
    revision: u64,
}

async fn submit_vote(
    State(st): State<Arc<AppState>>,
    who: Reviewer,
    payload: Result<Json<VoteRequest>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    let req = body(payload)?;
    let mut shared = st.inner.write().await;
    check_revision(&shared.project, req.revision)?;
    let state = shared.project.require_selection()?;
    let round = match req.round {
        Some(r) => r,
        None => state
            .pending_work(&who.id)
            .into_iter()
            .find(|(_, p)| *p == req.paper)
            .map(|(r, _)| r)
            .or_else(|| state.setup().rounds().iter().find(|s| s.reviewers.contains(&who.id)).map(|s| s.round))
            .ok_or_else(|| Error::rejected("not_assigned", format!("{} has no round to vote in", who.id)))?,
    };
    let vote = Vote {
        reviewer: who.id.clone(),
        paper: req.paper.clone(),
        round,
        value: req.value,
        timestamp: clock::now(),
    };
    commit(&mut shared, SelectionEvent::Vote(vote.clone()))?;
    let p = &shared.project;
    Ok(Json(json!({
        "vote": vote,
        "revision": selection_revision(p),
        "decision": p.selection().and_then(|s| s.decision(&req.paper)),
    })))
}

async fn worklist(State(st): State<Arc<AppState>>, who: Reviewer) -> ApiResult<Json<Value>> {
    let shared = st.inner.read().await;
    let p = &shared.project;
    let state = p.require_selection()?;
    let titles: HashMap<&RecordId, &str> = screened_records(p).into_iter().map(|r| (&r.id, r.title.as_str())).collect();
    let items: Vec<Value> = state
        .pending_work(&who.id)
        .into_iter()
        .map(|(round, paper)| {
            let title = titles.get(&paper).copied().unwrap_or_default();
            json!({ "round": round, "paper": paper, "title": title })
        })
        .collect();
    let assigned: usize = state.setup().rounds().iter().map(|s| state.worklist(&who.id, s.round).len()).sum();
    Ok(Json(json!({
        "reviewer": who.id,
        "revision": state.revision(),
        "assigned": assigned,
        "voted": state.votes().filter(|v| v.reviewer == who.id).count(),
        "items": items,
    })))
}

async fn agreement(
    State(st): State<Arc<AppState>>,
    _who: Reviewer,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Json<Value>> {
    let method = match q.get("method") {
        None => AgreementMethod::CohenKappa,
        Some(m) => AgreementMethod::parse(m).ok_or_else(|| {
            ApiError::bad_request(format!(
                "unknown method {m:?}; use percent, cohen_kappa, weighted_cohen_kappa or fleiss_kappa"
            ))
        })?,
    };
    let weighting = match q.get("weighting").map(|w| w.to_lowercase()) {
        None => Weighting::Linear,
        Some(w) if w == "linear" => Weighting::Linear,
        Some(w) if w == "quadratic" => Weighting::Quadratic,
        Some(w) => return Err(ApiError::bad_request(format!("unknown weighting {w:?}; use linear or quadratic"))),
    };
    let shared = st.inner.read().await;
    let state = shared.project.require_selection()?;
    let report = agreement_report(state, method, weighting)?;
    Ok(Json(json!({ "revision": state.revision(), "report": report })))
}

#[derive(Deserialize)]
struct DecisionRequest {
    paper: RecordId,
    state: Relevance,
    #[serde(default)]
    criteria: Vec<String>,
    revision: u64,
}

async fn post_decision(
    State(st): State<Arc<AppState>>,
    who: Reviewer,
    payload: Result<Json<DecisionRequest>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    require_moderator(&who, "record decisions")?;
    let req = body(payload)?;
    let mut shared = st.inner.write().await;
    check_revision(&shared.project, req.revision)?;
    commit(
        &mut shared,
        SelectionEvent::Decision {
            paper: req.paper.clone(),
            state: req.state,
            criteria: req.criteria,
            by: Some(who.id.clone()),
            timestamp: clock::now(),
        },
    )?;
    let p = &shared.project;
    Ok(Json(json!({
        "decision": p.selection().and_then(|s| s.decision(&req.paper)),
        "revision": selection_revision(p),
    })))
}

#[derive(Deserialize)]
struct RevisionRequest {
    revision: u64,
}

async fn close_round(
    State(st): State<Arc<AppState>>,
    who: Reviewer,
    round: Result<UrlPath<u32>, PathRejection>,
    payload: Result<Json<RevisionRequest>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    require_moderator(&who, "close rounds")?;
    let UrlPath(round) = round.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let req = body(payload)?;
    let mut shared = st.inner.write().await;
    check_revision(&shared.project, req.revision)?;
    commit(&mut shared, SelectionEvent::RoundClosed { round, timestamp: clock::now() })?;
    Ok(Json(json!({ "round": round, "revision": selection_revision(&shared.project) })))
}

async fn funnel(State(st): State<Arc<AppState>>, _who: Reviewer) -> ApiResult<Json<Value>> {
    let shared = st.inner.read().await;
    let report = build_funnel(&shared.project)?;
    Ok(Json(serde_json::to_value(report).map_err(Error::from)?))
}
