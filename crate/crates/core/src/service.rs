//! Session-oriented HTTP API for planning on the spot.
//!
//! A session holds a scenario, the tourist's committed visits and any
//! context overrides. Clients ask for recommendations, commit the visit
//! they actually make, report weather or crowding changes and ask again.
//!
//! Mutations on one session are serialised behind a write lock while reads
//! share it. Planner runs happen on the blocking pool, so a wide search for
//! one session does not stall the others.

use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;
use tokio::sync::RwLock;
use tower_http::cors::CorsLayer;
use uuid::Uuid;

use crate::model::{
    tour_score, validate_itinerary, Itinerary, ModelError, PlannerState, Position, TimePoint,
    VisitEntry,
};
use crate::planner::{plan, Algorithm, PlanRequest, DEFAULT_RESULTS};
use crate::report::{round1, route_views, ser_round1, visit_views, RouteView, VisitView};
use crate::scenario::{builtin, ContextOverride, Scenario, ScenarioError};
use crate::scoring::ScoreTable;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ServiceError {
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    InvalidScenario(ScenarioError),
    #[error("session {0} not found")]
    NotFound(String),
    #[error("{0}")]
    NotFoundOther(String),
    #[error("{message}")]
    Conflict { message: String, leg: Option<usize> },
    #[error("the tour window ended at {0}")]
    TourOver(TimePoint),
    #[error("planner task failed: {0}")]
    Internal(String),
}

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            Self::BadRequest(_) | Self::InvalidScenario(_) => StatusCode::BAD_REQUEST,
            Self::NotFound(_) | Self::NotFoundOther(_) => StatusCode::NOT_FOUND,
            Self::Conflict { .. } | Self::TourOver(_) => StatusCode::CONFLICT,
            Self::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Self::BadRequest(_) => "invalid_request",
            Self::InvalidScenario(_) => "invalid_scenario",
            Self::NotFound(_) | Self::NotFoundOther(_) => "not_found",
            Self::Conflict { .. } => "conflict",
            Self::TourOver(_) => "tour_over",
            Self::Internal(_) => "internal",
        }
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    leg: Option<usize>,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let path = match &self {
            Self::InvalidScenario(e) => e.path(),
            _ => None,
        };
        let leg = match &self {
            Self::Conflict { leg, .. } => *leg,
            _ => None,
        };
        let body = ErrorBody {
            error: self.code(),
            message: self.to_string(),
            path,
            leg,
        };
        (self.status(), Json(body)).into_response()
    }
}

/// Live state of one tourist.
#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    pub scenario: Arc<Scenario>,
    /// Score table under the current context.
    pub table: Arc<ScoreTable>,
    pub context: ContextOverride,
    pub state: PlannerState,
    /// Visits so far; scores are frozen at commit time.
    pub committed: Itinerary,
}

impl Session {
    fn new(id: String, scenario: Scenario) -> Self {
        let state = scenario.initial_state();
        let committed = Itinerary::new(Position::Origin, state.now);
        let table = Arc::new(scenario.table().clone());
        Self {
            id,
            scenario: Arc::new(scenario),
            table,
            context: ContextOverride::default(),
            state,
            committed,
        }
    }

    fn tour_over(&self) -> bool {
        self.state.now >= self.scenario.grid().end()
    }

    pub fn snapshot(&self) -> Snapshot {
        let s = &self.scenario;
        let grid = s.grid();
        let (position, at_origin) = match self.state.position {
            Position::Origin => (s.file().origin.name.clone(), true),
            Position::Spot(id) => (s.spot_key(id).to_string(), false),
        };
        Snapshot {
            session_id: self.id.clone(),
            scenario: s.name().to_string(),
            position,
            at_origin,
            now: self.state.now,
            window: Window {
                start: grid.start(),
                end: grid.end(),
                slot_width_minutes: grid.slot_width(),
            },
            remaining_minutes: grid.end().minutes().saturating_sub(self.state.now.minutes()),
            tour_over: self.tour_over(),
            tour_score: tour_score(&self.committed),
            committed: visit_views(s, &self.committed),
            visited: self
                .state
                .visited
                .iter()
                .map(|v| s.spot_key(*v).to_string())
                .collect(),
            context: self.context.clone(),
            scores: score_grid(s, &self.table),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Window {
    pub start: TimePoint,
    pub end: TimePoint,
    pub slot_width_minutes: u16,
}

/// Per-spot evaluation at every slot boundary under the current context.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreGrid {
    pub points: Vec<TimePoint>,
    pub spots: Vec<SpotScores>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpotScores {
    pub spot: String,
    pub indoor: bool,
    pub eval: Vec<f64>,
}

fn score_grid(s: &Scenario, table: &ScoreTable) -> ScoreGrid {
    ScoreGrid {
        points: s.grid().points().collect(),
        spots: s
            .instance()
            .spots
            .iter()
            .map(|spot| SpotScores {
                spot: spot.key.clone(),
                indoor: spot.indoor,
                eval: (0..s.grid().n_points())
                    .map(|p| round1(table.value_at(spot.id, p)))
                    .collect(),
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub session_id: String,
    pub scenario: String,
    pub position: String,
    pub at_origin: bool,
    pub now: TimePoint,
    pub window: Window,
    pub remaining_minutes: u16,
    pub tour_over: bool,
    #[serde(serialize_with = "ser_round1")]
    pub tour_score: f64,
    pub committed: Vec<VisitView>,
    pub visited: Vec<String>,
    pub context: ContextOverride,
    pub scores: ScoreGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recommendation {
    pub algorithm: Algorithm,
    pub width: usize,
    pub position: String,
    pub now: TimePoint,
    pub routes: Vec<RouteView>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecommendParams {
    #[serde(default = "default_algorithm")]
    pub algorithm: Algorithm,
    #[serde(default = "default_width")]
    pub width: usize,
    #[serde(default = "default_results")]
    pub n_results: usize,
}

fn default_algorithm() -> Algorithm {
    Algorithm::C
}

fn default_width() -> usize {
    3
}

fn default_results() -> usize {
    DEFAULT_RESULTS
}

impl Default for RecommendParams {
    fn default() -> Self {
        Self {
            algorithm: default_algorithm(),
            width: default_width(),
            n_results: default_results(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommitParams {
    pub spot: String,
    pub arrival: TimePoint,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum CreateParams {
    Builtin(String),
    Scenario(Value),
}

/// In-memory session registry.
#[derive(Debug, Clone, Default)]
pub struct SessionStore {
    sessions: Arc<RwLock<HashMap<String, Arc<RwLock<Session>>>>>,
}

impl SessionStore {
    pub fn new() -> Self {
        Self::default()
    }

    async fn get(&self, id: &str) -> Result<Arc<RwLock<Session>>, ServiceError> {
        self.sessions
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(id.to_string()))
    }

    pub async fn create_session(&self, scenario: Scenario) -> Snapshot {
        let id = Uuid::new_v4().simple().to_string();
        let session = Session::new(id.clone(), scenario);
        let snapshot = session.snapshot();
        self.sessions
            .write()
            .await
            .insert(id, Arc::new(RwLock::new(session)));
        snapshot
    }

    pub async fn get_state(&self, id: &str) -> Result<Snapshot, ServiceError> {
        Ok(self.get(id).await?.read().await.snapshot())
    }

    pub async fn recommend(
        &self,
        id: &str,
        params: RecommendParams,
    ) -> Result<Recommendation, ServiceError> {
        if params.width < 1 {
            return Err(ServiceError::BadRequest("width must be at least 1".into()));
        }
        if params.n_results < 1 {
            return Err(ServiceError::BadRequest("n_results must be at least 1".into()));
        }
        let (scenario, table, state, position) = {
            let session = self.get(id).await?;
            let session = session.read().await;
            if session.tour_over() {
                return Err(ServiceError::TourOver(session.scenario.grid().end()));
            }
            let snap_position = match session.state.position {
                Position::Origin => session.scenario.file().origin.name.clone(),
                Position::Spot(s) => session.scenario.spot_key(s).to_string(),
            };
            (
                session.scenario.clone(),
                session.table.clone(),
                session.state.clone(),
                snap_position,
            )
        };
        let now = state.now;
        let routes = tokio::task::spawn_blocking(move || {
            let req = PlanRequest::new(scenario.instance(), &state, &table)
                .with_results(params.n_results)
                .with_width(params.width);
            route_views(&scenario, &plan(params.algorithm, &req))
        })
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))?;
        Ok(Recommendation {
            algorithm: params.algorithm,
            width: params.algorithm.effective_width(params.width),
            position,
            now,
            routes,
        })
    }

    pub async fn commit_visit(
        &self,
        id: &str,
        params: CommitParams,
    ) -> Result<Snapshot, ServiceError> {
        let session = self.get(id).await?;
        let mut session = session.write().await;
        let s = session.scenario.clone();
        let spot = s
            .spot_id(&params.spot)
            .ok_or_else(|| ServiceError::BadRequest(format!("unknown spot {:?}", params.spot)))?;
        let conflict = |message: String, leg: Option<usize>| ServiceError::Conflict { message, leg };
        if session.state.visited.contains(&spot) {
            return Err(conflict(format!("{} has already been visited", params.spot), None));
        }
        if s.grid().point_index(params.arrival).is_none() {
            return Err(conflict(
                format!(
                    "arrival {} is not a slot boundary of the window {}-{}",
                    params.arrival,
                    s.grid().start(),
                    s.grid().end()
                ),
                None,
            ));
        }
        let score = session
            .table
            .eval(spot, params.arrival, s.grid())
            .map_err(|e| ServiceError::BadRequest(e.to_string()))?;
        let mut next = session.committed.clone();
        next.entries.push(VisitEntry {
            arrival: params.arrival,
            spot,
            score,
        });
        if let Err(e) = validate_itinerary(s.instance(), &next) {
            return Err(match e {
                ModelError::Infeasible { leg, reason } => conflict(reason, Some(leg)),
                other => conflict(other.to_string(), None),
            });
        }
        let (position, now) = next.end_state(s.instance());
        session.committed = next;
        session.state.visited.insert(spot);
        session.state.position = position;
        session.state.now = now;
        Ok(session.snapshot())
    }

    pub async fn set_context(
        &self,
        id: &str,
        update: ContextOverride,
    ) -> Result<Snapshot, ServiceError> {
        let session = self.get(id).await?;
        let mut session = session.write().await;
        let mut context = session.context.clone();
        context.merge(update);
        let table = session
            .scenario
            .build_table(&context)
            .map_err(ServiceError::InvalidScenario)?;
        session.context = context;
        session.table = Arc::new(table);
        Ok(session.snapshot())
    }
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ServiceError> {
    let bytes: &[u8] = if body.iter().all(u8::is_ascii_whitespace) {
        b"{}"
    } else {
        body
    };
    serde_json::from_slice(bytes).map_err(|e| ServiceError::BadRequest(e.to_string()))
}

async fn create(
    State(store): State<SessionStore>,
    body: Bytes,
) -> Result<(StatusCode, Json<Snapshot>), ServiceError> {
    let scenario = match parse_body::<CreateParams>(&body)? {
        CreateParams::Builtin(name) => {
            builtin(&name).map_err(|e| ServiceError::NotFoundOther(e.to_string()))?
        }
        CreateParams::Scenario(doc) => {
            let file = serde_json::from_value(doc)
                .map_err(|e| ServiceError::InvalidScenario(ScenarioError::Parse(e.to_string())))?;
            Scenario::from_file(file).map_err(ServiceError::InvalidScenario)?
        }
    };
    Ok((StatusCode::CREATED, Json(store.create_session(scenario).await)))
}

async fn state(
    State(store): State<SessionStore>,
    Path(id): Path<String>,
) -> Result<Json<Snapshot>, ServiceError> {
    store.get_state(&id).await.map(Json)
}

async fn recommend(
    State(store): State<SessionStore>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<Recommendation>, ServiceError> {
    let params = parse_body(&body)?;
    store.recommend(&id, params).await.map(Json)
}

async fn commit(
    State(store): State<SessionStore>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<Snapshot>, ServiceError> {
    let params = parse_body(&body)?;
    store.commit_visit(&id, params).await.map(Json)
}

async fn context(
    State(store): State<SessionStore>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<Snapshot>, ServiceError> {
    let update = parse_body(&body)?;
    store.set_context(&id, update).await.map(Json)
}

async fn builtin_scenario(Path(name): Path<String>) -> Result<Response, ServiceError> {
    let s = builtin(&name).map_err(|e| ServiceError::NotFoundOther(e.to_string()))?;
    Ok(Json(s.file().clone()).into_response())
}

/// All `/v1` routes over a fresh store.
pub fn router() -> Router {
    router_with(SessionStore::new())
}

pub fn router_with(store: SessionStore) -> Router {
    Router::new()
        .route("/v1/sessions", post(create))
        .route("/v1/sessions/{id}", get(state))
        .route("/v1/sessions/{id}/recommend", post(recommend))
        .route("/v1/sessions/{id}/visits", post(commit))
        .route("/v1/sessions/{id}/context", put(context))
        .route("/v1/scenarios/builtin/{name}", get(builtin_scenario))
        .layer(CorsLayer::permissive())
        .with_state(store)
}

/// Serves the API until the process is stopped.
pub async fn serve(addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router()).await
}

