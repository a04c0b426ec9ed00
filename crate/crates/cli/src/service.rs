//! HTTP facade over the experiment runner.
//!
//! Experiments run in the background and are polled by id. Results live in
//! memory, keyed by instance name and effective configuration, so an
//! identical request returns the existing experiment.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use inroute_core::{
    build_distance_matrix, read_instance, run_experiment_with_progress, simulate_feasible,
    Alternative, ExperimentConfig, ExperimentResult, Instance, InventoryTrajectory, Point,
    RtrParams,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::Semaphore;

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
    /// Extra fields merged into the error body.
    pub extra: Option<Value>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
            extra: None,
        }
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.message, "code": self.status.as_u16() });
        if let (Some(Value::Object(extra)), Value::Object(map)) = (self.extra, &mut body) {
            map.extend(extra);
        }
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentState {
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub done: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentHandle {
    pub id: String,
    pub instance: String,
    pub state: ExperimentState,
    pub progress: Progress,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
enum Outcome {
    Running,
    Done(Arc<ExperimentResult>),
    Failed(String),
}

#[derive(Debug)]
struct Entry {
    instance: Arc<Instance>,
    total: usize,
    done: Arc<AtomicUsize>,
    outcome: Outcome,
}

impl Entry {
    fn handle(&self, id: &str) -> ExperimentHandle {
        let (state, error) = match &self.outcome {
            Outcome::Running => (ExperimentState::Running, None),
            Outcome::Done(_) => (ExperimentState::Done, None),
            Outcome::Failed(e) => (ExperimentState::Failed, Some(e.clone())),
        };
        let done = match state {
            ExperimentState::Done => self.total,
            _ => self.done.load(Ordering::Relaxed).min(self.total),
        };
        ExperimentHandle {
            id: id.to_string(),
            instance: self.instance.name.clone(),
            state,
            progress: Progress {
                done,
                total: self.total,
            },
            error,
        }
    }
}

/// In-memory experiment registry. An entry moves from running to done or
/// failed exactly once; readers see either the running entry or the finished
/// one, never a partial result.
#[derive(Debug, Default)]
pub struct ExperimentStore {
    entries: Mutex<HashMap<String, Entry>>,
    by_key: Mutex<HashMap<String, String>>,
    next_id: AtomicU64,
}

/// What [`ExperimentStore::register`] did.
pub enum Registered {
    Existing(String),
    New {
        id: String,
        progress: Arc<AtomicUsize>,
    },
}

impl ExperimentStore {
    fn lock_entries(&self) -> std::sync::MutexGuard<'_, HashMap<String, Entry>> {
        self.entries.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Returns the id of a running or finished experiment with the same key,
    /// or registers a new running one. Failed experiments are not reused.
    pub fn register(&self, key: String, instance: Arc<Instance>, total: usize) -> Registered {
        let mut by_key = self.by_key.lock().unwrap_or_else(|e| e.into_inner());
        let mut entries = self.lock_entries();
        if let Some(id) = by_key.get(&key) {
            if let Some(entry) = entries.get(id) {
                if !matches!(entry.outcome, Outcome::Failed(_)) {
                    return Registered::Existing(id.clone());
                }
            }
        }
        let id = format!("exp-{}", self.next_id.fetch_add(1, Ordering::Relaxed) + 1);
        let progress = Arc::new(AtomicUsize::new(0));
        entries.insert(
            id.clone(),
            Entry {
                instance,
                total,
                done: progress.clone(),
                outcome: Outcome::Running,
            },
        );
        by_key.insert(key, id.clone());
        Registered::New { id, progress }
    }

    /// Marks a running experiment done. Returns false if it was not running.
    pub fn complete(&self, id: &str, result: ExperimentResult) -> bool {
        self.finish(id, Outcome::Done(Arc::new(result)))
    }

    /// Marks a running experiment failed. Returns false if it was not running.
    pub fn fail(&self, id: &str, message: impl Into<String>) -> bool {
        self.finish(id, Outcome::Failed(message.into()))
    }

    fn finish(&self, id: &str, outcome: Outcome) -> bool {
        let mut entries = self.lock_entries();
        match entries.get_mut(id) {
            Some(entry) if matches!(entry.outcome, Outcome::Running) => {
                entry.outcome = outcome;
                true
            }
            _ => false,
        }
    }

    pub fn handle(&self, id: &str) -> Option<ExperimentHandle> {
        self.lock_entries().get(id).map(|e| e.handle(id))
    }

    /// The finished result, or the error the endpoint should answer with.
    fn result(&self, id: &str) -> ApiResult<(Arc<Instance>, Arc<ExperimentResult>)> {
        let entries = self.lock_entries();
        let entry = entries
            .get(id)
            .ok_or_else(|| ApiError::not_found(format!("unknown experiment {id}")))?;
        match &entry.outcome {
            Outcome::Done(result) => Ok((entry.instance.clone(), result.clone())),
            Outcome::Running => {
                let handle = entry.handle(id);
                Err(ApiError {
                    status: StatusCode::CONFLICT,
                    message: format!("experiment {id} is still running"),
                    extra: Some(json!({ "progress": handle.progress })),
                })
            }
            Outcome::Failed(e) => Err(ApiError::internal(format!("experiment {id} failed: {e}"))),
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    instance_dir: Arc<PathBuf>,
    store: Arc<ExperimentStore>,
    permits: Arc<Semaphore>,
}

impl AppState {
    /// `max_running` bounds how many experiments compute at once; further
    /// experiments wait in the running state.
    pub fn new(instance_dir: impl Into<PathBuf>, max_running: usize) -> Self {
        Self {
            instance_dir: Arc::new(instance_dir.into()),
            store: Arc::new(ExperimentStore::default()),
            permits: Arc::new(Semaphore::new(max_running)),
        }
    }

    pub fn store(&self) -> &ExperimentStore {
        &self.store
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/instances", get(list_instances))
        .route("/api/experiments", post(create_experiment))
        .route("/api/experiments/{id}", get(get_experiment))
        .route("/api/experiments/{id}/alternatives", get(list_alternatives))
        .route(
            "/api/experiments/{id}/alternatives/{alt}/periods/{t}",
            get(period_view),
        )
        .route(
            "/api/experiments/{id}/alternatives/{alt}/inventory-series",
            get(inventory_series),
        )
        .with_state(state)
}

pub async fn serve(instance_dir: PathBuf, port: u16, max_running: usize) -> std::io::Result<()> {
    if !instance_dir.is_dir() {
        return Err(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!(
                "instance directory {} does not exist",
                instance_dir.display()
            ),
        ));
    }
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(instance_dir, max_running))).await
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub name: String,
    pub n: usize,
    pub p: usize,
    pub k: u64,
}

struct Scan {
    instances: Vec<(PathBuf, Instance)>,
    warnings: Vec<String>,
}

fn scan_dir(dir: &Path) -> Scan {
    let mut scan = Scan {
        instances: Vec::new(),
        warnings: Vec::new(),
    };
    let entries = match std::fs::read_dir(dir) {
        Ok(entries) => entries,
        Err(e) => {
            scan.warnings.push(format!("{}: {e}", dir.display()));
            return scan;
        }
    };
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .filter(|p| {
            !p.file_name()
                .is_some_and(|n| n.to_string_lossy().starts_with('.'))
        })
        .collect();
    paths.sort();
    for path in paths {
        match read_instance(&path) {
            Ok(inst) => scan.instances.push((path, inst)),
            Err(e) => scan.warnings.push(format!("{}: {e}", file_label(&path))),
        }
    }
    scan
}

fn file_label(path: &Path) -> String {
    path.file_name().map_or_else(
        || path.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    )
}

async fn scan(state: &AppState) -> ApiResult<Scan> {
    let dir = state.instance_dir.clone();
    tokio::task::spawn_blocking(move || scan_dir(&dir))
        .await
        .map_err(|e| ApiError::internal(format!("instance scan failed: {e}")))
}

async fn list_instances(State(state): State<AppState>) -> ApiResult<Json<Value>> {
    let scan = scan(&state).await?;
    let instances: Vec<InstanceSummary> = scan
        .instances
        .iter()
        .map(|(_, inst)| InstanceSummary {
            name: inst.name.clone(),
            n: inst.num_customers(),
            p: inst.periods,
            k: inst.capacity,
        })
        .collect();
    Ok(Json(
        json!({ "instances": instances, "warnings": scan.warnings }),
    ))
}

/// Body of `POST /api/experiments`. Every config field is optional and
/// falls back to the command-line defaults.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    instance: String,
    #[serde(default)]
    config: ConfigOverrides,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigOverrides {
    ladder: Option<Vec<i64>>,
    random_count: Option<i64>,
    controlled_per_gap: Option<i64>,
    improve_routing: Option<bool>,
    seed: Option<u64>,
    rtr: Option<RtrOverrides>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RtrOverrides {
    deviation_factor: Option<f64>,
    loops: Option<i64>,
    seed: Option<u64>,
}

fn non_negative(field: &str, value: i64) -> ApiResult<usize> {
    usize::try_from(value)
        .map_err(|_| ApiError::unprocessable(format!("{field} must be >= 0, got {value}")))
}

impl ConfigOverrides {
    fn into_config(self) -> ApiResult<ExperimentConfig> {
        let mut config = ExperimentConfig::default();
        if let Some(rungs) = self.ladder {
            config.ladder = Some(
                rungs
                    .into_iter()
                    .map(|r| non_negative("ladder rung", r))
                    .collect::<ApiResult<_>>()?,
            );
        }
        if let Some(v) = self.random_count {
            config.random_count = non_negative("random_count", v)?;
        }
        if let Some(v) = self.controlled_per_gap {
            config.controlled_per_gap = non_negative("controlled_per_gap", v)?;
        }
        if let Some(v) = self.improve_routing {
            config.improve_routing = v;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(rtr) = self.rtr {
            let defaults = RtrParams::default();
            config.rtr = RtrParams {
                deviation_factor: rtr.deviation_factor.unwrap_or(defaults.deviation_factor),
                loops: rtr
                    .loops
                    .map(|v| non_negative("rtr.loops", v))
                    .transpose()?
                    .unwrap_or(defaults.loops),
                seed: rtr.seed.unwrap_or(defaults.seed),
            };
        }
        Ok(config)
    }
}

async fn create_experiment(
    State(state): State<AppState>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<ExperimentHandle>)> {
    let value: Value = serde_json::from_slice(&body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("malformed JSON: {e}")))?;
    let request: CreateRequest = serde_json::from_value(value)
        .map_err(|e| ApiError::unprocessable(format!("invalid request: {e}")))?;
    let config = request.config.into_config()?;

    let scan = scan(&state).await?;
    let instance = scan
        .instances
        .into_iter()
        .map(|(_, inst)| inst)
        .find(|inst| inst.name == request.instance)
        .ok_or_else(|| ApiError::not_found(format!("unknown instance {}", request.instance)))?;
    let total = config
        .policies(&instance)
        .map_err(|e| ApiError::unprocessable(e.to_string()))?
        .len();

    let key = serde_json::to_string(&(&instance.name, &config))
        .map_err(|e| ApiError::internal(e.to_string()))?;
    let instance = Arc::new(instance);
    let (id, progress) = match state.store.register(key, instance.clone(), total) {
        Registered::Existing(id) => {
            let handle = state
                .store
                .handle(&id)
                .ok_or_else(|| ApiError::internal("lost experiment"))?;
            return Ok((StatusCode::ACCEPTED, Json(handle)));
        }
        Registered::New { id, progress } => (id, progress),
    };

    let store = state.store.clone();
    let permits = state.permits.clone();
    let task_id = id.clone();
    tokio::spawn(async move {
        let Ok(_permit) = permits.acquire_owned().await else {
            store.fail(&task_id, "experiment queue closed");
            return;
        };
        let outcome = tokio::task::spawn_blocking(move || {
            run_experiment_with_progress(&instance, &config, &|done, _| {
                progress.fetch_max(done, Ordering::Relaxed);
            })
        })
        .await;
        match outcome {
            Ok(Ok(result)) => store.complete(&task_id, result),
            Ok(Err(e)) => store.fail(&task_id, e.to_string()),
            Err(e) => store.fail(&task_id, format!("experiment task aborted: {e}")),
        };
    });

    let handle = state
        .store
        .handle(&id)
        .ok_or_else(|| ApiError::internal("lost experiment"))?;
    Ok((StatusCode::ACCEPTED, Json(handle)))
}

async fn get_experiment(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Json<ExperimentHandle>> {
    state
        .store
        .handle(&id)
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("unknown experiment {id}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternativeRow {
    pub alt_id: usize,
    pub policy_label: String,
    pub routing_cost: f64,
    pub inventory_cost: f64,
    pub on_front: bool,
}

async fn list_alternatives(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Json<Vec<AlternativeRow>>> {
    let (_, result) = state.store.result(&id)?;
    let mut rows: Vec<AlternativeRow> = result
        .alternatives
        .iter()
        .map(|a| AlternativeRow {
            alt_id: a.id,
            policy_label: a.policy_label(),
            routing_cost: a.objectives.routing_cost,
            inventory_cost: a.objectives.inventory_cost,
            on_front: a.on_front,
        })
        .collect();
    rows.sort_by_key(|r| r.alt_id);
    Ok(Json(rows))
}

fn find_alternative(result: &ExperimentResult, alt: usize) -> ApiResult<&Alternative> {
    result
        .alternatives
        .iter()
        .find(|a| a.id == alt)
        .ok_or_else(|| ApiError::not_found(format!("unknown alternative {alt}")))
}

fn trajectory(inst: &Instance, alt: &Alternative) -> ApiResult<InventoryTrajectory> {
    simulate_feasible(inst, &alt.plan).map_err(|e| ApiError::internal(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopView {
    pub customer: usize,
    pub x: f64,
    pub y: f64,
    pub quantity: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteView {
    pub stops: Vec<StopView>,
    pub load: u64,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomerView {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub delivered: u64,
    pub level: u64,
    pub max_level: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodView {
    pub period: usize,
    pub depot: Point,
    /// Tours in plan order; each starts and ends at the depot.
    pub routes: Vec<RouteView>,
    pub customers: Vec<CustomerView>,
    pub vehicles_used: usize,
    pub routing_length: f64,
}

async fn period_view(
    State(state): State<AppState>,
    UrlPath((id, alt, t)): UrlPath<(String, usize, usize)>,
) -> ApiResult<Json<PeriodView>> {
    let (inst, result) = state.store.result(&id)?;
    let alternative = find_alternative(&result, alt)?;
    if t == 0 || t > inst.periods {
        return Err(ApiError::not_found(format!(
            "period {t} outside 1..={}",
            inst.periods
        )));
    }
    let plan = alternative.period_routes.get(t - 1).ok_or_else(|| {
        ApiError::internal(format!("alternative {alt} has no routes for period {t}"))
    })?;
    let traj = trajectory(&inst, alternative)?;
    let matrix = build_distance_matrix(&inst);

    let routes = plan
        .routes
        .iter()
        .map(|r| RouteView {
            stops: r
                .stops
                .iter()
                .zip(&r.quantities)
                .map(|(&customer, &quantity)| {
                    let at = inst.location(customer);
                    StopView {
                        customer,
                        x: at.x,
                        y: at.y,
                        quantity,
                    }
                })
                .collect(),
            load: r.load,
            length: r.length(&matrix),
        })
        .collect();
    let customers = inst
        .customers
        .iter()
        .enumerate()
        .map(|(idx, c)| CustomerView {
            id: c.id,
            x: c.location.x,
            y: c.location.y,
            delivered: alternative.plan.get(c.id, t),
            level: traj.levels[idx][t - 1],
            max_level: c.max_level,
        })
        .collect();

    Ok(Json(PeriodView {
        period: t,
        depot: inst.depot,
        routes,
        customers,
        vehicles_used: plan.vehicles(),
        routing_length: plan.total_length,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InventorySeries {
    pub alt_id: usize,
    /// Total end-of-period stock for periods 1..=p.
    pub series: Vec<u64>,
    pub inventory_cost: u64,
}

async fn inventory_series(
    State(state): State<AppState>,
    UrlPath((id, alt)): UrlPath<(String, usize)>,
) -> ApiResult<Json<InventorySeries>> {
    let (inst, result) = state.store.result(&id)?;
    let alternative = find_alternative(&result, alt)?;
    let traj = trajectory(&inst, alternative)?;
    Ok(Json(InventorySeries {
        alt_id: alt,
        series: traj.period_totals(),
        inventory_cost: traj.inventory_cost,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use inroute_core::parse_instance;

    const E1: &str = "NAME E1\nN 2\nP 3\nK 30\nDEPOT 0 0\nCUSTOMER 1 0 10 20 1 2 2 2\nCUSTOMER 2 10 0 12 0 4 4 4\n";

    #[test]
    fn store_transitions_once() {
        let store = ExperimentStore::default();
        let inst = Arc::new(parse_instance(E1).unwrap());
        let Registered::New { id, .. } = store.register("k".into(), inst.clone(), 3) else {
            panic!("expected a new entry");
        };
        assert_eq!(store.handle(&id).unwrap().state, ExperimentState::Running);
        assert!(
            matches!(store.register("k".into(), inst.clone(), 3), Registered::Existing(ref e) if *e == id)
        );
        assert!(store.fail(&id, "boom"));
        assert!(!store.fail(&id, "again"));
        let handle = store.handle(&id).unwrap();
        assert_eq!(handle.state, ExperimentState::Failed);
        assert_eq!(handle.error.as_deref(), Some("boom"));
        // failed runs are retried under a fresh id
        let Registered::New { id: retry, .. } = store.register("k".into(), inst, 3) else {
            panic!("failed entry reused");
        };
        assert_ne!(retry, id);
    }

    #[test]
    fn overrides_reject_negative_counts() {
        let o = ConfigOverrides {
            random_count: Some(-1),
            ..Default::default()
        };
        assert_eq!(
            o.into_config().unwrap_err().status,
            StatusCode::UNPROCESSABLE_ENTITY
        );
        let o = ConfigOverrides {
            ladder: Some(vec![1, -2]),
            ..Default::default()
        };
        assert_eq!(
            o.into_config().unwrap_err().status,
            StatusCode::UNPROCESSABLE_ENTITY
        );
        let o = ConfigOverrides {
            rtr: Some(RtrOverrides {
                loops: Some(5),
                ..Default::default()
            }),
            ..Default::default()
        };
        let config = o.into_config().unwrap();
        assert_eq!(config.rtr.loops, 5);
        assert_eq!(
            config.rtr.deviation_factor,
            RtrParams::default().deviation_factor
        );
    }
}
