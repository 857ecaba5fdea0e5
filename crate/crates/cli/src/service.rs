// SPDX-License-Identifier: Apache-2.0

//! JSON-over-HTTP front end for a single editing session. All routes live
//! under `/v1` and carry geometry in database units.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use hvcell::interact::InteractError;
use hvcell::techdb::Layer;
use hvcell::verify::{compare_netlists, extract_netlist};
use hvcell::workbench::{Operation, Outcome, ParamOverrides};
use hvcell::{Coord, Session, Shape, WorkbenchError};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub type Shared = Arc<Mutex<Session>>;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }
}

impl From<WorkbenchError> for ApiError {
    fn from(e: WorkbenchError) -> Self {
        let status = match &e {
            WorkbenchError::UnknownCell(_) | WorkbenchError::UnknownInstance(_) => StatusCode::NOT_FOUND,
            WorkbenchError::Interact(InteractError::NotAbutted(..) | InteractError::IncompatibleCase(_))
            | WorkbenchError::CellLocked(_)
            | WorkbenchError::DuplicateInstance(_) => StatusCode::CONFLICT,
            WorkbenchError::Interact(InteractError::NoHandle(_)) => StatusCode::NOT_FOUND,
            _ => StatusCode::BAD_REQUEST,
        };
        Self::new(status, e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::new(StatusCode::BAD_REQUEST, e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateCell {
    pub device: String,
    #[serde(default)]
    pub params: ParamOverrides,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StretchRequest {
    pub handle: String,
    pub dx: Coord,
    #[serde(default)]
    pub dy: Coord,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaceRequest {
    pub cell_id: String,
    pub x: Coord,
    pub y: Coord,
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub nets: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoveRequest {
    pub instance: String,
    pub x: Coord,
    pub y: Coord,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairRequest {
    pub a: String,
    pub b: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchematicRequest {
    pub spice: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireRequest {
    pub shape: Shape,
}

#[derive(Debug, Serialize)]
pub struct DesignView {
    pub instances: Vec<hvcell::workbench::InstancePayload>,
    pub wires: Vec<Shape>,
    pub journal: Vec<Operation>,
}

fn apply(state: &Shared, op: Operation) -> ApiResult<Outcome> {
    let mut s = state.lock().expect("session lock");
    Ok(Json(s.apply(op)?))
}

async fn layers(State(s): State<Shared>) -> Json<Vec<Layer>> {
    Json(s.lock().expect("session lock").tech.layers.clone())
}

async fn create_cell(State(s): State<Shared>, body: Result<Json<CreateCell>, JsonRejection>) -> ApiResult<Outcome> {
    let Json(b) = body?;
    apply(&s, Operation::CreateCell { device: b.device, params: b.params })
}

async fn get_cell(State(s): State<Shared>, Path(id): Path<String>) -> ApiResult<hvcell::workbench::CellPayload> {
    Ok(Json(s.lock().expect("session lock").cell_payload(&id)?))
}

async fn stretch(
    State(s): State<Shared>,
    Path(id): Path<String>,
    body: Result<Json<StretchRequest>, JsonRejection>,
) -> ApiResult<Outcome> {
    let Json(b) = body?;
    apply(
        &s,
        Operation::Stretch {
            cell_id: id,
            handle: b.handle,
            dx: b.dx,
            dy: b.dy,
        },
    )
}

async fn place(State(s): State<Shared>, body: Result<Json<PlaceRequest>, JsonRejection>) -> ApiResult<Outcome> {
    let Json(b) = body?;
    apply(
        &s,
        Operation::Place {
            cell_id: b.cell_id,
            x: b.x,
            y: b.y,
            id: b.id,
            nets: b.nets,
        },
    )
}

async fn move_instance(State(s): State<Shared>, body: Result<Json<MoveRequest>, JsonRejection>) -> ApiResult<Outcome> {
    let Json(b) = body?;
    apply(&s, Operation::Move { instance: b.instance, x: b.x, y: b.y })
}

async fn abut(State(s): State<Shared>, body: Result<Json<PairRequest>, JsonRejection>) -> ApiResult<Outcome> {
    let Json(b) = body?;
    apply(&s, Operation::Abut { a: b.a, b: b.b })
}

async fn unabut(State(s): State<Shared>, body: Result<Json<PairRequest>, JsonRejection>) -> ApiResult<Outcome> {
    let Json(b) = body?;
    apply(&s, Operation::Unabut { a: b.a, b: b.b })
}

async fn schematic(State(s): State<Shared>, body: Result<Json<SchematicRequest>, JsonRejection>) -> ApiResult<Outcome> {
    let Json(b) = body?;
    apply(&s, Operation::SetSchematic { spice: b.spice })
}

async fn wire(State(s): State<Shared>, body: Result<Json<WireRequest>, JsonRejection>) -> ApiResult<Outcome> {
    let Json(b) = body?;
    apply(&s, Operation::AddWire { shape: b.shape })
}

async fn undo(State(s): State<Shared>) -> ApiResult<Value> {
    let undone = s.lock().expect("session lock").undo()?;
    Ok(Json(json!({ "undone": undone })))
}

async fn design(State(s): State<Shared>) -> Json<DesignView> {
    let s = s.lock().expect("session lock");
    Json(DesignView {
        instances: s.instances(),
        wires: s.design.wires.clone(),
        journal: s.journal().to_vec(),
    })
}

async fn drc(State(s): State<Shared>) -> Json<Vec<hvcell::Violation>> {
    Json(s.lock().expect("session lock").drc())
}

async fn flylines(State(s): State<Shared>) -> Json<Vec<hvcell::verify::Flyline>> {
    Json(s.lock().expect("session lock").flylines())
}

async fn lvs(State(s): State<Shared>) -> Json<hvcell::LvsReport> {
    let s = s.lock().expect("session lock");
    Json(compare_netlists(&extract_netlist(&s.design, &s.tech), &s.reference_netlist()))
}

async fn gds(State(s): State<Shared>) -> Result<Response, ApiError> {
    let bytes = s.lock().expect("session lock").gds()?;
    Ok((
        [
            (header::CONTENT_TYPE, "application/octet-stream"),
            (header::CONTENT_DISPOSITION, "attachment; filename=\"design.gds\""),
        ],
        bytes,
    )
        .into_response())
}

/// Routes for one session.
pub fn router(session: Session) -> Router {
    let state: Shared = Arc::new(Mutex::new(session));
    let v1 = Router::new()
        .route("/tech/layers", get(layers))
        .route("/cells", post(create_cell))
        .route("/cells/{id}", get(get_cell))
        .route("/cells/{id}/stretch", post(stretch))
        .route("/design", get(design))
        .route("/design/place", post(place))
        .route("/design/move", post(move_instance))
        .route("/design/abut", post(abut))
        .route("/design/unabut", post(unabut))
        .route("/design/schematic", post(schematic))
        .route("/design/wires", post(wire))
        .route("/design/undo", post(undo))
        .route("/design/drc", get(drc))
        .route("/design/flylines", get(flylines))
        .route("/design/lvs", get(lvs))
        .route("/design/gds", get(gds));
    Router::new().nest("/v1", v1).with_state(state)
}

/// Serves the API on `addr` until interrupted.
pub async fn serve(session: Session, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(session))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
