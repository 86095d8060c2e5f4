//! Local HTTP API over one in-memory design. Reads share a lock; every
//! mutation takes it exclusively, revalidates the whole design and answers
//! with the DRC report of the result.

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::sync::Arc;
use tcbforge::drc::{run_drc, DrcConfig, DrcReport};
use tcbforge::dsl::serialize;
use tcbforge::fabricate::generate_solids;
use tcbforge::geometry::{fold_preview_about, generate_point_grid, BendLine, Mesh};
use tcbforge::layout::{validate_design, BoardDesign, ElementKind, Socket, Trace, Via};
use tokio::sync::RwLock;

pub struct Session {
    pub board: BoardDesign,
    /// Where `POST /save` writes the design.
    pub path: PathBuf,
    pub config: DrcConfig,
}

impl Session {
    pub fn new(board: BoardDesign, path: PathBuf, config: DrcConfig) -> Self {
        Self {
            board,
            path,
            config,
        }
    }
}

type Shared = Arc<RwLock<Session>>;

pub fn router(session: Session) -> Router {
    Router::new()
        .route("/design", get(get_design).put(put_design))
        .route("/traces", post(add::<Trace>))
        .route("/vias", post(add::<Via>))
        .route("/sockets", post(add::<Socket>))
        .route("/bends", post(add::<BendLine>))
        .route("/{kind}/{id}", delete(remove))
        .route("/drc", get(get_drc))
        .route("/mesh", get(get_mesh))
        .route("/save", post(save))
        .route("/grid", get(get_grid))
        .with_state(Arc::new(RwLock::new(session)))
}

fn error(status: StatusCode, errors: Value) -> Response {
    (status, Json(json!({ "errors": errors }))).into_response()
}

#[allow(clippy::result_large_err)]
fn decode<T: DeserializeOwned>(body: &[u8]) -> Result<T, Response> {
    serde_json::from_slice(body).map_err(|e| {
        error(
            StatusCode::BAD_REQUEST,
            json!([{ "message": e.to_string(), "line": e.line(), "column": e.column() }]),
        )
    })
}

fn drc_body(report: &DrcReport) -> Value {
    json!({
        "errors": report.count(tcbforge::drc::Severity::Error),
        "warnings": report.count(tcbforge::drc::Severity::Warning),
        "info": report.count(tcbforge::drc::Severity::Info),
        "findings": report.findings,
    })
}

/// Validates `next` and commits it, or leaves the session untouched.
fn commit(session: &mut Session, mut next: BoardDesign) -> Response {
    let errs = validate_design(&next);
    if !errs.is_empty() {
        return error(StatusCode::UNPROCESSABLE_ENTITY, json!(errs));
    }
    next.canonicalize();
    session.board = next;
    let report = run_drc(&session.board, &session.config);
    Json(json!({ "drc": drc_body(&report) })).into_response()
}

async fn get_design(State(s): State<Shared>) -> Json<BoardDesign> {
    Json(s.read().await.board.clone())
}

async fn put_design(State(s): State<Shared>, body: Bytes) -> Response {
    let next: BoardDesign = match decode(&body) {
        Ok(b) => b,
        Err(r) => return r,
    };
    commit(&mut *s.write().await, next)
}

/// Element lists a POST can append to.
trait Element: DeserializeOwned + Send + 'static {
    fn push(self, board: &mut BoardDesign);
}

impl Element for Trace {
    fn push(self, board: &mut BoardDesign) {
        board.traces.push(self);
    }
}

impl Element for Via {
    fn push(self, board: &mut BoardDesign) {
        board.vias.push(self);
    }
}

impl Element for Socket {
    fn push(self, board: &mut BoardDesign) {
        board.sockets.push(self);
    }
}

impl Element for BendLine {
    fn push(self, board: &mut BoardDesign) {
        board.bends.push(self);
    }
}

async fn add<T: Element>(State(s): State<Shared>, body: Bytes) -> Response {
    let element: T = match decode(&body) {
        Ok(e) => e,
        Err(r) => return r,
    };
    let mut session = s.write().await;
    let mut next = session.board.clone();
    element.push(&mut next);
    commit(&mut session, next)
}

async fn remove(
    State(s): State<Shared>,
    UrlPath((kind, id)): UrlPath<(String, String)>,
) -> Response {
    let Some(kind) = ElementKind::parse(&kind) else {
        return error(
            StatusCode::NOT_FOUND,
            json!([{ "message": format!("unknown element kind `{kind}`") }]),
        );
    };
    let mut session = s.write().await;
    let mut next = session.board.clone();
    if !next.remove(kind, &id) {
        return error(
            StatusCode::NOT_FOUND,
            json!([{ "message": format!("no {kind} `{id}`") }]),
        );
    }
    commit(&mut session, next)
}

async fn get_drc(State(s): State<Shared>) -> Json<Value> {
    let session = s.read().await;
    Json(drc_body(&run_drc(&session.board, &session.config)))
}

#[derive(Deserialize)]
struct MeshQuery {
    #[serde(default)]
    folded: bool,
}

fn buffers(m: &Mesh) -> Value {
    let vertices: Vec<f64> = m.vertices.iter().flat_map(|p| [p.x, p.y, p.z]).collect();
    let triangles: Vec<u32> = m.triangles.iter().flatten().copied().collect();
    json!({ "vertices": vertices, "triangles": triangles })
}

async fn get_mesh(State(s): State<Shared>, Query(q): Query<MeshQuery>) -> Response {
    let board = s.read().await.board.clone();
    let solids = match generate_solids(&board) {
        Ok(s) => s,
        Err(e) => return error(StatusCode::CONFLICT, json!([{ "message": e.to_string() }])),
    };
    let (mut substrate, mut conductor, mut overfolded) =
        (solids.substrate, solids.conductor, false);
    if q.folded {
        // Fold about the mid-plane of the board.
        let mid = board.depth() / 2.0;
        for m in [&mut substrate, &mut conductor] {
            match fold_preview_about(m, &board.bends, mid) {
                Ok(r) => {
                    overfolded |= r.self_intersection;
                    *m = r.mesh;
                }
                Err(e) => {
                    return error(StatusCode::CONFLICT, json!([{ "message": e.to_string() }]))
                }
            }
        }
    }
    Json(json!({
        "folded": q.folded,
        "self_intersection": overfolded,
        "substrate": buffers(&substrate),
        "conductor": buffers(&conductor),
    }))
    .into_response()
}

async fn save(State(s): State<Shared>) -> Response {
    let session = s.write().await;
    let text = match serialize(&session.board) {
        Ok(t) => t,
        Err(errs) => return error(StatusCode::UNPROCESSABLE_ENTITY, json!(errs)),
    };
    match tokio::fs::write(&session.path, text.as_bytes()).await {
        Ok(()) => Json(json!({ "path": session.path.display().to_string(), "bytes": text.len() }))
            .into_response(),
        Err(e) => error(
            StatusCode::INTERNAL_SERVER_ERROR,
            json!([{ "message": e.to_string() }]),
        ),
    }
}

async fn get_grid(State(s): State<Shared>) -> Response {
    let session = s.read().await;
    let b = &session.board;
    let grid = b
        .planar_outline()
        .and_then(|o| generate_point_grid(&o, b.pitch, b.margin));
    match grid {
        Ok(g) => {
            let points: Vec<Value> = g
                .points
                .iter()
                .map(|p| json!({ "u": p.index.u, "v": p.index.v, "x": p.position.x, "y": p.position.y }))
                .collect();
            Json(json!({ "pitch": b.pitch, "margin": b.margin, "points": points })).into_response()
        }
        Err(e) => error(
            StatusCode::UNPROCESSABLE_ENTITY,
            json!([{ "message": e.to_string() }]),
        ),
    }
}
