use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use tcbforge::drc::DrcConfig;
use tcbforge::dsl::parse;
use tcbforge::fabricate::generate_solids;
use tcbforge::geometry::fold_preview_about;
use tcbforge_cli::server::{router, Session};
use tower::ServiceExt;

fn led() -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/samples/led_board.tcb");
    std::fs::read_to_string(p).unwrap()
}

fn app(save_to: PathBuf) -> Router {
    router(Session::new(
        parse(&led()).unwrap(),
        save_to,
        DrcConfig::default(),
    ))
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<&str>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_owned())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, v)
}

#[tokio::test]
async fn get_design_returns_the_model() {
    let app = app(PathBuf::from("/nonexistent"));
    let (s, v) = call(&app, Method::GET, "/design", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["name"], "led_board");
    assert_eq!(v["traces"].as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn add_trace_validates_and_reports_drc() {
    let app = app(PathBuf::from("/nonexistent"));
    let off = json!({ "id": "far", "path": [{ "u": 0, "v": 0 }, { "u": 90, "v": 0 }] }).to_string();
    let (s, v) = call(&app, Method::POST, "/traces", Some(&off)).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let errs = v["errors"].as_array().unwrap();
    assert!(
        errs.iter()
            .any(|e| e["code"] == "off-grid" && e["element"][1] == "far"),
        "{v}"
    );
    // Rejected edits leave the design alone.
    let (_, d) = call(&app, Method::GET, "/design", None).await;
    assert_eq!(d["traces"].as_array().unwrap().len(), 2);

    let narrow =
        json!({ "id": "thin", "path": [{ "u": 12, "v": 9 }, { "u": 13, "v": 9 }], "width": 0.4 })
            .to_string();
    let (s, v) = call(&app, Method::POST, "/traces", Some(&narrow)).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["drc"]["errors"], 1);
    assert!(v["drc"]["findings"]
        .as_array()
        .unwrap()
        .iter()
        .any(|f| f["rule_id"] == "geometry.width"));

    let (s, v) = call(&app, Method::GET, "/drc", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["errors"], 1);

    let (s, v) = call(&app, Method::DELETE, "/traces/thin", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["drc"]["errors"], 0);
    let (s, _) = call(&app, Method::DELETE, "/traces/thin", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(&app, Method::DELETE, "/widgets/x", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn duplicate_id_is_rejected() {
    let app = app(PathBuf::from("/nonexistent"));
    let dup = json!({ "id": "anode", "at": { "u": 12, "v": 9 } }).to_string();
    let (s, v) = call(&app, Method::POST, "/vias", Some(&dup)).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["errors"][0]["code"], "duplicate-id");
}

#[tokio::test]
async fn malformed_json_is_a_400_with_position() {
    let app = app(PathBuf::from("/nonexistent"));
    let (s, v) = call(
        &app,
        Method::POST,
        "/traces",
        Some("{\n  \"id\": \"x\",\n  \"path\": [1,\n"),
    )
    .await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let e = &v["errors"][0];
    assert!(e["line"].as_u64().unwrap() >= 3, "{v}");
    assert!(e["column"].is_u64());
    let (s, _) = call(&app, Method::PUT, "/design", Some(r#"{"bogus": 1}"#)).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn put_design_replaces_whole_model() {
    let app = app(PathBuf::from("/nonexistent"));
    let (_, mut d) = call(&app, Method::GET, "/design", None).await;
    d["name"] = json!("renamed");
    d["vias"] = json!([]);
    d["traces"].as_array_mut().unwrap().pop();
    let (s, v) = call(&app, Method::PUT, "/design", Some(&d.to_string())).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    let (_, now) = call(&app, Method::GET, "/design", None).await;
    assert_eq!(now["name"], "renamed");
    assert_eq!(now["traces"].as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn mesh_flat_and_folded() {
    let app = app(PathBuf::from("/nonexistent"));
    let board = parse(&led()).unwrap();
    let solids = generate_solids(&board).unwrap();

    let (s, flat) = call(&app, Method::GET, "/mesh", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(flat["folded"], false);
    assert_eq!(
        flat["substrate"]["vertices"].as_array().unwrap().len(),
        3 * solids.substrate.vertices.len()
    );
    assert_eq!(
        flat["conductor"]["triangles"].as_array().unwrap().len(),
        3 * solids.conductor.triangles.len()
    );

    let (s, folded) = call(&app, Method::GET, "/mesh?folded=true", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(folded["folded"], true);
    let expect = fold_preview_about(&solids.substrate, &board.bends, board.depth() / 2.0).unwrap();
    let got: Vec<f64> = folded["substrate"]["vertices"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    let want: Vec<f64> = expect
        .mesh
        .vertices
        .iter()
        .flat_map(|p| [p.x, p.y, p.z])
        .collect();
    assert_eq!(got.len(), want.len());
    assert!(got.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-9));
    assert_eq!(folded["self_intersection"], false);
}

#[tokio::test]
async fn save_writes_dsl_that_parses_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("saved.tcb");
    let app = app(path.clone());
    let via = json!({ "id": "extra", "at": { "u": 12, "v": 9 } }).to_string();
    assert_eq!(
        call(&app, Method::POST, "/vias", Some(&via)).await.0,
        StatusCode::OK
    );
    let (s, v) = call(&app, Method::POST, "/save", None).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    let text = std::fs::read_to_string(&path).unwrap();
    let back = parse(&text).unwrap();
    assert!(back.vias.iter().any(|v| v.id == "extra"));
    assert_eq!(v["bytes"], text.len());
}

#[tokio::test]
async fn grid_lists_lattice_points() {
    let app = app(PathBuf::from("/nonexistent"));
    let (s, v) = call(&app, Method::GET, "/grid", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["pitch"], 2.54);
    let pts = v["points"].as_array().unwrap();
    assert!(!pts.is_empty());
    for p in pts {
        let (u, x) = (p["u"].as_f64().unwrap(), p["x"].as_f64().unwrap());
        assert!((x - (2.54 + 2.54 * u)).abs() < 1e-9, "{p}");
    }
}

#[tokio::test]
async fn concurrent_reads_and_writes() {
    let app = app(PathBuf::from("/nonexistent"));
    let mut tasks = Vec::new();
    for i in 0..16 {
        let app = app.clone();
        tasks.push(tokio::spawn(async move {
            if i % 4 == 0 {
                let via = json!({ "id": format!("v{i}"), "at": { "u": 2 + i / 4 * 2, "v": 9 } })
                    .to_string();
                call(&app, Method::POST, "/vias", Some(&via)).await.0
            } else {
                call(&app, Method::GET, "/drc", None).await.0
            }
        }));
    }
    for t in tasks {
        assert_eq!(t.await.unwrap(), StatusCode::OK);
    }
    let (_, d) = call(&app, Method::GET, "/design", None).await;
    assert_eq!(d["vias"].as_array().unwrap().len(), 5);
}
