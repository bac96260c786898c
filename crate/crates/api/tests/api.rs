use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use brickgen_api::{router, AppState};
use brickgen_core::fixtures;
use brickgen_core::rdf::{parse_turtle, Iri, Term, Triple};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

struct Reply {
    status: StatusCode,
    content_type: String,
    text: String,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_str(&self.text).unwrap_or_else(|e| panic!("not JSON ({e}): {}", self.text))
    }
}

async fn call(app: &Router, method: Method, uri: &str, body: impl Into<Body>, content_type: &str) -> Reply {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header(header::CONTENT_TYPE, content_type)
        .body(body.into())
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let content_type = resp
        .headers()
        .get(header::CONTENT_TYPE)
        .map(|v| v.to_str().unwrap().to_string())
        .unwrap_or_default();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    Reply {
        status,
        content_type,
        text: String::from_utf8(bytes.to_vec()).unwrap(),
    }
}

async fn get(app: &Router, uri: &str) -> Reply {
    call(app, Method::GET, uri, Body::empty(), "application/json").await
}

async fn send_json(app: &Router, method: Method, uri: &str, body: Value) -> Reply {
    call(app, method, uri, body.to_string(), "application/json").await
}

async fn ftc_app(root: &std::path::Path) -> Router {
    let app = router(AppState::new(root));
    let r = send_json(
        &app,
        Method::POST,
        "/projects",
        json!({"id": "ftc", "prefix": fixtures::FTC_PREFIX, "base": fixtures::FTC_BASE}),
    )
    .await;
    assert_eq!(r.status, StatusCode::CREATED, "{}", r.text);
    let r = call(&app, Method::POST, "/projects/ftc/pointlist", fixtures::FTC_POINTLIST_CSV, "text/csv").await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.text);
    app
}

fn reserve_av() -> Iri {
    Iri::new(format!("{}Reserve_AV", fixtures::FTC_BASE)).unwrap()
}

fn typed_as(ttl: &str, class: &str) -> bool {
    let g = parse_turtle(ttl).expect("graph.ttl parses");
    let tax = fixtures::taxonomy();
    g.contains(&Triple::new(reserve_av(), Iri::rdf_type(), Term::Iri(tax.class_iri(class))))
}

#[tokio::test]
async fn override_then_rebuild_survives_restart() {
    let tmp = tempfile::tempdir().unwrap();
    let app = ftc_app(tmp.path()).await;

    let nomatch = get(&app, "/projects/ftc/matches?status=nomatch").await.json();
    let labels: Vec<&str> = nomatch.as_array().unwrap().iter().map(|m| m["label"].as_str().unwrap()).collect();
    assert!(labels.contains(&"Reserve_AV"), "{labels:?}");

    let r = send_json(
        &app,
        Method::PUT,
        "/projects/ftc/matches/20.01.001.006",
        json!({"code": "20.01.001.006", "class": "Occupancy_Count_Sensor", "note": "people counter"}),
    )
    .await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.text);
    assert_eq!(r.json()["decisions"], 1);
    assert_eq!(r.json()["match"]["status"], "overridden");

    let r = call(&app, Method::POST, "/projects/ftc/graph", Body::empty(), "application/json").await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.text);
    let r = get(&app, "/projects/ftc/graph.ttl").await;
    assert!(r.content_type.starts_with("text/turtle"));
    assert!(typed_as(&r.text, "Occupancy_Count_Sensor"));
    drop(app);

    // a fresh service over the same directory sees the committed decision
    let app = router(AppState::new(tmp.path()));
    let stats = get(&app, "/projects/ftc/stats").await.json();
    assert_eq!(stats["decisions"], 1);
    assert_eq!(stats["overridden"], 1);
    let overridden = get(&app, "/projects/ftc/matches?status=overridden").await.json();
    assert_eq!(overridden[0]["best"], "Occupancy_Count_Sensor");
    assert!(typed_as(&get(&app, "/projects/ftc/graph.ttl").await.text, "Occupancy_Count_Sensor"));

    // re-uploading the list re-runs matching; the decision is replayed
    let r = call(&app, Method::POST, "/projects/ftc/pointlist", fixtures::FTC_POINTLIST_CSV, "text/csv").await;
    assert_eq!(r.status, StatusCode::OK);
    let r = call(&app, Method::POST, "/projects/ftc/graph", Body::empty(), "application/json").await;
    assert_eq!(r.status, StatusCode::OK);
    assert!(typed_as(&get(&app, "/projects/ftc/graph.ttl").await.text, "Occupancy_Count_Sensor"));
}

#[tokio::test]
async fn stats_layout_and_validation() {
    let tmp = tempfile::tempdir().unwrap();
    let app = ftc_app(tmp.path()).await;
    let stats = get(&app, "/projects/ftc/stats").await.json();
    let all = get(&app, "/projects/ftc/matches?status=all").await.json();
    let all = all.as_array().unwrap();
    let matched = all.iter().filter(|m| !m["best"].is_null()).count();
    assert_eq!(stats["total"], all.len());
    assert_eq!(stats["matched"], matched);
    let rate = stats["match_rate"].as_f64().unwrap();
    assert!((rate - matched as f64 / all.len() as f64).abs() < 1e-12);

    let layout = get(&app, "/projects/ftc/layout").await.json();
    assert!(layout["floors"].as_array().unwrap().iter().any(|f| f["floor"] == 10));

    let r = call(&app, Method::POST, "/projects/ftc/validate", Body::empty(), "application/json").await;
    assert_eq!(r.status, StatusCode::CONFLICT);
    assert_eq!(r.json()["prerequisite"], "graph");
    call(&app, Method::POST, "/projects/ftc/graph", Body::empty(), "application/json").await;
    let report = call(&app, Method::POST, "/projects/ftc/validate", Body::empty(), "application/json")
        .await
        .json();
    assert_eq!(report["summary"]["instances"], 1);
    assert_eq!(report["summary"]["passed"], 1);
}

#[tokio::test]
async fn prefixes_and_terms() {
    let tmp = tempfile::tempdir().unwrap();
    let app = ftc_app(tmp.path()).await;
    let prefixes = get(&app, "/projects/ftc/prefixes").await.json();
    let find = |v: &Value, term: &str| v.as_array().unwrap().iter().find(|c| c["term"] == term).cloned();
    assert_eq!(find(&prefixes, "fcu").unwrap()["registered"], false);
    assert_eq!(find(&prefixes, "sdf").unwrap()["registered"], true);

    let mut reg = get(&app, "/projects/ftc/hvac-terms").await.json();
    let before = std::fs::read_dir(tmp.path().join("ftc")).unwrap().count();
    reg["terms"]["fcu"] = json!({"brick_class": "Not_A_Class"});
    let r = send_json(&app, Method::PUT, "/projects/ftc/hvac-terms", reg.clone()).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert!(!tmp.path().join("ftc/registry.json").exists(), "failed request wrote the registry");
    assert_eq!(std::fs::read_dir(tmp.path().join("ftc")).unwrap().count(), before);

    reg["terms"]["fcu"] = json!({"brick_class": "Fan_Coil_Unit"});
    reg["topology"].as_array_mut().unwrap().push(json!(["ac", "feeds", "fcu"]));
    let r = send_json(&app, Method::PUT, "/projects/ftc/hvac-terms", reg).await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.text);
    let prefixes = get(&app, "/projects/ftc/prefixes").await.json();
    assert_eq!(find(&prefixes, "fcu").unwrap()["registered"], true);
    call(&app, Method::POST, "/projects/ftc/graph", Body::empty(), "application/json").await;
    let ttl = get(&app, "/projects/ftc/graph.ttl").await.text;
    let g = parse_turtle(&ttl).unwrap();
    let fcu = Iri::new(format!("{}FCU_12", fixtures::FTC_BASE)).unwrap();
    let class = fixtures::taxonomy().class_iri("Fan_Coil_Unit");
    assert!(g.contains(&Triple::new(fcu, Iri::rdf_type(), Term::Iri(class))));
}

#[tokio::test]
async fn timeseries_lookup() {
    let tmp = tempfile::tempdir().unwrap();
    let app = ftc_app(tmp.path()).await;
    let r = call(&app, Method::POST, "/projects/ftc/timeseries", fixtures::FTC_TIMESERIES_CSV, "text/csv").await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.text);
    assert_eq!(r.json()["orphan_codes"], json!([]));
    let index: Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("ftc/ts_index.json")).unwrap()).unwrap();
    let id = index
        .as_object()
        .unwrap()
        .iter()
        .find(|(_, code)| *code == "12.34.567.890")
        .map(|(id, _)| id.clone())
        .unwrap();
    let r = get(&app, &format!("/projects/ftc/timeseries/{id}?from=2023-04-01&to=2023-04-01T23:59:59")).await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.text);
    assert_eq!(r.json()["samples"][0]["value"], 25.0);
    assert_eq!(get(&app, "/projects/ftc/timeseries/42").await.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn error_responses_are_json() {
    let tmp = tempfile::tempdir().unwrap();
    let app = router(AppState::new(tmp.path()));

    let r = get(&app, "/projects/nope/stats").await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    assert_eq!(r.json()["code"], "not_found");

    let r = call(&app, Method::POST, "/projects", "{not json", "application/json").await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(r.json()["status"], 400);
    let r = send_json(&app, Method::POST, "/projects", json!({"id": "../etc"})).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    let r = send_json(&app, Method::POST, "/projects", json!({"id": "p", "base": "http://x"})).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);

    assert_eq!(send_json(&app, Method::POST, "/projects", json!({"id": "p"})).await.status, StatusCode::CREATED);
    assert_eq!(send_json(&app, Method::POST, "/projects", json!({"id": "p"})).await.status, StatusCode::CONFLICT);
    assert_eq!(get(&app, "/projects").await.json(), json!(["p"]));

    let r = get(&app, "/projects/p/matches").await;
    assert_eq!(r.status, StatusCode::CONFLICT);
    let r = get(&app, "/projects/p/prefixes").await;
    assert_eq!(r.status, StatusCode::CONFLICT);
    let r = get(&app, "/projects/p/graph.ttl").await;
    assert_eq!(r.status, StatusCode::CONFLICT);
    assert_eq!(r.json()["prerequisite"], "graph");

    let r = call(&app, Method::POST, "/projects/p/pointlist", "code,name\n1.x,bad\n", "text/csv").await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    call(&app, Method::POST, "/projects/p/pointlist", fixtures::FTC_POINTLIST_CSV, "text/csv").await;

    let r = send_json(&app, Method::PUT, "/projects/p/matches/9.9.9.9", json!({"class": "Setpoint"})).await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    let r = send_json(&app, Method::PUT, "/projects/p/matches/20.01.001.006", json!({"class": "Warp_Drive"})).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    let r = send_json(&app, Method::PUT, "/projects/p/matches/20.01.001.006", json!({})).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    let r = send_json(&app, Method::PUT, "/projects/p/matches/20.01.001.006", json!({"code": "1.1", "class": "Setpoint"})).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(get(&app, "/projects/p/stats").await.json()["decisions"], 0);

    let r = get(&app, "/projects/p/matches?status=bogus").await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(get(&app, "/nowhere").await.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn exclusion_and_concurrent_decisions() {
    let tmp = tempfile::tempdir().unwrap();
    let app = ftc_app(tmp.path()).await;
    let codes = ["20.01.001.001", "20.01.001.002", "20.01.001.003", "20.01.001.004", "10.53.600.001"];
    let tasks: Vec<_> = codes
        .iter()
        .map(|code| {
            let app = app.clone();
            let uri = format!("/projects/ftc/matches/{code}");
            tokio::spawn(async move { send_json(&app, Method::PUT, &uri, json!({"exclude": true})).await.status })
        })
        .collect();
    for t in tasks {
        assert_eq!(t.await.unwrap(), StatusCode::OK);
    }
    assert_eq!(get(&app, "/projects/ftc/stats").await.json()["decisions"], codes.len());
    call(&app, Method::POST, "/projects/ftc/graph", Body::empty(), "application/json").await;
    let ttl = get(&app, "/projects/ftc/graph.ttl").await.text;
    assert!(!ttl.contains("Locker_Room"));
}

#[tokio::test]
async fn cors_headers() {
    let tmp = tempfile::tempdir().unwrap();
    let app = router(AppState::new(tmp.path()));
    let req = Request::builder()
        .method(Method::OPTIONS)
        .uri("/projects")
        .header(header::ORIGIN, "http://localhost:5173")
        .header(header::ACCESS_CONTROL_REQUEST_METHOD, "POST")
        .body(Body::empty())
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert!(resp.headers().contains_key(header::ACCESS_CONTROL_ALLOW_ORIGIN));
}
