use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use jalgo_service::{router, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

const P1: &str = "begin\n r := newNode(5)\n setLeft(r, newNode(3))\n setRight(r, newNode(8))\nend";
const P2: &str = "begin\n i := 0\n while i < 2 do\n  i := i + 1\n end\nend";
const P3: &str = "function fact(n)\n  if n <= 1 then\n    return 1\n  end\n  return n * fact(n - 1)\nend\nbegin\n  x := fact(3)\n  print(x)\nend\n";

async fn send(
    app: &Router,
    method: Method,
    uri: &str,
    body: Option<String>,
) -> (StatusCode, String) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header(header::CONTENT_TYPE, "application/json")
        .body(body.map_or_else(Body::empty, Body::from))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    assert_eq!(
        resp.headers().get(header::CONTENT_TYPE).unwrap(),
        "application/json",
        "{uri}"
    );
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn get(app: &Router, uri: &str) -> (StatusCode, String) {
    send(app, Method::GET, uri, None).await
}

async fn create(app: &Router, body: Value) -> (StatusCode, Value) {
    let (status, text) = send(app, Method::POST, "/api/programs", Some(body.to_string())).await;
    (status, serde_json::from_str(&text).unwrap())
}

async fn create_id(app: &Router, source: &str) -> String {
    let (status, body) = create(app, json!({ "source": source })).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    body["program_id"].as_str().unwrap().to_string()
}

fn app() -> Router {
    router(AppState::new())
}

#[tokio::test]
async fn create_p1() {
    let app = app();
    let (status, body) = create(&app, json!({ "source": P1 })).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(body["frame_count"], 4);
    assert_eq!(body["status"], "completed");
    assert_eq!(body["error"], Value::Null);
    let keys: Vec<&str> = body
        .as_object()
        .unwrap()
        .keys()
        .map(String::as_str)
        .collect();
    assert_eq!(keys.len(), 4);
}

#[tokio::test]
async fn create_reports_compile_errors() {
    let app = app();
    let (status, body) = create(&app, json!({ "source": "begin @ end" })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let errors = body["errors"].as_array().unwrap();
    assert_eq!(errors.len(), 1);
    assert_eq!(errors[0]["phase"], "lexical");
    assert_eq!(errors[0]["code"], "E-LEX-1");
    assert_eq!(
        (errors[0]["line"].as_u64(), errors[0]["column"].as_u64()),
        (Some(1), Some(7))
    );

    // Every collected error, not only the first.
    let (status, body) = create(&app, json!({ "source": "begin a() b() end" })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["errors"].as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn step_limit_and_limits_validation() {
    let app = app();
    let (status, body) = create(
        &app,
        json!({ "source": "begin while true do end end", "max_frames": 10 }),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(body["status"], "step_limit");
    assert_eq!(body["frame_count"], 10);

    let (status, _) = create(&app, json!({ "source": "begin end", "max_nodes": 0 })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn malformed_and_oversized_requests() {
    let app = app();
    let (status, _) = send(
        &app,
        Method::POST,
        "/api/programs",
        Some("{not json".into()),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = send(
        &app,
        Method::POST,
        "/api/programs",
        Some(r#"{"src":"x"}"#.into()),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let big = format!("begin end{}", " ".repeat(jalgo_service::MAX_SOURCE_BYTES));
    let (status, _) = create(&app, json!({ "source": big })).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
}

#[tokio::test]
async fn metadata() {
    let app = app();
    let id = create_id(&app, P3).await;
    let (status, text) = get(&app, &format!("/api/programs/{id}")).await;
    assert_eq!(status, StatusCode::OK);
    let body: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(body["output"], json!([{ "step": 7, "text": "6" }]));
    assert_eq!(body["source"], P3);
    assert_eq!(body["frame_count"], 9);
    assert!(text.starts_with(&format!(r#"{{"program_id":"{id}","source":"#)));

    let id = create_id(&app, P1).await;
    let (_, text) = get(&app, &format!("/api/programs/{id}")).await;
    let body: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(body["status"], "completed");

    let (status, _) = get(&app, "/api/programs/nope").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn frame_pages() {
    let app = app();
    let id = create_id(&app, P1).await;
    let page = |q: &str| format!("/api/programs/{id}/frames{q}");

    let (status, text) = get(&app, &page("?from=0&count=2")).await;
    assert_eq!(status, StatusCode::OK);
    let body: Value = serde_json::from_str(&text).unwrap();
    let steps: Vec<u64> = body["frames"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["step"].as_u64().unwrap())
        .collect();
    assert_eq!(steps, [0, 1]);

    let (_, text) = get(&app, &page("?from=3&count=10")).await;
    assert_eq!(
        text,
        r#"{"frames":[{"step":3,"line":0,"roots":[1],"selected":1,"nodes":[{"id":1,"value":5,"left":2,"right":3},{"id":2,"value":3,"left":null,"right":null},{"id":3,"value":8,"left":null,"right":null}]}]}"#
    );

    let (_, text) = get(&app, &page("")).await;
    let body: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(body["frames"].as_array().unwrap().len(), 4);

    assert_eq!(
        get(&app, &page("?from=4")).await.0,
        StatusCode::RANGE_NOT_SATISFIABLE
    );
    assert_eq!(
        get(&app, &page("?count=0")).await.0,
        StatusCode::BAD_REQUEST
    );
    assert_eq!(
        get(&app, &page("?count=1001")).await.0,
        StatusCode::BAD_REQUEST
    );
    assert_eq!(
        get(&app, &page("?from=-1")).await.0,
        StatusCode::BAD_REQUEST
    );
    assert_eq!(
        get(&app, "/api/programs/nope/frames").await.0,
        StatusCode::NOT_FOUND
    );
}

#[tokio::test]
async fn idempotent_reads() {
    let app = app();
    let id = create_id(&app, P3).await;
    for uri in [
        format!("/api/programs/{id}"),
        format!("/api/programs/{id}/frames?from=2&count=5"),
        format!("/api/programs/{id}/next-break?from=0&lines=5"),
    ] {
        let first = get(&app, &uri).await;
        let second = get(&app, &uri).await;
        assert_eq!(first, second);
    }
}

#[tokio::test]
async fn next_break() {
    let app = app();
    let id = create_id(&app, P2).await;
    let nb = |q: &str| format!("/api/programs/{id}/next-break?{q}");

    assert_eq!(
        get(&app, &nb("from=0&dir=forward&lines=4")).await.1,
        r#"{"index":2}"#
    );
    assert_eq!(
        get(&app, &nb("from=2&dir=forward&lines=4")).await.1,
        r#"{"index":4}"#
    );
    assert_eq!(
        get(&app, &nb("from=0&dir=forward&lines=")).await.1,
        r#"{"index":6}"#
    );
    assert_eq!(get(&app, &nb("from=0")).await.1, r#"{"index":6}"#);
    assert_eq!(
        get(&app, &nb("from=6&dir=back&lines=4")).await.1,
        r#"{"index":4}"#
    );
    assert_eq!(
        get(&app, &nb("from=6&dir=back&lines=3,4")).await.1,
        r#"{"index":5}"#
    );

    assert_eq!(get(&app, &nb("from=7")).await.0, StatusCode::BAD_REQUEST);
    assert_eq!(
        get(&app, &nb("dir=forward")).await.0,
        StatusCode::BAD_REQUEST
    );
    assert_eq!(
        get(&app, &nb("from=0&dir=up")).await.0,
        StatusCode::BAD_REQUEST
    );
    assert_eq!(
        get(&app, &nb("from=0&lines=a")).await.0,
        StatusCode::BAD_REQUEST
    );
    assert_eq!(
        get(&app, &nb("from=0&lines=0")).await.0,
        StatusCode::BAD_REQUEST
    );
    assert_eq!(
        get(&app, "/api/programs/nope/next-break?from=0").await.0,
        StatusCode::NOT_FOUND
    );
}

#[tokio::test]
async fn cors_and_unknown_routes() {
    let app = app();
    let req = Request::builder()
        .uri("/api/elsewhere")
        .header(header::ORIGIN, "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::NOT_FOUND);
    assert_eq!(
        resp.headers()
            .get(header::ACCESS_CONTROL_ALLOW_ORIGIN)
            .unwrap(),
        "*"
    );
}
