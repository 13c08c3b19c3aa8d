use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

use peano_tutor_cli::config::{BackendKind, Config};
use peano_tutor_cli::http::router;
use peano_tutor_cli::service::{CreateSession, Service, SubmitStep};
use peano_tutor_cli::session::{SessionStatus, Verdict};
use peano_tutor_cli::workspace::Workspace;

/// (theorem, proof whose NL steps are submitted, steps before a hint).
/// The replay store holds exactly the prompts these sessions produce.
const SESSIONS: [(&str, &str, Option<usize>); 3] = [
    ("add_comm", "add_comm_incorrect", Some(3)),
    (
        "eq_succ_of_ne_zero",
        "eq_succ_of_ne_zero_incorrect",
        Some(1),
    ),
    ("zero_add", "zero_add_equation", None),
];

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn config(backend: BackendKind) -> Config {
    Config {
        backend,
        dataset_root: fixtures().join("corpus"),
        replay_dir: fixtures().join("replay"),
        checker_fixtures: fixtures().join("checker.jsonl"),
        ..Config::default()
    }
}

fn workspace(backend: BackendKind) -> Arc<Workspace> {
    Arc::new(Workspace::load(config(backend)).expect("workspace loads"))
}

fn nl_steps(ws: &Workspace, decl: &str) -> Vec<String> {
    ws.corpus
        .proofs()
        .find(|p| p.decl_name() == decl)
        .expect("fixture proof")
        .nl_steps()
}

async fn call(
    app: &axum::Router,
    method: &str,
    uri: &str,
    body: Option<Value>,
) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(serde_json::to_vec(&b).unwrap())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (
        status,
        resp.into_body()
            .collect()
            .await
            .unwrap()
            .to_bytes()
            .to_vec(),
    )
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

/// Responses from driving one session with library calls, as JSON bytes.
/// Session views carry the id, which is blanked so runs can be compared.
fn library_run(
    svc: &Service,
    theorem: &str,
    nl: &[String],
    hint_after: Option<usize>,
) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let view = svc
        .create_session(&CreateSession {
            theorem: theorem.into(),
        })
        .unwrap();
    let id = view.session_id.clone();
    out.push(blank_id(serde_json::to_vec(&view).unwrap(), &id));
    for (i, step) in nl.iter().enumerate() {
        if hint_after == Some(i) {
            out.push(serde_json::to_vec(&svc.request_hint(&id).unwrap()).unwrap());
        }
        let r = svc
            .submit_step(&id, &SubmitStep { nl: step.clone() })
            .unwrap();
        let stop = matches!(r.verdict, Verdict::Error | Verdict::Complete);
        out.push(serde_json::to_vec(&r).unwrap());
        if stop {
            break;
        }
    }
    out.push(blank_id(
        serde_json::to_vec(&svc.view(&id, true).unwrap()).unwrap(),
        &id,
    ));
    out
}

async fn http_run(
    app: &axum::Router,
    theorem: &str,
    nl: &[String],
    hint_after: Option<usize>,
) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let (status, body) = call(
        app,
        "POST",
        "/api/sessions",
        Some(serde_json::json!({ "theorem": theorem })),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    let id = json(&body)["session_id"].as_str().unwrap().to_string();
    out.push(blank_id(body, &id));
    for (i, step) in nl.iter().enumerate() {
        if hint_after == Some(i) {
            let (status, body) = call(app, "POST", &format!("/api/sessions/{id}/hint"), None).await;
            assert_eq!(status, StatusCode::OK);
            out.push(body);
        }
        let (status, body) = call(
            app,
            "POST",
            &format!("/api/sessions/{id}/steps"),
            Some(serde_json::json!({ "nl": step })),
        )
        .await;
        assert_eq!(status, StatusCode::OK, "{}", String::from_utf8_lossy(&body));
        let verdict = json(&body)["verdict"].as_str().unwrap().to_string();
        out.push(body);
        if verdict == "error" || verdict == "complete" {
            break;
        }
    }
    let (_, body) = call(
        app,
        "GET",
        &format!("/api/sessions/{id}?instructor=true"),
        None,
    )
    .await;
    out.push(blank_id(body, &id));
    out
}

fn blank_id(bytes: Vec<u8>, id: &str) -> Vec<u8> {
    String::from_utf8(bytes)
        .unwrap()
        .replace(id, "ID")
        .into_bytes()
}

#[tokio::test(flavor = "multi_thread")]
async fn endpoints_return_exactly_the_library_results() {
    let ws = workspace(BackendKind::Replay);
    let dir = tempfile::tempdir().unwrap();
    let lib = Service::open(ws.clone(), &dir.path().join("a.jsonl")).unwrap();
    let app = router(Arc::new(
        Service::open(ws.clone(), &dir.path().join("b.jsonl")).unwrap(),
    ));
    for (theorem, decl, hint_after) in SESSIONS {
        let nl = nl_steps(&ws, decl);
        let expected = library_run(&lib, theorem, &nl, hint_after);
        let got = http_run(&app, theorem, &nl, hint_after).await;
        assert_eq!(got.len(), expected.len(), "{theorem}");
        for (g, e) in got.iter().zip(&expected) {
            assert_eq!(
                String::from_utf8_lossy(g),
                String::from_utf8_lossy(e),
                "{theorem}"
            );
        }
    }
    let (status, body) = call(&app, "GET", "/api/theorems", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, serde_json::to_vec(&lib.theorems()).unwrap());
    let (_, body) = call(&app, "GET", "/api/worlds", None).await;
    assert_eq!(json(&body), serde_json::json!(["Addition", "AdvAddition"]));
}

#[test]
fn correct_steps_then_error_with_four_field_feedback() {
    let ws = workspace(BackendKind::Replay);
    let svc = Service::in_memory(ws.clone());
    let nl = nl_steps(&ws, "add_comm_incorrect");
    let id = svc
        .create_session(&CreateSession {
            theorem: "add_comm".into(),
        })
        .unwrap()
        .session_id;
    for step in &nl[..6] {
        let r = svc
            .submit_step(&id, &SubmitStep { nl: step.clone() })
            .unwrap();
        assert_eq!(r.verdict, Verdict::Ok);
        assert_eq!(r.status, SessionStatus::InProgress);
        assert!(!r.goals.is_empty());
        assert!(r.feedback.is_none());
    }
    let r = svc
        .submit_step(&id, &SubmitStep { nl: nl[6].clone() })
        .unwrap();
    assert_eq!(r.verdict, Verdict::Error);
    assert_eq!(r.status, SessionStatus::Halted);
    let fb = serde_json::to_value(r.feedback.unwrap()).unwrap();
    let keys: Vec<&str> = fb.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["Informalization", "Message", "Question", "Type"]);

    let view = svc.view(&id, false).unwrap();
    assert!(view.instructor.is_none());
    // Informalization reveals the next step by design and is shown only on
    // request, so it is left out of the check.
    let mut student = serde_json::to_value(&view).unwrap();
    for b in student["feedback_history"].as_array_mut().unwrap() {
        b.as_object_mut().unwrap().remove("Informalization");
    }
    let student = student.to_string();
    for lean in ["rw [", ":= by", "⊢", "induction b with"] {
        assert!(!student.contains(lean), "student view leaks {lean:?}");
    }
    // The goal shown is the one before the failed step, in the student's names.
    assert_eq!(view.goals.len(), 1);
    assert_eq!(view.goals[0].show, "succ (a + d) = succ (d + a)");
    let instructor = svc.view(&id, true).unwrap().instructor.unwrap();
    assert_eq!(instructor.trace.halted_at, Some(7));
    assert!(
        instructor.leak_findings.is_empty(),
        "{:?}",
        instructor.leak_findings
    );
}

#[test]
fn hint_on_fresh_session_is_cold_start() {
    let ws = workspace(BackendKind::Replay);
    let svc = Service::in_memory(ws);
    let id = svc
        .create_session(&CreateSession {
            theorem: "add_comm".into(),
        })
        .unwrap()
        .session_id;
    let h = svc.request_hint(&id).unwrap();
    assert!(h.feedback.is_cold_start());
    let v = serde_json::to_value(&h.feedback).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["Informalization", "Question"]);
    assert!(h.feedback.informalization.contains("induction b with d hd"));
}

#[tokio::test(flavor = "multi_thread")]
async fn error_statuses() {
    let ws = workspace(BackendKind::Replay);
    let app = router(Arc::new(Service::in_memory(ws.clone())));
    let (status, body) = call(&app, "GET", "/api/sessions/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(json(&body)["retriable"], false);
    let (status, _) = call(
        &app,
        "POST",
        "/api/sessions",
        Some(serde_json::json!({ "theorem": "mul_comm" })),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    // A finished proof accepts no more steps.
    let (_, body) = call(
        &app,
        "POST",
        "/api/sessions",
        Some(serde_json::json!({ "theorem": "zero_add" })),
    )
    .await;
    let id = json(&body)["session_id"].as_str().unwrap().to_string();
    for step in nl_steps(&ws, "zero_add_equation") {
        call(
            &app,
            "POST",
            &format!("/api/sessions/{id}/steps"),
            Some(serde_json::json!({ "nl": step })),
        )
        .await;
    }
    let (_, body) = call(&app, "GET", &format!("/api/sessions/{id}"), None).await;
    assert_eq!(json(&body)["status"], "complete");
    let (status, body) = call(
        &app,
        "POST",
        &format!("/api/sessions/{id}/steps"),
        Some(serde_json::json!({ "nl": "done" })),
    )
    .await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(json(&body)["retriable"], false);
    let (status, _) = call(&app, "POST", &format!("/api/sessions/{id}/hint"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);

    // A prompt the replay store has never seen is a backend failure.
    let (_, body) = call(
        &app,
        "POST",
        "/api/sessions",
        Some(serde_json::json!({ "theorem": "zero_add" })),
    )
    .await;
    let id = json(&body)["session_id"].as_str().unwrap().to_string();
    let (status, body) = call(
        &app,
        "POST",
        &format!("/api/sessions/{id}/steps"),
        Some(serde_json::json!({ "nl": "Something no recorded proof says." })),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_GATEWAY);
    assert_eq!(json(&body)["retriable"], true);
    // The failed request left the session untouched.
    let (_, body) = call(&app, "GET", &format!("/api/sessions/{id}"), None).await;
    assert_eq!(json(&body)["steps"], serde_json::json!([]));

    let (status, _) = call(
        &app,
        "POST",
        &format!("/api/sessions/{id}/steps"),
        Some(serde_json::json!({ "nl": "  " })),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[test]
fn resubmitting_after_an_error_replaces_the_failed_step() {
    let ws = workspace(BackendKind::Mock);
    let svc = Service::in_memory(ws.clone());
    let nl = nl_steps(&ws, "eq_succ_of_ne_zero_incorrect");
    let fixed = nl_steps(&ws, "eq_succ_of_ne_zero_staff_solution");
    let id = svc
        .create_session(&CreateSession {
            theorem: "eq_succ_of_ne_zero".into(),
        })
        .unwrap()
        .session_id;
    assert_eq!(
        svc.submit_step(&id, &SubmitStep { nl: nl[0].clone() })
            .unwrap()
            .verdict,
        Verdict::Ok
    );
    let r = svc
        .submit_step(&id, &SubmitStep { nl: nl[1].clone() })
        .unwrap();
    assert_eq!(r.verdict, Verdict::Error);
    for step in &fixed[1..] {
        svc.submit_step(&id, &SubmitStep { nl: step.clone() })
            .unwrap();
    }
    let v = svc.view(&id, true).unwrap();
    assert_eq!(v.status, SessionStatus::Complete);
    let tactics: Vec<String> = v.instructor.unwrap().trace.tactics();
    assert_eq!(tactics, ["induction a with d _", "tauto", "use d", "rfl"]);
    assert_eq!(v.feedback_history.len(), 1);
}

#[test]
fn unreadable_step_halts_until_the_next_submission() {
    let ws = workspace(BackendKind::Mock);
    let svc = Service::in_memory(ws.clone());
    let id = svc
        .create_session(&CreateSession {
            theorem: "zero_add".into(),
        })
        .unwrap()
        .session_id;
    let r = svc
        .submit_step(
            &id,
            &SubmitStep {
                nl: "I am not sure.".into(),
            },
        )
        .unwrap();
    assert_eq!(r.verdict, Verdict::Unformalizable);
    assert_eq!(r.status, SessionStatus::Halted);
    let first = nl_steps(&ws, "zero_add_staff_solution").remove(0);
    let r = svc.submit_step(&id, &SubmitStep { nl: first }).unwrap();
    assert_eq!(r.verdict, Verdict::Ok);
    assert_eq!(r.status, SessionStatus::InProgress);
    assert_eq!(r.goals.len(), 2);
}

#[test]
fn sessions_survive_a_restart() {
    let ws = workspace(BackendKind::Replay);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("journal.jsonl");
    let before = {
        let svc = Service::open(ws.clone(), &path).unwrap();
        for (theorem, decl, hint_after) in SESSIONS {
            library_run(&svc, theorem, &nl_steps(&ws, decl), hint_after);
        }
        svc.records()
    };
    assert_eq!(before.len(), 3);
    let svc = Service::open(ws.clone(), &path).unwrap();
    assert_eq!(svc.records(), before);

    // A torn last line is dropped and later appends stay readable.
    let mut text = std::fs::read_to_string(&path).unwrap();
    text.push_str("{\"session_id\":\"s-x\",\"ev");
    std::fs::write(&path, text).unwrap();
    let svc = Service::open(ws.clone(), &path).unwrap();
    assert_eq!(svc.records(), before);
    svc.create_session(&CreateSession {
        theorem: "zero_add".into(),
    })
    .unwrap();
    drop(svc);
    assert_eq!(Service::open(ws, &path).unwrap().records().len(), 4);
}
