//! The subprocess client against a scripted REPL that speaks the same
//! line protocol and answers from the checker fixtures.

mod common;

use std::collections::HashMap;
use std::fs;

use peano_tutor::lean_bridge::{
    BridgeError, CheckRequest, CheckResult, Checker, FixtureRecord, LeanRepl, ReplConfig,
};

fn config(extra: &[&str]) -> ReplConfig {
    let dir = common::fixtures();
    let mut command = vec![
        "python3".to_string(),
        dir.join("fake_repl.py").display().to_string(),
        dir.join("checker.jsonl").display().to_string(),
    ];
    command.extend(extra.iter().map(|s| s.to_string()));
    ReplConfig {
        project_root: dir,
        command,
        check_timeout_secs: 10,
        startup_timeout_secs: 10,
        ..ReplConfig::default()
    }
}

fn records() -> Vec<FixtureRecord> {
    fs::read_to_string(common::fixtures().join("checker.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn headers() -> HashMap<String, String> {
    common::corpus()
        .proofs()
        .map(|p| (p.decl_name().to_string(), p.theorem.statement_fl.clone()))
        .collect()
}

fn agrees_with_fixtures(extra: &[&str]) {
    let mut repl = LeanRepl::start(&config(extra)).expect("fake REPL starts");
    let headers = headers();
    let mut n = 0;
    for rec in records() {
        let header = &headers[&rec.theorem];
        let got = repl
            .check(&CheckRequest::new(header.clone(), rec.tactics.clone()))
            .unwrap();
        let want: CheckResult = rec.to_result().unwrap();
        assert_eq!(got.status, want.status, "{} {:?}", rec.theorem, rec.tactics);
        assert_eq!(
            got.state(),
            want.state(),
            "{} {:?}",
            rec.theorem,
            rec.tactics
        );
        assert_eq!(got.message, want.message);
        n += 1;
    }
    assert!(n > 200);
}

#[test]
fn client_reproduces_every_fixture() {
    agrees_with_fixtures(&[]);
}

#[test]
fn warnings_do_not_change_classification() {
    agrees_with_fixtures(&["--warn"]);
}

#[test]
fn unknown_command_is_a_protocol_error() {
    let mut repl = LeanRepl::start(&config(&[])).unwrap();
    let req = CheckRequest::new("theorem nowhere : True := by", vec!["trivial".into()]);
    assert!(matches!(repl.check(&req), Err(BridgeError::Protocol(_))));
    // The session survives a rejected command.
    let h = &headers()["add_comm_staff_solution"];
    assert!(repl.check(&CheckRequest::new(h.clone(), vec![])).is_ok());
}

#[test]
fn missing_program_is_unavailable() {
    let cfg = ReplConfig {
        command: vec!["/nonexistent/repl".into()],
        ..ReplConfig::default()
    };
    assert!(matches!(
        LeanRepl::start(&cfg),
        Err(BridgeError::BackendUnavailable(_))
    ));
}

#[test]
fn silent_process_times_out() {
    let cfg = ReplConfig {
        command: vec!["sleep".into(), "30".into()],
        startup_timeout_secs: 1,
        ..ReplConfig::default()
    };
    assert!(matches!(
        LeanRepl::start(&cfg),
        Err(BridgeError::BackendUnavailable(_))
    ));
}

#[test]
fn invalid_request_never_reaches_the_process() {
    let mut repl = LeanRepl::start(&config(&[])).unwrap();
    let req = CheckRequest::new("theorem t : True", vec!["trivial".into()]);
    assert!(matches!(
        repl.check(&req),
        Err(BridgeError::InvalidRequest(_))
    ));
}

/// Re-derives the checker fixtures against a real Lean project named by
/// `LEAN_PROJECT_ROOT`, comparing statuses and normalized states.
#[test]
#[ignore = "needs a Lean toolchain with the Peano game library"]
fn fixtures_match_real_lean() {
    use peano_tutor::state_match::states_equivalent;
    let root = std::env::var("LEAN_PROJECT_ROOT").expect("LEAN_PROJECT_ROOT is set");
    let cfg = ReplConfig {
        project_root: root.into(),
        ..ReplConfig::default()
    };
    let mut repl = LeanRepl::start(&cfg).unwrap();
    let headers = headers();
    for rec in records() {
        let got = repl
            .check(&CheckRequest::new(
                headers[&rec.theorem].clone(),
                rec.tactics.clone(),
            ))
            .unwrap();
        let want = rec.to_result().unwrap();
        assert_eq!(got.status, want.status, "{} {:?}", rec.theorem, rec.tactics);
        if let (Some(a), Some(b)) = (got.state(), want.state()) {
            assert!(
                states_equivalent(&a, &b),
                "{} {:?}",
                rec.theorem,
                rec.tactics
            );
        }
    }
}
