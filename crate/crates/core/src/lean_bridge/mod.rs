//! Running tactic lists through a Lean checker and classifying the outcome.
//!
//! [`Checker`] is implemented by [`LeanRepl`] (a persistent REPL subprocess)
//! and by [`FakeChecker`] (a fixture table), so everything above this layer
//! can be exercised without a Lean toolchain.

mod fake;
mod repl;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::proof_model::{parse_proof_state, ProofState};

pub use fake::{tactic_list_hash, FakeChecker, FixtureRecord, RecordingChecker};
pub use repl::{LeanRepl, ReplConfig};

const UNSOLVED_GOALS: &str = "unsolved goals";

#[derive(Debug, Error)]
pub enum BridgeError {
    /// The backend could not answer: process died, timed out, or a fixture
    /// has no entry for the request. Never a verdict about the proof.
    #[error("checker backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("checker protocol error: {0}")]
    Protocol(String),
    #[error("invalid check request: {0}")]
    InvalidRequest(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRequest {
    pub theorem_header: String,
    pub tactics: Vec<String>,
}

impl CheckRequest {
    pub fn new(theorem_header: impl Into<String>, tactics: Vec<String>) -> Self {
        CheckRequest {
            theorem_header: theorem_header.into(),
            tactics,
        }
    }

    pub fn validate(&self) -> Result<(), BridgeError> {
        if !self
            .theorem_header
            .trim_end()
            .ends_with(crate::proof_model::PROOF_ENTRY)
        {
            return Err(BridgeError::InvalidRequest(format!(
                "header does not end with `:= by`: {:?}",
                self.theorem_header
            )));
        }
        for t in &self.tactics {
            if t.contains('\n') || t.trim_start().starts_with("--") || t.trim().is_empty() {
                return Err(BridgeError::InvalidRequest(format!(
                    "bad tactic line {t:?}"
                )));
            }
        }
        Ok(())
    }

    /// The Lean source sent to the checker. An empty tactic list is sent as
    /// `skip` so the checker reports the initial goal instead of a parse error.
    pub fn command_text(&self) -> String {
        let mut text = self.theorem_header.trim_end().to_string();
        if self.tactics.is_empty() {
            text.push_str("\n  skip");
        }
        for t in &self.tactics {
            text.push_str("\n  ");
            text.push_str(t.trim());
        }
        text
    }

    pub fn theorem_name(&self) -> Option<&str> {
        crate::proof_model::decl_name_of(&self.theorem_header)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Complete,
    Incomplete,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Position {
    pub line: u32,
    pub column: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Information,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    #[serde(default)]
    pub pos: Option<Position>,
    #[serde(default)]
    pub end_pos: Option<Position>,
    pub text: String,
}

impl Diagnostic {
    pub fn error(text: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            pos: None,
            end_pos: None,
            text: text.into(),
        }
    }

    fn is_unsolved_goals(&self) -> bool {
        self.severity == Severity::Error && self.text.starts_with(UNSOLVED_GOALS)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub status: CheckStatus,
    /// Remaining goals; present iff `status` is incomplete.
    pub goal_state: Option<ProofState>,
    /// Checker message; present iff `status` is error.
    pub message: Option<String>,
    pub error_position: Option<Position>,
}

impl CheckResult {
    pub fn complete() -> Self {
        CheckResult {
            status: CheckStatus::Complete,
            goal_state: None,
            message: None,
            error_position: None,
        }
    }

    pub fn incomplete(state: ProofState) -> Self {
        CheckResult {
            status: CheckStatus::Incomplete,
            goal_state: Some(state),
            message: None,
            error_position: None,
        }
    }

    pub fn error(message: impl Into<String>, position: Option<Position>) -> Self {
        CheckResult {
            status: CheckStatus::Error,
            goal_state: None,
            message: Some(message.into()),
            error_position: position,
        }
    }

    pub fn is_error(&self) -> bool {
        self.status == CheckStatus::Error
    }

    /// The proof state after the run: no cases when complete, `None` on error.
    pub fn state(&self) -> Option<ProofState> {
        match self.status {
            CheckStatus::Complete => Some(ProofState::completed()),
            CheckStatus::Incomplete => self.goal_state.clone(),
            CheckStatus::Error => None,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let ok = match self.status {
            CheckStatus::Complete => self.goal_state.is_none() && self.message.is_none(),
            CheckStatus::Incomplete => {
                self.goal_state.as_ref().is_some_and(|s| !s.is_complete()) && self.message.is_none()
            }
            CheckStatus::Error => self.message.is_some() && self.goal_state.is_none(),
        };
        if ok {
            Ok(())
        } else {
            Err(format!("inconsistent check result: {self:?}"))
        }
    }
}

/// Status from the diagnostics of one run. Only errors count; an error whose
/// text starts with `unsolved goals` marks an unfinished but valid proof.
pub fn classify(diagnostics: &[Diagnostic]) -> CheckStatus {
    let mut errors = diagnostics
        .iter()
        .filter(|d| d.severity == Severity::Error)
        .peekable();
    if errors.peek().is_none() {
        return CheckStatus::Complete;
    }
    if errors.all(Diagnostic::is_unsolved_goals) {
        CheckStatus::Incomplete
    } else {
        CheckStatus::Error
    }
}

/// Builds a full [`CheckResult`] from the diagnostics of one run.
pub fn interpret(diagnostics: &[Diagnostic]) -> Result<CheckResult, BridgeError> {
    match classify(diagnostics) {
        CheckStatus::Complete => Ok(CheckResult::complete()),
        CheckStatus::Incomplete => {
            let goals = diagnostics
                .iter()
                .filter(|d| d.is_unsolved_goals())
                .map(|d| {
                    d.text[UNSOLVED_GOALS.len()..]
                        .trim_start_matches([' ', '\n'])
                        .trim_end()
                })
                .collect::<Vec<_>>()
                .join("\n\n");
            let state = parse_proof_state(&goals)
                .map_err(|e| BridgeError::Protocol(format!("unparseable goal state: {e}")))?;
            if state.is_complete() {
                return Err(BridgeError::Protocol(
                    "unsolved-goals diagnostic without goals".into(),
                ));
            }
            Ok(CheckResult::incomplete(state))
        }
        CheckStatus::Error => {
            let first = diagnostics
                .iter()
                .find(|d| d.severity == Severity::Error && !d.is_unsolved_goals())
                .expect("classify found a non-unsolved error");
            Ok(CheckResult::error(first.text.clone(), first.pos))
        }
    }
}

/// A proof checker session. Sessions are serial; run several sessions for
/// concurrency.
pub trait Checker {
    fn check(&mut self, req: &CheckRequest) -> Result<CheckResult, BridgeError>;
}

impl<C: Checker + ?Sized> Checker for &mut C {
    fn check(&mut self, req: &CheckRequest) -> Result<CheckResult, BridgeError> {
        (**self).check(req)
    }
}

impl<C: Checker + ?Sized> Checker for Box<C> {
    fn check(&mut self, req: &CheckRequest) -> Result<CheckResult, BridgeError> {
        (**self).check(req)
    }
}
