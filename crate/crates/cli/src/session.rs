//! Tutoring sessions as a fold over journal events. Live requests compute
//! an event with the library, append it, then apply it; startup replays the
//! journal through the same `apply`, so no backend is called on restart.

use serde::{Deserialize, Serialize};

use peano_tutor::autoformalizer::{FormalizationTrace, HaltReason};
use peano_tutor::dataset::PremiseDictionary;
use peano_tutor::feedback::{leakage_lint, FeedbackBundle};
use peano_tutor::lean_bridge::{CheckResult, CheckStatus};
use peano_tutor::proof_model::{ProofState, TheoremSpec, TURNSTILE};
use peano_tutor::state_match::{normalize_case, tokenize, Token};
use peano_tutor::tutor::{Explanation, Hint, StepAttempt};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    InProgress,
    Complete,
    /// The last submission failed to check or to formalize; the next
    /// submission replaces it.
    Halted,
}

/// One journal line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalRecord {
    pub session_id: String,
    pub event: Event,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(clippy::large_enum_variant)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    Created {
        theorem: TheoremSpec,
        /// Checker result for the empty proof, i.e. the opening goal.
        initial: CheckResult,
    },
    Step {
        nl: String,
        attempt: StepAttempt,
        explanation: Option<Explanation>,
    },
    Hint {
        hint: Hint,
    },
}

/// A processed turn, kept for the transcript and the instructor view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(clippy::large_enum_variant)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Turn {
    Step {
        nl: String,
        attempt: StepAttempt,
        explanation: Option<Explanation>,
    },
    Hint {
        hint: Hint,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub session_id: String,
    pub theorem: TheoremSpec,
    pub trace: FormalizationTrace,
    pub feedback_history: Vec<FeedbackBundle>,
    pub status: SessionStatus,
    pub initial: CheckResult,
    pub turns: Vec<Turn>,
}

impl SessionRecord {
    pub fn new(session_id: String, theorem: TheoremSpec, initial: CheckResult) -> Self {
        SessionRecord {
            session_id,
            trace: FormalizationTrace {
                theorem: theorem.clone(),
                accepted: Vec::new(),
                halted_at: None,
                halt_reason: HaltReason::Finished,
                rejected_output: None,
            },
            theorem,
            feedback_history: Vec::new(),
            status: SessionStatus::InProgress,
            initial,
            turns: Vec::new(),
        }
    }

    /// Tactics a new step or hint builds on: the accepted steps without a
    /// trailing erroring one.
    pub fn prefix(&self) -> Vec<String> {
        self.trace.valid_prefix()
    }

    /// Applies a step or hint event; `Created` events start a record instead.
    pub fn apply(&mut self, event: &Event) {
        match event {
            Event::Created { .. } => {}
            Event::Step {
                nl,
                attempt,
                explanation,
            } => {
                self.resume();
                match attempt {
                    StepAttempt::Unformalizable { raw } => {
                        self.trace.halted_at = Some(self.trace.accepted.len() + 1);
                        self.trace.halt_reason = HaltReason::FormatError;
                        self.trace.rejected_output = Some(raw.clone());
                        self.status = SessionStatus::Halted;
                    }
                    StepAttempt::Checked { step } => {
                        self.trace.accepted.push(step.clone());
                        self.status = match step.result.status {
                            CheckStatus::Error => {
                                self.trace.halted_at = Some(self.trace.accepted.len());
                                self.trace.halt_reason = HaltReason::CheckerError;
                                SessionStatus::Halted
                            }
                            CheckStatus::Complete => SessionStatus::Complete,
                            CheckStatus::Incomplete => SessionStatus::InProgress,
                        };
                    }
                }
                if let Some(e) = explanation {
                    self.feedback_history.push(e.bundle.clone());
                }
                self.turns.push(Turn::Step {
                    nl: nl.clone(),
                    attempt: attempt.clone(),
                    explanation: explanation.clone(),
                });
            }
            Event::Hint { hint } => {
                self.feedback_history.push(hint.bundle.clone());
                self.turns.push(Turn::Hint { hint: hint.clone() });
            }
        }
    }

    /// Drops a failed last submission so the next one replaces it.
    fn resume(&mut self) {
        if self.trace.halt_reason == HaltReason::CheckerError {
            self.trace.accepted.pop();
        }
        self.trace.halted_at = None;
        self.trace.halt_reason = HaltReason::Finished;
        self.trace.rejected_output = None;
        if self.status == SessionStatus::Halted {
            self.status = SessionStatus::InProgress;
        }
    }

    /// The state the student is working on: after the last step that checked.
    pub fn current_state(&self) -> Option<ProofState> {
        self.trace
            .accepted
            .iter()
            .rev()
            .find(|s| s.result.status != CheckStatus::Error)
            .map_or(&self.initial, |s| &s.result)
            .state()
    }
}

/// One open goal phrased without checker syntax.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalSummary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    /// `name : statement` lines of the local context.
    pub facts: Vec<String>,
    /// What remains to be shown.
    pub show: String,
}

/// Renders each case from its normalized form, mapping `var{i}` back to
/// the student's names.
pub fn goal_summaries(state: &ProofState) -> Vec<GoalSummary> {
    state
        .cases
        .iter()
        .map(|case| {
            let n = normalize_case(case);
            let back: std::collections::BTreeMap<&str, &str> = n
                .renaming
                .iter()
                .map(|(orig, v)| (v.as_str(), orig.as_str()))
                .collect();
            let text: String = tokenize(&n.text)
                .into_iter()
                .map(|t| match t {
                    Token::Ident(id) => back.get(id).copied().unwrap_or(id),
                    Token::Other(s) => s,
                })
                .collect();
            let mut lines: Vec<&str> = text.lines().collect();
            if case.tag.is_some() {
                lines.remove(0);
            }
            let goal_at = lines
                .iter()
                .position(|l| l.trim_start().starts_with(TURNSTILE))
                .unwrap_or(lines.len());
            let show = lines[goal_at..]
                .iter()
                .map(|l| l.trim())
                .collect::<Vec<_>>()
                .join(" ");
            GoalSummary {
                case: case.tag.clone(),
                facts: lines[..goal_at]
                    .iter()
                    .map(|l| l.trim().to_string())
                    .collect(),
                show: show.trim_start_matches(TURNSTILE).trim().to_string(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Checked, goals remain.
    Ok,
    Complete,
    Error,
    /// The step could not be turned into a single tactic.
    Unformalizable,
}

pub fn verdict_of(attempt: &StepAttempt) -> Verdict {
    match attempt {
        StepAttempt::Unformalizable { .. } => Verdict::Unformalizable,
        StepAttempt::Checked { step } => match step.result.status {
            CheckStatus::Incomplete => Verdict::Ok,
            CheckStatus::Complete => Verdict::Complete,
            CheckStatus::Error => Verdict::Error,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremView {
    pub name: String,
    pub statement: String,
    pub world: String,
    pub order_index: u32,
}

impl From<&TheoremSpec> for TheoremView {
    fn from(t: &TheoremSpec) -> Self {
        TheoremView {
            name: t.name.clone(),
            statement: t.statement_nl.clone(),
            world: t.world.clone(),
            order_index: t.order_index,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepView {
    pub nl: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstructorView {
    pub statement_fl: String,
    pub trace: FormalizationTrace,
    pub turns: Vec<Turn>,
    /// Lean syntax or premise names found in student-facing feedback fields.
    pub leak_findings: Vec<LeakNote>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeakNote {
    pub field: String,
    pub token: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub theorem: TheoremView,
    pub status: SessionStatus,
    pub steps: Vec<StepView>,
    pub goals: Vec<GoalSummary>,
    pub feedback_history: Vec<FeedbackBundle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instructor: Option<InstructorView>,
}

impl SessionView {
    pub fn of(record: &SessionRecord, instructor: bool, dicts: &[&PremiseDictionary]) -> Self {
        let steps = record
            .turns
            .iter()
            .filter_map(|t| match t {
                Turn::Step { nl, attempt, .. } => Some(StepView {
                    nl: nl.clone(),
                    verdict: verdict_of(attempt),
                }),
                Turn::Hint { .. } => None,
            })
            .collect();
        SessionView {
            session_id: record.session_id.clone(),
            theorem: TheoremView::from(&record.theorem),
            status: record.status,
            steps,
            goals: record
                .current_state()
                .map(|s| goal_summaries(&s))
                .unwrap_or_default(),
            feedback_history: record.feedback_history.clone(),
            instructor: instructor.then(|| InstructorView {
                statement_fl: record.theorem.statement_fl.clone(),
                trace: record.trace.clone(),
                turns: record.turns.clone(),
                leak_findings: record
                    .feedback_history
                    .iter()
                    .flat_map(|b| leakage_lint(b, dicts))
                    .map(|f| LeakNote {
                        field: f.field.to_string(),
                        token: f.token,
                    })
                    .collect(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResponse {
    pub verdict: Verdict,
    pub status: SessionStatus,
    /// Open goals after the step; empty on error or completion.
    pub goals: Vec<GoalSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feedback: Option<FeedbackBundle>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HintResponse {
    pub status: SessionStatus,
    pub feedback: FeedbackBundle,
}
