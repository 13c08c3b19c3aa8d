//! Tutoring turns built from the other modules: formalize the student's
//! steps, search for a verified next step when one fails, and explain.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autoformalizer::{
    build_step_prompt, formalize_step_by_step, sanitize_tactic, AcceptedStep, AutoformError,
    FormalizationTrace, PromptContext, StepOptions,
};
use crate::feedback::{
    build_feedback_prompt, build_hint_prompt, cold_start_feedback, parse_cold_start,
    parse_feedback, render_lean_proof, FeedbackBundle, FeedbackError, FeedbackPrompt,
};
use crate::lean_bridge::{CheckRequest, Checker};
use crate::llm::{LlmBackend, LlmError};
use crate::next_step::{search, SearchConfig, SearchError, SearchOutcome};
use crate::proof_model::{AnnotatedProof, TheoremSpec};

#[derive(Debug, Error)]
pub enum TutorError {
    #[error(transparent)]
    Autoform(#[from] AutoformError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Feedback(#[from] FeedbackError),
    #[error("model call failed: {0}")]
    Backend(#[from] LlmError),
    #[error("checker failed: {0}")]
    Checker(#[from] crate::lean_bridge::BridgeError),
    #[error("no erroring step to explain")]
    NothingToExplain,
}

impl TutorError {
    /// Failures of an external backend, which a caller may retry.
    pub fn is_backend(&self) -> bool {
        match self {
            TutorError::Backend(_) | TutorError::Checker(_) => true,
            TutorError::Autoform(e) => matches!(
                e,
                AutoformError::Backend { .. }
                    | AutoformError::Checker { .. }
                    | AutoformError::WholeBackend(_)
                    | AutoformError::WholeChecker(_)
            ),
            TutorError::Search(e) => matches!(e, SearchError::Backend(_) | SearchError::Checker(_)),
            TutorError::Feedback(e) => matches!(e, FeedbackError::Backend(_)),
            TutorError::NothingToExplain => false,
        }
    }
}

/// Result of formalizing one student step after an accepted prefix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepAttempt {
    Checked {
        step: AcceptedStep,
    },
    /// The model's reply was not a single tactic; nothing was checked.
    Unformalizable {
        raw: String,
    },
}

/// Formalizes `nl` as the step following `prior` and checks the extended proof.
pub fn formalize_step<L, C>(
    theorem: &TheoremSpec,
    prior: &[String],
    nl: &str,
    ctx: &PromptContext<'_>,
    llm: &mut L,
    checker: &mut C,
) -> Result<StepAttempt, TutorError>
where
    L: LlmBackend + ?Sized,
    C: Checker + ?Sized,
{
    let prompt = build_step_prompt(theorem, nl, ctx)?;
    let raw = llm.complete(&prompt)?;
    let tactic = match sanitize_tactic(&raw) {
        Ok(t) => t,
        Err(_) => return Ok(StepAttempt::Unformalizable { raw }),
    };
    let mut tactics = prior.to_vec();
    tactics.push(tactic.clone());
    let result = checker.check(&CheckRequest::new(theorem.statement_fl.clone(), tactics))?;
    Ok(StepAttempt::Checked {
        step: AcceptedStep {
            nl: nl.to_string(),
            tactic,
            result,
        },
    })
}

/// Everything produced while explaining one erroring or stuck proof.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub search: SearchOutcome,
    pub prompt: FeedbackPrompt,
    pub bundle: FeedbackBundle,
}

impl Explanation {
    pub fn next_step(&self) -> Option<&str> {
        self.search.next_step()
    }
}

/// Explains the last tactic of `tactics`, which the checker rejected with `error`.
pub fn explain_error<L, C>(
    theorem: &TheoremSpec,
    tactics: &[String],
    error: &str,
    config: &SearchConfig,
    llm: &mut L,
    checker: &mut C,
) -> Result<Explanation, TutorError>
where
    L: LlmBackend + ?Sized,
    C: Checker + ?Sized,
{
    let (_, root) = tactics.split_last().ok_or(TutorError::NothingToExplain)?;
    let outcome = search(root, theorem, config, llm, checker)?;
    let lean_proof = render_lean_proof(theorem, tactics);
    let prompt = build_feedback_prompt(&lean_proof, error, outcome.next_step(), &config.knobs)?;
    let bundle = parse_feedback(&llm.complete(&prompt.prompt)?)?;
    Ok(Explanation {
        search: outcome,
        prompt,
        bundle,
    })
}

/// A hint on request. With no tactics yet this is cold start and the next
/// step comes from the staff solution; otherwise it comes from search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hint {
    pub next_step: Option<String>,
    /// `None` for cold start.
    pub search: Option<SearchOutcome>,
    pub bundle: FeedbackBundle,
}

pub fn request_hint<L, C>(
    theorem: &TheoremSpec,
    tactics: &[String],
    staff: Option<&AnnotatedProof>,
    config: &SearchConfig,
    llm: &mut L,
    checker: &mut C,
) -> Result<Hint, TutorError>
where
    L: LlmBackend + ?Sized,
    C: Checker + ?Sized,
{
    if tactics.is_empty() {
        let cs = cold_start_feedback(theorem, staff, &config.knobs, llm)?;
        return Ok(Hint {
            next_step: Some(cs.next_step),
            search: None,
            bundle: cs.bundle,
        });
    }
    let outcome = search(tactics, theorem, config, llm, checker)?;
    let lean_proof = render_lean_proof(theorem, tactics);
    let prompt = build_hint_prompt(&lean_proof, outcome.next_step(), &config.knobs)?;
    let bundle = parse_cold_start(&llm.complete(&prompt.prompt)?)?;
    Ok(Hint {
        next_step: outcome.next_step().map(str::to_string),
        search: Some(outcome),
        bundle,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TutorReport {
    pub trace: FormalizationTrace,
    /// Present iff the trace halted on a checker error.
    pub explanation: Option<Explanation>,
}

/// Runs a whole NL proof through formalization and, if a step fails,
/// through search and feedback.
pub fn tutor_proof<L, C>(
    proof_nl: &[String],
    theorem: &TheoremSpec,
    ctx: &PromptContext<'_>,
    config: &SearchConfig,
    llm: &mut L,
    checker: &mut C,
) -> Result<TutorReport, TutorError>
where
    L: LlmBackend + ?Sized,
    C: Checker + ?Sized,
{
    let trace =
        formalize_step_by_step(proof_nl, theorem, ctx, llm, checker, StepOptions::default())?;
    let explanation = match trace.error_step() {
        Some(step) => {
            let error = step.result.message.clone().unwrap_or_default();
            Some(explain_error(
                theorem,
                &trace.tactics(),
                &error,
                config,
                llm,
                checker,
            )?)
        }
        None => None,
    };
    Ok(TutorReport { trace, explanation })
}
