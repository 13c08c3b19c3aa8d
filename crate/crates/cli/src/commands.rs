use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use peano_tutor::dataset::{
    generate_incorrect_set, parse_annotated_file, write_corpus, DatasetError, SkipReport,
};
use peano_tutor::eval::{evaluate, EvalReport, EvalSetup, Mode};
use peano_tutor::feedback::FeedbackBundle;
use peano_tutor::lean_bridge::{BridgeError, CheckRequest, CheckStatus, Checker};
use peano_tutor::proof_model::{AnnotatedProof, Label, Persona};
use peano_tutor::state_match::VerdictRecord;

use crate::service::{CreateSession, Service, ServiceError, SubmitStep};
use crate::session::{GoalSummary, SessionStatus, Verdict};
use crate::workspace::{SetupError, Workspace};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Setup(#[from] SetupError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Checker(#[from] BridgeError),
    #[error(transparent)]
    Service(#[from] ServiceError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Persona proofs scored for accuracy; staff solutions only appear in prompts.
pub fn eval_sets(ws: &Workspace) -> (Vec<AnnotatedProof>, Vec<AnnotatedProof>) {
    let correct = ws
        .corpus
        .proofs()
        .filter(|p| p.label == Label::Correct && p.persona != Persona::StaffSolution)
        .cloned()
        .collect();
    let incorrect = ws
        .corpus
        .proofs()
        .filter(|p| p.label == Label::Incorrect)
        .cloned()
        .collect();
    (correct, incorrect)
}

pub fn eval_autoform(
    ws: &Workspace,
    mode: Mode,
    staff: bool,
) -> Result<(EvalReport, Vec<VerdictRecord>), CommandError> {
    let (correct, incorrect) = eval_sets(ws);
    let staff_map = ws.staff_map();
    let examples = match mode {
        Mode::Step => peano_tutor::autoformalizer::default_step_examples(),
        Mode::Whole => peano_tutor::autoformalizer::default_whole_examples(),
    };
    let setup = EvalSetup {
        mode,
        theorem_dict: &ws.dicts.theorems,
        tactic_dict: &ws.dicts.tactics,
        examples: &examples,
        staff: staff.then_some(&staff_map),
        knobs: &ws.knobs,
    };
    let mut llm = ws.llm().map_err(SetupError::from)?;
    let mut checker = ws.checker()?;
    Ok(evaluate(
        &correct,
        &incorrect,
        &setup,
        &mut *llm,
        &mut *checker,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSummary {
    pub manifest: std::path::PathBuf,
    pub generated: Vec<(String, usize)>,
    pub skipped: Vec<SkipReport>,
}

pub fn gen_incorrect(ws: &Workspace, seed: u64, out: &Path) -> Result<GenSummary, CommandError> {
    let proofs: Vec<AnnotatedProof> = ws.corpus.proofs().cloned().collect();
    let (generated, skipped) = generate_incorrect_set(&proofs, seed);
    let manifest = write_corpus(out, &generated)?;
    Ok(GenSummary {
        manifest,
        generated: generated
            .iter()
            .map(|p| {
                (
                    p.decl_name().to_string(),
                    p.skipped_index.unwrap_or_default(),
                )
            })
            .collect(),
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRow {
    pub decl: String,
    pub step: usize,
    pub tactic: String,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

/// Checks every prefix of every proof in an annotated file, stopping each
/// proof at its first error.
pub fn check_file<C: Checker + ?Sized>(
    text: &str,
    checker: &mut C,
) -> Result<Vec<CheckRow>, CommandError> {
    let mut rows = Vec::new();
    for t in parse_annotated_file(text)? {
        let mut tactics = Vec::new();
        for (i, step) in t.steps.iter().enumerate() {
            tactics.push(step.tactic.clone());
            let r = checker.check(&CheckRequest::new(t.header.clone(), tactics.clone()))?;
            let status = r.status;
            rows.push(CheckRow {
                decl: t.decl_name.clone(),
                step: i + 1,
                tactic: step.tactic.clone(),
                status,
                message: r
                    .message
                    .map(|m| m.lines().next().unwrap_or_default().to_string()),
            });
            if status == CheckStatus::Error {
                break;
            }
        }
    }
    Ok(rows)
}

pub fn render_check_table(rows: &[CheckRow]) -> String {
    let width = rows
        .iter()
        .map(|r| r.tactic.chars().count())
        .max()
        .unwrap_or(0)
        .max(6);
    let mut s = String::new();
    for r in rows {
        let status = match r.status {
            CheckStatus::Complete => "complete",
            CheckStatus::Incomplete => "incomplete",
            CheckStatus::Error => "error",
        };
        s += &format!(
            "{:<28} {:>3}  {:<width$}  {:<10}  {}\n",
            r.decl,
            r.step,
            r.tactic,
            status,
            r.message.as_deref().unwrap_or(""),
        );
    }
    s
}

fn write_goals(out: &mut impl Write, goals: &[GoalSummary]) -> std::io::Result<()> {
    for g in goals {
        match &g.case {
            Some(c) => writeln!(out, "  goal ({c}): {}", g.show)?,
            None => writeln!(out, "  goal: {}", g.show)?,
        }
        for f in &g.facts {
            writeln!(out, "    given {f}")?;
        }
    }
    Ok(())
}

fn write_feedback(out: &mut impl Write, b: &FeedbackBundle) -> std::io::Result<()> {
    if let Some(e) = &b.error {
        writeln!(out, "  error type: {}", e.type_text)?;
        writeln!(out, "  {}", e.message)?;
    }
    writeln!(out, "  question: {}", b.question)?;
    writeln!(out, "  (type :reveal to see the next step)")
}

/// Terminal tutoring loop. Each input line is one proof step; `:hint`,
/// `:reveal` and `:quit` are commands.
pub fn tutor_loop<R: BufRead, W: Write>(
    svc: &Service,
    theorem: &str,
    input: R,
    mut out: W,
) -> Result<SessionStatus, CommandError> {
    let view = svc.create_session(&CreateSession {
        theorem: theorem.to_string(),
    })?;
    writeln!(out, "Prove: {}", view.theorem.statement)?;
    write_goals(&mut out, &view.goals)?;
    let mut last: Option<FeedbackBundle> = None;
    let mut status = view.status;
    for line in input.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match line {
            ":quit" => break,
            ":reveal" => match &last {
                Some(b) => writeln!(out, "  next step: {}", b.informalization)?,
                None => writeln!(out, "  nothing to reveal yet")?,
            },
            ":hint" => match svc.request_hint(&view.session_id) {
                Ok(h) => {
                    write_feedback(&mut out, &h.feedback)?;
                    last = Some(h.feedback);
                }
                Err(e) => writeln!(out, "  hint unavailable: {e}")?,
            },
            nl => match svc.submit_step(&view.session_id, &SubmitStep { nl: nl.to_string() }) {
                Ok(r) => {
                    status = r.status;
                    match r.verdict {
                        Verdict::Ok => {
                            writeln!(out, "  ok")?;
                            write_goals(&mut out, &r.goals)?;
                        }
                        Verdict::Complete => {
                            writeln!(out, "  proof complete")?;
                            break;
                        }
                        Verdict::Error => writeln!(out, "  this step does not check")?,
                        Verdict::Unformalizable => writeln!(
                            out,
                            "  could not read this step; try stating it more precisely"
                        )?,
                    }
                    if let Some(b) = r.feedback {
                        write_feedback(&mut out, &b)?;
                        last = Some(b);
                    }
                }
                Err(e) if e.retriable() => writeln!(out, "  backend unavailable, try again: {e}")?,
                Err(e) => return Err(e.into()),
            },
        }
    }
    Ok(status)
}
