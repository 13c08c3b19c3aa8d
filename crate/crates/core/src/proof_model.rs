//! Domain types shared by every stage of the tutor: theorems, aligned
//! natural-language/tactic proofs, and parsed proof states.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Marker that ends a Lean theorem header and opens the tactic block.
pub const PROOF_ENTRY: &str = ":= by";

/// The turnstile separating local context from the goal.
pub const TURNSTILE: char = '⊢';

/// Rendering used by the checker once every goal is closed.
pub const NO_GOALS: &str = "no goals";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("theorem header must be non-empty and end with `{PROOF_ENTRY}`: {0:?}")]
    BadHeader(String),
    #[error("malformed proof state: {0}")]
    MalformedState(String),
    #[error("proof has no steps")]
    EmptyProof,
    #[error("step {index}: {reason}")]
    BadStep { index: usize, reason: String },
    #[error("skipped_index must be present exactly when the proof is labelled incorrect")]
    SkipLabelMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Persona {
    StaffSolution,
    EquationBased,
    JustificationBased,
}

impl Persona {
    pub fn as_str(self) -> &'static str {
        match self {
            Persona::StaffSolution => "staff_solution",
            Persona::EquationBased => "equation_based",
            Persona::JustificationBased => "justification_based",
        }
    }
}

impl fmt::Display for Persona {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Correct,
    Incorrect,
}

/// A theorem as presented to students and to the checker.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremSpec {
    /// Curriculum name (e.g. `add_comm`), used for forbidden-theorem rules.
    pub name: String,
    pub statement_nl: String,
    /// Lean header, everything through `:= by`.
    pub statement_fl: String,
    pub world: String,
    pub order_index: u32,
}

impl TheoremSpec {
    pub fn new(
        name: impl Into<String>,
        statement_nl: impl Into<String>,
        statement_fl: impl Into<String>,
        world: impl Into<String>,
        order_index: u32,
    ) -> Result<Self, ModelError> {
        let spec = TheoremSpec {
            name: name.into(),
            statement_nl: statement_nl.into(),
            statement_fl: statement_fl.into(),
            world: world.into(),
            order_index,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let header = self.statement_fl.trim_end();
        if header.is_empty() || !header.ends_with(PROOF_ENTRY) {
            return Err(ModelError::BadHeader(self.statement_fl.clone()));
        }
        Ok(())
    }

    /// The Lean declaration name in the header (`theorem NAME ...`).
    pub fn decl_name(&self) -> Option<&str> {
        decl_name_of(&self.statement_fl)
    }
}

/// Extracts the declaration name following `theorem`/`lemma` in a header.
pub fn decl_name_of(header: &str) -> Option<&str> {
    let mut words = header.split_whitespace();
    while let Some(w) = words.next() {
        if w == "theorem" || w == "lemma" {
            return words.next();
        }
        if w == "example" {
            return Some("example");
        }
    }
    None
}

/// One natural-language step aligned with exactly one tactic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProofStep {
    pub nl: String,
    pub tactic: String,
}

impl ProofStep {
    pub fn new(nl: impl Into<String>, tactic: impl Into<String>) -> Self {
        ProofStep {
            nl: nl.into(),
            tactic: tactic.into(),
        }
    }

    fn validate(&self, index: usize) -> Result<(), ModelError> {
        let bad = |reason: &str| ModelError::BadStep {
            index,
            reason: reason.to_string(),
        };
        if self.tactic.contains('\n') || self.tactic.contains('\r') {
            return Err(bad("tactic spans more than one line"));
        }
        if self.tactic.trim().is_empty() {
            return Err(bad("empty tactic"));
        }
        if self.tactic.trim_start().starts_with("--") {
            return Err(bad("tactic is a comment"));
        }
        if self.nl.trim_start().starts_with("--") {
            return Err(bad("natural-language text still carries a comment marker"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedProof {
    pub theorem: TheoremSpec,
    pub steps: Vec<ProofStep>,
    pub persona: Persona,
    pub label: Label,
    /// 1-based index of the step removed from the source correct proof.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped_index: Option<usize>,
}

impl AnnotatedProof {
    pub fn validate(&self) -> Result<(), ModelError> {
        self.theorem.validate()?;
        if self.steps.is_empty() {
            return Err(ModelError::EmptyProof);
        }
        for (i, step) in self.steps.iter().enumerate() {
            step.validate(i + 1)?;
        }
        match (self.label, self.skipped_index) {
            (Label::Correct, None) | (Label::Incorrect, Some(_)) => Ok(()),
            _ => Err(ModelError::SkipLabelMismatch),
        }
    }

    pub fn tactics(&self) -> Vec<String> {
        self.steps.iter().map(|s| s.tactic.clone()).collect()
    }

    pub fn nl_steps(&self) -> Vec<String> {
        self.steps.iter().map(|s| s.nl.clone()).collect()
    }

    /// The Lean declaration name from the header, falling back to the theorem name.
    pub fn decl_name(&self) -> &str {
        self.theorem.decl_name().unwrap_or(&self.theorem.name)
    }
}

/// One goal of a proof state: optional case tag, local context, goal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GoalCase {
    /// `zero` for a block opened by `case zero`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
    pub hypothesis_lines: Vec<String>,
    /// The turnstile line, with any wrapped continuation lines joined by `\n`.
    pub goal_line: String,
    pub free_variables: Vec<String>,
}

impl GoalCase {
    /// Lines of this case in rendering order.
    pub fn lines(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.hypothesis_lines.len() + 2);
        if let Some(tag) = &self.tag {
            out.push(format!("case {tag}"));
        }
        out.extend(self.hypothesis_lines.iter().cloned());
        out.push(self.goal_line.clone());
        out
    }

    pub fn text(&self) -> String {
        self.lines().join("\n")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProofState {
    pub raw: String,
    pub cases: Vec<GoalCase>,
}

impl ProofState {
    /// The state after the last goal has been closed.
    pub fn completed() -> Self {
        ProofState {
            raw: String::new(),
            cases: Vec::new(),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.cases.is_empty()
    }

    /// Cases joined by a blank line; equal to `raw` modulo blank-line and
    /// trailing-whitespace normalisation.
    pub fn render(&self) -> String {
        self.cases
            .iter()
            .map(GoalCase::text)
            .collect::<Vec<_>>()
            .join("\n\n")
    }
}

/// Splits checker-rendered goal text into cases.
///
/// A case is a run of lines ending at its turnstile line; indented lines
/// directly after a turnstile line are wrapped goal text, and any other
/// non-blank line opens the next case. Hypothesis lines that start with
/// whitespace continue the previous hypothesis. The empty string and
/// `no goals` both denote a completed proof.
pub fn parse_proof_state(raw: &str) -> Result<ProofState, ModelError> {
    let trimmed = raw.trim();
    if trimmed.is_empty() || trimmed == NO_GOALS {
        return Ok(ProofState {
            raw: raw.to_string(),
            cases: Vec::new(),
        });
    }

    let mut cases = Vec::new();
    let mut tag: Option<String> = None;
    let mut hyps: Vec<String> = Vec::new();
    let mut goal: Option<String> = None;

    let mut close = |tag: &mut Option<String>,
                     hyps: &mut Vec<String>,
                     goal: &mut Option<String>|
     -> Result<(), ModelError> {
        let goal_line = goal.take().ok_or_else(|| {
            ModelError::MalformedState("goal case without a turnstile line".into())
        })?;
        let hypothesis_lines = std::mem::take(hyps);
        let free_variables = extract_free_variables(&hypothesis_lines)?;
        cases.push(GoalCase {
            tag: tag.take(),
            hypothesis_lines,
            goal_line,
            free_variables,
        });
        Ok(())
    };

    for line in raw.lines() {
        let line = line.trim_end();
        if line.trim().is_empty() {
            continue;
        }
        let indented = line.starts_with(char::is_whitespace);
        if let Some(g) = goal.as_mut() {
            if indented {
                g.push('\n');
                g.push_str(line);
                continue;
            }
            close(&mut tag, &mut hyps, &mut goal)?;
        }
        let content = line.trim_start();
        if content.starts_with(TURNSTILE) {
            goal = Some(line.to_string());
        } else if hyps.is_empty() && tag.is_none() && is_case_tag(content) {
            tag = Some(content["case ".len()..].trim().to_string());
        } else if indented && !hyps.is_empty() {
            let last = hyps.last_mut().expect("checked non-empty");
            last.push('\n');
            last.push_str(line);
        } else {
            hyps.push(line.to_string());
        }
    }
    if goal.is_some() {
        close(&mut tag, &mut hyps, &mut goal)?;
    } else {
        return Err(ModelError::MalformedState(
            "trailing lines are not terminated by a turnstile line".into(),
        ));
    }

    Ok(ProofState {
        raw: raw.to_string(),
        cases,
    })
}

fn is_case_tag(line: &str) -> bool {
    line.strip_prefix("case ")
        .map(|rest| !rest.trim().is_empty() && !rest.contains(':'))
        .unwrap_or(false)
}

/// Names bound in a local context: every whitespace-separated token left of
/// the first colon of each line, deduplicated in first-appearance order.
pub fn extract_free_variables<S: AsRef<str>>(lines: &[S]) -> Result<Vec<String>, ModelError> {
    let mut vars: Vec<String> = Vec::new();
    for line in lines {
        let line = line.as_ref();
        let (names, _) = line.split_once(':').ok_or_else(|| {
            ModelError::MalformedState(format!("hypothesis line without a colon: {line:?}"))
        })?;
        for name in names.split_whitespace() {
            if !vars.iter().any(|v| v == name) {
                vars.push(name.to_string());
            }
        }
    }
    Ok(vars)
}
