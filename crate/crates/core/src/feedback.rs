//! Student-facing feedback: prompt assembly, strict parsing of the model's
//! JSON reply, cold-start hints, and a lint for leaked Lean syntax.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::PremiseDictionary;
use crate::llm::{Knobs, LlmBackend, LlmError, PromptBundle};
use crate::proof_model::{AnnotatedProof, TheoremSpec};
use crate::state_match::lexer::{tokenize, Token};
use crate::template::{render, TemplateError};

/// Inserted in place of a next step when the search found none.
pub const NO_NEXT_STEP: &str = "no verified next step found";

const FEEDBACK_SYSTEM: &str =
    "You are a math professor, identifying the error in student proofs, with the help of the Lean4 verifier.";

const FEEDBACK_USER: &str = r#"A first-year math student's incomplete Peano Arithmetic proof has been formalized in Lean4, but it has an error.
This is the incorrect student proof in Lean4:

{lean_proof}

This is the current Lean4 state, throwing an error due to the last step {last_line}:

{error}

The actual correct step in Lean4 is:

{next_step}

Error Categories include:
1. Inducting on the incorrect variable
2. Selecting the incorrect base case
3. Not generalizing the inductive step to all cases
4. Failing to apply the inductive hypothesis
5. Incorrect/Incomplete simplification or expansion
6. Incorrect calculation or careless mistake
7. Other

Explain the student error, ask a guiding question to reach correct next step, and give a hint that explicitly reveals the answer in 1-2 sentences. Be specific and use equations from goal states.

DO NOT USE any "Lean" or any Lean tactics or syntax such as "tactic" or "reflexivity" or theorems such as "add_comm". You are speaking directly to the student, use "You" language.

Example:

Type: Incorrect simplification
Message: The RHS of your equation, a + (b + succ d), cannot be simplified with your applied strategy.
Question/Hint: Do you know of a theorem that can perform this simplification?
Informalization: The next step is to rewrite a + (b + succ d) as (a + b) + succ d.

IMPORTANT: Respond with ONLY a raw JSON object in the following format, without any code block formatting or additional text:
{
"Type": "Students' error type",
"Message": "Brief description of error in this problem"
"Question": "Do you....?"
"Informalization": "The next step is to..."
}"#;

const COLD_START_USER: &str = r#"A first-year math student is starting a Peano Arithmetic proof and does not know how to begin.
This is the theorem in Lean4:

{theorem}

The actual correct first step in Lean4 is:

{next_step}

Ask a guiding question to reach the correct first step, and give a hint that explicitly reveals the answer in 1-2 sentences. Be specific and use equations from goal states.

DO NOT USE any "Lean" or any Lean tactics or syntax such as "tactic" or "reflexivity" or theorems such as "add_comm". You are speaking directly to the student, use "You" language.

IMPORTANT: Respond with ONLY a raw JSON object in the following format, without any code block formatting or additional text:
{
"Question": "Do you....?"
"Informalization": "The next step is to..."
}"#;

const HINT_USER: &str = r#"A first-year math student is partway through a Peano Arithmetic proof and has asked for a hint.
This is the student's proof so far in Lean4:

{lean_proof}

The actual correct next step in Lean4 is:

{next_step}

Ask a guiding question to reach the correct next step, and give a hint that explicitly reveals the answer in 1-2 sentences. Be specific and use equations from goal states.

DO NOT USE any "Lean" or any Lean tactics or syntax such as "tactic" or "reflexivity" or theorems such as "add_comm". You are speaking directly to the student, use "You" language.

IMPORTANT: Respond with ONLY a raw JSON object in the following format, without any code block formatting or additional text:
{
"Question": "Do you....?"
"Informalization": "The next step is to..."
}"#;

const BASELINE_SYSTEM: &str =
    "You are a math professor helping a student debug their Peano Arithmetic proof.";

const BASELINE_USER: &str = r#"A first-year math student is working on the following Peano Arithmetic theorem:
{theorem}

Below are the steps of the proof the student has completed thus far. There may be errors and/or the work may be incomplete:
{proof}

Identify and explain the student error, if it exists. Then, identify the correct next step. Ask a guiding question or give a hint that can help the student reach the correct next step in 1-2 sentences. Be specific.

Speak directly to the student using "You" language. Avoid using Lean tactics or syntax like "apply", "intro", or "rw".

Example:
Error Message: The RHS of your equation, a + (b + succ d), cannot be simplified with your applied strategy.
Next Step: The next step is to rewrite a + (b + succ d) as (a + b) + succ d.
Question/Hint: Do you know of a theorem that can perform this simplification?

IMPORTANT: Respond with ONLY a raw JSON object in the following format, without any code block formatting or additional text:
{
"Error_Message": "Brief description of error in this problem",
"Next_Step": "The next step is to...",
"Question": "Do you....?"
}"#;

#[derive(Debug, Error)]
pub enum FeedbackError {
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("feedback reply is not the expected JSON object: {0}")]
    Parse(String),
    #[error("feedback field {0} is empty")]
    EmptyField(&'static str),
    #[error("no staff solution is available for {0}")]
    NoStaffSolution(String),
    #[error(transparent)]
    Backend(#[from] LlmError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorCategory {
    InductingOnIncorrectVariable,
    IncorrectBaseCase,
    NotGeneralizingInductiveStep,
    FailingToApplyInductiveHypothesis,
    IncorrectSimplificationOrExpansion,
    CarelessCalculation,
    Other,
}

impl ErrorCategory {
    pub const ALL: [ErrorCategory; 7] = [
        ErrorCategory::InductingOnIncorrectVariable,
        ErrorCategory::IncorrectBaseCase,
        ErrorCategory::NotGeneralizingInductiveStep,
        ErrorCategory::FailingToApplyInductiveHypothesis,
        ErrorCategory::IncorrectSimplificationOrExpansion,
        ErrorCategory::CarelessCalculation,
        ErrorCategory::Other,
    ];

    /// Wording used in the feedback prompt's category list.
    pub fn label(self) -> &'static str {
        match self {
            ErrorCategory::InductingOnIncorrectVariable => "Inducting on the incorrect variable",
            ErrorCategory::IncorrectBaseCase => "Selecting the incorrect base case",
            ErrorCategory::NotGeneralizingInductiveStep => {
                "Not generalizing the inductive step to all cases"
            }
            ErrorCategory::FailingToApplyInductiveHypothesis => {
                "Failing to apply the inductive hypothesis"
            }
            ErrorCategory::IncorrectSimplificationOrExpansion => {
                "Incorrect/Incomplete simplification or expansion"
            }
            ErrorCategory::CarelessCalculation => "Incorrect calculation or careless mistake",
            ErrorCategory::Other => "Other",
        }
    }

    /// Maps free-form model text onto a category. Case, punctuation, and
    /// a leading list number are ignored; unrecognised text maps to `Other`.
    pub fn from_fuzzy(text: &str) -> ErrorCategory {
        let norm: String = text
            .to_lowercase()
            .chars()
            .map(|c| if c.is_alphanumeric() { c } else { ' ' })
            .collect();
        let words: Vec<&str> = norm.split_whitespace().collect();
        let joined = words.join(" ");
        if let Some(n) = words.first().and_then(|w| w.parse::<usize>().ok()) {
            if (1..=7).contains(&n) {
                return ErrorCategory::ALL[n - 1];
            }
        }
        if let Some(c) = ErrorCategory::ALL.iter().find(|c| {
            let l: String = c
                .label()
                .to_lowercase()
                .chars()
                .map(|ch| if ch.is_alphanumeric() { ch } else { ' ' })
                .collect();
            l.split_whitespace().collect::<Vec<_>>().join(" ") == joined
        }) {
            return *c;
        }
        let has = |k: &str| joined.contains(k);
        if has("induct") && has("variable") {
            ErrorCategory::InductingOnIncorrectVariable
        } else if has("base case") {
            ErrorCategory::IncorrectBaseCase
        } else if has("generaliz") || has("generalis") {
            ErrorCategory::NotGeneralizingInductiveStep
        } else if has("hypothesis") {
            ErrorCategory::FailingToApplyInductiveHypothesis
        } else if has("simplif") || has("expan") {
            ErrorCategory::IncorrectSimplificationOrExpansion
        } else if has("calculat") || has("careless") || has("arithmetic") {
            ErrorCategory::CarelessCalculation
        } else {
            ErrorCategory::Other
        }
    }
}

/// Error identification part of a bundle; absent for cold-start hints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub category: ErrorCategory,
    /// The model's own wording of the type, kept so serialization is lossless.
    pub type_text: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedbackBundle {
    pub error: Option<ErrorReport>,
    pub question: String,
    pub informalization: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireBundle {
    #[serde(rename = "Type", default, skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    #[serde(rename = "Message", default, skip_serializing_if = "Option::is_none")]
    message: Option<String>,
    #[serde(rename = "Question")]
    question: String,
    #[serde(rename = "Informalization")]
    informalization: String,
}

impl Serialize for FeedbackBundle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        WireBundle {
            kind: self.error.as_ref().map(|e| e.type_text.clone()),
            message: self.error.as_ref().map(|e| e.message.clone()),
            question: self.question.clone(),
            informalization: self.informalization.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FeedbackBundle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = WireBundle::deserialize(d)?;
        let error = match (w.kind, w.message) {
            (Some(t), Some(m)) => Some(ErrorReport {
                category: ErrorCategory::from_fuzzy(&t),
                type_text: t,
                message: m,
            }),
            (None, None) => None,
            _ => {
                return Err(serde::de::Error::custom(
                    "Type and Message must appear together",
                ))
            }
        };
        Ok(FeedbackBundle {
            error,
            question: w.question,
            informalization: w.informalization,
        })
    }
}

impl FeedbackBundle {
    /// `Other` for cold-start bundles, which carry no error.
    pub fn error_type(&self) -> ErrorCategory {
        self.error
            .as_ref()
            .map_or(ErrorCategory::Other, |e| e.category)
    }

    pub fn is_cold_start(&self) -> bool {
        self.error.is_none()
    }

    pub fn validate(&self) -> Result<(), FeedbackError> {
        if let Some(e) = &self.error {
            if e.type_text.trim().is_empty() {
                return Err(FeedbackError::EmptyField("Type"));
            }
            if e.message.trim().is_empty() {
                return Err(FeedbackError::EmptyField("Message"));
            }
        }
        if self.question.trim().is_empty() {
            return Err(FeedbackError::EmptyField("Question"));
        }
        if self.informalization.trim().is_empty() {
            return Err(FeedbackError::EmptyField("Informalization"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundles always serialize")
    }
}

/// The reply with one enclosing markdown fence removed.
fn unfence(raw: &str) -> &str {
    let t = raw.trim();
    let Some(rest) = t.strip_prefix("```") else {
        return t;
    };
    let body = rest.split_once('\n').map_or("", |(_, b)| b);
    body.trim_end().strip_suffix("```").unwrap_or(body).trim()
}

fn parse_object<T: for<'de> Deserialize<'de>>(raw: &str) -> Result<T, FeedbackError> {
    serde_json::from_str(unfence(raw)).map_err(|e| FeedbackError::Parse(e.to_string()))
}

/// Parses a four-key feedback reply.
pub fn parse_feedback(raw: &str) -> Result<FeedbackBundle, FeedbackError> {
    let b: FeedbackBundle = parse_object(raw)?;
    if b.error.is_none() {
        return Err(FeedbackError::Parse("missing Type and Message".into()));
    }
    b.validate()?;
    Ok(b)
}

/// Parses a two-key cold-start reply.
pub fn parse_cold_start(raw: &str) -> Result<FeedbackBundle, FeedbackError> {
    let b: FeedbackBundle = parse_object(raw)?;
    if b.error.is_some() {
        return Err(FeedbackError::Parse(
            "cold-start reply must not carry Type or Message".into(),
        ));
    }
    b.validate()?;
    Ok(b)
}

/// Lean text of a partial proof: the header, then one indented tactic per line.
pub fn render_lean_proof(theorem: &TheoremSpec, tactics: &[String]) -> String {
    let mut s = theorem.statement_fl.trim_end().to_string();
    for t in tactics {
        s.push_str("\n  ");
        s.push_str(t.trim());
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackPrompt {
    pub prompt: PromptBundle,
    /// The search found no next step and the fallback marker was used.
    pub next_step_missing: bool,
}

/// `lean_proof` ends with the erroring step, which fills `{last_line}`.
pub fn build_feedback_prompt(
    lean_proof: &str,
    error: &str,
    next_step: Option<&str>,
    knobs: &Knobs,
) -> Result<FeedbackPrompt, FeedbackError> {
    let last_line = lean_proof
        .lines()
        .rev()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .unwrap_or_default();
    let values = BTreeMap::from([
        ("lean_proof", lean_proof.to_string()),
        ("last_line", last_line.to_string()),
        ("error", error.to_string()),
        ("next_step", next_step.unwrap_or(NO_NEXT_STEP).to_string()),
    ]);
    Ok(FeedbackPrompt {
        prompt: PromptBundle::new(
            FEEDBACK_SYSTEM,
            render(FEEDBACK_USER, &values)?,
            knobs.clone(),
        ),
        next_step_missing: next_step.is_none(),
    })
}

pub fn generate_feedback<L: LlmBackend + ?Sized>(
    lean_proof: &str,
    error: &str,
    next_step: Option<&str>,
    knobs: &Knobs,
    llm: &mut L,
) -> Result<FeedbackBundle, FeedbackError> {
    let p = build_feedback_prompt(lean_proof, error, next_step, knobs)?;
    parse_feedback(&llm.complete(&p.prompt)?)
}

pub fn build_cold_start_prompt(
    theorem: &TheoremSpec,
    next_step: &str,
    knobs: &Knobs,
) -> Result<PromptBundle, FeedbackError> {
    let values = BTreeMap::from([
        ("theorem", theorem.statement_fl.trim_end().to_string()),
        ("next_step", next_step.to_string()),
    ]);
    Ok(PromptBundle::new(
        FEEDBACK_SYSTEM,
        render(COLD_START_USER, &values)?,
        knobs.clone(),
    ))
}

/// Hint request partway through a proof that has no error: same reply
/// format as cold start, with the partial proof in place of the bare theorem.
pub fn build_hint_prompt(
    lean_proof: &str,
    next_step: Option<&str>,
    knobs: &Knobs,
) -> Result<FeedbackPrompt, FeedbackError> {
    let values = BTreeMap::from([
        ("lean_proof", lean_proof.to_string()),
        ("next_step", next_step.unwrap_or(NO_NEXT_STEP).to_string()),
    ]);
    Ok(FeedbackPrompt {
        prompt: PromptBundle::new(FEEDBACK_SYSTEM, render(HINT_USER, &values)?, knobs.clone()),
        next_step_missing: next_step.is_none(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColdStart {
    /// First tactic of the staff solution.
    pub next_step: String,
    pub bundle: FeedbackBundle,
}

/// Hint for a student who has written nothing: the next step is the staff
/// solution's first tactic, and only question and informalization are produced.
pub fn cold_start_feedback<L: LlmBackend + ?Sized>(
    theorem: &TheoremSpec,
    staff: Option<&AnnotatedProof>,
    knobs: &Knobs,
    llm: &mut L,
) -> Result<ColdStart, FeedbackError> {
    let staff = staff.ok_or_else(|| FeedbackError::NoStaffSolution(theorem.name.clone()))?;
    let next_step = staff
        .steps
        .first()
        .map(|s| s.tactic.clone())
        .ok_or_else(|| FeedbackError::NoStaffSolution(theorem.name.clone()))?;
    let prompt = build_cold_start_prompt(theorem, &next_step, knobs)?;
    let bundle = parse_cold_start(&llm.complete(&prompt)?)?;
    Ok(ColdStart { next_step, bundle })
}

/// Reply format of the baseline prompt, which differs from the main one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineFeedback {
    #[serde(rename = "Error_Message")]
    pub error_message: String,
    #[serde(rename = "Next_Step")]
    pub next_step: String,
    #[serde(rename = "Question")]
    pub question: String,
}

pub fn build_baseline_prompt(
    theorem_nl: &str,
    proof_nl: &[String],
    knobs: &Knobs,
) -> Result<PromptBundle, FeedbackError> {
    let values = BTreeMap::from([
        ("theorem", theorem_nl.to_string()),
        ("proof", proof_nl.join("\n")),
    ]);
    Ok(PromptBundle::new(
        BASELINE_SYSTEM,
        render(BASELINE_USER, &values)?,
        knobs.clone(),
    ))
}

pub fn parse_baseline_feedback(raw: &str) -> Result<BaselineFeedback, FeedbackError> {
    let b: BaselineFeedback = parse_object(raw)?;
    for (name, v) in [
        ("Error_Message", &b.error_message),
        ("Next_Step", &b.next_step),
        ("Question", &b.question),
    ] {
        if v.trim().is_empty() {
            return Err(FeedbackError::EmptyField(name));
        }
    }
    Ok(b)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeakFinding {
    pub field: &'static str,
    pub token: String,
}

/// Tactic keywords that are flagged when followed by `[` or whitespace.
const TACTIC_MARKERS: &[(&str, &str)] =
    &[("rw", "["), ("rw", " ["), ("intro", " "), ("apply", " ")];

/// Lean syntax in the student-facing Message and Question. Informalization
/// is exempt because it reveals the next step by design.
pub fn leakage_lint(bundle: &FeedbackBundle, dicts: &[&PremiseDictionary]) -> Vec<LeakFinding> {
    let mut out = Vec::new();
    let mut fields: Vec<(&'static str, &str)> = Vec::new();
    if let Some(e) = &bundle.error {
        fields.push(("Message", &e.message));
    }
    fields.push(("Question", &bundle.question));
    for (field, text) in fields {
        let tokens = tokenize(text);
        for (i, tok) in tokens.iter().enumerate() {
            let Token::Ident(id) = tok else { continue };
            if dicts
                .iter()
                .any(|d| d.kind == crate::dataset::PremiseKind::Theorem && d.contains(id))
            {
                out.push(LeakFinding {
                    field,
                    token: id.to_string(),
                });
                continue;
            }
            let rest: String = tokens[i + 1..].iter().take(2).map(|t| t.as_str()).collect();
            if let Some((kw, follow)) = TACTIC_MARKERS
                .iter()
                .find(|(kw, follow)| kw == id && rest.starts_with(follow))
            {
                out.push(LeakFinding {
                    field,
                    token: format!("{kw}{follow}"),
                });
            }
        }
    }
    out
}

pub const RUBRIC_AXES: [&str; 4] = ["Accuracy", "Relevance", "Readability", "Answer Leakage"];

/// Blank rating sheet: one row per (proof, feedback type, axis) with an
/// empty score column for human raters.
pub fn scoring_sheet(rows: &[(String, FeedbackBundle)]) -> Result<String, FeedbackError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| FeedbackError::Parse(e.to_string());
    w.write_record(["proof", "feedback_type", "feedback", "axis", "score"])
        .map_err(csv_err)?;
    for (proof, b) in rows {
        let mut parts: Vec<(&str, String)> = Vec::new();
        if let Some(e) = &b.error {
            parts.push(("error", format!("{}: {}", e.type_text, e.message)));
        }
        parts.push(("question", b.question.clone()));
        parts.push(("next_step", b.informalization.clone()));
        for (kind, text) in &parts {
            for axis in RUBRIC_AXES {
                w.write_record([proof.as_str(), kind, text.as_str(), axis, ""])
                    .map_err(csv_err)?;
            }
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| FeedbackError::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::PremiseKind;

    const EXAMPLE: &str = r#"{"Type": "Incorrect simplification", "Message": "The RHS of your equation, a + (b + succ d), cannot be simplified with your applied strategy.", "Question": "Do you know of a theorem that can perform this simplification?", "Informalization": "The next step is to rewrite a + (b + succ d) as (a + b) + succ d."}"#;

    #[test]
    fn prompt_example_parses() {
        let b = parse_feedback(EXAMPLE).unwrap();
        assert_eq!(
            b.error_type(),
            ErrorCategory::IncorrectSimplificationOrExpansion
        );
        assert_eq!(
            b.error.as_ref().unwrap().type_text,
            "Incorrect simplification"
        );
    }

    #[test]
    fn fences_and_missing_keys() {
        let fenced = format!("```json\n{EXAMPLE}\n```");
        assert_eq!(
            parse_feedback(&fenced).unwrap(),
            parse_feedback(EXAMPLE).unwrap()
        );
        let missing = r#"{"Type": "Other", "Message": "m", "Informalization": "i"}"#;
        assert!(matches!(
            parse_feedback(missing),
            Err(FeedbackError::Parse(_))
        ));
        let extra =
            r#"{"Type": "Other", "Message": "m", "Question": "q", "Informalization": "i", "X": 1}"#;
        assert!(parse_feedback(extra).is_err());
    }

    #[test]
    fn fuzzy_categories() {
        use ErrorCategory::*;
        for c in ErrorCategory::ALL {
            assert_eq!(ErrorCategory::from_fuzzy(c.label()), c);
            assert_eq!(ErrorCategory::from_fuzzy(&c.label().to_uppercase()), c);
        }
        assert_eq!(
            ErrorCategory::from_fuzzy("4. Failing to apply the inductive hypothesis"),
            FailingToApplyInductiveHypothesis
        );
        assert_eq!(
            ErrorCategory::from_fuzzy("careless mistake!"),
            CarelessCalculation
        );
        assert_eq!(
            ErrorCategory::from_fuzzy("wrong base-case"),
            IncorrectBaseCase
        );
        assert_eq!(ErrorCategory::from_fuzzy("something else"), Other);
    }

    #[test]
    fn missing_next_step_marker() {
        let p = build_feedback_prompt(
            "theorem t : 0 = 0 := by\n  rfl",
            "e",
            None,
            &Knobs::default(),
        )
        .unwrap();
        assert!(p.next_step_missing);
        assert!(p.prompt.user.contains(NO_NEXT_STEP));
        assert!(p.prompt.user.contains("due to the last step rfl:"));
    }

    #[test]
    fn lint() {
        let mut d = PremiseDictionary::new(PremiseKind::Theorem);
        d.entries.insert("add_comm".into(), "a + b = b + a".into());
        let mut b = parse_feedback(EXAMPLE).unwrap();
        assert!(leakage_lint(&b, &[&d]).is_empty());
        b.question = "Can you use add_comm here?".into();
        assert_eq!(leakage_lint(&b, &[&d]).len(), 1);
        b.question = "Try rw [h] or intro x".into();
        let f = leakage_lint(&b, &[&d]);
        assert_eq!(f.len(), 2, "{f:?}");
        b.question = "Can you apply the hypothesis?".into();
        assert_eq!(leakage_lint(&b, &[&d]).len(), 1);
        b.question = "What do you know?".into();
        b.informalization = "rw [add_comm]".into();
        assert!(leakage_lint(&b, &[&d]).is_empty());
    }

    #[test]
    fn baseline_keys() {
        let raw = r#"{"Error_Message": "e", "Next_Step": "n", "Question": "q"}"#;
        assert_eq!(parse_baseline_feedback(raw).unwrap().next_step, "n");
        assert!(parse_baseline_feedback(EXAMPLE).is_err());
    }

    #[test]
    fn sheet_rows() {
        let b = parse_feedback(EXAMPLE).unwrap();
        let csv = scoring_sheet(&[("p1".into(), b)]).unwrap();
        assert_eq!(csv.lines().count(), 1 + 3 * 4);
        assert!(csv.lines().nth(1).unwrap().ends_with(",Accuracy,"));
    }
}
